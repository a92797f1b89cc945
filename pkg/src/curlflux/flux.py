"""Curl-flux decomposition of nonequilibrium steady states.

The stationary one-way currents t[m, n] = L[n, m] * p[m] (probability
per unit time flowing from state m into state n) split uniquely into a
detailed-balance part sym[m, n] = min(t[m, n], t[n, m]) and a
non-negative, unidirectional remainder c = t - sym, the curl flux.  At
stationarity c is divergence free and therefore decomposes into a
superposition of directed loop fluxes; the loops are extracted by
deterministic iterative cycle cancellation.

The diagonal operators derived from the decomposition,

    s_d[n] = sum_k min(L[n,k] p[k] / p[n], L[k,n]) / L[n,n]
    v_ss[n] = sum_k c[k, n] / (L[n,n] p[n])

satisfy s_d + v_ss = -1 entrywise and enter the equilibrium /
nonequilibrium split of the linear response.  v_ss vanishes exactly when
detailed balance holds.
"""

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FluxDecomposition",
    "SplitOperators",
    "NonStationaryError",
    "curl_flux",
    "loop_decomposition",
    "reconstruct_flux",
    "split_operators",
    "is_detailed_balanced",
    "render_flux_report",
]

# flux entries below this magnitude are treated as round-off during loop
# extraction, so no spurious cycles are produced
FLUX_CLAMP = 1e-14


class NonStationaryError(ValueError):
    """Input populations are not stationary under the given rate matrix."""


@dataclass(frozen=True)
class FluxDecomposition:
    """Stationary current matrix and its curl/symmetric split.

    All matrices are (d, d) real with the convention that entry [m, n]
    is the flow from state m into state n. `loops` is a list of
    (cycle, weight) pairs, each cycle a tuple of state indices traversed
    in flow direction (closing edge back to the first node implied).
    """

    t_rate: np.ndarray
    c: np.ndarray
    sym: np.ndarray
    loops: tuple


@dataclass(frozen=True)
class SplitOperators:
    """Diagonals of the detailed-balance and flux parts of the identity."""

    s_d: np.ndarray
    v_ss: np.ndarray


def _real_rate_matrix(l_matrix, imag_tol=1e-10):
    l_matrix = np.asarray(l_matrix)
    if np.iscomplexobj(l_matrix):
        worst = np.abs(l_matrix.imag).max()
        if worst > imag_tol * max(1.0, np.abs(l_matrix.real).max()):
            raise ValueError(
                "rate matrix has non-negligible imaginary parts (max %.3e)" % worst
            )
        l_matrix = l_matrix.real
    return l_matrix


def curl_flux(l_matrix, populations, stationary_tol=1e-10):
    """Decompose the stationary currents of (L, p) into curl + symmetric parts.

    Parameters
    ----------
    l_matrix : (d, d) array_like
        Population rate matrix, columns summing to zero; entry [n, m] is
        the rate from state m to state n.
    populations : (d,) array_like
        Stationary populations of `l_matrix`, strictly positive.
    stationary_tol : float
        Maximum allowed ||L p||_inf; larger residuals raise
        NonStationaryError since the divergence-free property would fail.

    Returns
    -------
    FluxDecomposition
    """
    l_matrix = _real_rate_matrix(l_matrix)
    p = np.asarray(populations, dtype=float)
    d = p.size
    if l_matrix.shape != (d, d):
        raise ValueError("rate matrix / population shape mismatch")
    if np.any(p <= 0):
        raise ValueError("populations must be strictly positive")
    resid = np.abs(l_matrix @ p).max()
    if resid > stationary_tol:
        raise NonStationaryError(
            "populations are not stationary: ||L p||_inf = %.3e > %.3e"
            % (resid, stationary_tol)
        )
    t = l_matrix.T * p[:, None]  # t[m, n] = L[n, m] p[m]
    np.fill_diagonal(t, 0.0)
    sym = np.minimum(t, t.T)
    np.fill_diagonal(sym, 0.0)
    c = t - sym
    loops = loop_decomposition(c)
    return FluxDecomposition(t_rate=t, c=c, sym=sym, loops=tuple(loops))


def loop_decomposition(c, residual_tol=1e-12):
    """Decompose a divergence-free flux matrix into directed loops.

    Repeatedly finds a directed cycle in the support of the flux (depth
    first from the lowest-indexed node with outgoing flux, always walking
    to the lowest-indexed successor), subtracts the minimum edge weight
    along the cycle, and records (cycle, weight).  Deterministic.

    Parameters
    ----------
    c : (d, d) array_like
        Non-negative flux with c[m, n] * c[n, m] == 0 and equal in/out
        flow at every node.  Entries below FLUX_CLAMP are ignored.
    residual_tol : float
        Allowed leftover flux (relative to the largest input entry) once
        no cycles remain; anything larger signals a violated
        precondition.

    Returns
    -------
    list of (cycle, weight)
        Cycles as tuples of node indices, rotated so the smallest index
        comes first; weights strictly positive.
    """
    work = np.array(c, dtype=float, copy=True)
    d = work.shape[0]
    scale = max(work.max(initial=0.0), 1.0)
    work[work < FLUX_CLAMP] = 0.0
    loops = []
    while True:
        out_nodes = np.nonzero(work.sum(axis=1) > 0)[0]
        if out_nodes.size == 0:
            break
        cycle = _find_cycle(work, int(out_nodes[0]))
        if cycle is None:
            break
        edges = list(zip(cycle, cycle[1:] + cycle[:1]))
        weight = min(work[i, j] for i, j in edges)
        for i, j in edges:
            work[i, j] -= weight
            if work[i, j] < FLUX_CLAMP:
                work[i, j] = 0.0
        k = cycle.index(min(cycle))
        loops.append((tuple(cycle[k:] + cycle[:k]), float(weight)))
        if len(loops) > d * d:
            raise RuntimeError("loop extraction failed to terminate")
    leftover = np.abs(work).max(initial=0.0)
    if leftover > residual_tol * scale:
        raise ValueError(
            "flux is not a superposition of loops: residual %.3e remains "
            "(input likely not divergence free)" % leftover
        )
    return loops


def _find_cycle(w, start):
    """Walk the support graph until a node repeats; return that cycle."""
    path = [start]
    seen = {start: 0}
    node = start
    while True:
        succ = np.nonzero(w[node] > 0)[0]
        if succ.size == 0:
            return None
        node = int(succ[0])
        if node in seen:
            return path[seen[node]:]
        seen[node] = len(path)
        path.append(node)


def reconstruct_flux(loops, dim):
    """Sum loop fluxes back into a (dim, dim) matrix (testing aid)."""
    c = np.zeros((dim, dim))
    for cycle, weight in loops:
        for i, j in zip(cycle, cycle[1:] + cycle[:1]):
            c[i, j] += weight
    return c


def split_operators(l_matrix, populations, decomposition):
    """Diagonal operators splitting the steady state into balanced and
    flux-carrying parts.

    Returns
    -------
    SplitOperators
        With the normalization L[n,n] p[n] = -(sum_k c[k,n] + sym-in),
        the entries satisfy s_d + v_ss = -1 exactly at stationarity.

    Raises
    ------
    ValueError
        If any population or diagonal rate vanishes.
    """
    l_matrix = _real_rate_matrix(l_matrix)
    p = np.asarray(populations, dtype=float)
    d = p.size
    diag = np.diag(l_matrix)
    if np.any(p == 0) or np.any(diag == 0):
        raise ValueError("singular diagonal: zero population or zero exit rate")
    c = decomposition.c
    s_d = np.empty(d)
    v_ss = np.empty(d)
    for n in range(d):
        ks = [k for k in range(d) if k != n]
        s_d[n] = (
            sum(min(l_matrix[n, k] * p[k] / p[n], l_matrix[k, n]) for k in ks)
            / diag[n]
        )
        v_ss[n] = sum(c[k, n] for k in ks) / (diag[n] * p[n])
    return SplitOperators(s_d=s_d, v_ss=v_ss)


def is_detailed_balanced(l_matrix, populations, tol=1e-12):
    """Check pairwise balance of the stationary currents.

    Returns
    -------
    (bool, float)
        Verdict and the maximum violation max_mn |t[m,n] - t[n,m]|.
    """
    l_matrix = _real_rate_matrix(l_matrix)
    p = np.asarray(populations, dtype=float)
    t = l_matrix.T * p[:, None]
    np.fill_diagonal(t, 0.0)
    violation = float(np.abs(t - t.T).max())
    return violation <= tol, violation


def render_flux_report(decomposition, splitops, labels=None, extra=None):
    """Serialize a flux decomposition as a deterministic JSON document.

    Parameters
    ----------
    decomposition : FluxDecomposition
    splitops : SplitOperators
    labels : sequence of str, optional
        State names used for loops; indices are used when omitted.
    extra : dict, optional
        Additional top-level entries (e.g. model-specific scalars).
    """
    d = decomposition.c.shape[0]
    if labels is None:
        labels = [str(i) for i in range(d)]
    labels = list(labels)
    balanced = bool(np.all(decomposition.c <= FLUX_CLAMP))
    violation = float(np.abs(decomposition.t_rate - decomposition.t_rate.T).max())
    report = {
        "states": labels,
        "t_rate": decomposition.t_rate.tolist(),
        "curl_flux": decomposition.c.tolist(),
        "symmetric_part": decomposition.sym.tolist(),
        "loops": [
            {"cycle": [labels[i] for i in cyc], "weight": w}
            for cyc, w in decomposition.loops
        ],
        "s_d": splitops.s_d.tolist(),
        "v_ss": splitops.v_ss.tolist(),
        "detailed_balance": balanced,
        "max_violation": violation,
    }
    if extra:
        report.update(extra)
    return json.dumps(report, indent=2, sort_keys=True)
