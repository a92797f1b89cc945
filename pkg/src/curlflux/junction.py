"""Three-level molecular junction: two coupled electronic levels exchanging
electrons with two biased electrodes.

The single-electron manifold {g, e1, e2} evolves under

    H = w_g |g><g| + w_1 |e1><e1| + w_2 |e2><e2| - Delta (|e1><e2| + h.c.)

with electrode j filling/emptying level e_j at rates Gamma * fbar_j and
Gamma * (1 - fbar_j), where fbar_j is the Fermi factor of electrode j at
the transition energy w_{e_j g}.  The chemical-potential bias drives a
single loop current g -> e1 -> e2 -> g whose magnitude equals the curl
flux of the reduced population dynamics, and the optical transmission of
a weak dipole probe splits into a detailed-balance part and a
flux-proportional part.

Note the decay-rate pairing of the ground-excited coherences: rho_{g,e1}
decays with (1 + fbar_2) and rho_{g,e2} with (1 + fbar_1).  This crossed
pairing is what the three-level master equation produces (the same-index
Fermi factors cancel against their complements); `strict_paper_rates =
False` swaps the pairing for sensitivity studies.
"""

from dataclasses import dataclass

import numpy as np

from .flux import FluxDecomposition, SplitOperators, curl_flux, split_operators
from .liouville import (
    DissipationChannel,
    HilbertBasis,
    SuperoperatorBlocks,
    build_liouvillian,
    index_pairs,
    partition,
)
from .reduction import (
    SteadyState,
    coherence_map,
    effective_rate_matrix,
    steady_state,
)
from .response import Probe, response_split

__all__ = [
    "JunctionParams",
    "JunctionDerived",
    "JunctionModel",
    "fermi_dirac",
    "hybridized_parameters",
    "ge_generator",
    "analytic_propagator_ge",
    "hybridized_frequency_propagator",
    "build_junction",
    "flux_magnitude",
    "closed_form_flux_response",
    "transmission",
    "dipole_operator",
]

JUNCTION_LABELS = ("g", "e1", "e2")


@dataclass(frozen=True)
class JunctionParams:
    """Physical parameters of the junction (hbar = k_B = 1).

    `coulomb_u` is the blockade energy of the two-electron state; it is
    accepted for completeness but plays no role once the model is
    restricted to the single-electron manifold.
    """

    mu_1: float
    mu_2: float
    omega_1: float = 1.06
    omega_2: float = 0.94
    omega_g: float = 0.0
    delta: float = 0.01
    gamma: float = 0.02
    t_1: float = 0.3
    t_2: float = 0.3
    dipole: float = 1.0
    coulomb_u: float = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("electrode exchange rate gamma must be positive")
        if self.t_1 <= 0 or self.t_2 <= 0:
            raise ValueError("electrode temperatures must be positive")
        if not self.omega_1 > self.omega_2:
            raise ValueError("convention omega_1 > omega_2 violated")

    @property
    def omega_e1g(self):
        return self.omega_1 - self.omega_g

    @property
    def omega_e2g(self):
        return self.omega_2 - self.omega_g

    @property
    def omega_e1e2(self):
        return self.omega_1 - self.omega_2


@dataclass(frozen=True)
class JunctionDerived:
    """Derived quantities of the hybridized ground-excited coherence pair."""

    fbar_1: float
    fbar_2: float
    omega_plus: float
    omega_minus: float
    gamma_plus: float
    gamma_minus: float
    theta: float


@dataclass(frozen=True)
class JunctionModel:
    """Everything derived from one parameter set."""

    params: JunctionParams
    derived: JunctionDerived
    basis: HilbertBasis
    h_eff: np.ndarray
    channels: tuple
    m: np.ndarray
    blocks: SuperoperatorBlocks
    k_map: np.ndarray
    l_matrix: np.ndarray
    rho_ss: SteadyState
    populations: np.ndarray
    flux: FluxDecomposition
    split: SplitOperators
    strict_paper_rates: bool = True

    @property
    def flux_j(self):
        """One-sided loop flux e1 -> e2 (zero when the loop runs backwards)."""
        return float(self.flux.c[1, 2])

    @property
    def coherence_e1e2(self):
        pairs = list(index_pairs(3))
        return complex(self.rho_ss.vector[pairs.index((1, 2))])


def fermi_dirac(omega, mu, temperature):
    """Electrode occupation 1 / (exp((omega - mu) / T) + 1), computed stably."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    x = (omega - mu) / temperature
    if x >= 0:
        e = np.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (np.exp(x) + 1.0)


def _fbars(params):
    f1 = fermi_dirac(params.omega_e1g, params.mu_1, params.t_1)
    f2 = fermi_dirac(params.omega_e2g, params.mu_2, params.t_2)
    return f1, f2


def hybridized_parameters(params, strict_paper_rates=True):
    """Frequencies, decay rates and mixing angle of the coherence pair.

    omega_pm = (w_e1g + w_e2g)/2 +- sqrt(w_e1e2**2 + 4 Delta**2)/2 are
    exact; gamma_pm carry the decay asymmetry projected onto the
    hybridized modes (first order in Gamma (fbar_1 - fbar_2)):

        gamma_pm = Gamma/4 * (2 + f1 + f2 -+ cos(2 theta) (f1 - f2))

    with sin(2 theta) = 2 Delta / sqrt(w_e1e2**2 + 4 Delta**2).  With the
    swapped rate pairing the sign of the cos(2 theta) correction flips.
    """
    f1, f2 = _fbars(params)
    dw = params.omega_e1e2
    root = np.hypot(dw, 2.0 * params.delta)
    mid = 0.5 * (params.omega_e1g + params.omega_e2g)
    cos2t = dw / root
    theta = 0.5 * np.arctan2(2.0 * params.delta, dw)
    base = params.gamma * (2.0 + f1 + f2) / 4.0
    corr = params.gamma * cos2t * (f1 - f2) / 4.0
    sign = -1.0 if strict_paper_rates else 1.0
    return JunctionDerived(
        fbar_1=f1,
        fbar_2=f2,
        omega_plus=mid + 0.5 * root,
        omega_minus=mid - 0.5 * root,
        gamma_plus=base + sign * corr,
        gamma_minus=base - sign * corr,
        theta=float(theta),
    )


def ge_generator(params, strict_paper_rates=True):
    """Evolution matrix of the coherence pair (rho_{g,e1}, rho_{g,e2})."""
    f1, f2 = _fbars(params)
    a, b = (f2, f1) if strict_paper_rates else (f1, f2)
    g = params.gamma
    return np.array(
        [
            [1j * params.omega_e1g - 0.5 * g * (1.0 + a), -1j * params.delta],
            [-1j * params.delta, 1j * params.omega_e2g - 0.5 * g * (1.0 + b)],
        ]
    )


def analytic_propagator_ge(params, t, strict_paper_rates=True):
    """Closed-form propagator of the (rho_{g,e1}, rho_{g,e2}) pair.

    Built from the hybridized frequencies and decay rates with the real
    mixing weights of the Delta-coupling.  Exact when fbar_1 == fbar_2;
    otherwise correct to first order in Gamma (fbar_1 - fbar_2) because
    the decay asymmetry also tilts the eigenvectors, which this form
    neglects.  The conjugate block propagates (rho_{e1,g}, rho_{e2,g}).
    """
    if t < 0:
        raise ValueError("propagator defined for t >= 0")
    der = hybridized_parameters(params, strict_paper_rates)
    dw = params.omega_e1e2
    root = np.hypot(dw, 2.0 * params.delta)
    cos2t = dw / root
    e_minus = np.exp((1j * der.omega_minus - der.gamma_minus) * t)
    e_plus = np.exp((1j * der.omega_plus - der.gamma_plus) * t)
    off = (params.delta / root) * (e_minus - e_plus)
    return np.array(
        [
            [0.5 * ((1 - cos2t) * e_minus + (1 + cos2t) * e_plus), off],
            [off, 0.5 * ((1 + cos2t) * e_minus + (1 - cos2t) * e_plus)],
        ]
    )


def hybridized_frequency_propagator(params, omega, strict_paper_rates=True):
    """Frequency-domain propagator of the (rho_{e1,g}, rho_{e2,g}) pair in
    the hybridized-mode form.

    Partial fractions with poles at i(w - omega_pm) = gamma_pm and the
    real sin/cos mixing weights; same first-order accuracy as
    :func:`analytic_propagator_ge`.
    """
    der = hybridized_parameters(params, strict_paper_rates)
    two_theta = 2.0 * der.theta
    s2 = np.sin(two_theta)
    sin_sq = 0.5 * (1.0 - np.cos(two_theta))
    cos_sq = 0.5 * (1.0 + np.cos(two_theta))
    pole_m = 1.0 / (1j * (omega - der.omega_minus) - der.gamma_minus)
    pole_p = 1.0 / (1j * (omega - der.omega_plus) - der.gamma_plus)
    diag_1 = -(sin_sq * pole_m + cos_sq * pole_p)
    diag_2 = -(cos_sq * pole_m + sin_sq * pole_p)
    off = -0.5 * s2 * (pole_m - pole_p)
    return np.array([[diag_1, off], [off, diag_2]])


def dipole_operator(params):
    """Transition dipole d (|e1><g| + |e2><g|) + h.c. with equal elements."""
    v = np.zeros((3, 3), dtype=complex)
    v[1, 0] = v[2, 0] = params.dipole
    v[0, 1] = v[0, 2] = params.dipole
    return v


def build_junction(params, strict_paper_rates=True):
    """Construct the full model: generator, blocks, reduced quantities,
    steady state and flux decomposition.

    With `strict_paper_rates = False` the decay constants of the
    ground-excited coherence pairs are swapped (counterfactual variant
    for sensitivity checks); populations, the excited-state coherence
    sector and hence K, L and the steady state are unaffected.
    """
    basis = HilbertBasis(JUNCTION_LABELS)
    h_eff = np.diag([params.omega_g, params.omega_1, params.omega_2]).astype(complex)
    h_eff[1, 2] = h_eff[2, 1] = -params.delta
    f1, f2 = _fbars(params)
    raise_1 = np.zeros((3, 3), dtype=complex)
    raise_1[1, 0] = 1.0
    raise_2 = np.zeros((3, 3), dtype=complex)
    raise_2[2, 0] = 1.0
    channels = (
        DissipationChannel(raise_1, params.gamma * f1, params.gamma * (1 - f1),
                           params.omega_e1g),
        DissipationChannel(raise_2, params.gamma * f2, params.gamma * (1 - f2),
                           params.omega_e2g),
    )
    m = build_liouvillian(h_eff, channels)
    if not strict_paper_rates:
        pairs = list(index_pairs(3))
        ge1, ge2 = pairs.index((0, 1)), pairs.index((0, 2))
        e1g, e2g = pairs.index((1, 0)), pairs.index((2, 0))
        swap = 0.5 * params.gamma * (f1 - f2)
        for i, sgn in ((ge1, -1.0), (ge2, 1.0), (e1g, -1.0), (e2g, 1.0)):
            m[i, i] += sgn * swap
    blocks = partition(m)
    k_map = coherence_map(blocks)
    l_matrix = effective_rate_matrix(blocks)
    rho_ss = steady_state(m)
    populations = rho_ss.vector[:3].real
    decomposition = curl_flux(l_matrix, populations)
    split = split_operators(l_matrix, populations, decomposition)
    return JunctionModel(
        params=params,
        derived=hybridized_parameters(params, strict_paper_rates),
        basis=basis,
        h_eff=h_eff,
        channels=channels,
        m=m,
        blocks=blocks,
        k_map=k_map,
        l_matrix=l_matrix,
        rho_ss=rho_ss,
        populations=populations,
        flux=decomposition,
        split=split,
        strict_paper_rates=strict_paper_rates,
    )


def flux_magnitude(params_or_model):
    """Loop flux J = t[e1 -> e2] - min(t[e1 -> e2], t[e2 -> e1]).

    Equals the weight of the single loop g -> e1 -> e2 -> g when the
    bias drives the cycle forward, and zero when the residual cycle runs
    backwards.
    """
    model = params_or_model
    if isinstance(model, JunctionParams):
        model = build_junction(model)
    return model.flux_j


def _ne_coefficients(model):
    """Population/coherence weight combinations entering the closed-form
    flux contribution to the response (components of V_- W V_ss rho_p up
    to the common factor d * J)."""
    pairs = list(index_pairs(3))
    i12, i21 = pairs.index((1, 2)) - 3, pairs.index((2, 1)) - 3
    l_diag = np.diag(model.l_matrix).real
    k = model.k_map
    coeff_1 = 1.0 / l_diag[0] - (1.0 + k[i12, 1]) / l_diag[1] - k[i12, 2] / l_diag[2]
    coeff_2 = 1.0 / l_diag[0] - k[i21, 1] / l_diag[1] - (1.0 + k[i21, 2]) / l_diag[2]
    return coeff_1, coeff_2


def closed_form_flux_response(model, omegas):
    """Flux-proportional transmission from the closed form.

    T_ne(w) = d**2 * J * Re[ Gplus(w) - conj(Gplus(-w)) ], where Gplus
    combines the two coefficient combinations with the column sums of
    the exact resolvent of the (rho_{e1,g}, rho_{e2,g}) pair, and J is
    the one-sided loop flux.  The second term is the counter-rotating
    mirror image.
    """
    pairs = list(index_pairs(3))
    idx = [pairs.index((1, 0)), pairs.index((2, 0))]
    a_eg = model.m[np.ix_(idx, idx)]
    c1, c2 = _ne_coefficients(model)
    j = model.flux_j
    d2 = model.params.dipole ** 2
    out = np.empty(np.asarray(omegas).size)
    eye = np.eye(2)
    for i, w in enumerate(np.asarray(omegas, dtype=float)):
        gp = -np.linalg.inv(a_eg + 1j * w * eye)
        gm = -np.linalg.inv(a_eg - 1j * w * eye)
        g_plus = c1 * (gp[0, 0] + gp[1, 0]) + c2 * (gp[1, 1] + gp[0, 1])
        g_minus = c1 * (gm[0, 0] + gm[1, 0]) + c2 * (gm[1, 1] + gm[0, 1])
        out[i] = d2 * j * (g_plus - np.conj(g_minus)).real
    return out


def transmission(params, omegas, strict_paper_rates=True, epsilon=None):
    """Transmission spectrum of the junction under a weak dipole probe.

    Runs the generic response pipeline with observable = coupling =
    dipole, then evaluates the flux term independently from its closed
    form.

    Returns
    -------
    (ResponseSpectrum, ndarray, JunctionModel)
        The spectrum (with exact equilibrium/nonequilibrium split), the
        closed-form flux transmission T_ne(w), and the model.
    """
    model = build_junction(params, strict_paper_rates)
    probe = Probe(observable=dipole_operator(params),
                  coupling=dipole_operator(params))
    spectrum = response_split(
        probe, model.blocks, model.l_matrix, model.rho_ss.vector,
        model.split, model.k_map, omegas, epsilon=epsilon,
    )
    t_ne = closed_form_flux_response(model, omegas)
    return spectrum, t_ne, model
