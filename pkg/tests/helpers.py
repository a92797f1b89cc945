"""Shared model generators for the test suite."""

import numpy as np

from curlflux.liouville import DissipationChannel, build_liouvillian


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (a + a.conj().T)


def random_density_matrix(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_rate_matrix(rng, dim, low=0.05, high=1.0):
    """Random positive off-diagonal rates, columns summing to zero."""
    l = rng.uniform(low, high, size=(dim, dim))
    np.fill_diagonal(l, 0.0)
    np.fill_diagonal(l, -l.sum(axis=0))
    return l


def random_lindblad_model(rng, dim=3, coupling=0.05, gamma=0.1):
    """Hermitian H with weak off-diagonals plus ladder channels.

    Produces generators with population-coherence coupling (K != 0) and a
    unique steady state.
    """
    energies = np.sort(rng.uniform(0.5, 2.0, size=dim))
    h = np.diag(energies).astype(complex)
    h += coupling * (random_hermitian(rng, dim) - np.diag(np.diag(random_hermitian(rng, dim))))
    h = 0.5 * (h + h.conj().T)
    channels = []
    for i in range(dim - 1):
        raising = np.zeros((dim, dim), dtype=complex)
        raising[i + 1, i] = 1.0
        channels.append(DissipationChannel(
            raising,
            gamma * rng.uniform(0.2, 1.0),
            gamma * rng.uniform(0.2, 1.0),
            float(energies[i + 1] - energies[i]),
        ))
    return h, channels, build_liouvillian(h, channels)


def thermal_two_level(omega0=1.0, temperature=0.3, gamma=0.02):
    """Detailed-balanced two-level model; returns (M, V, populations)."""
    h = np.diag([0.0, omega0]).astype(complex)
    raising = np.zeros((2, 2), dtype=complex)
    raising[1, 0] = 1.0
    up = gamma * np.exp(-omega0 / temperature)
    channel = DissipationChannel(raising, up, gamma, omega0)
    m = build_liouvillian(h, [channel])
    v = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    p_e = up / (up + gamma)
    return m, v, np.array([1.0 - p_e, p_e])
