"""Random Hamiltonian generators for interacting-fermion networks.

Provides the plain embedded Gaussian ensemble (rank-k interactions with
i.i.d. Gaussian couplings), its centrosymmetric variant, two structured
block perturbations that break parity or centrosymmetry, and square-root
mixing between any pair of samples.

All samplers are pure functions of (basis, parameters, seed): passing the
same seed twice returns bit-identical matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fock import Basis, apply_k_body, k_configurations, level_reverse

SQRT2 = float(np.sqrt(2.0))

CS_CONSTRUCTIONS = ("projection", "coupling")


@dataclass(frozen=True)
class ManyBodyMatrix:
    """Dense real symmetric matrix expressed in a tagged occupation basis."""

    values: np.ndarray
    basis_tag: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("values must be a square matrix")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        if not np.array_equal(v, v.T):
            raise ValueError("values must be exactly symmetric")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def as_rng(seed) -> np.random.Generator:
    """Accept a Generator, SeedSequence or integer seed."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _symmetrize(h: np.ndarray) -> np.ndarray:
    # (h + h.T)/2 is exactly symmetric in floating point
    return 0.5 * (h + h.T)


@lru_cache(maxsize=64)
def _transition_table(basis: Basis, k: int):
    """Sparse table of k-body matrix-element contributions.

    Returns index arrays (row, col, alpha, gamma, sign) such that the
    Hamiltonian assembles as H[row, col] += sign * v[alpha, gamma].
    """
    configs = k_configurations(basis.spec.l, k)
    rows, cols, alphas, gammas, signs = [], [], [], [], []
    for col, pattern in enumerate(basis.states):
        for g, gamma in enumerate(configs):
            if pattern & gamma != gamma:
                continue
            for a, alpha in enumerate(configs):
                res = apply_k_body(pattern, gamma, alpha)
                if res is None:
                    continue
                new_pattern, sign = res
                rows.append(basis.index[new_pattern])
                cols.append(col)
                alphas.append(a)
                gammas.append(g)
                signs.append(sign)
    return (np.asarray(rows), np.asarray(cols), np.asarray(alphas),
            np.asarray(gammas), np.asarray(signs, dtype=float))


def _check_rank(basis: Basis, k: int):
    if not isinstance(k, int) or not 1 <= k <= basis.spec.n:
        raise ValueError(f"interaction rank must satisfy 1 <= k <= {basis.spec.n}, got {k}")


def coupling_dim(l: int, k: int) -> int:
    return len(k_configurations(l, k))


def sample_coupling(l: int, k: int, rng) -> np.ndarray:
    """Symmetric coupling matrix with i.i.d. unit-variance Gaussian entries
    for every index pair (alpha <= gamma)."""
    m = coupling_dim(l, k)
    a = as_rng(rng).standard_normal((m, m))
    return np.triu(a) + np.triu(a, 1).T


def k_body_hamiltonian(basis: Basis, k: int, coefficients) -> ManyBodyMatrix:
    """Assemble the rank-k interaction Hamiltonian from given couplings.

    ``coefficients`` must be an exactly symmetric real square matrix indexed
    by the lexicographic k-level configurations.
    """
    _check_rank(basis, k)
    v = np.asarray(coefficients, dtype=float)
    m = coupling_dim(basis.spec.l, k)
    if v.shape != (m, m):
        raise ValueError(f"coefficients must have shape ({m}, {m})")
    if not np.array_equal(v, v.T):
        raise ValueError("coefficients must be symmetric")
    rows, cols, alphas, gammas, signs = _transition_table(basis, k)
    h = np.zeros((basis.dim, basis.dim))
    np.add.at(h, (rows, cols), signs * v[alphas, gammas])
    return ManyBodyMatrix(_symmetrize(h), basis.tag)


def sample_ege(basis: Basis, k: int, rng_seed) -> ManyBodyMatrix:
    """One realization of the rank-k embedded Gaussian ensemble."""
    _check_rank(basis, k)
    return k_body_hamiltonian(basis, k, sample_coupling(basis.spec.l, k, rng_seed))


@lru_cache(maxsize=64)
def _orbit_scale(basis: Basis) -> np.ndarray:
    """Elementwise factor restoring per-entry variance after mirror averaging.

    Positions whose index pair is mapped to itself by the mirror (as an
    unordered pair) are untouched by the averaging and keep factor 1; all
    others are averages of two entries and get √2.
    """
    sigma = np.asarray(basis.mirror)
    n = basis.dim
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    fixed = ((sigma[i] == i) & (sigma[j] == j)) | ((sigma[i] == j) & (sigma[j] == i))
    scale = np.where(fixed, 1.0, SQRT2)
    scale.setflags(write=False)
    return scale


@lru_cache(maxsize=128)
def _config_reversal(l: int, k: int) -> tuple:
    configs = k_configurations(l, k)
    index = {p: i for i, p in enumerate(configs)}
    return tuple(index[level_reverse(p, l)] for p in configs)


def sample_csege(basis: Basis, k: int, rng_seed, construction: str = "projection") -> ManyBodyMatrix:
    """One centrosymmetric realization: the result commutes with the
    exchange matrix of the basis.

    Two constructions are available and agree in distribution only up to
    fine details of the coupling correlations; see the README discussion.
    "projection" averages an ordinary sample with its mirror conjugate and
    rescales off-orbit entries by √2.  "coupling" applies the same
    averaging to the coupling matrix itself, tying entries across the
    level-reversal orbit of the k-level configurations.
    """
    _check_rank(basis, k)
    if construction not in CS_CONSTRUCTIONS:
        raise ValueError(f"unknown construction {construction!r}")
    if construction == "projection":
        h = sample_ege(basis, k, rng_seed).values
        sigma = np.asarray(basis.mirror)
        conj = h[np.ix_(sigma, sigma)]
        return ManyBodyMatrix(_orbit_scale(basis) * (0.5 * (h + conj)), basis.tag)
    v = sample_coupling(basis.spec.l, k, rng_seed)
    rho = np.asarray(_config_reversal(basis.spec.l, k))
    vr = v[np.ix_(rho, rho)]
    m = v.shape[0]
    i = np.arange(m)[:, None]
    j = np.arange(m)[None, :]
    fixed = ((rho[i] == i) & (rho[j] == j)) | ((rho[i] == j) & (rho[j] == i))
    vcs = np.where(fixed, 1.0, SQRT2) * (0.5 * (v + vr))
    return k_body_hamiltonian(basis, k, vcs)


def _require_clean_halves(basis: Basis, what: str):
    if basis.dim % 2:
        raise ValueError(f"{what} needs an even basis dimension, got {basis.dim}")


def sample_parity_breaker(basis: Basis, rng_seed) -> ManyBodyMatrix:
    """Block-diagonal perturbation that couples the two mirror-parity sectors.

    The upper block is a GOE draw B (diagonal variance 2, off-diagonal 1),
    the lower block its negated exchange conjugate, so the whole matrix
    anticommutes under conjugation with the exchange matrix and is purely
    off-diagonal between the parity sectors.
    """
    if basis.n_self_conjugate:
        raise ValueError("parity breaker requires a fixed-point-free mirror")
    _require_clean_halves(basis, "parity breaker")
    half = basis.dim // 2
    a = as_rng(rng_seed).standard_normal((half, half))
    b = (a + a.T) / SQRT2
    h = np.zeros((basis.dim, basis.dim))
    h[:half, :half] = b
    h[half:, half:] = -b[::-1, ::-1]
    sigma = np.asarray(basis.mirror)
    if not np.array_equal(h[np.ix_(sigma, sigma)], -h):
        raise RuntimeError("parity-breaker block structure violated")
    return ManyBodyMatrix(h, basis.tag)


def sample_cs_breaker(basis: Basis, rng_seed) -> ManyBodyMatrix:
    """Symmetric perturbation with zero diagonal blocks and an unconstrained
    Gaussian off-diagonal block, which generically destroys centrosymmetry."""
    _require_clean_halves(basis, "centrosymmetry breaker")
    half = basis.dim // 2
    d = as_rng(rng_seed).standard_normal((half, half))
    h = np.zeros((basis.dim, basis.dim))
    h[:half, half:] = d
    h[half:, :half] = d.T
    return ManyBodyMatrix(h, basis.tag)


def mix(eps: float, left: ManyBodyMatrix, right: ManyBodyMatrix) -> ManyBodyMatrix:
    """Square-root interpolation √(1-eps)·left + √eps·right.

    The square-root weights keep the total coupling variance constant along
    the path, so mixing two independent samples of one ensemble stays in
    that ensemble for every eps.
    """
    eps = float(eps)
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    if left.dim != right.dim:
        raise ValueError("dimension mismatch between left and right")
    if left.basis_tag != right.basis_tag:
        raise ValueError("left and right are expressed in different bases")
    vals = np.sqrt(1.0 - eps) * left.values + np.sqrt(eps) * right.values
    return ManyBodyMatrix(vals, left.basis_tag)


def export_matrix(matrix: ManyBodyMatrix, path):
    """Plain-text export: one row per line, space separated, 17 significant
    digits (lossless for binary64)."""
    np.savetxt(path, matrix.values, fmt="%.17g")
