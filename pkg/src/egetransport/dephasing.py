"""Decoherence through voltage probes attached to every basis state.

Every state carries a fictitious reservoir of strength nu that absorbs
excitations and re-injects them with randomized phase.  Eliminating the
probes under the zero-net-probe-current condition gives the effective
two-contact transmission

    T_eff = T_in,out + t_in' W^{-1} t_out,

where t_in and t_out collect the contact-to-probe transmissions and W has
the negated probe-probe transmissions off the diagonal and the total
outflow Σ_{k≠i} T_ik (over all other reservoirs, contacts included) on the
diagonal.  The linear system is solved directly, never inverted.

nu = 0 bypasses the probe machinery entirely and reproduces the coherent
current bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .negf import (PROBE, CurrentResult, Terminal, TransportError,
                   _finalize_current, _matrix, _strength_diagonal,
                   energy_window, gershgorin_bound, resonance_breakpoints,
                   total_current)
from .quadrature import QuadratureSpec, integrate_adaptive


class DephasingError(RuntimeError):
    pass


@dataclass(frozen=True)
class DephasingSpec:
    """Uniform probe strength; probes sit on every basis state."""

    nu: float

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("probe strength nu must be nonnegative")


def probe_terminals(n: int, nu: float):
    """One probe per basis index, empty for nu = 0."""
    if nu == 0:
        return ()
    return tuple(Terminal(i, nu, PROBE) for i in range(n))


def _effective_kernel(h, src: Terminal, dst: Terminal, nu: float):
    """Vectorized effective transmission over an energy array.

    Builds the full Green's function per energy (dense inverse), assembles
    the probe outflow matrix W and solves W x = t_out for the correction.
    """
    hv = _matrix(h)
    n = hv.shape[0]
    terminals = (src, dst) + probe_terminals(n, nu)
    base = hv - 1j * np.diag(_strength_diagonal(n, terminals))
    eye = np.eye(n)
    idx = np.arange(n)

    def kernel(energies: np.ndarray) -> np.ndarray:
        e = np.atleast_1d(np.asarray(energies, dtype=float))
        a = e[:, None, None] * eye - base
        try:
            g = np.linalg.inv(a)
        except np.linalg.LinAlgError as exc:
            raise TransportError("singular Green's-function matrix") from exc
        abs2 = g.real**2 + g.imag**2
        t_io = 4.0 * src.strength * dst.strength * abs2[:, dst.site, src.site]
        # contact-probe columns; |G| is symmetric so orientation is free
        t_in = 4.0 * src.strength * nu * abs2[:, :, src.site]
        t_out = 4.0 * dst.strength * nu * abs2[:, dst.site, :]
        pp = 4.0 * nu * nu * abs2
        diag = pp.sum(axis=2) - pp[:, idx, idx] + t_in + t_out
        w = -pp
        w[:, idx, idx] = diag
        try:
            x = np.linalg.solve(w, t_out[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError as exc:
            raise DephasingError("singular probe network: disconnected probe") from exc
        if not np.all(np.isfinite(x)):
            raise DephasingError("singular probe network: disconnected probe")
        return t_io + np.einsum("ep,ep->e", t_in, x)

    return kernel


def effective_transmission(E: float, h, src: Terminal, dst: Terminal,
                           deph: DephasingSpec) -> float:
    """Effective two-contact transmission at one energy."""
    if deph.nu == 0:
        from .negf import transmission
        return transmission(E, h, src, dst, (src, dst))
    return float(_effective_kernel(h, src, dst, deph.nu)(np.array([E]))[0])


def effective_transmission_curve(h, src: Terminal, dst: Terminal,
                                 deph: DephasingSpec, energies) -> np.ndarray:
    """Effective transmission on an energy grid."""
    if deph.nu == 0:
        from .negf import transmission_curve
        return transmission_curve(h, (src, dst), energies)
    return _effective_kernel(h, src, dst, deph.nu)(np.asarray(energies, dtype=float))


def dephased_current(h, src: Terminal, dst: Terminal, deph: DephasingSpec,
                     quad: QuadratureSpec = QuadratureSpec()) -> CurrentResult:
    """Energy-integrated effective transmission.

    Window and quadrature seeding follow the coherent path, with the probe
    strength entering both the strength margin and the resonance widths
    (every probe adds nu |v_i(site)|^2, which sums to nu exactly for a
    normalized eigenvector).
    """
    if deph.nu == 0:
        return total_current(h, (src, dst), quad)
    terminals = (src, dst) + probe_terminals(_matrix(h).shape[0], deph.nu)
    window = energy_window(h, terminals)
    kernel = _effective_kernel(h, src, dst, deph.nu)
    breaks = resonance_breakpoints(h, terminals, window)
    raw = integrate_adaptive(kernel, -window, window, quad, breakpoints=breaks)
    smax = max(t.strength for t in terminals)
    tail = 8.0 * src.strength * dst.strength / (window - gershgorin_bound(h) - smax)
    return _finalize_current(raw, tail, quad.atol)
