"""Green's-function transport: wide-band contacts, transmission, current.

Reservoirs are modeled by energy-independent imaginary self-energies, each
occupying a single diagonal element of the Hamiltonian.  The transmission
between two single-site reservoirs reduces to one squared Green's-function
element; the equivalent trace formula is kept behind a debug switch as a
consistency check.  The total current is the energy integral of the
transmission over a finite window wide enough that the truncated tails are
bounded by the resolvent decay away from the spectrum.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .ensembles import ManyBodyMatrix
from .fock import Basis
from .quadrature import QuadratureSpec, integrate_adaptive

CONTACT = "contact"
PROBE = "probe"

# spacing multipliers, in units of the estimated resonance width, at which
# the quadrature is seeded around every eigenvalue
_LADDER = (0.0, 0.75, -0.75, 1.5, -1.5, 3.0, -3.0, 6.0, -6.0,
           12.0, -12.0, 24.0, -24.0, 48.0, -48.0, 96.0, -96.0)
_MIN_WIDTH = 1e-9


class TransportError(RuntimeError):
    pass


@dataclass(frozen=True)
class Terminal:
    """Single-site reservoir: basis index, coupling strength, role."""

    site: int
    strength: float
    kind: str = CONTACT

    def __post_init__(self):
        if self.kind not in (CONTACT, PROBE):
            raise ValueError(f"unknown terminal kind {self.kind!r}")
        if not self.strength > 0:
            raise ValueError("terminal strength must be positive")
        if self.site < 0:
            raise ValueError("terminal site must be a valid basis index")


@dataclass(frozen=True)
class CurrentResult:
    value: float
    abs_error_estimate: float
    evaluations: int


def contact_pair(basis: Basis, eta: float):
    """Injection contact on the all-particles-low state, extraction contact
    on its mirror image with all particles high."""
    return (Terminal(basis.source_index, eta, CONTACT),
            Terminal(basis.drain_index, eta, CONTACT))


def _matrix(h) -> np.ndarray:
    if isinstance(h, ManyBodyMatrix):
        return h.values
    return np.asarray(h, dtype=float)


def _strength_diagonal(n: int, terminals) -> np.ndarray:
    s = np.zeros(n)
    for t in terminals:
        if t.site >= n:
            raise ValueError(f"terminal site {t.site} outside basis of dimension {n}")
        s[t.site] += t.strength
    return s


def green(E: float, h, terminals) -> np.ndarray:
    """Retarded Green's function (E - H - Σ)^(-1) with Σ = -i diag(strengths)."""
    hv = _matrix(h)
    if not terminals:
        raise ValueError("at least one terminal is required")
    s = _strength_diagonal(hv.shape[0], terminals)
    a = E * np.eye(hv.shape[0], dtype=complex) - hv + 1j * np.diag(s)
    try:
        return np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        # strictly dissipative self-energy makes this impossible for valid data
        raise TransportError("singular Green's-function matrix") from exc


def transmission(E: float, h, src: Terminal, dst: Terminal, terminals,
                 check_trace: bool = False) -> float:
    """Transmission from src to dst: 4 s_src s_dst |G_{dst,src}|^2.

    All reservoirs in ``terminals`` contribute their self-energy to G.
    With check_trace=True the full trace formula is evaluated as well and a
    disagreement beyond 1e-12 raises.
    """
    if src == dst:
        raise ValueError("src and dst must be distinct terminals")
    g = green(E, h, terminals)
    amp = g[dst.site, src.site]
    t = 4.0 * src.strength * dst.strength * (amp.real**2 + amp.imag**2)
    if check_trace:
        n = g.shape[0]
        im_src = np.zeros((n, n))
        im_src[src.site, src.site] = -src.strength
        im_dst = np.zeros((n, n))
        im_dst[dst.site, dst.site] = -dst.strength
        t_trace = 4.0 * np.trace(im_src @ g @ im_dst @ g.conj().T).real
        if abs(t_trace - t) > 1e-12:
            raise TransportError(
                f"trace and single-element transmissions disagree: {t_trace} vs {t}"
            )
    return t


def _batch_kernel(h, terminals, src: Terminal, dst: Terminal):
    """Vectorized T(E) over an energy array, via one LU solve per energy."""
    hv = _matrix(h)
    n = hv.shape[0]
    base = hv - 1j * np.diag(_strength_diagonal(n, terminals))
    eye = np.eye(n)
    prefactor = 4.0 * src.strength * dst.strength

    def kernel(energies: np.ndarray) -> np.ndarray:
        e = np.atleast_1d(np.asarray(energies, dtype=float))
        a = e[:, None, None] * eye - base
        rhs = np.zeros((e.size, n, 1), dtype=complex)
        rhs[:, src.site, 0] = 1.0
        try:
            col = np.linalg.solve(a, rhs)[:, :, 0]
        except np.linalg.LinAlgError as exc:
            raise TransportError("singular Green's-function matrix") from exc
        amp = col[:, dst.site]
        return prefactor * (amp.real**2 + amp.imag**2)

    return kernel


def transmission_curve(h, terminals, energies) -> np.ndarray:
    """Contact-to-contact transmission on an energy grid."""
    src, dst = _contacts(terminals)
    return _batch_kernel(h, terminals, src, dst)(np.asarray(energies, dtype=float))


def _contacts(terminals):
    contacts = [t for t in terminals if t.kind == CONTACT]
    if len(contacts) != 2:
        raise ValueError(f"exactly two contacts required, got {len(contacts)}")
    return contacts[0], contacts[1]


def gershgorin_bound(h) -> float:
    hv = _matrix(h)
    return float(np.max(np.sum(np.abs(hv), axis=1)))


def energy_window(h, terminals) -> float:
    """Half-width of the integration window: spectral bound plus a margin
    of ten times the strongest coupling plus ten."""
    smax = max(t.strength for t in terminals)
    return gershgorin_bound(h) + 10.0 * smax + 10.0


def resonance_breakpoints(h, terminals, window: float):
    """Quadrature seed points: ladders around every eigenvalue, spaced by
    the estimated resonance width of its eigenvector.

    The width of resonance i is the weighted eigenvector density on the
    terminal sites, Γ_i = Σ_t s_t |v_i(site_t)|², floored so that even
    nearly dark states get a resolvable ladder.
    """
    hv = _matrix(h)
    evals, vecs = np.linalg.eigh(hv)
    widths = np.zeros(evals.size)
    for t in terminals:
        widths += t.strength * vecs[t.site, :] ** 2
    widths = np.maximum(widths, _MIN_WIDTH)
    pts = []
    for lam, gam in zip(evals, widths):
        for m in _LADDER:
            x = lam + m * gam
            if -window < x < window:
                pts.append(x)
    return tuple(pts)


def _finalize_current(raw, tail: float, atol: float) -> CurrentResult:
    value = raw.value
    if value < 0.0:
        if value < -atol:
            raise TransportError(f"negative integrated transmission {value}")
        value = 0.0
    return CurrentResult(float(value), float(raw.error_estimate + tail), raw.evaluations)


def total_current(h, terminals, quad: QuadratureSpec = QuadratureSpec()) -> CurrentResult:
    """Energy-integrated transmission between the two contacts.

    Probe terminals, if present, contribute their self-energies to G but
    are not eliminated self-consistently here; see the dephasing module for
    the effective transmission with current-conserving probes.
    """
    src, dst = _contacts(terminals)
    window = energy_window(h, terminals)
    kernel = _batch_kernel(h, terminals, src, dst)
    breaks = resonance_breakpoints(h, terminals, window)
    raw = integrate_adaptive(kernel, -window, window, quad, breakpoints=breaks)
    smax = max(t.strength for t in terminals)
    tail = 8.0 * src.strength * dst.strength / (window - gershgorin_bound(h) - smax)
    return _finalize_current(raw, tail, quad.atol)


def write_transmission_csv(path, energies, values, eta: float, seed, nu: float = None):
    """Two-column curve export with a single metadata header line."""
    head = f"# E,T,eta={float(eta)!r},seed={seed}"
    if nu is not None:
        head += f",nu={float(nu)!r}"
    lines = [head]
    for e, t in zip(energies, values):
        lines.append(f"{float(e)!r},{float(t)!r}")
    text = "\n".join(lines) + "\n"
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)
