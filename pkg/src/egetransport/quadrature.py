"""Adaptive Simpson integration with batched integrand evaluation.

The integrand must accept a 1-d numpy array of abscissae and return the
matching array of values.  All points of one refinement generation are
evaluated together (in bounded chunks), which keeps the per-point cost low
when the integrand is itself a batched linear-algebra kernel.

Interval acceptance follows the classic Richardson test: an interval is done
when the two-panel and one-panel Simpson results differ by at most 15 times
its share of the total tolerance, and the extrapolated correction is added to
the accepted value.  Segment contributions are combined with math.fsum, so
the result does not depend on the order in which intervals converge.

Near-singular spots narrower than the integrand can be evaluated cleanly
(extremely sharp resonances push the solve condition number past 1/eps) make
the Richardson test unsatisfiable: splitting stops reducing the deficit
because both sides are evaluation noise.  Such intervals are detected by a
stalled deficit at widths far below any feature the caller seeded, accepted
as they stand, and their whole deficit is charged to the error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# widths below span * 2^-_NOISE_SCALE qualify for the stalled-deficit exit
_NOISE_SCALE = 28
_BATCH_LIMIT = 32768


class QuadratureError(RuntimeError):
    """Subdivision limit exceeded before reaching the requested tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and depth limit for the adaptive integrator."""

    atol: float = 1e-8
    rtol: float = 1e-6
    max_depth: int = 40

    def __post_init__(self):
        if not self.atol > 0 or not self.rtol > 0:
            raise ValueError("atol and rtol must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def _segment_edges(a: float, b: float, breakpoints) -> list:
    """Sorted segment boundaries: a, b plus interior breakpoints.

    Points outside (a, b) are dropped; near-coincident points are merged so
    no segment is narrower than (b-a)*1e-12.
    """
    gap = (b - a) * 1e-12
    edges = [a]
    for x in sorted(float(p) for p in breakpoints):
        if x <= edges[-1] + gap:
            continue
        if x >= b - gap:
            break
        edges.append(x)
    edges.append(b)
    return edges


def _evaluate(f, points: np.ndarray) -> np.ndarray:
    """Apply f in chunks so one refinement generation cannot exhaust memory."""
    if points.size <= _BATCH_LIMIT:
        return np.asarray(f(points), dtype=float)
    parts = [np.asarray(f(chunk), dtype=float)
             for chunk in np.array_split(points, -(-points.size // _BATCH_LIMIT))]
    return np.concatenate(parts)


def integrate_adaptive(f, a: float, b: float, spec: QuadratureSpec = QuadratureSpec(),
                       breakpoints=()) -> QuadratureResult:
    """Integrate f over [a, b], seeding the subdivision at the breakpoints."""
    a = float(a)
    b = float(b)
    if not a < b:
        raise ValueError("need a < b")
    edges = _segment_edges(a, b, breakpoints)
    span = b - a
    noise_width = span * 2.0 ** -_NOISE_SCALE

    nodes = np.asarray(edges)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    f_nodes = _evaluate(f, nodes)
    f_mids = _evaluate(f, mids)
    evaluations = nodes.size + mids.size

    work = []
    for i in range(mids.size):
        x0, x2 = edges[i], edges[i + 1]
        s = (x2 - x0) / 6.0 * (f_nodes[i] + 4.0 * f_mids[i] + f_nodes[i + 1])
        work.append((x0, x2, f_nodes[i], f_mids[i], f_nodes[i + 1], s, 0, math.inf))

    crude = math.fsum(item[5] for item in work)
    tolerance = max(spec.atol, spec.rtol * abs(crude))

    pieces = []
    error = 0.0
    while work:
        lows = np.array([0.25 * (3.0 * w[0] + w[1]) for w in work])
        highs = np.array([0.25 * (w[0] + 3.0 * w[1]) for w in work])
        batch = _evaluate(f, np.concatenate([lows, highs]))
        evaluations += batch.size
        n = len(work)
        refined = []
        for i, (x0, x2, f0, f1, f2, s, depth, parent) in enumerate(work):
            xm = 0.5 * (x0 + x2)
            fl, fr = batch[i], batch[n + i]
            h12 = (x2 - x0) / 12.0
            s_left = h12 * (f0 + 4.0 * fl + f1)
            s_right = h12 * (f1 + 4.0 * fr + f2)
            delta = (s_left + s_right) - s
            if abs(delta) <= 15.0 * tolerance * (x2 - x0) / span:
                pieces.append(s_left + s_right + delta / 15.0)
                error += abs(delta) / 15.0
            elif x2 - x0 < noise_width and abs(delta) > 0.125 * parent:
                # splitting stopped paying: the deficit is evaluation noise,
                # not discretization error (a smooth split shrinks it 16x)
                pieces.append(s_left + s_right)
                error += abs(delta)
            else:
                if depth + 1 > spec.max_depth:
                    raise QuadratureError(
                        f"no convergence on [{x0:.6g}, {x2:.6g}] "
                        f"after depth {spec.max_depth}"
                    )
                refined.append((x0, xm, f0, fl, f1, s_left, depth + 1, abs(delta)))
                refined.append((xm, x2, f1, fr, f2, s_right, depth + 1, abs(delta)))
        work = refined

    return QuadratureResult(math.fsum(pieces), float(error), evaluations)
