"""Shifting operators on the Bohr-Sommerfeld state space.

The lowering operator for an integer direction c is the time-h flow of the
connection-preserving lift of the locally Hamiltonian field X with
X . omega = -d(c.theta); it relabels basis states n -> n - c.  Raising is
its exact inverse (equivalently, lowering along -c).  Within one chart the
operators carry phase one on basis rays; across charts the phase is
tracked through branch representatives lifted continuously to the cover,
and re-trivialization over a transition with offset o multiplies fiber
coordinates by the torus character e^{2 pi i (B^T o).theta}.

All label arithmetic is integer-exact; phases are accumulated as real
angles and verified to be independent of the fiber point used to evaluate
them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atlas import LatticeLabel, relabel, transport_direction
from .errors import IncompletenessError, MatchingError, OverlapError
from .states import QuantumState

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ShiftDirection:
    """Integer direction vector c of a locally Hamiltonian angle field."""

    c: tuple

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(int(x) for x in self.c))

    @property
    def dim(self):
        return len(self.c)

    def is_trivial(self):
        return all(x == 0 for x in self.c)

    def negate(self):
        return ShiftDirection(tuple(-x for x in self.c))


@dataclass(frozen=True)
class ShiftStep:
    direction: ShiftDirection
    kind: str  # "lower" or "raise"

    def __post_init__(self):
        if self.kind not in ("lower", "raise"):
            raise ValueError(f"unknown shift kind {self.kind!r}")

    def signed_direction(self):
        """Direction whose lowering realizes this step."""
        return self.direction if self.kind == "lower" else self.direction.negate()


def word(*steps):
    """Build a shift word from (kind, c) pairs, e.g. word(("a", (1, 0)), ("b", (0, 1)))."""
    out = []
    for kind, c in steps:
        kind = {"a": "lower", "b": "raise"}.get(kind, kind)
        out.append(ShiftStep(ShiftDirection(tuple(c)), kind))
    return tuple(out)


def parse_word(text):
    """Parse the CLI word grammar 'a:1,0 b:0,1 ...' (a = lower, b = raise)."""
    steps = []
    for token in text.split():
        try:
            tag, comps = token.split(":")
            c = tuple(int(x) for x in comps.split(","))
        except ValueError as exc:
            raise ValueError(f"malformed word token {token!r}") from exc
        if tag not in ("a", "b"):
            raise ValueError(f"unknown operator tag {tag!r} (want 'a' or 'b')")
        steps.append(ShiftStep(ShiftDirection(c), "lower" if tag == "a" else "raise"))
    return tuple(steps)


def _shift_label(atlas, label, delta):
    new = LatticeLabel(label.chart, tuple(n - d for n, d in zip(label.n, delta)))
    if not atlas.validate_label(new, closed=True):
        raise IncompletenessError(
            f"shift exits the action box: label {new.n} in chart {new.chart} "
            f"(the time-h flow is not globally defined)"
        )
    return new


def lower(c, u, atlas):
    """a_c: relabel every basis amplitude n -> n - c (phase one in one chart)."""
    if not isinstance(c, ShiftDirection):
        c = ShiftDirection(tuple(c))
    if u.atlas is not None and u.atlas is not atlas:
        raise ValueError("state belongs to a different atlas")
    return QuantumState(
        [(_shift_label(atlas, label, c.c), value) for label, value in u.amplitudes],
        atlas=u.atlas if u.atlas is not None else atlas,
    )


def raise_(c, u, atlas):
    """b_c: exact inverse of a_c, relabelling n -> n + c."""
    if not isinstance(c, ShiftDirection):
        c = ShiftDirection(tuple(c))
    return lower(c.negate(), u, atlas)


def apply_word(steps, u, atlas):
    """Left-to-right composition of shift steps; failures report their index."""
    state = u
    for index, step in enumerate(steps):
        try:
            state = lower(step.signed_direction(), state, atlas)
        except IncompletenessError as exc:
            raise IncompletenessError(f"step {index}: {exc}", step=index) from None
    return state


@dataclass(frozen=True)
class TransportResult:
    """Outcome of a chart-chained shift: final label, unit phase, chart path."""

    label: LatticeLabel
    phase: complex
    path: tuple
    phase_angle: float

    def __post_init__(self):
        if abs(abs(self.phase) - 1.0) > 1e-12:
            raise ValueError("transport phase must be unimodular")


@dataclass(frozen=True)
class LoopPhaseResult:
    start: LatticeLabel
    net_change: tuple
    phase_angle: float  # in (-pi, pi]


def _phase_angle_for_point(atlas, start, c, chain, break_times, theta0):
    """Accumulated phase angle of the chained flow, evaluated at one fiber point.

    Walks the time-h flow of the direction field through the chart chain,
    carrying a continuous real lift of the angle representative; branch
    matching across transitions is realized by that lift.  Returns
    (final label, phase angle).
    """
    h = atlas.planck_h
    times = [0.0, *break_times, h]
    if any(not 0.0 < t < h for t in break_times):
        raise ValueError("break times must lie strictly inside (0, h)")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("break times must be strictly increasing")
    if len(chain) != len(break_times) + 1:
        raise ValueError("need exactly one break time per chart change")
    if start.chart != chain[0]:
        raise ValueError(f"start label lives in chart {start.chart}, chain begins at {chain[0]}")

    label = start
    c_now = tuple(c)
    theta = np.asarray(theta0, dtype=float)
    j = label.actions(h).astype(float)
    # value of the transported section at the moving fiber point, as an angle
    angle = TWO_PI * float(np.dot(label.n, theta))
    for seg in range(len(chain)):
        tau = times[seg + 1] - times[seg]
        chart = atlas.charts[chain[seg]]
        j_end = j - tau * np.asarray(c_now, dtype=float)
        for point in (j, j_end):
            if not chart.contains_actions(point, closed=True):
                raise OverlapError(
                    f"flow leaves chart {chain[seg]} at actions {tuple(point)}"
                )
        angle += -TWO_PI * tau * float(np.dot(c_now, theta)) / h
        j = j_end
        if seg < len(chain) - 1:
            t = atlas.transition(chain[seg], chain[seg + 1])
            b = np.asarray(t.angle_matrix, dtype=float)
            bt_o = np.asarray(t.angle_matrix, dtype=float).T @ np.asarray(t.offset, dtype=float)
            angle += TWO_PI * float(np.dot(bt_o, theta))
            theta = b @ theta
            j = np.asarray(t.matrix, dtype=float) @ j + h * np.asarray(t.offset, dtype=float)
            c_now = transport_direction(t, c_now)
            label = relabel(t, label)
    final_label = LatticeLabel(label.chart, tuple(n - x for n, x in zip(label.n, c_now)))
    if not atlas.validate_label(final_label, closed=True):
        raise IncompletenessError(
            f"transport exits the action box at label {final_label.n} in chart {final_label.chart}"
        )
    angle -= TWO_PI * float(np.dot(final_label.n, theta))
    return final_label, angle


def transport_across_charts(atlas, start, c, chain, break_times=()):
    """Chained shift e^{h Z} through overlapping charts, with phase bookkeeping.

    The resulting label equals the single-chart lowering mapped through the
    chain's transitions; the phase is evaluated at several fiber points and
    must agree to 1e-12, else the branch bookkeeping is inconsistent and a
    MatchingError is raised.
    """
    if isinstance(c, ShiftDirection):
        c = c.c
    c = tuple(int(x) for x in c)
    chain = [int(x) for x in chain]
    dim = len(c)
    probes = [np.zeros(dim), np.full(dim, 0.3), np.linspace(0.1, 0.7, dim)]
    results = [
        _phase_angle_for_point(atlas, start, c, chain, list(break_times), theta0)
        for theta0 in probes
    ]
    label = results[0][0]
    angles = [a for _, a in results]
    spread = max(
        abs(math.remainder(a - angles[0], TWO_PI)) for a in angles
    )
    if spread > 1e-12:
        raise MatchingError(
            f"transport phase depends on the fiber point (spread {spread:.2e}); "
            "branch matching is inconsistent"
        )
    angle = math.remainder(angles[0], TWO_PI)
    return TransportResult(
        label=label,
        phase=complex(math.cos(angle), math.sin(angle)),
        path=tuple(chain),
        phase_angle=angle,
    )


def loop_phase(atlas, start, steps, chains=None):
    """Accumulated phase of a shift word that returns its label to the start.

    chains[i], when given, is a (chart_chain, break_times) pair routing step
    i through several charts; by default each step stays in its label's
    chart.  The word must be a loop on labels; the result's phase angle is
    reported in (-pi, pi].
    """
    label = start
    total = 0.0
    for index, step in enumerate(steps):
        c = step.signed_direction().c
        if chains is not None and chains[index] is not None:
            chain, breaks = chains[index]
        else:
            chain, breaks = [label.chart], ()
        try:
            result = transport_across_charts(atlas, label, c, chain, breaks)
        except IncompletenessError as exc:
            raise IncompletenessError(f"step {index}: {exc}", step=index) from None
        label = result.label
        total += result.phase_angle
    if label.chart != start.chart or label.n != start.n:
        raise ValueError(
            f"word is not a loop: started at {start.chart}:{start.n}, "
            f"ended at {label.chart}:{label.n}"
        )
    return LoopPhaseResult(
        start=start,
        net_change=(0,) * start.dim,
        phase_angle=math.remainder(total, TWO_PI),
    )


def chart_independence_check(atlas, label, c, transition):
    """Shift-then-relabel equals relabel-then-shift (transformed direction).

    Integer-exact commuting diagram of Claim-style chart independence;
    returns False (with debug logging) on mismatch instead of raising.
    """
    import logging

    if isinstance(c, ShiftDirection):
        c = c.c
    c = tuple(int(x) for x in c)
    u = QuantumState.basis(label)
    path_a = lower(ShiftDirection(c), u, atlas).map_labels(lambda l: relabel(transition, l))
    c_prime = transport_direction(transition, c)
    path_b = lower(ShiftDirection(c_prime), u.map_labels(lambda l: relabel(transition, l)), atlas)
    if path_a == path_b:
        return True
    logging.getLogger(__name__).debug(
        "chart independence mismatch: label %s, c %s, via-shift %s, via-relabel %s",
        label,
        c,
        path_a.amplitudes,
        path_b.amplitudes,
    )
    return False
