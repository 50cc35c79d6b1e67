"""Action-angle chart atlases and their integer lattice structure.

A chart is an open box in action space with a k-torus worth of angles over
every point.  Charts are glued by affine integer-unimodular transitions
j_to = A j_from + h*offset, which also relabel the quantum-number lattice
n_to = A n_from + offset.  Loops of transitions have holonomy in the group
of affine Z-linear maps; nontrivial holonomy obstructs a global labelling.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def int_det(matrix):
    """Exact determinant of a small square integer matrix (Laplace expansion)."""
    m = [list(map(int, row)) for row in matrix]
    k = len(m)
    if any(len(row) != k for row in m):
        raise ValueError("matrix is not square")
    if k == 1:
        return m[0][0]
    if k == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    det = 0
    for col in range(k):
        if m[0][col] == 0:
            continue
        minor = [row[:col] + row[col + 1:] for row in m[1:]]
        det += (-1) ** col * m[0][col] * int_det(minor)
    return det


def int_adjugate(matrix):
    """Exact adjugate (transposed cofactor matrix) of an integer matrix."""
    m = [list(map(int, row)) for row in matrix]
    k = len(m)
    if k == 1:
        return ((1,),)
    adj = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            minor = [row[:j] + row[j + 1:] for r, row in enumerate(m) if r != i]
            adj[j][i] = (-1) ** (i + j) * int_det(minor)
    return tuple(tuple(row) for row in adj)


def unimodular_inverse(matrix):
    """Exact integer inverse of a matrix with determinant +-1."""
    det = int_det(matrix)
    if det not in (1, -1):
        raise ValueError(f"matrix is not unimodular (det = {det})")
    adj = int_adjugate(matrix)
    return tuple(tuple(det * x for x in row) for row in adj)


def _mat_vec(matrix, vec):
    return tuple(sum(int(a) * int(v) for a, v in zip(row, vec)) for row in matrix)


def _mat_mul(a, b):
    k = len(a)
    return tuple(
        tuple(sum(int(a[i][l]) * int(b[l][j]) for l in range(k)) for j in range(k))
        for i in range(k)
    )


def _as_int_matrix(matrix):
    rows = tuple(tuple(int(x) for x in row) for row in matrix)
    k = len(rows)
    if any(len(row) != k for row in rows):
        raise ValueError("matrix is not square")
    return rows


@dataclass(frozen=True)
class ActionAngleChart:
    """Open axis-aligned box in action space carrying torus angles."""

    id: int
    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(x) for x in self.lo))
        object.__setattr__(self, "hi", tuple(float(x) for x in self.hi))
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi differ in length")
        if not self.lo:
            raise ValueError("chart dimension must be positive")
        for a, b in zip(self.lo, self.hi):
            if not a < b:
                raise ValueError(f"degenerate action box: [{a}, {b}]")

    @property
    def dim(self):
        return len(self.lo)

    def contains_actions(self, j, closed=True):
        """True if the action vector lies in the (closure of the) box."""
        j = np.asarray(j, dtype=float)
        if j.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} action components, got {j.shape}")
        if closed:
            return all(a <= x <= b for x, a, b in zip(j, self.lo, self.hi))
        return all(a < x < b for x, a, b in zip(j, self.lo, self.hi))


@dataclass(frozen=True)
class ChartTransition:
    """Affine unimodular gluing map from one chart to another.

    Actions pull forward as j_to = A j_from + h*offset and quantum numbers
    as n_to = A n_from + offset; angles push by B = (A^{-1})^T modulo 1.
    The offset is in lattice units (multiples of h).
    """

    src: int
    dst: int
    matrix: tuple
    offset: tuple = None

    def __post_init__(self):
        mat = _as_int_matrix(self.matrix)
        object.__setattr__(self, "matrix", mat)
        off = self.offset if self.offset is not None else (0,) * len(mat)
        off = tuple(int(x) for x in off)
        if len(off) != len(mat):
            raise ValueError("offset length does not match matrix dimension")
        object.__setattr__(self, "offset", off)
        if int_det(mat) not in (1, -1):
            raise ValueError(f"transition matrix must have det +-1, got {int_det(mat)}")

    @property
    def dim(self):
        return len(self.matrix)

    @property
    def det(self):
        return int_det(self.matrix)

    @property
    def angle_matrix(self):
        """B = (A^{-1})^T, exact in integer arithmetic."""
        inv = unimodular_inverse(self.matrix)
        return tuple(tuple(inv[j][i] for j in range(self.dim)) for i in range(self.dim))

    def inverse(self):
        """Transition undoing this one: A^{-1}, offset -A^{-1} offset."""
        inv = unimodular_inverse(self.matrix)
        off = tuple(-x for x in _mat_vec(inv, self.offset))
        return ChartTransition(self.dst, self.src, inv, off)

    def is_identity(self):
        ident = tuple(
            tuple(1 if i == j else 0 for j in range(self.dim)) for i in range(self.dim)
        )
        return self.matrix == ident and all(x == 0 for x in self.offset)


@dataclass(frozen=True)
class LatticeLabel:
    """Integer quantum numbers of a Bohr-Sommerfeld torus in a given chart."""

    chart: int
    n: tuple

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(x) for x in self.n))

    @property
    def dim(self):
        return len(self.n)

    def actions(self, planck_h):
        """Action vector j = n*h of the labelled torus."""
        return np.asarray(self.n, dtype=float) * planck_h


def identity_transition(chart, dim):
    """Trivial self-transition of a chart (unit matrix, zero offset)."""
    mat = tuple(tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim))
    return ChartTransition(chart, chart, mat)


def map_actions(t, j_from, planck_h=1.0):
    """Push an action vector through a transition: A j + h*offset."""
    j_from = np.asarray(j_from, dtype=float)
    if j_from.shape != (t.dim,):
        raise ValueError(f"expected {t.dim} action components, got {j_from.shape}")
    a = np.asarray(t.matrix, dtype=float)
    return a @ j_from + planck_h * np.asarray(t.offset, dtype=float)


def map_angles(t, theta_from):
    """Push a torus angle vector through a transition: (B theta) mod 1."""
    theta_from = np.asarray(theta_from, dtype=float)
    if theta_from.shape != (t.dim,):
        raise ValueError(f"expected {t.dim} angle components, got {theta_from.shape}")
    b = np.asarray(t.angle_matrix, dtype=float)
    return (b @ theta_from) % 1.0


def relabel(t, label):
    """Integer-exact relabelling n_to = A n_from + offset across a transition."""
    if label.chart != t.src:
        raise ValueError(f"label lives in chart {label.chart}, transition starts at {t.src}")
    if label.dim != t.dim:
        raise ValueError("label dimension does not match transition")
    return LatticeLabel(t.dst, tuple(a + o for a, o in zip(_mat_vec(t.matrix, label.n), t.offset)))


def transport_direction(t, c):
    """Express a shift direction of the source chart in the target chart: c_to = A c_from."""
    c = tuple(int(x) for x in c)
    if len(c) != t.dim:
        raise ValueError("direction dimension does not match transition")
    return _mat_vec(t.matrix, c)


def compose_transitions(path, chart=None, dim=None):
    """Compose a chainable sequence of transitions into one.

    The empty path composes to the identity; it needs an explicit chart id
    and dimension since there is no transition to read them from.
    """
    path = list(path)
    if not path:
        if chart is None or dim is None:
            raise ValueError("empty path needs explicit chart and dim")
        return identity_transition(chart, dim)
    acc = path[0]
    for step in path[1:]:
        if step.src != acc.dst:
            raise ValueError(f"path not chainable: {acc.dst} -> {step.src}")
        mat = _mat_mul(step.matrix, acc.matrix)
        off = tuple(a + b for a, b in zip(_mat_vec(step.matrix, acc.offset), step.offset))
        acc = ChartTransition(acc.src, step.dst, mat, off)
    return acc


@dataclass
class ChartAtlas:
    """Immutable collection of charts, registered transitions, and Planck constant.

    Registering a transition automatically registers its exact inverse; if
    both directions are supplied they must be mutually inverse.  With
    oriented=True every transition must have det +1.
    """

    charts: dict = field(default_factory=dict)
    transitions: dict = field(default_factory=dict)
    planck_h: float = 1.0
    oriented: bool = False

    def __init__(self, charts, transitions=(), planck_h=1.0, oriented=False):
        self.planck_h = float(planck_h)
        if not self.planck_h > 0:
            raise ValueError("planck_h must be positive")
        self.oriented = bool(oriented)
        self.charts = {}
        for chart in charts:
            if chart.id in self.charts:
                raise ValueError(f"duplicate chart id {chart.id}")
            self.charts[chart.id] = chart
        self.transitions = {}
        for t in transitions:
            self._register(t)

    def _register(self, t):
        for end in (t.src, t.dst):
            if end not in self.charts:
                raise ValueError(f"transition endpoint {end} is not a chart")
        if t.dim != self.charts[t.src].dim:
            raise ValueError("transition dimension does not match chart")
        if self.oriented and t.det != 1:
            raise ValueError("oriented atlas requires det +1 transitions")
        key = (t.src, t.dst)
        if key in self.transitions and self.transitions[key] != t:
            raise ValueError(f"conflicting transition registered for {key}")
        self.transitions[key] = t
        inv = t.inverse()
        ikey = (inv.src, inv.dst)
        if ikey in self.transitions:
            if self.transitions[ikey] != inv:
                raise ValueError(f"transition {ikey} is not inverse to {key}")
        else:
            self.transitions[ikey] = inv

    def transition(self, src, dst):
        try:
            return self.transitions[(src, dst)]
        except KeyError:
            raise ValueError(f"no registered transition {src} -> {dst}") from None

    def dim(self):
        return next(iter(self.charts.values())).dim

    def validate_label(self, label, closed=True):
        """Check that a label's actions lie in (the closure of) its chart box."""
        chart = self.charts.get(label.chart)
        if chart is None:
            raise ValueError(f"unknown chart {label.chart}")
        return chart.contains_actions(label.actions(self.planck_h), closed=closed)


def holonomy_of_loop(atlas, loop):
    """Composed transition around a closed chart loop [c0, c1, ..., c0]."""
    loop = list(loop)
    if len(loop) < 1:
        raise ValueError("loop must contain at least one chart")
    if loop[0] != loop[-1]:
        raise ValueError("loop must start and end at the same chart")
    if len(loop) == 1:
        return identity_transition(loop[0], atlas.charts[loop[0]].dim)
    steps = [atlas.transition(a, b) for a, b in zip(loop[:-1], loop[1:])]
    return compose_transitions(steps)


def bs_label_of_actions(atlas, chart, j, rel_tol=1e-9):
    """Quantum numbers of an action vector if it sits on the lattice j = n*h.

    Returns the integer vector n when every component of j is within
    rel_tol*h of n_i*h and the point lies in the chart's closed box;
    returns None otherwise.
    """
    if not 0 < rel_tol < 0.5:
        raise ValueError("rel_tol must lie in (0, 0.5)")
    h = atlas.planck_h
    j = np.asarray(j, dtype=float)
    box = atlas.charts[chart]
    if j.shape != (box.dim,):
        raise ValueError(f"expected {box.dim} action components")
    if not box.contains_actions(j, closed=True):
        return None
    n = np.rint(j / h).astype(int)
    if np.all(np.abs(j - n * h) <= rel_tol * h):
        return tuple(int(x) for x in n)
    return None


def is_globally_labelable(atlas):
    """Whether the lattice admits one global labelling; else a witness loop.

    Walks a spanning tree of the transition graph and tests the holonomy of
    every fundamental cycle.  Returns (True, None) if all cycles compose to
    the identity, otherwise (False, loop) with one offending chart loop.
    """
    ids = sorted(atlas.charts)
    adjacency = {i: [] for i in ids}
    for (src, dst) in atlas.transitions:
        adjacency[src].append(dst)
    tree_path = {}  # chart id -> loop-free chart path from its component root
    seen = set()
    non_tree = []
    for root in ids:
        if root in seen:
            continue
        tree_path[root] = [root]
        seen.add(root)
        queue = [root]
        while queue:
            u = queue.pop(0)
            for v in sorted(adjacency[u]):
                if v not in seen:
                    seen.add(v)
                    tree_path[v] = tree_path[u] + [v]
                    queue.append(v)
                else:
                    non_tree.append((u, v))
    for u, v in non_tree:
        pu, pv = tree_path[u], tree_path[v]
        if pu[0] != pv[0]:
            continue
        # loop: root -> u, edge u -> v, reverse(root -> v)
        loop = pu + pv[::-1]
        hol = holonomy_of_loop(atlas, loop)
        if not hol.is_identity():
            return False, loop
    return True, None


def atlas_to_json(atlas):
    """Serialize an atlas to a JSON string (lossless round trip)."""
    doc = {
        "planck_h": atlas.planck_h,
        "oriented": atlas.oriented,
        "charts": [
            {"id": c.id, "dim": c.dim, "box": [[a, b] for a, b in zip(c.lo, c.hi)]}
            for c in sorted(atlas.charts.values(), key=lambda c: c.id)
        ],
        "transitions": [
            {
                "from": t.src,
                "to": t.dst,
                "matrix": [x for row in t.matrix for x in row],
                "offset": list(t.offset),
            }
            for _, t in sorted(atlas.transitions.items())
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def atlas_from_json(text):
    """Rebuild an atlas from its JSON serialization."""
    doc = json.loads(text)
    charts = [
        ActionAngleChart(
            int(c["id"]),
            tuple(pair[0] for pair in c["box"]),
            tuple(pair[1] for pair in c["box"]),
        )
        for c in doc["charts"]
    ]
    transitions = []
    for t in doc["transitions"]:
        flat = [int(x) for x in t["matrix"]]
        k = round(len(flat) ** 0.5)
        if k * k != len(flat):
            raise ValueError("transition matrix is not square")
        mat = tuple(tuple(flat[i * k:(i + 1) * k]) for i in range(k))
        transitions.append(ChartTransition(int(t["from"]), int(t["to"]), mat, tuple(t.get("offset", (0,) * k))))
    return ChartAtlas(
        charts,
        transitions,
        planck_h=float(doc["planck_h"]),
        oriented=bool(doc.get("oriented", False)),
    )
