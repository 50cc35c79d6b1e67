"""Finite combinations of Bohr-Sommerfeld basis states.

A quantum state is a finite complex combination of basis states sigma_n,
one per lattice label, with the basis declared orthonormal.  Action-only
observables act by multiplication with their value on the labelled torus,
f(n h); every basis state is an eigenstate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .atlas import LatticeLabel
from .observables import Observable


class ActionObservable:
    """Observable constrained to depend on the actions only (all m = 0)."""

    __slots__ = ("observable",)

    def __init__(self, observable):
        if not isinstance(observable, Observable):
            raise TypeError("ActionObservable wraps an Observable")
        if not observable.is_action_only():
            raise ValueError("observable has angle-dependent terms")
        self.observable = observable

    @property
    def dim(self):
        return self.observable.dim

    def __call__(self, j):
        return self.observable.eval_actions(j)


@dataclass(frozen=True)
class QuantumState:
    """Canonical finite label -> amplitude map (no stored zeros).

    The optional atlas handle ties the labels to their chart atlas; it is
    ignored by equality and propagated through the linear algebra.
    """

    amplitudes: tuple  # sorted tuple of (LatticeLabel, complex)
    atlas: object = field(default=None, compare=False, repr=False)

    def __init__(self, amplitudes=(), atlas=None):
        if isinstance(amplitudes, dict):
            items = amplitudes.items()
        else:
            items = amplitudes
        amps = {}
        for label, value in items:
            if not isinstance(label, LatticeLabel):
                label = LatticeLabel(*label)
            value = complex(value)
            if value != 0:
                amps[label] = amps.get(label, 0.0) + value
        canonical = tuple(
            (label, amps[label])
            for label in sorted(amps, key=lambda l: (l.chart, l.n))
            if amps[label] != 0
        )
        object.__setattr__(self, "amplitudes", canonical)
        object.__setattr__(self, "atlas", atlas)

    @classmethod
    def basis(cls, label, amplitude=1.0, atlas=None):
        return cls([(label, amplitude)], atlas=atlas)

    def as_dict(self):
        return dict(self.amplitudes)

    def labels(self):
        return [label for label, _ in self.amplitudes]

    def amplitude(self, label):
        return self.as_dict().get(label, 0.0 + 0.0j)

    def is_zero(self):
        return not self.amplitudes

    def map_labels(self, fn):
        """New state with every label replaced by fn(label), amplitudes kept."""
        return QuantumState([(fn(label), value) for label, value in self.amplitudes], atlas=self.atlas)

    def __add__(self, other):
        return QuantumState(
            list(self.amplitudes) + list(other.amplitudes),
            atlas=_merged_atlas(self, other),
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return QuantumState(
            [(label, scalar * value) for label, value in self.amplitudes], atlas=self.atlas
        )

    __rmul__ = __mul__


def _merged_atlas(u, v):
    if u.atlas is not None and v.atlas is not None and u.atlas is not v.atlas:
        raise ValueError("states belong to different atlases")
    return u.atlas if u.atlas is not None else v.atlas


def inner(u, v):
    """Orthonormal-basis pairing sum conj(u_n) v_n, antilinear in the first slot."""
    _merged_atlas(u, v)
    uv = u.as_dict()
    total = 0.0 + 0.0j
    for label, value in v.amplitudes:
        cu = uv.get(label)
        if cu is not None:
            total += np.conj(cu) * value
    return total


def norm(u):
    return float(np.sqrt(inner(u, u).real))


def quantize(f, u, planck_h=None):
    """Multiplication action of an action observable: sigma_n -> f(n h) sigma_n."""
    if not isinstance(f, ActionObservable):
        f = ActionObservable(f)
    if planck_h is None:
        if u.atlas is None:
            raise ValueError("planck_h required for a state without an atlas")
        planck_h = u.atlas.planck_h
    out = []
    for label, value in u.amplitudes:
        eig = float(f(label.actions(planck_h)))
        out.append((label, eig * value))
    return QuantumState(out, atlas=u.atlas)


def state_to_json(u):
    """Deterministic JSON: entries sorted lexicographically by (chart, n)."""
    rows = [
        {"chart": label.chart, "n": list(label.n), "re": value.real, "im": value.imag}
        for label, value in u.amplitudes
    ]
    return json.dumps(rows, indent=2)


def state_from_json(text):
    rows = json.loads(text)
    return QuantumState(
        [(LatticeLabel(int(r["chart"]), tuple(r["n"])), complex(r["re"], r["im"])) for r in rows]
    )
