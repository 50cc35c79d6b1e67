"""Exact classical observables on action-angle phase space.

An observable is a finite sum of terms c * j^alpha * e^{2 pi i m.theta}
with complex coefficient c, action multi-index alpha and integer angle
frequency vector m.  Real-valuedness means the term list is hermitian:
whenever (c, alpha, m) appears, so does (conj c, alpha, -m).  Derivatives
and Poisson brackets are computed exactly on the term list; nothing here
is sampled or discretized.
"""
from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi
_ZERO_TOL = 0.0  # coefficients are pruned only when exactly zero


class Observable:
    """Finite exact sum of j^alpha * e^{2 pi i m.theta} terms."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim, terms=(), require_real=True):
        self.dim = int(dim)
        merged = {}
        for coeff, alpha, m in terms:
            alpha = tuple(int(a) for a in alpha)
            m = tuple(int(x) for x in m)
            if len(alpha) != self.dim or len(m) != self.dim:
                raise ValueError("term multi-index length does not match dim")
            if any(a < 0 for a in alpha):
                raise ValueError("action exponents must be nonnegative")
            key = (alpha, m)
            merged[key] = merged.get(key, 0.0) + complex(coeff)
        self.terms = {k: v for k, v in merged.items() if v != _ZERO_TOL}
        if require_real and not self.is_real():
            raise ValueError("term list is not hermitian (observable not real-valued)")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, dim):
        return cls(dim, ())

    @classmethod
    def constant(cls, dim, value):
        return cls(dim, [(value, (0,) * dim, (0,) * dim)])

    @classmethod
    def action(cls, dim, axis, power=1, coeff=1.0):
        """Monomial coeff * j_axis^power."""
        alpha = tuple(power if i == axis else 0 for i in range(dim))
        return cls(dim, [(coeff, alpha, (0,) * dim)])

    @classmethod
    def action_monomial(cls, dim, alpha, coeff=1.0):
        return cls(dim, [(coeff, tuple(alpha), (0,) * dim)])

    @classmethod
    def cos_angle(cls, dim, m, coeff=1.0):
        """coeff * cos(2 pi m.theta) for an integer frequency vector m."""
        m = tuple(int(x) for x in m)
        zero = (0,) * dim
        return cls(dim, [(0.5 * coeff, zero, m), (0.5 * coeff, zero, tuple(-x for x in m))])

    @classmethod
    def sin_angle(cls, dim, m, coeff=1.0):
        """coeff * sin(2 pi m.theta)."""
        m = tuple(int(x) for x in m)
        zero = (0,) * dim
        return cls(dim, [(-0.5j * coeff, zero, m), (0.5j * coeff, zero, tuple(-x for x in m))])

    # -- structure ---------------------------------------------------------

    def is_real(self):
        for (alpha, m), c in self.terms.items():
            cc = self.terms.get((alpha, tuple(-x for x in m)))
            if cc is None or abs(cc - c.conjugate()) > 1e-14 * max(1.0, abs(c)):
                return False
        return True

    def is_action_only(self):
        return all(all(x == 0 for x in m) for (_, m) in self.terms)

    def is_angle_only(self):
        return all(all(a == 0 for a in alpha) for (alpha, _) in self.terms)

    def is_zero(self):
        return not self.terms

    def sorted_terms(self):
        return sorted(self.terms.items())

    def __eq__(self, other):
        return isinstance(other, Observable) and self.dim == other.dim and self.terms == other.terms

    def __repr__(self):
        bits = [f"({c!r})*j^{alpha}*e(m={m})" for (alpha, m), c in self.sorted_terms()]
        return f"Observable({self.dim}, {' + '.join(bits) or '0'})"

    def max_angle_frequency(self):
        """Largest |m_i| over all terms (spectral bandwidth in each angle)."""
        if not self.terms:
            return 0
        return max(max(abs(x) for x in m) for (_, m) in self.terms)

    # -- algebra -----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        terms = [(c, a, m) for (a, m), c in self.terms.items()]
        terms += [(c, a, m) for (a, m), c in other.terms.items()]
        return Observable(self.dim, terms, require_real=False)

    def __sub__(self, other):
        return self + (-1.0) * self._coerce(other)

    def __mul__(self, other):
        if np.isscalar(other):
            return Observable(
                self.dim,
                [(other * c, a, m) for (a, m), c in self.terms.items()],
                require_real=False,
            )
        other = self._coerce(other)
        out = []
        for (a1, m1), c1 in self.terms.items():
            for (a2, m2), c2 in other.terms.items():
                alpha = tuple(x + y for x, y in zip(a1, a2))
                m = tuple(x + y for x, y in zip(m1, m2))
                out.append((c1 * c2, alpha, m))
        return Observable(self.dim, out, require_real=False)

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, Observable):
            if other.dim != self.dim:
                raise ValueError("observable dimensions differ")
            return other
        if np.isscalar(other):
            return Observable.constant(self.dim, other)
        raise TypeError(f"cannot combine Observable with {type(other)!r}")

    # -- calculus ----------------------------------------------------------

    def d_dj(self, axis):
        """Exact partial derivative with respect to the action j_axis."""
        out = []
        for (alpha, m), c in self.terms.items():
            if alpha[axis] == 0:
                continue
            new_alpha = tuple(a - 1 if i == axis else a for i, a in enumerate(alpha))
            out.append((c * alpha[axis], new_alpha, m))
        return Observable(self.dim, out, require_real=False)

    def d_dtheta(self, axis):
        """Exact partial derivative with respect to the angle theta_axis."""
        out = []
        for (alpha, m), c in self.terms.items():
            if m[axis] == 0:
                continue
            out.append((c * TWO_PI * 1j * m[axis], alpha, m))
        return Observable(self.dim, out, require_real=False)

    # -- evaluation --------------------------------------------------------

    def __call__(self, j, theta):
        """Evaluate on k action components and k angle components.

        Each component may be a scalar or a broadcastable array, so the same
        call serves points and whole meshes.  Real observables return the
        real part; non-hermitian intermediates return complex values.
        """
        if len(j) != self.dim or len(theta) != self.dim:
            raise ValueError(f"expected {self.dim} action and angle components")
        total = 0.0 + 0.0j
        for (alpha, m), c in self.terms.items():
            term = c
            for i, a in enumerate(alpha):
                if a:
                    term = term * np.asarray(j[i]) ** a
            phase = 0.0
            for i, m_i in enumerate(m):
                if m_i:
                    phase = phase + m_i * np.asarray(theta[i])
            term = term * np.exp(TWO_PI * 1j * phase)
            total = total + term
        return np.real(total) if self.is_real() else total

    def eval_actions(self, j):
        """Evaluate an action-only observable on k action components."""
        if not self.is_action_only():
            raise ValueError("observable depends on angles")
        if len(j) != self.dim:
            raise ValueError(f"expected {self.dim} action components")
        total = 0.0 + 0.0j
        for (alpha, _), c in self.terms.items():
            term = c
            for i, a in enumerate(alpha):
                if a:
                    term = term * np.asarray(j[i]) ** a
            total = total + term
        return np.real(total)


def hamiltonian_vf(f):
    """Hamiltonian vector field of f with X . omega = -df.

    Returns (dtheta_dt, dj_dt): two lists of exact observables,
    dtheta_dt[i] = df/dj_i and dj_dt[i] = -df/dtheta_i, so that the angle
    field of f = j_1 is +d/dtheta_1 and the field of an angle function
    c.theta is -sum c_i d/dj_i.
    """
    dtheta_dt = [f.d_dj(i) for i in range(f.dim)]
    dj_dt = [(-1.0) * f.d_dtheta(i) for i in range(f.dim)]
    return dtheta_dt, dj_dt


def poisson(f, g):
    """Exact Poisson bracket {f, g} = sum_i (df/dtheta_i dg/dj_i - df/dj_i dg/dtheta_i).

    Sign convention fixed so that {f, g} = L_{X_g} f with X . omega = -df;
    in particular {j_1, cos 2 pi theta_1} = 2 pi sin 2 pi theta_1.
    """
    if f.dim != g.dim:
        raise ValueError("observable dimensions differ")
    acc = Observable.zero(f.dim)
    for i in range(f.dim):
        acc = acc + f.d_dtheta(i) * g.d_dj(i) - f.d_dj(i) * g.d_dtheta(i)
    return Observable(f.dim, [(c, a, m) for (a, m), c in acc.terms.items()])
