"""Prequantization over a trivialized action-angle grid.

Sections of the (trivial) prequantum line bundle over box x torus are
complex arrays indexed action-major: shape (*n_action, *n_angle).  Angle
axes are periodic with period 1 and differentiated spectrally; action axes
use 4th-order central differences, with boundary layers flagged invalid
instead of extrapolated.

The connection realized here is nabla_X psi = X psi - (2 pi i / h) <alpha|X> psi
with alpha = sum_i j_i dtheta_i.  The sign is pinned by a desk oracle: it is
the unique choice for which the prequantization operators
P_f = -i hbar nabla_{X_f} + f satisfy the bracket-to-commutator rule
[P_f, P_g] = i hbar P_{f,g} under the conventions X . omega = -df and
{f, g} = L_{X_g} f.  Covariantly constant sections over the lattice torus
j = n h are then e^{+2 pi i n.theta}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SupportError, UnsupportedObservableError
from .observables import Observable, hamiltonian_vf, poisson

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GridSpec:
    """Discretization of (action box) x (angle torus)^k.

    Action axes are inclusive uniform grids with n_action points; angle
    axes carry n_angle equispaced points on [0, 1).
    """

    action_lo: tuple
    action_hi: tuple
    n_action: tuple
    n_angle: tuple
    planck_h: float

    def __post_init__(self):
        object.__setattr__(self, "action_lo", tuple(float(x) for x in self.action_lo))
        object.__setattr__(self, "action_hi", tuple(float(x) for x in self.action_hi))
        object.__setattr__(self, "n_action", tuple(int(n) for n in self.n_action))
        object.__setattr__(self, "n_angle", tuple(int(n) for n in self.n_angle))
        k = self.dim
        if not (len(self.action_hi) == len(self.n_action) == len(self.n_angle) == k):
            raise ValueError("inconsistent axis counts")
        if any(n < 8 for n in self.n_action) or any(n < 8 for n in self.n_angle):
            raise ValueError("at least 8 points per axis required")
        if any(a >= b for a, b in zip(self.action_lo, self.action_hi)):
            raise ValueError("empty action box")
        if not self.planck_h > 0:
            raise ValueError("planck_h must be positive")

    @property
    def dim(self):
        return len(self.action_lo)

    @property
    def hbar(self):
        return self.planck_h / TWO_PI

    @property
    def shape(self):
        return self.n_action + self.n_angle

    def action_axis(self, i):
        return np.linspace(self.action_lo[i], self.action_hi[i], self.n_action[i])

    def angle_axis(self, i):
        return np.arange(self.n_angle[i]) / self.n_angle[i]

    def action_spacing(self, i):
        return (self.action_hi[i] - self.action_lo[i]) / (self.n_action[i] - 1)

    def mesh(self):
        """Broadcastable coordinate arrays (j_axes, theta_axes)."""
        k = self.dim
        axes = [self.action_axis(i) for i in range(k)] + [self.angle_axis(i) for i in range(k)]
        grids = np.meshgrid(*axes, indexing="ij", sparse=True)
        return grids[:k], grids[k:]

    @classmethod
    def default(cls, dim, planck_h=1.0, box_halfwidth=None):
        """Desk-scale grid: 129x64 per axis for k = 1, 65x32 for k = 2."""
        half = box_halfwidth if box_halfwidth is not None else 2.0 * planck_h
        n_act, n_ang = (129, 64) if dim == 1 else (65, 32)
        return cls(
            action_lo=(-half,) * dim,
            action_hi=(half,) * dim,
            n_action=(n_act,) * dim,
            n_angle=(n_ang,) * dim,
            planck_h=planck_h,
        )


@dataclass
class GridSection:
    """Complex-valued section sampled on a GridSpec.

    margin counts action-boundary layers (per side, every action axis)
    whose values are unreliable; derivative operators widen it.
    """

    spec: GridSpec
    values: np.ndarray
    margin: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.spec.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.spec.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("section contains non-finite values")

    def valid_mask(self, extra_margin=0):
        """Boolean mask of nodes at least margin+extra layers inside the box."""
        m = self.margin + extra_margin
        mask = np.ones(self.spec.shape, dtype=bool)
        if m == 0:
            return mask
        k = self.spec.dim
        for ax in range(k):
            sl = [slice(None)] * (2 * k)
            sl[ax] = slice(0, m)
            mask[tuple(sl)] = False
            sl[ax] = slice(self.spec.n_action[ax] - m, None)
            mask[tuple(sl)] = False
        return mask

    def norm(self, extra_margin=0):
        """Discrete L2 norm over valid nodes."""
        mask = self.valid_mask(extra_margin)
        return float(np.linalg.norm(self.values[mask]))

    def copy(self):
        return GridSection(self.spec, self.values.copy(), self.margin)


def section_from_function(spec, fn):
    """Sample fn(j_axes, theta_axes) -> complex array on the grid."""
    j_axes, th_axes = spec.mesh()
    vals = np.asarray(fn(j_axes, th_axes), dtype=complex)
    vals = np.broadcast_to(vals, spec.shape).copy()
    return GridSection(spec, vals)


def bs_basis_section(spec, n, j_profile=None):
    """Grid realization of a lattice basis section: e^{2 pi i n.theta}.

    Optional j_profile(j_axes) multiplies in an action-dependent envelope;
    the default is identically one, which is covariantly constant along the
    torus directions on the lattice slice j = n h.
    """
    n = tuple(int(x) for x in n)
    if len(n) != spec.dim:
        raise ValueError("label dimension does not match grid")

    def fn(j_axes, th_axes):
        phase = sum(n_i * th for n_i, th in zip(n, th_axes))
        vals = np.exp(TWO_PI * 1j * phase)
        if j_profile is not None:
            vals = vals * j_profile(j_axes)
        return vals

    return section_from_function(spec, fn)


def dirac_test_section(spec):
    """Generic smooth section for commutator studies: asymmetric Gaussian
    envelope times a few low angle harmonics, negligible at the box edge."""
    k = spec.dim
    h = spec.planck_h
    center = tuple(((-1) ** i) * 0.05 * (i + 2) * h for i in range(k))
    width = tuple(0.055 * (hi - lo) for lo, hi in zip(spec.action_lo, spec.action_hi))

    def fn(j_axes, th_axes):
        envelope = 1.0
        for j, c, w in zip(j_axes, center, width):
            envelope = envelope * np.exp(-(((j - c) / w) ** 2))
        mix = 1.0 + 0.0j
        for i, th in enumerate(th_axes):
            mix = mix + 0.4 / (i + 1) * np.exp(TWO_PI * 1j * th)
            mix = mix + (0.15 - 0.1j) / (i + 1) * np.exp(-2 * TWO_PI * 1j * th)
        return envelope * mix

    return section_from_function(spec, fn)


def gaussian_bump(spec, center=None, width=None, angle_m=None):
    """Smooth test section: Gaussian in the actions times one angle harmonic.

    The default width keeps the tail below ~1e-15 of the peak at the box
    boundary so that support preconditions hold.
    """
    k = spec.dim
    center = center if center is not None else (0.0,) * k
    if width is None:
        width = tuple(0.06 * (hi - lo) for lo, hi in zip(spec.action_lo, spec.action_hi))
    angle_m = angle_m if angle_m is not None else (1,) * k

    def fn(j_axes, th_axes):
        envelope = 1.0
        for j, c, w in zip(j_axes, center, width):
            envelope = envelope * np.exp(-(((j - c) / w) ** 2))
        phase = sum(m_i * th for m_i, th in zip(angle_m, th_axes))
        return envelope * np.exp(TWO_PI * 1j * phase)

    return section_from_function(spec, fn)


# -- differentiation ---------------------------------------------------------


def _spectral_dtheta(spec, values, axis):
    """Exact derivative along the periodic angle axis (Fourier)."""
    full_axis = spec.dim + axis
    n = spec.n_angle[axis]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k = k.copy()
        k[n // 2] = 0.0  # drop the unpaired Nyquist mode's derivative
    shape = [1] * values.ndim
    shape[full_axis] = n
    mult = (TWO_PI * 1j * k).reshape(shape)
    return np.fft.ifft(np.fft.fft(values, axis=full_axis) * mult, axis=full_axis)


def _central_dj(spec, values, axis):
    """4th-order central difference along an action axis; 2 boundary layers invalid."""
    dx = spec.action_spacing(axis)
    out = np.zeros_like(values)
    n = spec.n_action[axis]
    if n < 5:
        raise ValueError("action axis too short for the 5-point stencil")

    def sl(a, b):
        s = [slice(None)] * values.ndim
        s[axis] = slice(a, b)
        return tuple(s)

    out[sl(2, n - 2)] = (
        values[sl(0, n - 4)]
        - 8.0 * values[sl(1, n - 3)]
        + 8.0 * values[sl(3, n - 1)]
        - values[sl(4, n)]
    ) / (12.0 * dx)
    return out


@dataclass(frozen=True)
class VectorField:
    """Vector field with exact observable components on the grid.

    j_components[i] multiplies d/dj_i and theta_components[i] multiplies
    d/dtheta_i; entries may be Observables, scalars, or None (zero).
    """

    dim: int
    j_components: tuple = None
    theta_components: tuple = None

    @classmethod
    def hamiltonian(cls, f):
        """X_f with X . omega = -df: theta-part df/dj, j-part -df/dtheta."""
        dtheta_dt, dj_dt = hamiltonian_vf(f)
        return cls(f.dim, tuple(dj_dt), tuple(dtheta_dt))

    @classmethod
    def angle_direction(cls, dim, axis):
        """The torus direction d/dtheta_axis."""
        comps = [None] * dim
        comps[axis] = 1.0
        return cls(dim, (None,) * dim, tuple(comps))

    @classmethod
    def zero(cls, dim):
        return cls(dim, (None,) * dim, (None,) * dim)

    def component_values(self, spec, which, axis):
        comps = self.j_components if which == "j" else self.theta_components
        comp = None if comps is None else comps[axis]
        if comp is None:
            return None
        if isinstance(comp, Observable):
            if comp.is_zero():
                return None
            j_axes, th_axes = spec.mesh()
            return comp(j_axes, th_axes)
        if np.isscalar(comp):
            return None if comp == 0 else complex(comp)
        return np.asarray(comp)


@dataclass(frozen=True)
class ConnectionForm:
    """The symbol alpha = sum_i j_i dtheta_i together with Planck's constant."""

    planck_h: float

    def pairing(self, spec, X):
        """<alpha|X> on the grid: sum_i j_i X^{theta_i}; None if zero."""
        j_axes, _ = spec.mesh()
        total = None
        for i in range(spec.dim):
            comp = X.component_values(spec, "theta", i)
            if comp is None:
                continue
            contrib = j_axes[i] * comp
            total = contrib if total is None else total + contrib
        return total


def covariant_derivative(psi, X, conn=None):
    """nabla_X psi = X psi - (2 pi i / h) <alpha|X> psi on the grid.

    Spectral in the angle axes, 4th-order central differences in the action
    axes; the result's invalid margin grows by 2 if any action derivative
    was taken.
    """
    spec = psi.spec
    conn = conn if conn is not None else ConnectionForm(spec.planck_h)
    out = np.zeros(spec.shape, dtype=complex)
    margin = psi.margin
    used_fd = False
    for i in range(spec.dim):
        comp = X.component_values(spec, "j", i)
        if comp is None:
            continue
        out += comp * _central_dj(spec, psi.values, i)
        used_fd = True
    for i in range(spec.dim):
        comp = X.component_values(spec, "theta", i)
        if comp is None:
            continue
        out += comp * _spectral_dtheta(spec, psi.values, i)
    pairing = conn.pairing(spec, X)
    if pairing is not None:
        out -= (TWO_PI * 1j / conn.planck_h) * pairing * psi.values
    if used_fd:
        margin += 2
    return GridSection(spec, out, margin)


def prequant_apply(f, psi):
    """P_f psi = -i hbar nabla_{X_f} psi + f psi."""
    spec = psi.spec
    if f.dim != spec.dim:
        raise ValueError("observable dimension does not match grid")
    X = VectorField.hamiltonian(f)
    nab = covariant_derivative(psi, X)
    j_axes, th_axes = spec.mesh()
    vals = -1j * spec.hbar * nab.values + f(j_axes, th_axes) * psi.values
    return GridSection(spec, vals, nab.margin)


def check_interior_support(psi, layers=6, rel_tol=1e-10):
    """Raise SupportError unless psi is negligible on the outer action layers."""
    peak = float(np.abs(psi.values).max())
    if peak == 0.0:
        return
    mask = psi.valid_mask(extra_margin=layers)
    boundary_peak = float(np.abs(psi.values[~mask]).max()) if (~mask).any() else 0.0
    if boundary_peak > rel_tol * peak:
        raise SupportError(
            f"section carries {boundary_peak / peak:.2e} of its peak within "
            f"{layers} layers of the action boundary (tolerance {rel_tol:.1e})"
        )


def dirac_residual(f, g, psi):
    """Relative size of [P_f, P_g] psi - i hbar P_{f,g} psi over valid nodes."""
    check_interior_support(psi)
    spec = psi.spec
    pf_pg = prequant_apply(f, prequant_apply(g, psi))
    pg_pf = prequant_apply(g, prequant_apply(f, psi))
    bracket = poisson(f, g)
    p_br = prequant_apply(bracket, psi)
    resid = pf_pg.values - pg_pf.values - 1j * spec.hbar * p_br.values
    margin = max(pf_pg.margin, pg_pf.margin, p_br.margin)
    mask = GridSection(spec, resid, margin).valid_mask()
    denom = float(np.linalg.norm(psi.values[mask]))
    if denom == 0.0:
        raise ValueError("test section vanishes on the valid region")
    return float(np.linalg.norm(resid[mask])) / denom


@dataclass(frozen=True)
class QuantomorphismSpec:
    """Finite-time flow data: observable and flow time."""

    observable: Observable
    time: float

    def __post_init__(self):
        if not math.isfinite(self.time):
            raise ValueError("flow time must be finite")


def quantomorphism_flow(q, psi):
    """Finite-time prequantum flow e^{t Z_f} for an action-only observable.

    Realized as a global phase e^{-2 pi i t f/h}, the parallel-transport
    phase e^{+2 pi i t <alpha|X_f>/h}, and the exact Fourier shift of the
    angles by -t df/dj.  Angle-dependent observables are rejected: their
    flows move the actions and exit the box.
    """
    f, t = q.observable, q.time
    spec = psi.spec
    k_dim = spec.dim
    if f.dim != k_dim:
        raise ValueError("observable dimension does not match grid")
    if not f.is_action_only():
        raise UnsupportedObservableError(
            "quantomorphism_flow supports action-only observables; "
            "use shift flows for angle-type generators"
        )
    # evaluate f, df/dj and <alpha|X_f> on the action mesh alone
    j_only = np.meshgrid(*[spec.action_axis(i) for i in range(k_dim)], indexing="ij", sparse=True)
    zero_th = [0.0] * k_dim
    f_j = [f.d_dj(i) for i in range(k_dim)]
    full = spec.n_action + (1,) * k_dim

    def on_actions(values):
        return np.broadcast_to(np.asarray(values, dtype=float), spec.n_action).reshape(full)

    shifts = [on_actions(np.real(df(j_only, zero_th)) * t) for df in f_j]

    vals = np.fft.fftn(psi.values, axes=tuple(range(k_dim, 2 * k_dim)))
    for i in range(k_dim):
        n = spec.n_angle[i]
        freq = np.fft.fftfreq(n, d=1.0 / n)
        shape = [1] * vals.ndim
        shape[k_dim + i] = n
        vals = vals * np.exp(-TWO_PI * 1j * freq.reshape(shape) * shifts[i])
    vals = np.fft.ifftn(vals, axes=tuple(range(k_dim, 2 * k_dim)))

    f_vals = on_actions(np.real(f(j_only, zero_th)))
    alpha_x = on_actions(
        sum(np.real(j_only[i] * f_j[i](j_only, zero_th)) for i in range(k_dim))
    )
    phase = np.exp(-TWO_PI * 1j * t * f_vals / spec.planck_h) * np.exp(
        TWO_PI * 1j * t * alpha_x / spec.planck_h
    )
    return GridSection(spec, vals * phase, psi.margin)


def _branch_representative(theta, window_lo):
    """Unique representative of theta (mod 1) with values in [lo, lo+1)."""
    return window_lo + np.mod(theta - window_lo, 1.0)


def shift_flow_apply(psi, direction, t, window_lo=0.0):
    """e^{t Z_{c.theta}} psi computed in one angle branch window.

    The generator is the angle function c.theta read through the branch
    window [lo, lo+1) per axis; its flow translates the actions by -t c,
    realized as an exact index shift (t c / spacing must be integral).
    Layers vacated by the shift become part of the invalid margin.
    """
    spec = psi.spec
    c = tuple(int(x) for x in direction)
    if len(c) != spec.dim:
        raise ValueError("direction dimension does not match grid")
    lo = (window_lo,) * spec.dim if np.isscalar(window_lo) else tuple(window_lo)

    # push-forward: new values at j come from j + t c, angles unmoved
    vals = psi.values
    max_shift = 0
    for i, c_i in enumerate(c):
        if c_i == 0:
            continue
        steps = t * c_i / spec.action_spacing(i)
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError(
                f"flow time {t} times direction {c_i} is not an integer number of "
                f"action-grid steps on axis {i}"
            )
        steps = int(round(steps))
        if abs(steps) >= spec.n_action[i]:
            raise DomainError(f"action box too narrow for shift of {steps} nodes on axis {i}")
        vals = np.roll(vals, -steps, axis=i)
        max_shift = max(max_shift, abs(steps))

    _, th_axes = spec.mesh()
    phase = 0.0
    for i, c_i in enumerate(c):
        if c_i:
            phase = phase + c_i * _branch_representative(th_axes[i], lo[i])
    vals = np.exp(-TWO_PI * 1j * t * phase / spec.planck_h) * vals
    return GridSection(spec, vals, psi.margin + max_shift)


def shift_flow_single_valuedness(spec, axis, t=None, psi=None, windows=(0.0, -0.37)):
    """Sup-norm discrepancy of the shift flow between two branch windows.

    At t = h the phase e^{-2 pi i t c.theta / h} has integer frequency and
    the two windows agree to rounding; at fractions of h the discrepancy is
    O(1), the multivaluedness of the generator reappearing.
    """
    t = spec.planck_h if t is None else t
    if psi is None:
        psi = gaussian_bump(spec)
    direction = tuple(1 if i == axis else 0 for i in range(spec.dim))
    out_a = shift_flow_apply(psi, direction, t, windows[0])
    out_b = shift_flow_apply(psi, direction, t, windows[1])
    mask = out_a.valid_mask() & out_b.valid_mask()
    return float(np.abs(out_a.values[mask] - out_b.values[mask]).max())


# -- import/export -----------------------------------------------------------


def export_section(psi, data_path, sidecar_path):
    """Write raw complex128 node values plus a JSON sidecar with the GridSpec."""
    import json

    psi.values.astype(np.complex128).tofile(data_path)
    spec = psi.spec
    doc = {
        "action_lo": list(spec.action_lo),
        "action_hi": list(spec.action_hi),
        "n_action": list(spec.n_action),
        "n_angle": list(spec.n_angle),
        "planck_h": spec.planck_h,
        "margin": psi.margin,
        "dtype": "complex128",
        "order": "action-major, axis 0 slowest",
    }
    with open(sidecar_path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def import_section(data_path, sidecar_path):
    """Read a section written by export_section."""
    import json

    with open(sidecar_path) as fh:
        doc = json.load(fh)
    spec = GridSpec(
        tuple(doc["action_lo"]),
        tuple(doc["action_hi"]),
        tuple(doc["n_action"]),
        tuple(doc["n_angle"]),
        doc["planck_h"],
    )
    vals = np.fromfile(data_path, dtype=np.complex128).reshape(spec.shape)
    return GridSection(spec, vals, int(doc.get("margin", 0)))
