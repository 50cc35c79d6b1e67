"""Spherical pendulum: energy-momentum plane, actions, spectrum, monodromy.

The pendulum is the constrained system on the unit sphere with energy
e = |p|^2/2 + q3 and angular momentum j = q1 p2 - q2 p1.  Reduction at
fixed j leaves a one-degree-of-freedom motion in z = q3 with
zdot^2 = P(z) = 2(e - z)(1 - z^2) - j^2 on [-1, 1].

Quantities on the regular set:
    period    T     = 2 int dz / sqrt(P)
    rotation  Theta = 2 j int dz / ((1 - z^2) sqrt(P))
    action    I2    = (1/pi) int sqrt(P) / (1 - z^2) dz
over the positivity interval [z1, z2].  The square-root turning points are
removed analytically by z = z1 + (z2 - z1) sin^2 u before quadrature.

Bohr-Sommerfeld tori satisfy I2 = n1 * h and j = n2 * h.  Tracking the
continuous branch of Theta around a loop encircling the isolated critical
value (1, 0) changes it by 2 pi times the monodromy integer; the lattice
labels shear by [[1, m], [0, 1]].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import BranchTrackingError, DomainError, QuadratureError

TWO_PI = 2.0 * math.pi

REGULAR = "regular"
ISOLATED_CRITICAL = "isolated_critical"
BOUNDARY = "boundary"
EMPTY = "empty"


@dataclass(frozen=True)
class EMValue:
    """Point (h, j) of the energy-momentum plane (h = energy)."""

    h: float
    j: float

    def __post_init__(self):
        if not (math.isfinite(self.h) and math.isfinite(self.j)):
            raise ValueError("energy-momentum values must be finite")


def reduced_cubic(v):
    """Coefficients of P(z) = 2(h - z)(1 - z^2) - j^2, highest power first."""
    return np.array([2.0, -2.0 * v.h, -2.0, 2.0 * v.h - v.j * v.j])


def _cubic_max(v):
    """Maximum of the reduced cubic over [-1, 1] (closed form)."""
    coeffs = reduced_cubic(v)
    # P'(z) = 6 z^2 - 4 h z - 2, always two real roots
    disc = math.sqrt(4.0 * v.h * v.h + 12.0)
    candidates = [-1.0, 1.0]
    for z in ((2.0 * v.h + disc) / 6.0, (2.0 * v.h - disc) / 6.0):
        if -1.0 < z < 1.0:
            candidates.append(z)
    return max(float(np.polyval(coeffs, z)) for z in candidates)


def classify(v):
    """Type of an energy-momentum value: regular, isolated_critical, boundary, empty."""
    if v.j == 0.0:
        # z = -+1 are reduction poles, not turning points; classify by energy
        if v.h == 1.0:
            return ISOLATED_CRITICAL
        if v.h > -1.0:
            return REGULAR
        return BOUNDARY if v.h == -1.0 else EMPTY
    peak = _cubic_max(v)
    scale = max(1.0, abs(v.h), v.j * v.j)
    if peak > 1e-12 * scale:
        return REGULAR
    if peak >= -1e-12 * scale:
        return BOUNDARY
    return EMPTY


@dataclass(frozen=True)
class TurningInterval:
    """Positivity interval [z1, z2] of the reduced cubic plus its third root.

    south_gap = 1 + z1 and north_gap = 1 - z2 are kept separately: for
    small |j| the turning points sit within rounding distance of the
    reduction poles z = -+1 and only the gaps remain accurate.
    """

    z1: float
    z2: float
    z3: float
    south_gap: float
    north_gap: float

    @property
    def width(self):
        return self.z2 - self.z1


def _pole_gap(v, pole_sign, start):
    """Distance of the turning point from the pole z = -pole_sign... solved stably.

    For the root z = -1 + g: g = j^2 / (2 (h + 1 - g)(2 - g));
    for the root z = +1 - g: g = j^2 / (2 (h - 1 + g)(2 - g)).
    """
    jj = v.j * v.j
    g = max(start, 0.0)
    for _ in range(6):
        if pole_sign < 0:
            denom = 2.0 * (v.h + 1.0 - g) * (2.0 - g)
        else:
            denom = 2.0 * (v.h - 1.0 + g) * (2.0 - g)
        if denom <= 0:
            raise DomainError(f"pole-gap iteration left its domain at {v}")
        g = jj / denom
    return g


def turning_points(v):
    """Roots of the reduced cubic bracketing the motion, Newton-polished."""
    kind = classify(v)
    if kind != REGULAR:
        raise ValueError(f"turning points only defined for regular values, got {kind}")
    coeffs = reduced_cubic(v)
    deriv = np.polyder(coeffs)

    if v.j == 0.0:
        # exact factorization P = 2(h - z)(1 - z)(1 + z)
        if v.h < 1.0:
            return TurningInterval(-1.0, v.h, 1.0, 0.0, 1.0 - v.h)
        return TurningInterval(-1.0, 1.0, v.h, 0.0, 0.0)

    roots = np.roots(coeffs)
    roots = np.sort(np.real(roots[np.abs(np.imag(roots)) < 1e-8]))
    if len(roots) != 3:
        raise DomainError(f"expected 3 real roots at {v}, got {roots}")
    polished = []
    for z in roots:
        p = float(np.polyval(coeffs, z))
        dp = float(np.polyval(deriv, z))
        if dp != 0.0:
            z = z - p / dp
        polished.append(float(z))
    z1, z2, z3 = polished

    if 1.0 + z1 < 1e-6:
        south_gap = _pole_gap(v, -1, 1.0 + z1)
        z1 = -1.0 + south_gap
    else:
        south_gap = 1.0 + z1
    if 1.0 - z2 < 1e-6 and v.h > 1.0:
        north_gap = _pole_gap(v, +1, 1.0 - z2)
        z2 = 1.0 - north_gap
    else:
        north_gap = 1.0 - z2

    scale = max(1.0, abs(v.h), v.j * v.j)
    for z in (z1, z2):
        if abs(float(np.polyval(coeffs, z))) > 1e-10 * scale:
            raise DomainError(f"turning point polish failed at {v}")
    if not (south_gap > 0.0 and north_gap > 0.0 and z1 < z2 <= z3 + 1e-12):
        raise DomainError(f"unexpected root layout {polished} at {v}")
    return TurningInterval(z1, z2, z3, south_gap, north_gap)


def _quad(fn, rel_tol=1e-11, peaks=()):
    """Adaptive quadrature over [0, pi/2] with optional peak hints."""
    import warnings

    kwargs = {"epsabs": 0.0, "epsrel": rel_tol, "limit": 800}
    if peaks:
        kwargs["points"] = sorted(set(peaks))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(fn, 0.0, 0.5 * math.pi, **kwargs)
    if not math.isfinite(val):
        raise QuadratureError("quadrature returned a non-finite value")
    if err > max(1e-9 * abs(val), 1e-13):
        raise QuadratureError(f"quadrature error estimate {err:.2e} too large for value {val:.6e}")
    return val


def _substituted(ti):
    """z(u) and the shared factors of the sin^2 substitution."""
    width = ti.z2 - ti.z1

    def z_of(u):
        return ti.z1 + width * math.sin(u) ** 2

    return width, z_of


def period(v):
    """Time of one z-oscillation, T = 2 int dz / sqrt(P)."""
    ti = turning_points(v)
    _, z_of = _substituted(ti)

    def fn(u):
        return 1.0 / math.sqrt(ti.z3 - z_of(u))

    return 2.0 * math.sqrt(2.0) * _quad(fn)


def _pole_integral(gap, width, c_near, c_far):
    """int_0^{pi/2} du / ((gap + width sin^2 u) sqrt(c_near + (c_far - c_near) sin^2 u)).

    The substitution tan u = sqrt(gap/(gap+width)) tan phi absorbs the
    Lorentzian peak of width sqrt(gap/width) exactly; the transformed
    integrand is smooth and O(1) uniformly as gap -> 0:

        (gap (gap+width))^{-1/2} int_0^{pi/2}
            sqrt((cos^2 + s^2 sin^2) / (c_near cos^2 + c_far s^2 sin^2)) dphi
    """
    s2 = gap / (gap + width)

    def fn(phi):
        c = math.cos(phi) ** 2
        q = 1.0 - c
        return math.sqrt((c + s2 * q) / (c_near * c + c_far * s2 * q))

    return _quad(fn) / math.sqrt(gap * (gap + width))


def rotation_angle(v):
    """Azimuthal advance per z-oscillation; odd in j, signalled at j = 0.

    Computed from the partial fractions 1/(1 - z^2) = [1/(1+z) + 1/(1-z)]/2,
    each pole handled by a tangent substitution so the accuracy is uniform
    down to turning points exponentially close to z = -+1.
    """
    if v.j == 0.0:
        raise DomainError("rotation angle has a branch point at j = 0")
    ti = turning_points(v)
    south = _pole_integral(ti.south_gap, ti.width, ti.z3 - ti.z1, ti.z3 - ti.z2)
    north = _pole_integral(ti.north_gap, ti.width, ti.z3 - ti.z2, ti.z3 - ti.z1)
    return math.sqrt(2.0) * v.j * (south + north)


def action_I2(v):
    """Second action (1/pi) int sqrt(P)/(1 - z^2) dz over the z-cycle.

    Normalized so the Bohr-Sommerfeld condition reads I2 = n1 * h.  The
    simple poles of 1/(1 - z^2) at z = -+1 cancel analytically against the
    substitution factors when a turning point sits on a pole (j = 0).
    """
    ti = turning_points(v)
    width, z_of = _substituted(ti)
    plus_cancel = ti.south_gap == 0.0
    minus_cancel = ti.north_gap == 0.0

    def fn(u):
        s2 = math.sin(u) ** 2
        c2 = 1.0 - s2
        z = z_of(u)
        if plus_cancel:
            ratio_plus = 1.0 / width
        else:
            ratio_plus = s2 / (ti.south_gap + width * s2)
        if minus_cancel:
            ratio_minus = 1.0 / width
        else:
            ratio_minus = c2 / (ti.north_gap + width * c2)
        return ratio_plus * ratio_minus * math.sqrt(ti.z3 - z)

    # bounded sigmoid transitions near the poles still deserve refinement hints
    peaks = []
    if not plus_cancel and ti.south_gap < 0.05 * width:
        peaks.append(math.asin(min(1.0, math.sqrt(ti.south_gap / width))))
    if not minus_cancel and ti.north_gap < 0.05 * width:
        peaks.append(0.5 * math.pi - math.asin(min(1.0, math.sqrt(ti.north_gap / width))))
    return (2.0 * math.sqrt(2.0) * width * width / math.pi) * _quad(fn, peaks=peaks)


def min_energy(j):
    """Lower boundary of the energy-momentum image at fixed j (relative equilibrium)."""
    if j == 0.0:
        return -1.0

    def slope(z):
        return 1.0 + j * j * z / (1.0 - z * z) ** 2

    z_star = optimize.brentq(slope, -1.0 + 1e-12, -1e-14, xtol=1e-15, rtol=8.9e-16)
    return z_star + j * j / (2.0 * (1.0 - z_star * z_star))


@dataclass(frozen=True)
class ActionData:
    """Actions and periods of one regular torus."""

    value: EMValue
    I1: float
    I2: float
    theta: float
    T: float


def action_data(v):
    """Bundle (I1, I2, Theta, T) at a regular value."""
    return ActionData(v, v.j, action_I2(v), rotation_angle(v), period(v))


def ode_cross_check(v, rtol=1e-12, atol=1e-14):
    """Independent oracle: integrate the reduced motion for one period.

    Returns (T, I2, Theta, energy_drift) from the ODE z'' = P'(z)/2 with
    auxiliary quadratures I2' = zdot^2 / (2 pi (1 - z^2)) and
    Theta' = j / (1 - z^2).  The period is the time between two upward
    crossings of an interior section; nothing from the quadrature route
    enters except the turning interval used to place that section.
    """
    coeffs = reduced_cubic(v)
    deriv = np.polyder(coeffs)
    ti = turning_points(v)
    # start at the potential-well bottom (max of P) with upward velocity
    z0 = optimize.brentq(
        lambda z: float(np.polyval(deriv, z)), ti.z1, ti.z2, xtol=1e-15, rtol=8.9e-16
    )
    w0 = math.sqrt(float(np.polyval(coeffs, z0)))
    z_section = z0 + 0.3 * (ti.z2 - z0)

    def rhs(_, y):
        z, w = y[0], y[1]
        # p_z zdot = P/(1-z^2) = 2(h - z) - j^2/(1-z^2): stays conditioned
        # when the j = 0 motion touches the reduction pole z = -1
        one_minus_z2 = (1.0 - z) * (1.0 + z)
        jj = v.j * v.j
        return [
            w,
            0.5 * float(np.polyval(deriv, z)),
            (2.0 * (v.h - z) - (jj / one_minus_z2 if jj else 0.0)) / TWO_PI,
            v.j / one_minus_z2 if v.j else 0.0,
        ]

    def crossing(_, y):
        return y[0] - z_section

    crossing.direction = 1.0

    # crude harmonic period estimate just to size the window
    curvature = float(np.polyval(np.polyder(deriv), z0))
    t_est = TWO_PI / math.sqrt(max(-0.5 * curvature, 1e-9))
    window = 20.0 * t_est
    for _ in range(4):
        sol = integrate.solve_ivp(
            rhs,
            (0.0, window),
            [z0, w0, 0.0, 0.0],
            events=crossing,
            rtol=rtol,
            atol=atol,
            dense_output=True,
        )
        if sol.t_events[0].size >= 2:
            break
        window *= 8.0
    else:
        raise DomainError(f"ODE oracle found no period at {v}")
    t1, t2 = float(sol.t_events[0][0]), float(sol.t_events[0][1])
    T = t2 - t1
    y1, y2 = sol.sol(t1), sol.sol(t2)
    i2 = float(y2[2] - y1[2])
    theta = float(y2[3] - y1[3])
    drift = 0.0
    for t in np.linspace(t1, t2, 257):
        z, w = sol.sol(t)[:2]
        drift = max(drift, abs(float(np.polyval(coeffs, z)) - w * w))
    return T, i2, theta, drift


# -- joint spectrum -----------------------------------------------------------


@dataclass(frozen=True)
class SpectrumPoint:
    n1: int
    n2: int
    h: float
    j: float


@dataclass
class SpectrumResult:
    points: list
    warnings: list = field(default_factory=list)


def _excluded_h_interval(j, center, radius):
    """h-interval around the critical value to skip on the line of fixed j."""
    dj = j - center[1]
    if abs(dj) >= radius:
        return None
    half = math.sqrt(radius * radius - dj * dj)
    return center[0] - half, center[0] + half


def bs_spectrum(window, planck_h, exclusion_radius=0.02, boundary_margin=1e-6, rel_tol=1e-8):
    """Bohr-Sommerfeld lattice points in an energy-momentum window.

    window = (h_min, h_max, j_min, j_max).  For every integer n2 with
    j = n2*h in the window, solves I2(h, j) = n1*h for h by bracketed
    bisection on each monotone piece of the admissible h-range, skipping a
    disc of exclusion_radius around the critical value (1, 0).  Points are
    sorted by (n2, n1); solver failures are recorded, not raised.
    """
    h_min, h_max, j_min, j_max = map(float, window)
    if not (h_min < h_max and j_min < j_max):
        raise ValueError("empty window")
    hp = float(planck_h)
    if hp <= 0:
        raise ValueError("planck_h must be positive")

    points, warnings = [], []
    for n2 in range(math.ceil(j_min / hp - 1e-9), math.floor(j_max / hp + 1e-9) + 1):
        j = n2 * hp
        lo = max(h_min, min_energy(j) + boundary_margin)
        if lo >= h_max:
            continue
        segments = [(lo, h_max)]
        hole = _excluded_h_interval(j, (1.0, 0.0), exclusion_radius)
        if hole is not None:
            a, b = hole
            segments = [
                seg
                for seg in ((lo, min(a, h_max)), (max(b, lo), h_max))
                if seg[0] < seg[1]
            ]
        for a, b in segments:
            try:
                i_lo = action_I2(EMValue(a, j))
                i_hi = action_I2(EMValue(b, j))
            except (DomainError, ValueError) as exc:
                warnings.append(f"n2={n2}: endpoint action failed on [{a}, {b}]: {exc}")
                continue
            n1_first = max(1, math.ceil(i_lo / hp - 1e-9))
            n1_last = math.floor(i_hi / hp + 1e-9)
            for n1 in range(n1_first, n1_last + 1):
                target = n1 * hp

                def gap(h, target=target, j=j):
                    return action_I2(EMValue(h, j)) - target

                try:
                    ga, gb = gap(a), gap(b)
                    if ga > 0 or gb < 0:
                        if min(abs(ga), abs(gb)) > rel_tol * hp:
                            continue
                        root = a if abs(ga) <= abs(gb) else b
                    else:
                        root = optimize.brentq(gap, a, b, xtol=1e-13, rtol=8.9e-16)
                except (ValueError, DomainError, QuadratureError) as exc:
                    warnings.append(f"n1={n1}, n2={n2}: root solve failed: {exc}")
                    continue
                if abs(gap(root)) > rel_tol * hp:
                    warnings.append(f"n1={n1}, n2={n2}: residual too large at h={root}")
                    continue
                points.append(SpectrumPoint(n1, n2, float(root), j))
    points.sort(key=lambda p: (p.n2, p.n1))
    return SpectrumResult(points, warnings)


# -- monodromy ----------------------------------------------------------------


@dataclass(frozen=True)
class LoopSample:
    t: float
    h: float
    j: float
    theta: float
    theta_unwrapped: float


@dataclass(frozen=True)
class MonodromyReport:
    """Continuation of the rotation angle around a loop and the label shear."""

    center: tuple
    radius: float
    requested_samples: int
    orientation: str
    samples: tuple
    delta_theta: float
    monodromy_integer: int
    matrix: tuple
    residual: float
    refinements: int

    @property
    def det(self):
        (a, b), (c, d) = self.matrix
        return a * d - b * c


def _nearest_branch(theta, reference):
    """Representative of theta mod 2 pi closest to the reference value."""
    return theta + TWO_PI * round((reference - theta) / TWO_PI)


def monodromy(center=(1.0, 0.0), radius=0.5, samples=256, orientation="ccw", max_depth=48):
    """Track the rotation angle around a circle and extract the lattice shear.

    The loop is traversed counterclockwise in the (h, j) plane for
    orientation="ccw" (clockwise for "cw"), starting near the top so no
    sample lands on the j = 0 branch line.  Successive samples are
    continued by nearest-branch unwrapping; intervals moving faster than
    pi/4 are bisected, and a gap beyond pi/2 at the depth limit raises
    BranchTrackingError.

    After one circuit the unwrapped rotation angle changes by 2 pi times an
    integer winding.  Since dI2/dj = -Theta/(2 pi), the continued action
    gains -winding * j, so quantum numbers shear by the matrix
    [[1, m], [0, 1]] with m = -winding; counterclockwise gives m = +1.
    The rounding residual of the winding is reported alongside.
    """
    if radius < 0:
        raise ValueError("loop radius must be nonnegative")
    if radius == 0 and classify(EMValue(*center)) != REGULAR:
        raise ValueError("degenerate loops are only defined around regular points")
    if samples < 16:
        raise ValueError("need at least 16 samples")
    if samples % 4 != 0:
        raise ValueError("sample count must be a multiple of 4 (keeps samples off j = 0)")
    if orientation not in ("ccw", "cw"):
        raise ValueError("orientation must be 'ccw' or 'cw'")
    sign = 1.0 if orientation == "ccw" else -1.0
    cx, cy = float(center[0]), float(center[1])

    def em_at(t):
        return EMValue(cx + radius * math.cos(t), cy + radius * math.sin(t))

    def theta_at(t):
        v = em_at(t)
        kind = classify(v)
        if kind != REGULAR:
            raise DomainError(f"loop leaves the regular set at {v} ({kind})")
        return rotation_angle(v)

    t0 = 0.5 * math.pi + math.pi / samples
    ts = [t0 + sign * TWO_PI * k / samples for k in range(samples + 1)]
    raw = [theta_at(t) for t in ts]

    unwrapped = [raw[0]]
    refinements = 0
    records = [(ts[0], raw[0], raw[0])]
    for idx in range(1, len(ts)):
        prev_t, prev_u = records[-1][0], unwrapped[-1]
        # refine the interval (prev_t, ts[idx]) until steps are below pi/4
        stack_t, stack_raw = [ts[idx]], [raw[idx]]
        depth = 0
        while True:
            cand = _nearest_branch(stack_raw[-1], prev_u)
            if abs(cand - prev_u) < 0.25 * math.pi:
                prev_u = cand
                prev_t = stack_t.pop()
                stack_raw.pop()
                if not stack_t:
                    break
                continue
            depth += 1
            refinements += 1
            if depth > max_depth:
                raise BranchTrackingError(
                    f"branch tracking stuck near t = {stack_t[-1]:.6f} "
                    f"(gap {abs(cand - prev_u):.3f})"
                )
            mid = 0.5 * (prev_t + stack_t[-1])
            stack_t.append(mid)
            stack_raw.append(theta_at(mid))
        unwrapped.append(prev_u)
        records.append((ts[idx], raw[idx], prev_u))

    delta = unwrapped[-1] - unwrapped[0]
    winding = round(delta / TWO_PI)
    residual = abs(delta / TWO_PI - winding)
    m = -winding
    sample_rows = tuple(
        LoopSample(t, em_at(t).h, em_at(t).j, r, u) for (t, r, u) in records
    )
    return MonodromyReport(
        center=(cx, cy),
        radius=radius,
        requested_samples=samples,
        orientation=orientation,
        samples=sample_rows,
        delta_theta=delta,
        monodromy_integer=int(m),
        matrix=((1, int(m)), (0, 1)),
        residual=float(residual),
        refinements=refinements,
    )


def label_transport(label, report_or_matrix):
    """Apply the monodromy matrix to an integer label (n1, n2)."""
    matrix = (
        report_or_matrix.matrix
        if isinstance(report_or_matrix, MonodromyReport)
        else report_or_matrix
    )
    n1, n2 = int(label[0]), int(label[1])
    (a, b), (c, d) = matrix
    return (a * n1 + b * n2, c * n1 + d * n2)


# -- artifact formatting -------------------------------------------------------


def _fmt(x):
    """Shortest representation up to 12 significant digits (byte-stable)."""
    return f"{x:.12g}"


def spectrum_csv(result):
    """CSV rows n1,n2,h,j sorted by (n2, n1)."""
    lines = ["n1,n2,h,j"]
    for p in result.points:
        lines.append(f"{p.n1},{p.n2},{_fmt(p.h)},{_fmt(p.j)}")
    return "\n".join(lines) + "\n"


def monodromy_json(report):
    """Full monodromy report, sample trace included, as deterministic JSON."""
    import json

    doc = {
        "center": [report.center[0], report.center[1]],
        "radius": report.radius,
        "requested_samples": report.requested_samples,
        "orientation": report.orientation,
        "delta_theta": report.delta_theta,
        "delta_theta_over_2pi": report.delta_theta / TWO_PI,
        "monodromy_integer": report.monodromy_integer,
        "matrix": [list(row) for row in report.matrix],
        "residual": report.residual,
        "refinements": report.refinements,
        "samples": [
            {
                "t": s.t,
                "h": s.h,
                "j": s.j,
                "theta": s.theta,
                "theta_unwrapped": s.theta_unwrapped,
            }
            for s in report.samples
        ],
    }
    return json.dumps(doc, indent=2)


def spectrum_svg(result, width=640, height=480, exclusions=((1.0, 0.0),)):
    """Static SVG scatter of the joint spectrum with the critical value marked."""
    pts = result.points
    if pts:
        h_vals = [p.h for p in pts] + [c[0] for c in exclusions]
        j_vals = [p.j for p in pts] + [c[1] for c in exclusions]
        h_lo, h_hi = min(h_vals), max(h_vals)
        j_lo, j_hi = min(j_vals), max(j_vals)
    else:
        h_lo, h_hi, j_lo, j_hi = -1.0, 2.0, -1.0, 1.0
    pad_h = 0.05 * (h_hi - h_lo or 1.0)
    pad_j = 0.05 * (j_hi - j_lo or 1.0)
    h_lo, h_hi = h_lo - pad_h, h_hi + pad_h
    j_lo, j_hi = j_lo - pad_j, j_hi + pad_j

    def sx(h):
        return _fmt(40 + (width - 60) * (h - h_lo) / (h_hi - h_lo))

    def sy(j):
        return _fmt(height - 30 - (height - 50) * (j - j_lo) / (j_hi - j_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="40" y1="{height - 30}" x2="{width - 20}" y2="{height - 30}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="40" y1="20" x2="40" y2="{height - 30}" stroke="black" stroke-width="1"/>',
        f'<text x="{width // 2}" y="{height - 8}" font-size="12" '
        'text-anchor="middle">energy</text>',
        '<text x="12" y="16" font-size="12">momentum</text>',
    ]
    for p in pts:
        parts.append(f'<circle cx="{sx(p.h)}" cy="{sy(p.j)}" r="2.2" fill="black"/>')
    for cx, cy in exclusions:
        parts.append(
            f'<g stroke="red" stroke-width="1.2">'
            f'<line x1="{sx(cx)}" y1="{_fmt(float(sy(cy)) - 5)}" '
            f'x2="{sx(cx)}" y2="{_fmt(float(sy(cy)) + 5)}"/>'
            f'<line x1="{_fmt(float(sx(cx)) - 5)}" y1="{sy(cy)}" '
            f'x2="{_fmt(float(sx(cx)) + 5)}" y2="{sy(cy)}"/></g>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
