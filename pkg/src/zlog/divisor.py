"""Pseudo-divisors: weighted, possibly non-discrete supports in the plane.

The base divisor of a spectral datum assigns to each cone point
w = sum_i k_i Log(lambda_i) the weight sum_k C_k over the (finitely many)
compositions k landing there -- the coefficients of the term cloud.  Three
derived divisors matter:

* the periodification, adding all 2 pi i j translates (one-sided variants
  keep only j >= 1 or j <= -1);

* the exponential pullback under z = e^{-w}, whose support is where the
  meromorphic tail has its poles; its multiplicity is constant along each
  fiber {w + 2 pi i j} (that convention is forced by matching pole orders
  of the tail series);

* the mirrored sum d(z) + d(conj z), the divisor controlling the
  absolute-value factor (counts involve |.|, which drags in the conjugate
  datum).

Weights are exact rationals (the eps_i are rational); coinciding points are
merged by clustering with radius 1e-9, and clusters whose weights cancel to
zero are dropped entirely -- cancellation is a real phenomenon (a product
datum can place a positive and a negative term on the same point) and the
dropped point genuinely carries no pole.

Local finiteness cannot be decided from a truncation, so classification is
rule-based: small data (N <= 2 for the base divisor, N <= 1 periodified),
lattice data (all lambda_i = zeta_i q^{j_i/2} with zeta_i of finite order,
support inside Z*(log q)/2 + 2 pi i Z/M), and products of certified factors.
Everything else is Undetermined, reported with the minimum pairwise gap of a
truncated support cloud as a diagnostic (never a hard claim either way).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from zlog.cloud import build_cloud
from zlog.errors import ValidationError

CLUSTER_RADIUS = 1e-9
UNSTABLE_PARTIAL = 1e12
MAX_LATTICE_ORDER = 64


@dataclass(frozen=True)
class Window:
    """Closed rectangle [re_min, re_max] x [im_min, im_max]."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min <= self.re_max and self.im_min <= self.im_max):
            raise ValidationError("window bounds out of order")

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (
            self.re_min - pad <= z.real <= self.re_max + pad
            and self.im_min - pad <= z.imag <= self.im_max + pad
        )

    @property
    def height(self) -> float:
        return self.im_max - self.im_min


@dataclass(frozen=True)
class SupportPoint:
    """One merged support cluster.

    ``multiplicity`` is the exact rational weight (nonzero -- cancelled
    clusters are dropped); ``level`` the minimal contributing level;
    ``contributors`` how many (k, j) pairs landed here within truncation;
    ``unstable`` flags clusters whose partial weight sums exceeded 1e12 in
    magnitude on the way (the infinity heuristic -- treat the weight as
    unreliable)."""

    location: complex
    multiplicity: Fraction
    level: int
    contributors: int
    unstable: bool = False

    def __post_init__(self):
        if self.multiplicity == 0 and not self.unstable:
            raise ValidationError("support points carry nonzero weight")
        if self.contributors < 1:
            raise ValidationError("support points need at least one contributor")


@dataclass(frozen=True)
class FinitenessVerdict:
    """status: locally_finite | undetermined | not_locally_finite_witness.

    ``rule`` names the certificate when locally finite; ``lattice_modulus``
    carries M for the lattice rule; ``min_gap`` is the smallest pairwise
    distance seen in the truncated periodified support (diagnostic)."""

    status: str
    rule: Optional[str] = None
    min_gap: Optional[float] = None
    lattice_modulus: Optional[int] = None


@dataclass(frozen=True)
class PseudoDivisor:
    """Truncated view of a divisor inside a window.

    kind: base | periodic_plus | periodic_minus | periodic | pullback |
    mirrored.  ``coverage_certified`` says whether every omitted term
    (level > L_max) probably lies outside the window (geometric bound on the
    real part); it is False when the window reaches further left than the
    level-(L_max+1) bound."""

    points: tuple
    window: Window
    L_max: int
    J_max: int
    kind: str
    coverage_certified: bool = True
    verdict: Optional[FinitenessVerdict] = None

    def __post_init__(self):
        for a, b in zip(self.points, self.points[1:]):
            if abs(a.location - b.location) <= CLUSTER_RADIUS:
                raise ValidationError("support points must be merged before construction")

    def multiplicity_at(self, z: complex, tol: float = CLUSTER_RADIUS) -> Fraction:
        for p in self.points:
            if abs(p.location - z) <= tol:
                return p.multiplicity
        return Fraction(0)

    def locations(self) -> np.ndarray:
        return np.array([p.location for p in self.points], dtype=np.complex128)


def _merge_clusters(raw: Sequence, radius: float = CLUSTER_RADIUS):
    """Merge (location, weight:Fraction, level, contributors) rows into
    SupportPoints, dropping zero-weight clusters."""
    order = sorted(raw, key=lambda t: (t[0].real, t[0].imag))
    points = []
    used = [False] * len(order)
    for i, (loc, w, lvl, cnt) in enumerate(order):
        if used[i]:
            continue
        total, level, contribs = w, lvl, cnt
        maxpartial = abs(float(w)) if w.denominator < 10**6 else float("inf")
        center = loc
        members = 1
        for j in range(i + 1, len(order)):
            if used[j]:
                continue
            loc2, w2, lvl2, cnt2 = order[j]
            if loc2.real - loc.real > radius:
                break
            if abs(loc2 - loc) <= radius:
                used[j] = True
                total += w2
                maxpartial = max(maxpartial, abs(float(total)))
                level = min(level, lvl2)
                contribs += cnt2
                center += loc2
                members += 1
        used[i] = True
        unstable = maxpartial > UNSTABLE_PARTIAL
        if total == 0 and not unstable:
            continue
        points.append(
            SupportPoint(
                location=center / members,
                multiplicity=total,
                level=level,
                contributors=contribs,
                unstable=unstable,
            )
        )
    return tuple(points)


def build_support(data, L_max: int, window: Window) -> PseudoDivisor:
    """Base divisor: cone points sum k_i Log(lambda_i) inside the window.

    Coverage is certified when (L_max + 1) * log(max |lambda_i|) already lies
    left of the window (every omitted deeper level is further left still).
    """
    if L_max < 1:
        raise ValidationError("L_max must be >= 1")
    cloud = build_cloud(data, L_max)
    raw = []
    for i in range(cloud.size):
        w = complex(cloud.w_points[i])
        if window.contains(w):
            raw.append((w, cloud.coeffs_exact[i], cloud.levels[i], 1))
    certified = True
    if data.N:
        reach = (L_max + 1) * math.log(max(abs(d.lam) for d in data.items))
        certified = reach < window.re_min
    return PseudoDivisor(
        points=_merge_clusters(raw),
        window=window,
        L_max=L_max,
        J_max=0,
        kind="base",
        coverage_certified=certified,
    )


def periodify(d: PseudoDivisor, j_range: int, variant: str = "full") -> PseudoDivisor:
    """Union of the 2 pi i j translates of a base divisor, weights summed.

    variant: "plus" keeps j >= 1, "minus" keeps j <= -1, "full" keeps all j
    (including the original points at j = 0).  Translates are enumerated for
    |j| <= j_range and filtered to the window.
    """
    if d.kind != "base":
        raise ValidationError("periodify expects a base divisor")
    if variant not in ("plus", "minus", "full"):
        raise ValidationError(f"unknown variant {variant!r}")
    two_pi = 2 * math.pi
    raw = []
    for p in d.points:
        j_lo = math.ceil((d.window.im_min - p.location.imag) / two_pi - 1e-12)
        j_hi = math.floor((d.window.im_max - p.location.imag) / two_pi + 1e-12)
        for j in range(max(j_lo, -j_range), min(j_hi, j_range) + 1):
            if variant == "plus" and j < 1:
                continue
            if variant == "minus" and j > -1:
                continue
            w = p.location + two_pi * 1j * j
            if d.window.contains(w):
                raw.append((w, p.multiplicity, p.level, p.contributors))
    kind = {"plus": "periodic_plus", "minus": "periodic_minus", "full": "periodic"}[variant]
    return PseudoDivisor(
        points=_merge_clusters(raw),
        window=d.window,
        L_max=d.L_max,
        J_max=j_range,
        kind=kind,
        coverage_certified=d.coverage_certified,
    )


def pullback_exp(pper: PseudoDivisor, window: Window) -> PseudoDivisor:
    """Pull the full periodification back along z = e^{-w}.

    The fiber over z is {-Log z + 2 pi i j}; 2 pi i-periodicity makes the
    weight constant along it, and the pullback takes that constant (NOT the
    fiber sum, which would be infinite).  Contributor counts are summed so
    the caller can see how many fiber representatives were inside the source
    window.
    """
    if pper.kind != "periodic":
        raise ValidationError("pullback needs the full periodification")
    clusters = []  # (z, point)
    for p in pper.points:
        z = cmath.exp(-p.location)
        if not window.contains(z):
            continue
        for c in clusters:
            if abs(c[0] - z) <= CLUSTER_RADIUS * max(1.0, abs(z)):
                c[1].append(p)
                break
        else:
            clusters.append((z, [p]))
    points = []
    for z, members in clusters:
        mult = members[0].multiplicity
        unstable = any(m.unstable for m in members) or any(
            m.multiplicity != mult for m in members[1:]
        )
        points.append(
            SupportPoint(
                location=z,
                multiplicity=mult,
                level=min(m.level for m in members),
                contributors=sum(m.contributors for m in members),
                unstable=unstable,
            )
        )
    points.sort(key=lambda p: (p.location.real, p.location.imag))
    return PseudoDivisor(
        points=tuple(points),
        window=window,
        L_max=pper.L_max,
        J_max=pper.J_max,
        kind="pullback",
        coverage_certified=pper.coverage_certified,
    )


def mirror_sum(d: PseudoDivisor) -> PseudoDivisor:
    """The divisor z -> d(z) + d(conj z) (kind "mirrored")."""
    if d.kind != "pullback":
        raise ValidationError("mirror_sum expects a pullback divisor")
    raw = []
    for p in d.points:
        raw.append((p.location, p.multiplicity, p.level, p.contributors))
        zc = p.location.conjugate()
        if d.window.contains(zc):
            raw.append((zc, p.multiplicity, p.level, p.contributors))
    return PseudoDivisor(
        points=_merge_clusters(raw),
        window=d.window,
        L_max=d.L_max,
        J_max=d.J_max,
        kind="mirrored",
        coverage_certified=d.coverage_certified,
    )


def support_pullback(data, trunc, window: Window) -> PseudoDivisor:
    """Pullback of the periodified base divisor along z = e^{-w}, directly.

    Equivalent to build_support -> periodify(full) -> pullback_exp with
    ranges wide enough, but computed fiber-sum-first: cone points mapping to
    the same z (necessarily 2 pi i apart) have their weights summed, which
    is the fiber-constant value of the periodification.  Cone points all
    have negative real part, so every pole sits outside the closed unit
    disc; windows reaching inside it just see no points there.
    """
    top = max(max(abs(z) for z in _window_corners(window)), 1e-6)
    re_min = -math.log(top) - 1e-9
    cloud = build_cloud(data, trunc.L_max)
    raw = []
    for i in range(cloud.size):
        w = complex(cloud.w_points[i])
        if w.real < re_min:
            continue
        z = cmath.exp(-w)
        if window.contains(z):
            raw.append((z, cloud.coeffs_exact[i], cloud.levels[i], 1))
    lam_max = max(abs(d.lam) for d in data.items) if data.N else 0.5
    certified = (trunc.L_max + 1) * math.log(lam_max) < re_min
    return PseudoDivisor(
        points=_merge_clusters(raw),
        window=window,
        L_max=trunc.L_max,
        J_max=trunc.J_max,
        kind="pullback",
        coverage_certified=certified,
    )


def _window_corners(w: Window):
    return [
        complex(w.re_min, w.im_min),
        complex(w.re_min, w.im_max),
        complex(w.re_max, w.im_min),
        complex(w.re_max, w.im_max),
    ]


def min_gap(points: Sequence) -> Optional[float]:
    """Smallest pairwise distance among support locations (None if < 2)."""
    if len(points) < 2:
        return None
    locs = np.array([p.location for p in points])
    if len(locs) > 2000:
        locs = locs[:2000]
    from scipy.spatial import cKDTree

    xy = np.column_stack([locs.real, locs.imag])
    dist, _ = cKDTree(xy).query(xy, k=2)
    return float(dist[:, 1].min())


def _truncated_periodified(data, L_max: int = 12, j_range: int = 2):
    lam_max = max(abs(d.lam) for d in data.items)
    w_window = Window(
        re_min=(L_max + 1) * math.log(lam_max) - 1.0,
        re_max=0.5,
        im_min=-(2 * j_range + 1) * math.pi,
        im_max=(2 * j_range + 1) * math.pi,
    )
    base = build_support(data, L_max, w_window)
    return periodify(base, j_range=j_range, variant="full")


def classify_finiteness(data, q: Optional[int] = None, factors=None) -> FinitenessVerdict:
    """First applicable local-finiteness certificate (see module docstring).

    ``q`` enables the lattice rule; ``factors`` is an optional sequence of
    (data, q) pairs whose product the data is, enabling the product rule.
    Verdicts for data that no rule covers are Undetermined -- with min_gap
    of the truncated support as a diagnostic, plus a witness status when the
    gap collapses as the truncation level grows.
    """
    if data.N == 0:
        return FinitenessVerdict(status="locally_finite", rule="N_le_1_periodic")
    gap = min_gap(_truncated_periodified(data).points)
    if data.N <= 1:
        return FinitenessVerdict(status="locally_finite", rule="N_le_1_periodic", min_gap=gap)
    if data.N <= 2:
        return FinitenessVerdict(status="locally_finite", rule="N_le_2", min_gap=gap)
    if q is not None:
        M = _lattice_order(data, q)
        if M is not None:
            return FinitenessVerdict(
                status="locally_finite", rule="lattice", min_gap=gap, lattice_modulus=M
            )
    if factors is not None:
        sub = [classify_finiteness(fd, fq) for fd, fq in factors]
        if all(v.status == "locally_finite" for v in sub):
            return FinitenessVerdict(
                status="locally_finite", rule="product_construction", min_gap=gap
            )
    gap8 = min_gap(_truncated_periodified(data, L_max=8).points)
    if gap is not None and gap8 is not None and gap < 1e-4 and gap < gap8 / 4:
        return FinitenessVerdict(status="not_locally_finite_witness", min_gap=gap)
    return FinitenessVerdict(status="undetermined", min_gap=gap)


def _lattice_order(data, q: int) -> Optional[int]:
    """Smallest M <= 64 with every lambda = zeta q^{j/2}, zeta^M = 1; None if none."""
    logq = math.log(q)
    for d in data.items:
        j = 2 * math.log(abs(d.lam)) / logq
        if abs(j - round(j)) > 1e-9 or round(j) >= 0:
            return None
    for M in range(1, MAX_LATTICE_ORDER + 1):
        ok = True
        for d in data.items:
            frac = cmath.phase(d.lam) * M / (2 * math.pi)
            if abs(frac - round(frac)) > 1e-6:
                ok = False
                break
        if ok:
            return M
    return None


def divisor_to_csv(d: PseudoDivisor) -> str:
    """re,im,multiplicity,level rows for plotting."""
    lines = ["re,im,multiplicity,level"]
    for p in d.points:
        m = float(p.multiplicity) if not p.unstable else math.inf
        lines.append(f"{p.location.real:.17g},{p.location.imag:.17g},{m:.17g},{p.level}")
    return "\n".join(lines) + "\n"
