"""Multi-valued analytic continuation of the multiplicative zeta function.

The object being continued is z |-> exp(sum_{r>=1} log|N_r| z^r / r).  After
splitting off the dominant q-power of the counts, everything reduces to the
tail

    T(w) = sum_{r>=r0} log(1 - sum_i eps_i lambda_i^r) e^{-wr},

and expanding the logarithm over the term cloud (w_k = sum_i k_i Log
lambda_i, mu_k = e^{w_k}, exact multinomial weights C_k) turns T into a
two-sided translate series whose j-sum collapses in closed form: the
partial-fraction identity sum_{j in Z} 1/(x + 2 pi i j) = 1/2 + 1/(e^x - 1)
absorbs the lone boundary term and leaves

    T(w) = sum_k C_k e^{r0 (w_k - w)} / (e^{w_k - w} - 1)
         = - sum_k C_k (mu_k z)^{r0} / (1 - mu_k z)      at z = e^{-w},

a single-valued meromorphic function of z whose poles 1/mu_k all lie outside
the closed unit disc and carry the merged cloud weights.  Inside the disc it
agrees with the power series sum_{r>=r0} log(1 - S(r)) z^r, so

    I(path) = int_path tail(w)/w dw

continues sum_{r>=r0} log(1 - S(r)) z^r / r along any path avoiding the
poles; multi-valuedness is exactly the 2 pi i * (enclosed weight) picked up
by winding, which is why loop integrals land on rationals.  exp(I/2) and
the product with the conjugate datum's factor realize the absolute values
that come with the counts.

A full model is assembled from four factors (u1 = z^{s1}, u2 = z^{s2}):

    exp(c1 * u1/(1-u1)) * (1-u1)^(-beta)
        * exp(sum_{(r,rho)} rho z^r / r)
        * exp(h * (I_data(u2) + I_conj(u2)) / 2)

whose z^r-coefficients reproduce log|N_r|/r: the first factor contributes
c1*r at exponents divisible by s1, the algebraic factor a constant beta*s1
there, the finite prefix patches the exponents below the tail's reach with
exact-count corrections, and the tail contributes h*s2*log|1 - S(r/s2)|.
This covers abelian varieties (c1 = g log q, s1 = s2 = 1, h = 1), motives
with a unique top weight, cellular varieties, and the mixed direct sums
where only even exponents carry information (s2 = 2, genuinely fractional
eps and beta).  The algebraic factor is continued by tracking
arg(1 - z^{s1}) along the path; everything else is single-valued away from
the support.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from zlog import kernels
from zlog.abelplana import quad_segment
from zlog.cloud import build_cloud
from zlog.divisor import Window, mirror_sum, support_pullback
from zlog.errors import NumericFailure, UndefinedZlog, ValidationError
from zlog.motive import (
    SpectralData,
    TruncationParams,
    WeilNumberSet,
    abelian_count,
    select_truncation,
    spectral,
    spectral_from_weil,
    virtual_counts,
)

POLE_CLEARANCE = 1e-6
QUAD_TOL = 1e-11
ORACLE_HORIZON = 400
SERIES_DISC = 0.9  # inside this radius the direct power series is used


# ---------------------------------------------------------------------------
# paths and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathSpec:
    """Polyline from the origin; clearance is the pole distance it promises.

    Continuation is path-based: a value is attached to a concrete path, and
    two paths to the same endpoint differ by the monodromy of whatever
    support lies between them."""

    vertices: Tuple[complex, ...]
    clearance: float = 0.05

    def __post_init__(self):
        verts = tuple(complex(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 1 or verts[0] != 0:
            raise ValidationError("paths start at the origin")
        if not self.clearance > 0:
            raise ValidationError("clearance must be positive")
        for a, b in zip(verts, verts[1:]):
            if a == b:
                raise ValidationError("consecutive path vertices must be distinct")

    @classmethod
    def straight_to(cls, z: complex, clearance: float = 0.05) -> "PathSpec":
        return cls(vertices=(0, complex(z)), clearance=clearance)

    @property
    def end(self) -> complex:
        return self.vertices[-1]

    def segments(self):
        return tuple(zip(self.vertices, self.vertices[1:]))

    def length(self) -> float:
        return sum(abs(b - a) for a, b in self.segments())

    def bbox(self, pad: float = 1.0) -> Window:
        res = [v.real for v in self.vertices]
        ims = [v.imag for v in self.vertices]
        return Window(min(res) - pad, max(res) + pad, min(ims) - pad, max(ims) + pad)


def _segment_distance(p: complex, a: complex, b: complex) -> float:
    d = b - a
    t = ((p - a) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


def check_path_clearance(path: PathSpec, points: Sequence[complex]) -> float:
    """Smallest distance from the polyline to any of the points; raises when
    the path's promised clearance is violated."""
    worst = math.inf
    for p in points:
        for a, b in path.segments():
            worst = min(worst, _segment_distance(complex(p), a, b))
    if worst < path.clearance:
        raise ValidationError(
            f"path passes {worst:.3e} from a support point "
            f"(promised clearance {path.clearance})"
        )
    return worst


@dataclass(frozen=True)
class ContinuationResult:
    """value at the path's endpoint; branch_offset is the logarithm-level
    quantity that actually depends on the path; error_estimate adds the
    truncated-level bound to the quadrature error."""

    value: complex
    branch_offset: complex
    error_estimate: float

    def __post_init__(self):
        if not math.isfinite(self.error_estimate):
            raise ValidationError("error estimate must be finite")


# ---------------------------------------------------------------------------
# tail evaluation
# ---------------------------------------------------------------------------


def _tail_point(cloud, r0: int, z: complex) -> complex:
    if cloud.size == 0:
        return 0j
    out = kernels.cloud_eval(
        cloud.coeffs, cloud.mus, r0, np.array([z], dtype=np.complex128)
    )
    return complex(out[0])


def _tail_bound(data: SpectralData, trunc: TruncationParams, z_mod: float) -> float:
    """Bound on the levels dropped beyond L_max at |z| = z_mod.

    Level l of the cloud sums to at most B^l / l in weighted modulus with
    B = sum |eps_i| |lambda_i|^{r0} < 1, each term carrying the same factor
    |z|^{r0}; the omitted terms' poles satisfy |mu z| <= lam_max^{L+1} |z|,
    which must stay below 1/2 for the denominator bound."""
    if data.N == 0:
        return 0.0
    lam_max = max(abs(d.lam) for d in data.items)
    if lam_max ** (trunc.L_max + 1) * z_mod >= 0.5:
        raise NumericFailure(
            f"level cap L_max={trunc.L_max} cannot bound the tail at |z| = {z_mod:.3g}"
        )
    B = sum(abs(float(d.eps)) * abs(d.lam) ** trunc.r0 for d in data.items)
    if B >= 1.0:
        raise NumericFailure("tail majorant >= 1; truncation certificate violated")
    L = trunc.L_max
    return 2.0 * z_mod**trunc.r0 * B ** (L + 1) / ((L + 1) * (1.0 - B))


def _pole_distance(data: SpectralData, trunc: TruncationParams, z: complex) -> float:
    """min_k |z - 1/mu_k| over the truncated cloud."""
    cloud = build_cloud(data, trunc.L_max)
    if cloud.size == 0:
        return math.inf
    return float(np.min(np.abs(1.0 - cloud.mus * z) / np.abs(cloud.mus)))


def eval_tail_z(
    z: complex,
    data: SpectralData,
    trunc: TruncationParams,
    branch_log: Optional[complex] = None,
) -> ContinuationResult:
    """The meromorphic tail at z: -sum_k C_k (mu_k z)^{r0} / (1 - mu_k z).

    branch_log picks the logarithm of z used for the z^{r0} factor; because
    r0 is an integer the value is independent of the choice up to float
    noise -- the parameter exists so callers can watch that happen."""
    z = complex(z)
    if data.N == 0 or z == 0:
        return ContinuationResult(0j, 0j, 0.0)
    if branch_log is not None and abs(cmath.exp(branch_log) - z) > 1e-9 * (1.0 + abs(z)):
        raise ValidationError("branch_log does not lie over z")
    dist = _pole_distance(data, trunc, z)
    if dist < POLE_CLEARANCE:
        raise NumericFailure(f"evaluation point is {dist:.3e} from a pole of the tail")
    cloud = build_cloud(data, trunc.L_max)
    value = _tail_point(cloud, trunc.r0, z)
    if branch_log is not None:
        value *= cmath.exp(trunc.r0 * branch_log) / z**trunc.r0
    err = _tail_bound(data, trunc, abs(z)) / min(dist, 1.0)
    err += 1e-15 * cloud.size * max(1.0, abs(value))
    return ContinuationResult(value, 0j, err)


def eval_tail_w(
    w: complex,
    data: SpectralData,
    trunc: TruncationParams,
    mode: str = "closed",
) -> ContinuationResult:
    """T(w) = sum_{r>=r0} log(1 - S(r)) e^{-wr}, continued to all w off the
    periodified support.

    mode "closed" evaluates the exact resummation of the translate series
    (the tail at z = e^{-w}); mode "literal" adds up the translates
    j = -J_max..J_max one by one together with the halved boundary term --
    the one-sided j-tail only decays like 1/J (pairing +j with -j is what
    converges), so the literal mode is a consistency check with an honestly
    fat error bar, not an evaluator."""
    w = complex(w)
    if data.N == 0:
        return ContinuationResult(0j, 0j, 0.0)
    if mode == "closed":
        return eval_tail_z(cmath.exp(-w), data, trunc)
    if mode != "literal":
        raise ValidationError(f"unknown mode {mode!r}")
    cloud = build_cloud(data, trunc.L_max)
    delta = np.asarray(cloud.w_points) - w
    nearest = np.abs(delta - 2j * math.pi * np.round(delta.imag / (2.0 * math.pi)))
    if float(nearest.min()) < POLE_CLEARANCE:
        raise NumericFailure("w too close to the periodified support")
    inner = data.inner_sum(trunc.r0)
    total = 0.5 * cmath.log(1.0 - inner) * cmath.exp(-w * trunc.r0)
    coeffs = np.asarray(cloud.coeffs)
    growth = np.exp(trunc.r0 * delta)  # modulus independent of j
    for j in range(-trunc.J_max, trunc.J_max + 1):
        den = delta + 2j * math.pi * j
        total += complex(np.sum(coeffs * growth / den))
    # dropped |j| > J_max translates pair up to ~ 2 |delta| / (2 pi j)^2 each
    scale = float(np.sum(np.abs(coeffs) * np.abs(growth)))
    err = scale * (1.0 + float(np.max(np.abs(delta)))) / (math.pi**2 * trunc.J_max)
    err += _tail_bound(data, trunc, abs(cmath.exp(-w)))
    return ContinuationResult(total, 0j, err)


def tail_series(
    data: SpectralData,
    r0: int,
    z: complex,
    per_r: bool = False,
    tol: float = 1e-16,
    horizon: int = 20000,
) -> complex:
    """Direct partial summation of sum_{r>=r0} log(1 - S(r)) z^r (optionally
    with a 1/r): the unit-disc oracle the continuations must match."""
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValidationError("the direct series needs |z| < 1")
    if data.N == 0:
        return 0j
    total = 0j
    quiet = 0
    for r in range(r0, horizon):
        term = cmath.log(1.0 - data.inner_sum(r)) * z**r
        if per_r:
            term /= r
        total += term
        if abs(term) < tol * (1.0 + abs(total)):
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
    raise NumericFailure("direct series did not settle within the horizon")


# ---------------------------------------------------------------------------
# the path integral and its exponentials
# ---------------------------------------------------------------------------


def integrate_tail(
    path: PathSpec,
    data: SpectralData,
    trunc: TruncationParams,
    method: str = "quad",
) -> ContinuationResult:
    """I(path) = int_path tail(w)/w dw from the origin.

    Inside the unit disc this equals sum_{r>=r0} log(1 - S(r)) z^r / r (used
    directly when the whole path stays at |z| <= 0.9; poles never enter the
    closed disc, so all such paths are homotopic).  Otherwise: adaptive
    quadrature per segment (method "quad"), or the per-term antiderivative
    G(mu w) = log(1 - mu w) + sum_{s<r0} (mu w)^s / s with each log's branch
    tracked along the path (method "terms", the independent cross-check)."""
    if method not in ("quad", "terms"):
        raise ValidationError(f"unknown integration method {method!r}")
    if data.N == 0 or len(path.vertices) == 1:
        return ContinuationResult(0j, 0j, 0.0)
    support = support_pullback(data, trunc, path.bbox())
    check_path_clearance(path, [p.location for p in support.points])

    if all(abs(v) <= SERIES_DISC for v in path.vertices):
        value = tail_series(data, trunc.r0, path.end, per_r=True)
        err = _tail_bound(data, trunc, abs(path.end)) / max(trunc.r0, 1)
        return ContinuationResult(value, value, err)

    if method == "terms":
        value = _integrate_terms(path, data, trunc)
        err = _tail_bound(data, trunc, max(abs(v) for v in path.vertices))
        err *= 1.0 + path.length()
        return ContinuationResult(value, value, err)

    cloud = build_cloud(data, trunc.L_max)

    def integrand(w: complex) -> complex:
        if w == 0:
            if trunc.r0 >= 2:
                return 0j
            return -complex(np.sum(cloud.coeffs * cloud.mus))
        return _tail_point(cloud, trunc.r0, w) / w

    total = 0j
    quad_err = 0.0
    for a, b in path.segments():
        total += quad_segment(integrand, a, b, epsabs=QUAD_TOL)
        quad_err += QUAD_TOL * 100
    samples = list(path.vertices) + [(a + b) / 2 for a, b in path.segments()]
    tail_err = max(
        _tail_bound(data, trunc, abs(s)) / max(abs(s), 0.1) for s in samples
    )
    err = tail_err * path.length() + quad_err
    return ContinuationResult(total, total, err)


def _integrate_terms(
    path: PathSpec, data: SpectralData, trunc: TruncationParams
) -> complex:
    """sum_k C_k [G(mu_k w)] along the path, G as in integrate_tail; the
    branch of each log(1 - mu w) is continued by angle bookkeeping with
    adaptive substeps (all terms advanced in lockstep)."""
    cloud = build_cloud(data, trunc.L_max)
    mus = np.asarray(cloud.mus)
    winding = np.zeros(len(mus))
    prev = np.ones(len(mus), dtype=np.complex128)  # 1 - mu * 0
    for a, b in path.segments():
        steps = max(8, int(math.ceil(abs(b - a) / 0.05)))
        while True:
            ok = True
            run_prev = prev
            run_wind = np.zeros(len(mus))
            for t in np.linspace(0.0, 1.0, steps + 1)[1:]:
                cur = 1.0 - mus * (a + t * (b - a))
                if float(np.min(np.abs(cur))) < 1e-12:
                    raise NumericFailure("path passes through a pole of the tail")
                dphi = np.angle(cur / run_prev)
                if float(np.max(np.abs(dphi))) > 1.0:
                    ok = False
                    break
                run_wind += dphi
                run_prev = cur
            if ok:
                prev = run_prev
                winding += run_wind
                break
            steps *= 2
            if steps > 1 << 20:
                raise NumericFailure("winding refinement exploded")
    x_end = mus * path.end
    g_end = np.log(np.abs(1.0 - x_end)) + 1j * winding
    for s in range(1, trunc.r0):
        g_end = g_end + x_end**s / s
    return complex(np.sum(np.asarray(cloud.coeffs) * g_end))


def eval_half_exp(
    path: PathSpec, data: SpectralData, trunc: TruncationParams
) -> ContinuationResult:
    """exp(I(path)/2): the never-vanishing square-root factor of the tail."""
    inner = integrate_tail(path, data, trunc)
    half = 0.5 * inner.value
    value = cmath.exp(half)
    return ContinuationResult(value, half, abs(value) * 0.5 * inner.error_estimate)


def eval_abs_factor(
    path: PathSpec, data: SpectralData, trunc: TruncationParams
) -> ContinuationResult:
    """exp((I_data + I_conj)/2) along one shared path: the factor carrying
    log|1 - S(r)| (absolute values drag in the conjugate datum; for
    conjugate-closed data the two integrals coincide)."""
    first = integrate_tail(path, data, trunc)
    if data.items == data.conjugate().items:
        second = first
    else:
        second = integrate_tail(path, data.conjugate(), trunc)
    half = 0.5 * (first.value + second.value)
    value = cmath.exp(half)
    err = abs(value) * 0.5 * (first.error_estimate + second.error_estimate)
    return ContinuationResult(value, half, err)


def continued_log_along(path: PathSpec, fn: Callable[[complex], complex]) -> complex:
    """log(fn(end)) on the branch reached by following fn along the path,
    anchored at the principal log of fn(origin)."""
    prev = complex(fn(path.vertices[0]))
    if abs(prev) < 1e-12:
        raise NumericFailure("branch tracking started at a zero")
    total_arg = cmath.phase(prev)
    for a, b in path.segments():
        steps = max(8, int(math.ceil(abs(b - a) / 0.05)))
        while True:
            ok = True
            run_prev = prev
            run_arg = 0.0
            for t in np.linspace(0.0, 1.0, steps + 1)[1:]:
                cur = complex(fn(a + t * (b - a)))
                if abs(cur) < 1e-12:
                    raise NumericFailure("path passes through a branch point")
                dphi = cmath.phase(cur / run_prev)
                if abs(dphi) > 1.0:
                    ok = False
                    break
                run_arg += dphi
                run_prev = cur
            if ok:
                prev = run_prev
                total_arg += run_arg
                break
            steps *= 2
            if steps > 1 << 20:
                raise NumericFailure("branch tracking refinement exploded")
    return math.log(abs(prev)) + 1j * total_arg


def map_path_power(path: PathSpec, s: int) -> PathSpec:
    """Image of the polyline under z -> z^s, refined enough that the image
    polyline is homotopic to the true image curve for clearance purposes."""
    if s == 1:
        return path
    mapped = [0j]
    for a, b in path.segments():
        steps = max(8, int(math.ceil(abs(b - a) / 0.05)))
        for t in np.linspace(0.0, 1.0, steps + 1)[1:]:
            u = complex((a + t * (b - a)) ** s)
            if u != mapped[-1]:
                mapped.append(u)
    return PathSpec(vertices=tuple(mapped), clearance=path.clearance)


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZlogModel:
    """Four-factor model of a multiplicative zeta function (module
    docstring); counts_fn, when present, returns the exact integer N_r the
    model was built from and feeds the series oracles."""

    kind: str
    data: SpectralData
    trunc: TruncationParams
    c1: float
    s1: int = 1
    beta: float = 0.0
    finite_prefix: Tuple[Tuple[int, float], ...] = ()
    h: Fraction = Fraction(1)
    s2: int = 1
    q: Optional[int] = None
    counts_fn: Optional[Callable[[int], int]] = None

    def __post_init__(self):
        if self.s1 < 1 or self.s2 < 1:
            raise ValidationError("variable powers must be >= 1")
        object.__setattr__(self, "h", Fraction(self.h))
        object.__setattr__(
            self,
            "finite_prefix",
            tuple((int(r), float(v)) for r, v in self.finite_prefix),
        )
        for r, _ in self.finite_prefix:
            if r < 1:
                raise ValidationError("prefix exponents must be >= 1")

    def log_abs_count(self, r: int) -> float:
        if self.counts_fn is None:
            raise ValidationError("model carries no exact counts")
        n = self.counts_fn(r)
        if n == 0:
            raise UndefinedZlog(f"count N_{r} = 0")
        return math.log(abs(n))


def _prefix_corrections(counts_fn, c1: float, s1: int, beta: float, r0: int, s2: int):
    """Exact-count corrections rho_r = log|N_r| - (prefix contributions) at
    the z-exponents r = s2*s, s < r0, not yet covered by the tail."""
    out = []
    for s in range(1, r0):
        r = s2 * s
        n = counts_fn(r)
        if n == 0:
            raise UndefinedZlog(f"count N_{r} = 0; the zeta function is undefined")
        rho = math.log(abs(n))
        if r % s1 == 0:
            rho -= c1 * r + beta * s1
        out.append((r, rho))
    return tuple(out)


def raw_model(
    data: SpectralData,
    c1: float = 0.0,
    s1: int = 1,
    beta: float = 0.0,
    finite_prefix=(),
    h=Fraction(1),
    s2: int = 1,
    q: Optional[int] = None,
    counts_fn=None,
    trunc: Optional[TruncationParams] = None,
) -> ZlogModel:
    """Assemble a model directly from its four factors."""
    return ZlogModel(
        kind="raw",
        data=data,
        trunc=trunc or select_truncation(data),
        c1=c1,
        s1=s1,
        beta=beta,
        finite_prefix=finite_prefix,
        h=h,
        s2=s2,
        q=q,
        counts_fn=counts_fn,
    )


def affine_model(n: int, q: int) -> ZlogModel:
    """Affine n-space: counts q^{nr}, pure prefix exp(n log q * z/(1-z))."""
    if n < 0 or q < 2:
        raise ValidationError("need n >= 0 and a prime power q >= 2")
    return ZlogModel(
        kind="affine",
        data=spectral(),
        trunc=select_truncation(spectral()),
        c1=n * math.log(q),
        q=q,
        counts_fn=lambda r: q ** (n * r),
    )


def lambda_model(n: int, q: int) -> ZlogModel:
    """Punctured affine n-space: counts q^{nr} - 1, the building block whose
    ratios produce the cellular models."""
    if n < 1 or q < 2:
        raise ValidationError("need n >= 1 and q >= 2")
    data = spectral((1, q**-n))
    trunc = select_truncation(data)
    counts_fn = lambda r: q ** (n * r) - 1  # noqa: E731
    c1 = n * math.log(q)
    return ZlogModel(
        kind="lambda",
        data=data,
        trunc=trunc,
        c1=c1,
        finite_prefix=_prefix_corrections(counts_fn, c1, 1, 0.0, trunc.r0, 1),
        q=q,
        counts_fn=counts_fn,
    )


def cellular_model(exponents: Sequence[int], q: int) -> ZlogModel:
    """Counts sum_j q^{j r} over distinct cell dimensions j (projective
    n-space is exponents = 0..n)."""
    exps = sorted(set(int(j) for j in exponents))
    if not exps or exps[0] < 0 or q < 2:
        raise ValidationError("need nonnegative cell dimensions and q >= 2")
    n = exps[-1]
    data = spectral(*[(-1, float(q) ** (j - n)) for j in exps if j < n])
    trunc = select_truncation(data)
    counts_fn = lambda r: sum(q ** (j * r) for j in exps)  # noqa: E731
    c1 = n * math.log(q)
    return ZlogModel(
        kind="cellular",
        data=data,
        trunc=trunc,
        c1=c1,
        finite_prefix=_prefix_corrections(counts_fn, c1, 1, 0.0, trunc.r0, 1),
        q=q,
        counts_fn=counts_fn,
    )


def abelian_model(weil: WeilNumberSet) -> ZlogModel:
    """Abelian variety from its weight-1 Weil numbers: counts
    N_r = prod_j (1 - alpha_j^r) are exact group orders, always positive."""
    data, prefix = spectral_from_weil(weil, route="abelian")
    trunc = select_truncation(data)
    c1 = prefix.log_coefficient
    counts_fn = lambda r: abelian_count(weil, r)  # noqa: E731
    return ZlogModel(
        kind="abelian",
        data=data,
        trunc=trunc,
        c1=c1,
        finite_prefix=_prefix_corrections(counts_fn, c1, 1, 0.0, trunc.r0, 1),
        q=weil.q,
        counts_fn=counts_fn,
    )


def motive_model(weil: WeilNumberSet, m: Optional[int] = None) -> ZlogModel:
    """Motive with a unique top weight 2m: counts are the virtual sums
    N_r = sum_j (-1)^{v_j} n_j alpha_j^r, with |N_r| in the exponent.  The
    construction verifies N_r != 0 over the oracle horizon (the ratio bound
    guarantees it beyond)."""
    data, prefix = spectral_from_weil(weil, m=m, route="motive")
    trunc = select_truncation(data)
    c1 = prefix.log_coefficient
    counts = virtual_counts(weil, ORACLE_HORIZON)
    if not counts.exact:
        raise ValidationError("virtual counts are not exactly computable for this set")
    if counts.vanish_bound is None or counts.vanish_bound > ORACLE_HORIZON:
        raise ValidationError("cannot certify nonvanishing within the oracle horizon")
    values = counts.values
    for r, n in enumerate(values, start=1):
        if n == 0:
            raise UndefinedZlog(
                f"virtual count N_{r} = 0; the zeta function is undefined"
            )

    def counts_fn(r: int) -> int:
        if 1 <= r <= len(values):
            return values[r - 1]
        raise ValidationError(f"count horizon exceeded at r = {r}")

    return ZlogModel(
        kind="motive",
        data=data,
        trunc=trunc,
        c1=c1,
        finite_prefix=_prefix_corrections(counts_fn, c1, 1, 0.0, trunc.r0, 1),
        q=weil.q,
        counts_fn=counts_fn,
    )


def supersingular_sum_model(p: int, weights: Tuple[int, int]) -> ZlogModel:
    """Direct sums h^0 + h^1 or h^1 + h^2 of the supersingular pieces over
    F_p.  The top weight is not unique (the h^1 pair shares its modulus),
    but odd-index counts degenerate and the even-index subsequence carries
    clean spectral data in u = z^2 -- with genuinely fractional weights:

    * weights (0, 1): N_r = 1 - p_r, so log|N_{2s}| = log 2 + s log p +
      log(1 - (1/2) p^{-s}): c1 = (log p)/2 and beta = (log 2)/2 on
      u1 = z^2, eps = 1/2.
    * weights (1, 2): N_r = p^r - p_r, so log|N_r| = r log p plus, at even
      r = 2s, log(1 - 2 p^{-s}): c1 = log p on u1 = z, eps = 2.  p = 2 is
      rejected (it makes N_2 = 0).
    """
    if p < 2:
        raise ValidationError("p must be a prime power >= 2")
    if weights == (0, 1):
        counts_fn = lambda r: 1 - (2 * p ** (r // 2) if r % 2 == 0 else 0)  # noqa: E731
        data = spectral((Fraction(1, 2), 1.0 / p))
        c1, s1, beta = 0.5 * math.log(p), 2, 0.5 * math.log(2)
        kind = "supersingular_sum_01"
    elif weights == (1, 2):
        if p < 3:
            raise UndefinedZlog("p = 2 makes N_2 = 0; the zeta function is undefined")
        counts_fn = lambda r: p**r - (2 * p ** (r // 2) if r % 2 == 0 else 0)  # noqa: E731
        data = spectral((2, 1.0 / p))
        c1, s1, beta = math.log(p), 1, 0.0
        kind = "supersingular_sum_12"
    else:
        raise ValidationError("weights must be (0, 1) or (1, 2)")
    trunc = select_truncation(data)
    return ZlogModel(
        kind=kind,
        data=data,
        trunc=trunc,
        c1=c1,
        s1=s1,
        beta=beta,
        finite_prefix=_prefix_corrections(counts_fn, c1, s1, beta, trunc.r0, 2),
        h=Fraction(1, 2),
        s2=2,
        q=p,
        counts_fn=counts_fn,
    )


def zlog_series(
    counts_fn: Callable[[int], int], z: complex, R: int = ORACLE_HORIZON
) -> complex:
    """Partial-sum oracle exp(sum_{r<=R} log|N_r| z^r / r) from exact counts."""
    z = complex(z)
    total = 0j
    for r in range(1, R + 1):
        n = counts_fn(r)
        if n == 0:
            raise UndefinedZlog(f"count N_{r} = 0")
        total += math.log(abs(n)) * z**r / r
    return cmath.exp(total)


def model_log_coefficient(model: ZlogModel, r: int) -> float:
    """Coefficient of z^r in log Z according to the model's four factors --
    must reproduce log|N_r| / r (the construction-consistency oracle)."""
    val = 0.0
    if r % model.s1 == 0:
        val += model.c1 + model.beta * model.s1 / r
    for rr, rho in model.finite_prefix:
        if rr == r:
            val += rho / r
    if r % model.s2 == 0:
        s = r // model.s2
        if s >= model.trunc.r0:
            inner = model.data.inner_sum(s)
            conj = model.data.conjugate().inner_sum(s)
            log_abs = (cmath.log(1.0 - inner) + cmath.log(1.0 - conj)).real / 2.0
            val += float(model.h) * log_abs * model.s2 / r
    return val


# ---------------------------------------------------------------------------
# model evaluation
# ---------------------------------------------------------------------------


def model_support(model: ZlogModel, box: Window):
    """Pole/branch locations of the model inside the window: s2-th root
    preimages of the tail poles (data and conjugate together), plus the
    s1-th roots of unity where the prefix factors blow up."""
    points = []
    if model.data.N:
        corner = max(
            abs(complex(x, y))
            for x in (box.re_min, box.re_max)
            for y in (box.im_min, box.im_max)
        )
        u_top = max(corner**model.s2, 2.0)
        u_box = Window(-u_top, u_top, -u_top, u_top)
        pulled = mirror_sum(support_pullback(model.data, model.trunc, u_box))
        for pt in pulled.points:
            u = pt.location
            radius = abs(u) ** (1.0 / model.s2)
            theta = cmath.phase(u)
            for k in range(model.s2):
                z = radius * cmath.exp(1j * (theta + 2.0 * math.pi * k) / model.s2)
                if box.contains(z):
                    points.append(z)
    if model.c1 != 0.0 or model.beta != 0.0:
        for k in range(model.s1):
            z = cmath.exp(2j * math.pi * k / model.s1)
            if box.contains(z):
                points.append(z)
    return points


def eval_zlog(path: PathSpec, model: ZlogModel) -> ContinuationResult:
    """Z continued along the path: the product of the four factors, each
    carried to the endpoint on the branch the path selects."""
    z = path.end
    check_path_clearance(path, model_support(model, path.bbox()))
    u1 = z**model.s1
    log_total = model.c1 * u1 / (1.0 - u1)
    err = 0.0
    if model.beta != 0.0:
        log_total -= model.beta * continued_log_along(
            path, lambda v: 1.0 - v**model.s1
        )
    for r, rho in model.finite_prefix:
        log_total += rho * z**r / r
    if model.data.N:
        u_path = map_path_power(path, model.s2)
        first = integrate_tail(u_path, model.data, model.trunc)
        if model.data.items == model.data.conjugate().items:
            second = first
        else:
            second = integrate_tail(u_path, model.data.conjugate(), model.trunc)
        log_total += float(model.h) * (first.value + second.value) / 2.0
        err += float(model.h) * (first.error_estimate + second.error_estimate) / 2.0
    value = cmath.exp(log_total)
    return ContinuationResult(value, log_total, abs(value) * (err + 1e-14))


def log_derivative(z: complex, model: ZlogModel) -> complex:
    """d/dz log Z at z: single-valued away from the support (branch choices
    die under the derivative)."""
    z = complex(z)
    if z == 0:
        val = 0.0
        if model.s1 == 1:
            val += model.c1 + model.beta
        for r, rho in model.finite_prefix:
            if r == 1:
                val += rho
        if model.data.N and model.s2 * model.trunc.r0 == 1:
            inner = model.data.inner_sum(1)
            conj = model.data.conjugate().inner_sum(1)
            val += (
                float(model.h)
                * (cmath.log(1.0 - inner) + cmath.log(1.0 - conj)).real
                / 2.0
            )
        return complex(val)
    u1 = z**model.s1
    if abs(1.0 - u1) < POLE_CLEARANCE:
        raise NumericFailure("z too close to a prefix pole")
    total = model.c1 * model.s1 * z ** (model.s1 - 1) / (1.0 - u1) ** 2
    total += model.beta * model.s1 * z ** (model.s1 - 1) / (1.0 - u1)
    for r, rho in model.finite_prefix:
        total += rho * z ** (r - 1)
    if model.data.N:
        u2 = z**model.s2
        first = eval_tail_z(u2, model.data, model.trunc).value
        if model.data.items == model.data.conjugate().items:
            second = first
        else:
            second = eval_tail_z(u2, model.data.conjugate(), model.trunc).value
        total += float(model.h) * model.s2 / 2.0 * (first + second) / z
    return complex(total)


# ---------------------------------------------------------------------------
# loops, residues, recovered Weil numbers
# ---------------------------------------------------------------------------


def _circle_box(center: complex, radius: float, pad: float = 1.0) -> Window:
    return Window(
        center.real - radius - pad,
        center.real + radius + pad,
        center.imag - radius - pad,
        center.imag + radius + pad,
    )


def monodromy_loop(
    center: complex,
    radius: float,
    data: SpectralData,
    trunc: TruncationParams,
) -> complex:
    """Counterclockwise loop integral of tail(w)/w: 2 pi i times the
    enclosed weight, the quantity whose rationality the divisor predicts.
    The loop must enclose at most one support cluster and keep clear of all
    of them; the rationality of value / 2 pi i (denominator <= L_max) is
    checked before returning."""
    center = complex(center)
    if radius <= 0:
        raise ValidationError("loop radius must be positive")
    support = support_pullback(data, trunc, _circle_box(center, radius))
    enclosed = 0
    for p in support.points:
        gap = abs(abs(p.location - center) - radius)
        if gap < max(POLE_CLEARANCE, 1e-3 * radius):
            raise ValidationError("loop passes too close to a support point")
        if abs(p.location - center) < radius:
            enclosed += 1
    if enclosed > 1:
        raise ValidationError("loop encloses more than one support cluster")
    if data.N == 0:
        return 0j
    cloud = build_cloud(data, trunc.L_max)

    def integrand(theta: float) -> complex:
        w = center + radius * cmath.exp(1j * theta)
        dw = 1j * radius * cmath.exp(1j * theta)
        if w == 0:
            if trunc.r0 >= 2:
                return 0j
            return -complex(np.sum(cloud.coeffs * cloud.mus)) * dw
        return _tail_point(cloud, trunc.r0, w) / w * dw

    value = quad_segment(integrand, 0.0, 2.0 * math.pi, epsabs=QUAD_TOL)
    ratio = value / (2j * math.pi)
    fit = Fraction(ratio.real).limit_denominator(trunc.L_max)
    if abs(ratio - complex(fit)) > 1e-6 * max(1.0, abs(ratio)):
        raise NumericFailure(
            f"loop value / 2 pi i = {ratio} is not rational "
            f"with denominator <= {trunc.L_max}"
        )
    return value


def monodromy_expected(
    center: complex,
    radius: float,
    data: SpectralData,
    trunc: TruncationParams,
) -> Fraction:
    """Exact enclosed weight: the sum of merged cloud multiplicities
    strictly inside the circle."""
    support = support_pullback(data, trunc, _circle_box(complex(center), radius))
    total = Fraction(0)
    for p in support.points:
        if abs(p.location - complex(center)) < radius:
            total += p.multiplicity
    return total


class OrderMismatch(ValidationError):
    """A residue was requested at a pole whose order is not 1; carries the
    Laurent moments measured on the probe circle."""

    def __init__(self, message: str, order: int, coefficients):
        super().__init__(message)
        self.order = order
        self.coefficients = tuple(coefficients)


@dataclass(frozen=True)
class ResidueReport:
    location: complex
    residue: complex
    rational: Fraction
    fit_error: float
    probe_radius: float


def _circle_moment(fn, center: complex, rho: float, m: int) -> complex:
    """(1 / 2 pi i) * loop integral of fn(z) (z - center)^{m-1} dz."""

    def integrand(theta: float) -> complex:
        z = center + rho * cmath.exp(1j * theta)
        dz = 1j * rho * cmath.exp(1j * theta)
        return fn(z) * (z - center) ** (m - 1) * dz / (2j * math.pi)

    return quad_segment(integrand, 0.0, 2.0 * math.pi, epsabs=QUAD_TOL)


def _probe_radius(point: complex, model: ZlogModel) -> float:
    support = model_support(model, _circle_box(point, 2.0))
    gaps = [abs(p - point) for p in support if abs(p - point) > 1e-9]
    rho = min([1e-3] + [g / 2.0 for g in gaps])
    if rho < 10 * POLE_CLEARANCE:
        raise ValidationError("support points too close together to probe")
    return rho


def residue_estimate(pole: complex, model: ZlogModel) -> ResidueReport:
    """Residue of d/dz log Z at a simple pole: the (rational) local weight.
    Raises OrderMismatch -- carrying the measured Laurent moments -- when
    the second moment betrays a higher-order pole (z = 1 on a curve model,
    where the essential prefix contributes order two)."""
    pole = complex(pole)
    rho = _probe_radius(pole, model)
    fn = lambda z: log_derivative(z, model)  # noqa: E731
    c_1 = _circle_moment(fn, pole, rho, 1)
    c_2 = _circle_moment(fn, pole, rho, 2)
    if abs(c_2) / rho > 1e-4 * max(1.0, abs(c_1)):
        raise OrderMismatch(
            f"pole at {pole} has order >= 2 (moments {c_1}, {c_2})",
            order=2,
            coefficients=(c_1, c_2),
        )
    rational = Fraction(c_1.real).limit_denominator(model.trunc.L_max)
    return ResidueReport(
        location=pole,
        residue=c_1,
        rational=rational,
        fit_error=abs(c_1 - complex(rational)),
        probe_radius=rho,
    )


def detect_pole_order(point: complex, model: ZlogModel, max_order: int = 4) -> int:
    """Order of the pole of d/dz log Z at the point (0 for a regular point),
    from Laurent moments normalized to a common scale on the probe circle."""
    point = complex(point)
    rho = _probe_radius(point, model)
    fn = lambda z: log_derivative(z, model)  # noqa: E731
    scaled = []
    for m in range(1, max_order + 1):
        c_m = _circle_moment(fn, point, rho, m)
        scaled.append(abs(c_m) * rho ** (1 - m))
    top = max([1.0] + scaled)
    order = 0
    for m, s in enumerate(scaled, start=1):
        if s > 1e-6 * top and s > 1e-9:
            order = m
    return order


def locate_weil_poles(model: ZlogModel) -> list:
    """Poles of the continued Z on the circle |z| = sqrt(q): the weight-one
    Weil numbers the counts secretly carry.  Each candidate from the
    truncated support is confirmed by an order-1 residue probe."""
    if model.q is None:
        raise ValidationError("model carries no q; cannot normalize the Weil circle")
    if model.data.N == 0:
        return []
    rq = math.sqrt(model.q)
    box = Window(-2.0 * rq, 2.0 * rq, -2.0 * rq, 2.0 * rq)
    found = []
    for z in model_support(model, box):
        if abs(abs(z) - rq) > 1e-6 * rq:
            continue
        if any(abs(z - other) <= 1e-9 for other in found):
            continue
        try:
            report = residue_estimate(z, model)
        except OrderMismatch:
            continue
        if abs(report.residue) > 1e-9:
            found.append(z)
    found.sort(key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    return found
