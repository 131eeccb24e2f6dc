"""Weil-number models, virtual counts, and spectral data.

A Weil number set holds Frobenius eigenvalues alpha_{v,j} with weights v
(|alpha| = q^{v/2}) and multiplicities.  Two derived objects drive the
analytic continuation machinery:

* virtual counts  N_l = sum_{v,j} (-1)^v n_j alpha_{v,j}^l  (may be <= 0);

* spectral data (eps_i, lambda_i)_{i=1..N} with 0 < |lambda_i| < 1, obtained
  by pulling the unique top eigenvalue q^m out of the count:

      N_r = q^{mr} (1 - sum_i eps_i lambda_i^r),
      eps_i = (-1)^{v+1} * n_i,   lambda_i = alpha_{v,i} / q^m.

  For a purely weight-1 set (abelian-variety model, N_r = |prod (1-alpha^r)|)
  the same shape arises from the product construction over the single-slot
  systems {(1, alpha_j^{-1})}; for g = 1 both routes give literally the same
  three slots since alpha_1 alpha_2 = q.

Truncation parameters certify the two strip bounds used everywhere downstream:
with M = max |eps_i|, r0 is the smallest integer such that for all complex r
with Re r >= r0 and |Im r| <= K (worst case Im r = +-K)

    (a)  |lambda_i^r| <= |lambda_i|^(Re r) e^(K |arg lambda_i|) < 1/2,
    (b)  M * sum_i |lambda_i|^(Re r) e^(K |arg lambda_i|) < 1/2,

so log(1 - sum eps_i lambda_i^r) is holomorphic on the strip.  The level cap
L_max is then chosen so the geometric tail A^(L+1)/((L+1)(1-A)) of the
log-expansion, with A the certified bound in (b), drops below 1e-12.

Exactness: when eigenvalues are roots of an integer characteristic polynomial
the counts use integer power sums (Newton's identities); "supersingular"
entries zeta * q^(v/2) with zeta = +-1 are also exact whenever the power
q^(vl/2) is integral or the +- pair cancels.  Everything else falls back to
complex floating point with the residual imaginary part reported as the
error estimate.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from zlog.errors import ValidationError

_REL_TOL = 1e-10


# ---------------------------------------------------------------------------
# Weil number sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeilEntry:
    """One Frobenius eigenvalue: alpha with |alpha| = q^(weight/2).

    ``zeta_order`` is the order of alpha / q^(weight/2) as a root of unity
    when that is known (1 for positive real entries, 2 for negative real);
    it unlocks exact arithmetic and the lattice finiteness certificate.
    """

    alpha: complex
    weight: int
    multiplicity: int = 1
    zeta_order: Optional[int] = None


@dataclass(frozen=True)
class WeilNumberSet:
    """Eigenvalue multiset over F_q, optionally backed by an integer charpoly.

    When ``charpoly`` (ascending integer coefficients, monic) is present, the
    weight-``charpoly_weight`` entries are exactly its roots and integer
    power-sum arithmetic applies to them.
    """

    q: int
    entries: tuple
    charpoly: Optional[tuple] = None
    charpoly_weight: int = 1

    def __post_init__(self):
        if self.q < 2:
            raise ValidationError("q must be >= 2")
        if not self.entries:
            raise ValidationError("Weil number set must be non-empty")
        for e in self.entries:
            expected = self.q ** (e.weight / 2.0)
            if abs(abs(e.alpha) - expected) > _REL_TOL * max(1.0, expected):
                raise ValidationError(
                    f"|{e.alpha}| != q^({e.weight}/2) = {expected:.6g}"
                )
            if e.multiplicity < 1:
                raise ValidationError("multiplicities must be positive")
        # conjugate closure with equal multiplicities
        pool = [(e.alpha, e.weight, e.multiplicity) for e in self.entries]
        for a, w, n in pool:
            if abs(a.imag) <= _REL_TOL * abs(a):
                continue
            partner = [
                (b, wv, m)
                for (b, wv, m) in pool
                if wv == w and abs(b - a.conjugate()) <= 1e-8 * max(1.0, abs(a))
            ]
            if not partner or partner[0][2] != n:
                raise ValidationError(
                    f"entry {a} (weight {w}) lacks a conjugate partner of equal multiplicity"
                )
        if self.charpoly is not None:
            cp = tuple(int(c) for c in self.charpoly)
            if len(cp) < 2 or cp[-1] != 1:
                raise ValidationError("charpoly must be monic with integer coefficients")
            object.__setattr__(self, "charpoly", cp)

    @property
    def top_modulus(self) -> float:
        return max(abs(e.alpha) for e in self.entries)


def _charpoly_roots(q: int, coeffs: Sequence[int], weight: int):
    """Roots of an ascending-coefficient integer polynomial, clustered into
    WeilEntry objects (multiplicity = cluster size, zeta_order detected for
    real entries +-q^(weight/2))."""
    import numpy as np

    coeffs = [int(c) for c in coeffs]
    if coeffs[-1] != 1:
        raise ValidationError("characteristic polynomial must be monic")
    roots = np.roots(coeffs[::-1])
    scale = q ** (weight / 2.0)
    entries = []
    used = [False] * len(roots)
    for i, r in enumerate(roots):
        if used[i]:
            continue
        cluster = [j for j in range(len(roots)) if not used[j] and abs(roots[j] - r) < 1e-8 * max(1.0, scale)]
        for j in cluster:
            used[j] = True
        alpha = complex(np.mean([roots[j] for j in cluster]))
        if abs(alpha.imag) < 1e-12 * max(1.0, abs(alpha)):
            alpha = complex(alpha.real, 0.0)
        zeta = alpha / scale
        order = None
        if abs(zeta - 1) < 1e-9:
            order = 1
        elif abs(zeta + 1) < 1e-9:
            order = 2
        entries.append(WeilEntry(alpha, weight, len(cluster), order))
    return tuple(entries)


def weil_from_charpoly(q: int, coeffs: Sequence[int]) -> WeilNumberSet:
    """Weight-1 eigenvalue set of an integer characteristic polynomial."""
    entries = _charpoly_roots(q, coeffs, 1)
    return WeilNumberSet(q=q, entries=entries, charpoly=tuple(int(c) for c in coeffs))


def full_motive_from_charpoly(q: int, coeffs: Sequence[int]) -> WeilNumberSet:
    """Full motive of a genus-1 abelian model: weights 0, 1, 2.

    Entries: 1 in weight 0, the charpoly roots in weight 1, and their product
    (= the constant coefficient) in weight 2.  The virtual counts of this set
    are N_r = prod_j (1 - alpha_j^r), exactly the abelian point count.
    """
    coeffs = [int(c) for c in coeffs]
    if len(coeffs) != 3:
        raise ValidationError("full motive construction expects a degree-2 charpoly")
    w1 = _charpoly_roots(q, coeffs, 1)
    prod = coeffs[0]  # product of the two roots, exact
    top = WeilEntry(complex(prod), 2, 1, 1 if prod > 0 else 2)
    entries = (WeilEntry(1.0 + 0j, 0, 1, 1),) + w1 + (top,)
    return WeilNumberSet(q=q, entries=entries, charpoly=tuple(coeffs))


def supersingular_motive(q: int, weights: Sequence[int] = (0, 1, 2)) -> WeilNumberSet:
    """Synthetic supersingular motive: eigenvalues zeta * q^(v/2), zeta = +-1.

    Weight 1 contributes the pair +-sqrt(q); even weights v contribute the
    single eigenvalue q^(v/2).  weights=(1,) is the h^1-only motive with
    N_r = -(1 + (-1)^r) q^(r/2); weights=(0,1) / (1,2) are the two-term
    direct sums used in the t^2-substitution examples; (0,1,2) over a square
    q is the dataset behind the standard F_4 example (note alpha_1 alpha_2 =
    -q there, so it is NOT the eigenvalue set of an actual elliptic curve --
    it is used as a motive, not a curve).
    """
    entries = []
    cp = None
    for v in sorted(weights):
        if v % 2 == 0:
            val = q ** (v // 2)
            entries.append(WeilEntry(complex(val), v, 1, 1))
        else:
            s = math.sqrt(q) * q ** ((v - 1) // 2)
            entries.append(WeilEntry(complex(s), v, 1, 1))
            entries.append(WeilEntry(complex(-s), v, 1, 2))
            if v == 1:
                cp = (-q, 0, 1)  # x^2 - q, the exact backing of the +-sqrt(q) pair
    return WeilNumberSet(q=q, entries=tuple(entries), charpoly=cp)


# ---------------------------------------------------------------------------
# exact power sums and counts
# ---------------------------------------------------------------------------


def power_sums(coeffs: Sequence[int], L: int) -> list:
    """p_l = sum of l-th powers of the roots, l = 1..L, by Newton's identities.

    ``coeffs`` ascending, monic.  Exact integer arithmetic.
    """
    coeffs = [int(c) for c in coeffs]
    n = len(coeffs) - 1
    if coeffs[-1] != 1:
        raise ValidationError("power sums need a monic polynomial")
    a = coeffs[:-1]  # a[i] = coefficient of x^i
    p = []
    for l in range(1, L + 1):
        if l <= n:
            s = -l * a[n - l]
            for i in range(1, l):
                s -= a[n - i] * p[l - i - 1]
        else:
            s = 0
            for i in range(1, n + 1):
                s -= a[n - i] * p[l - i - 1]
        p.append(s)
    return p


def abelian_count(weil: WeilNumberSet, r: int):
    """|prod_j (1 - alpha_j^r)| via symmetric functions -- exact integers.

    Newton's identities convert the power sums p_{rm} of the charpoly into
    the elementary symmetric functions e_m of the r-th powers, and
    prod (1 - alpha_j^r) = sum_m (-1)^m e_m.
    """
    if weil.charpoly is None:
        # floating fallback
        val = 1.0 + 0j
        for e in weil.entries:
            if e.weight != 1:
                continue
            for _ in range(e.multiplicity):
                val *= 1 - e.alpha**r
        return abs(val)
    n = len(weil.charpoly) - 1
    ps = power_sums(weil.charpoly, n * r)
    # e_m of {alpha_j^r}: m e_m = sum_{i=1..m} (-1)^(i-1) e_{m-i} p_{r i}
    e = [1]
    for m in range(1, n + 1):
        s = 0
        for i in range(1, m + 1):
            s += (-1) ** (i - 1) * e[m - i] * ps[r * i - 1]
        assert s % m == 0
        e.append(s // m)
    total = sum((-1) ** m * e[m] for m in range(n + 1))
    return abs(total)


@dataclass
class VirtualCounts:
    """N_l for l = 1..L; exact ints/Fractions when possible, else floats.

    ``vanish_bound`` is the index beyond which N_l != 0 is guaranteed by the
    unique-top-weight ratio argument (None when that argument does not
    apply); ``exact`` says whether integer arithmetic was used throughout;
    ``error_estimate`` bounds the floating error otherwise.
    """

    values: list
    vanish_bound: Optional[int]
    exact: bool
    error_estimate: float = 0.0


def virtual_counts(weil: WeilNumberSet, L: int) -> VirtualCounts:
    """N_l = sum_{v,j} (-1)^v n_j alpha_{v,j}^l for l = 1..L."""
    ps = None
    if weil.charpoly is not None:
        n = len(weil.charpoly) - 1
        ps = power_sums(weil.charpoly, L)
    sq = math.isqrt(weil.q)
    q_is_square = sq * sq == weil.q
    values = []
    exact = True
    err = 0.0
    for l in range(1, L + 1):
        total = 0
        ftotal = 0.0 + 0j
        inexact_here = False
        for e in weil.entries:
            if weil.charpoly is not None and e.weight == weil.charpoly_weight:
                continue  # covered by the power-sum block below
            sign = -1 if e.weight % 2 else 1
            if e.zeta_order in (1, 2):
                zl = 1 if (e.zeta_order == 1 or l % 2 == 0) else -1
                vl = e.weight * l
                if vl % 2 == 0:
                    total += sign * e.multiplicity * zl * weil.q ** (vl // 2)
                    continue
                if q_is_square:
                    total += sign * e.multiplicity * zl * sq**vl
                    continue
            inexact_here = True
            ftotal += sign * e.multiplicity * e.alpha**l
        if ps is not None:
            sign = -1 if weil.charpoly_weight % 2 else 1
            total += sign * ps[l - 1]
        if inexact_here:
            exact = False
            v = total + ftotal
            err = max(err, abs(v.imag))
            values.append(v.real)
        else:
            values.append(total)
    bound = check_unique_top_weight(weil).vanish_bound
    return VirtualCounts(values=values, vanish_bound=bound, exact=exact, error_estimate=err)


@dataclass(frozen=True)
class TopWeightVerdict:
    unique: bool
    m: Optional[int]
    vanish_bound: Optional[int]


def check_unique_top_weight(weil: WeilNumberSet) -> TopWeightVerdict:
    """Unique top weight: exactly one eigenvalue of maximal modulus, equal to
    q^m for an integer m, with multiplicity 1.

    When it holds, |N_l| = q^{ml} |1 - sum of ratio powers| with every ratio
    of modulus < 1, so N_l != 0 once sum n_j rho_j^l < 1; the returned
    vanish_bound is the smallest l0 >= 0 such that this holds for all
    l > l0.
    """
    top = weil.top_modulus
    at_top = [e for e in weil.entries if abs(e.alpha) >= top * (1 - 1e-9)]
    if len(at_top) != 1 or at_top[0].multiplicity != 1:
        return TopWeightVerdict(False, None, None)
    e = at_top[0]
    m = e.weight / 2
    if m != int(m) or abs(e.alpha - weil.q ** int(m)) > 1e-9 * top:
        return TopWeightVerdict(False, None, None)
    m = int(m)
    rhos = [
        (abs(o.alpha) / top, o.multiplicity) for o in weil.entries if o is not e
    ]
    l0 = 0
    while sum(n * rho ** (l0 + 1) for rho, n in rhos) >= 1:
        l0 += 1
        if l0 > 10_000:  # cannot happen with all rho < 1, guards a bug
            return TopWeightVerdict(True, m, None)
    return TopWeightVerdict(True, m, l0)


# ---------------------------------------------------------------------------
# spectral data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralDatum:
    """One slot (eps, lambda) with eps rational nonzero and 0 < |lambda| < 1."""

    eps: Fraction
    lam: complex

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        object.__setattr__(self, "lam", complex(self.lam))
        if self.eps == 0:
            raise ValidationError("eps must be nonzero")
        if not 0 < abs(self.lam) < 1:
            raise ValidationError(f"need 0 < |lambda| < 1, got |{self.lam}| = {abs(self.lam)}")


@dataclass(frozen=True)
class SpectralData:
    """The datum (eps_i, lambda_i)_{i=1..N}; N = 0 is the empty system."""

    items: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "items", tuple(i if isinstance(i, SpectralDatum) else SpectralDatum(*i) for i in self.items)
        )

    @property
    def N(self) -> int:
        return len(self.items)

    def conjugate(self) -> "SpectralData":
        return SpectralData(tuple(SpectralDatum(d.eps, d.lam.conjugate()) for d in self.items))

    def is_conjugate_closed(self, tol: float = 1e-12) -> bool:
        lams = [(d.eps, d.lam) for d in self.items]
        for eps, lam in lams:
            if abs(lam.imag) <= tol:
                continue
            if not any(e2 == eps and abs(l2 - lam.conjugate()) <= tol for e2, l2 in lams):
                return False
        return True

    def inner_sum(self, r: complex) -> complex:
        """sum_i eps_i lambda_i^r (principal powers for complex r)."""
        total = 0j
        for d in self.items:
            total += float(d.eps) * cmath.exp(r * cmath.log(d.lam))
        return total


def spectral(*pairs) -> SpectralData:
    """Convenience constructor: spectral((1, 0.5), (-1, 0.25), ...)."""
    return SpectralData(tuple(SpectralDatum(Fraction(e) if not isinstance(e, float) else Fraction(e).limit_denominator(10**9), l) for e, l in pairs))


@dataclass(frozen=True)
class ExpPrefix:
    """Descriptor of the exponential prefix factor exp(gamma log q * t/(1-t))."""

    gamma: Fraction
    q: int

    @property
    def log_coefficient(self) -> float:
        return float(self.gamma) * math.log(self.q)


def spectral_from_weil(weil: WeilNumberSet, m: Optional[int] = None, route: str = "auto"):
    """Spectral data + exponential prefix from a Weil number set.

    Two routes:

    * purely weight-1 sets (abelian model): iterated product construction
      over the single-slot systems {(1, alpha_j^(-1))}; prefix gamma = g =
      (number of eigenvalues)/2.

    * general motive with unique top weight q^m of multiplicity 1: one slot
      per non-top entry, eps_i = (-1)^(v+1) n_i, lambda_i = alpha/q^m;
      prefix gamma = m.  Entries with |alpha| = q^m other than the top one
      are rejected (they would give |lambda| = 1).

    ``route="auto"`` picks abelian for weight-1-only sets and motive
    otherwise; pass "motive" explicitly to read a weight-1 set as a virtual
    count Sigma (-1)^v alpha^l (which then needs a unique top weight).
    """
    if route not in ("auto", "abelian", "motive"):
        raise ValidationError(f"unknown route {route!r}")
    weights = {e.weight for e in weil.entries}
    if route == "abelian" and weights != {1}:
        raise ValidationError("abelian route requires a purely weight-1 set")
    if route == "auto":
        route = "abelian" if weights == {1} else "motive"
    if route == "abelian":
        g2 = sum(e.multiplicity for e in weil.entries)
        if g2 % 2:
            raise ValidationError("abelian model needs an even number of weight-1 eigenvalues")
        data = SpectralData(())
        for e in weil.entries:
            for _ in range(e.multiplicity):
                lam = 1 / e.alpha
                data = product_data(data, SpectralData((SpectralDatum(Fraction(1), lam),)))
        return data, ExpPrefix(Fraction(g2, 2), weil.q)

    verdict = check_unique_top_weight(weil)
    if not verdict.unique:
        raise ValidationError("motive route requires a unique top weight q^m of multiplicity 1")
    if m is None:
        m = verdict.m
    elif m != verdict.m:
        raise ValidationError(f"declared top weight exponent {m} != detected {verdict.m}")
    qm = weil.q**m
    items = []
    for e in weil.entries:
        if e.weight == 2 * m and abs(abs(e.alpha) - qm) <= 1e-9 * qm:
            if abs(e.alpha - qm) <= 1e-9 * qm:
                continue  # the top eigenvalue itself
            raise ValidationError("eigenvalue of modulus q^m other than the top one")
        eps = Fraction((-1) ** (e.weight + 1) * e.multiplicity)
        items.append(SpectralDatum(eps, e.alpha / qm))
    return SpectralData(tuple(items)), ExpPrefix(Fraction(m), weil.q)


def product_data(a: SpectralData, b: SpectralData) -> SpectralData:
    """Spectral data of a product: slots of a, slots of b, and one slot
    (-eps_a eps_b, lambda_a lambda_b) per cross pair, so that

        1 - sum_prod eps lambda^r = (1 - sum_a)(1 - sum_b)   identically.

    Duplicate slots are kept as-is (merge_parallel_slots combines them)."""
    items = list(a.items) + list(b.items)
    for da in a.items:
        for db in b.items:
            items.append(SpectralDatum(-da.eps * db.eps, da.lam * db.lam))
    return SpectralData(tuple(items))


def merge_parallel_slots(data: SpectralData, tol: float = 1e-12) -> SpectralData:
    """Combine slots with coinciding lambda by adding their eps; drop slots
    whose eps sums to zero."""
    out = []
    for d in data.items:
        for i, (eps, lam) in enumerate(out):
            if abs(lam - d.lam) <= tol * max(1.0, abs(lam)):
                out[i] = (eps + d.eps, lam)
                break
        else:
            out.append((d.eps, d.lam))
    return SpectralData(tuple(SpectralDatum(e, l) for e, l in out if e != 0))


def fold_sign_pairs(data: SpectralData, tol: float = 1e-12):
    """Detect the +-lambda pairing and fold it into the variable t^2.

    If every slot (eps, lambda) has a partner (eps, -lambda), then
    sum eps lambda^r vanishes for odd r and doubles for even r, so the datum
    is equivalent to {(2 eps, lambda^2)} in the variable u = t^2.  Returns
    the folded SpectralData, or None when the pairing fails.
    """
    pool = list(data.items)
    folded = []
    while pool:
        d = pool.pop()
        idx = None
        for i, e in enumerate(pool):
            if e.eps == d.eps and abs(e.lam + d.lam) <= tol * max(1.0, abs(d.lam)):
                idx = i
                break
        if idx is None:
            return None
        pool.pop(idx)
        folded.append(SpectralDatum(2 * d.eps, d.lam**2))
    return SpectralData(tuple(folded))


# ---------------------------------------------------------------------------
# truncation parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationParams:
    """Certified strip parameters: see the module docstring for (a), (b).

    ``tail_base`` is the certified value of the majorant in (b) at r0; the
    level-l term of the log expansion is bounded by tail_base^l / l, which
    fixes L_max.  J_max caps the literal two-sided j-sums (the closed-form
    evaluators do not need it; the literal modes report their own tail
    error).  R_oracle is the partial-sum length used by oracle comparisons.
    """

    K: float
    r0: int
    L_max: int
    J_max: int
    R_oracle: int = 400
    M: float = 1.0
    tail_base: float = 0.0

    def __post_init__(self):
        if self.K <= 0:
            raise ValidationError("K must be positive")
        if self.r0 < 1:
            raise ValidationError("r0 must be >= 1")
        if self.L_max < 8 or self.J_max < 8:
            raise ValidationError("L_max and J_max must be >= 8")


def strip_majorants(data: SpectralData, K: float, r0: float):
    """(max_i, M * sum_i) of |lambda_i|^r0 e^(K |arg lambda_i|)."""
    if data.N == 0:
        return 0.0, 0.0
    M = max(abs(float(d.eps)) for d in data.items)
    vals = [abs(d.lam) ** r0 * math.exp(K * abs(cmath.phase(d.lam))) for d in data.items]
    return max(vals), M * sum(vals)


def select_truncation(
    data: SpectralData,
    K: float = math.pi,
    tail_tol: float = 1e-12,
    cap: int = 512,
    R_oracle: int = 400,
) -> TruncationParams:
    """Smallest r0 certifying the strip bounds, plus level/period caps.

    The certification uses the worst case Im r = +-K, i.e. the majorant
    |lambda|^(Re r) e^(K |arg lambda|).  L_max is the smallest L with
    A^(L+1)/((L+1)(1-A)) < tail_tol for A = certified bound (b), clamped to
    [8, cap].  J_max defaults to the cap (the literal j-sum modes carry
    their own error reporting).
    """
    if data.N == 0:
        return TruncationParams(K=K, r0=1, L_max=8, J_max=8, R_oracle=R_oracle, M=0.0, tail_base=0.0)
    M = max(abs(float(d.eps)) for d in data.items)
    r0 = 1
    while True:
        la0, la1 = strip_majorants(data, K, r0)
        if la0 < 0.5 and la1 < 0.5:
            break
        r0 += 1
        if r0 > 100_000:
            raise ValidationError("cannot certify strip bounds (|lambda| too close to 1)")
    A = la1
    L = 8
    while L < cap and A ** (L + 1) / ((L + 1) * (1 - A)) >= tail_tol:
        L += 1
    return TruncationParams(
        K=K, r0=r0, L_max=L, J_max=cap, R_oracle=R_oracle, M=M, tail_base=A
    )
