"""Point counts of varieties over finite fields.

Count sequences N_r = |X(F_{q^r})| enter everything downstream (the series
Z_log = exp(sum_r log N_r t^r / r), the spectral data, the recurrence tests).
This module supplies them from three sources:

* naive enumeration over small fields -- the ground-truth oracle; every point
  of F_q^n (or of the normalized projective charts, first nonzero coordinate
  scaled to 1) is plugged into the defining equations;

* closed-form families with exact integer formulas:

      affine(n):          q^(rn)
      torus(n):           (q^r - 1)^n
      projective(n):      1 + q^r + ... + q^(rn)
      gl(k):              q^(r k(k-1)/2) * prod_{l=1..k} (q^(rl) - 1)
      grassmann(k, n):    prod_{l=n-k+1..n} (q^(rl)-1) / prod_{l=1..k} (q^(rl)-1)
      full_grassmann(n):  sum_k grassmann(k, n)
      quadric_type1(n,m,alpha):  q^(r(n-h-1)) * (q^(rh) - 1),  h = (m-1)/2

  The quadric is the split form x_1 y_1 + ... + x_h y_h = alpha (alpha != 0)
  in n variables: the fiber count of the rank-2h split form is
  q^(2h-1) - q^(h-1) over every extension (split stays split, so the count is
  stable in r -- odd-rank forms are not, their character term flips sign with
  the parity of the extension degree), and n-2h free coordinates contribute
  q^(n-2h).  The count does not depend on which alpha != 0 is chosen.

* Weil-number models (thin wrapper; the arithmetic lives in zlog.motive).

Field elements are polynomial residues with a deterministically chosen
modulus (the first monic irreducible of degree k when coefficient tuples are
ordered most-significant-digit first), so all counts are reproducible
bit-for-bit.  The enumeration budget is fixed at 2^20 ambient points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from zlog import kernels
from zlog.errors import BudgetExceeded, UndefinedZlog, ValidationError

ENUMERATION_BUDGET = 1 << 20

CLOSED_FORM_FAMILIES = (
    "affine",
    "torus",
    "projective",
    "gl",
    "grassmann",
    "full_grassmann",
    "quadric_type1",
)


# ---------------------------------------------------------------------------
# polynomial arithmetic over F_p (ascending coefficient tuples)
# ---------------------------------------------------------------------------


def _poly_trim(c: list) -> tuple:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _poly_mul(a: tuple, b: tuple, p: int) -> tuple:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_mod(a: tuple, f: tuple, p: int) -> tuple:
    # f monic
    a = list(a)
    df = len(f) - 1
    for d in range(len(a) - 1, df - 1, -1):
        c = a[d] % p
        if c:
            for i in range(df + 1):
                a[d - df + i] = (a[d - df + i] - c * f[i]) % p
    return _poly_trim(a[:df])


def _poly_powmod(base: tuple, e: int, f: tuple, p: int) -> tuple:
    result = (1,)
    base = _poly_mod(base, f, p)
    while e:
        if e & 1:
            result = _poly_mod(_poly_mul(result, base, p), f, p)
        base = _poly_mod(_poly_mul(base, base, p), f, p)
        e >>= 1
    return result


def _poly_gcd(a: tuple, b: tuple, p: int) -> tuple:
    while b:
        # make b monic before reducing
        inv = pow(b[-1], p - 2, p)
        b_monic = tuple((c * inv) % p for c in b)
        a, b = b_monic, _poly_mod(a, b_monic, p)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = tuple((c * inv) % p for c in a)
    return a


def _is_irreducible(f: tuple, p: int) -> bool:
    """Rabin's test for a monic polynomial f over F_p."""
    k = len(f) - 1
    if k <= 0:
        return False
    if k == 1:
        return True
    x = (0, 1)
    # x^(p^k) == x  (mod f)
    if _poly_powmod(x, p**k, f, p) != x:
        return False
    # gcd(x^(p^(k/t)) - x, f) == 1 for every prime t | k
    kk, t = k, 2
    primes = set()
    while t * t <= kk:
        if kk % t == 0:
            primes.add(t)
            while kk % t == 0:
                kk //= t
        t += 1
    if kk > 1:
        primes.add(kk)
    for t in primes:
        g = _poly_powmod(x, p ** (k // t), f, p)
        diff = list(g) + [0] * (2 - len(g))
        diff[1] = (diff[1] - 1) % p
        if _poly_gcd(_poly_trim(diff), f, p) != (1,):
            return False
    return True


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(math.isqrt(n)) + 1):
        if n % d == 0:
            return False
    return True


# ---------------------------------------------------------------------------
# fields and varieties
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteField:
    """F_{p^k} as polynomial residues modulo a fixed irreducible.

    ``modulus`` is the ascending coefficient tuple of a monic irreducible of
    degree k over F_p.  Elements are integer indices 0..q-1 whose base-p
    digits are the residue's coefficients (constant term = least significant
    digit).
    """

    p: int
    k: int
    modulus: tuple

    @property
    def q(self) -> int:
        return self.p**self.k

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValidationError(f"p = {self.p} is not prime")
        if self.k < 1:
            raise ValidationError(f"extension degree k = {self.k} must be >= 1")
        if self.p**self.k > ENUMERATION_BUDGET:
            raise BudgetExceeded(
                f"field size {self.p}^{self.k} exceeds the enumeration budget 2^20"
            )
        if len(self.modulus) != self.k + 1 or self.modulus[-1] != 1:
            raise ValidationError("modulus must be monic of degree k")
        if not _is_irreducible(self.modulus, self.p):
            raise ValidationError("modulus is reducible")


def make_field(p: int, k: int) -> FiniteField:
    """Construct F_{p^k} with the deterministic smallest irreducible modulus.

    Candidates x^k + c_{k-1} x^{k-1} + ... + c_0 are scanned in increasing
    order of the integer sum(c_i p^i), i.e. lexicographically on the
    coefficient sequence read most-significant first; the first irreducible
    wins.  For k = 1 the modulus is x.  Examples: F_4 gets x^2 + x + 1 (the
    only monic irreducible quadratic over F_2), F_9 gets x^2 + 1.
    """
    if not _is_prime(p):
        raise ValidationError(f"p = {p} is not prime")
    if k < 1:
        raise ValidationError(f"extension degree k = {k} must be >= 1")
    if p**k > ENUMERATION_BUDGET:
        raise BudgetExceeded(f"field size {p}^{k} exceeds the enumeration budget 2^20")
    if k == 1:
        return FiniteField(p, 1, (0, 1))
    for m in range(p**k):
        coeffs = []
        rest = m
        for _ in range(k):
            coeffs.append(rest % p)
            rest //= p
        f = tuple(coeffs) + (1,)
        if _is_irreducible(f, p):
            return FiniteField(p, k, f)
    raise ZeroDivisionError("unreachable: no irreducible of degree k over F_p")


@dataclass(frozen=True)
class VarietySpec:
    """A system of integer-coefficient polynomial equations.

    ``ambient`` is "affine" or "projective"; ``n`` is the ambient dimension
    (so affine specs use n variables and projective specs n+1 homogeneous
    coordinates).  Each equation is a list of ``(coefficient, exponents)``
    terms with ``exponents`` a tuple of length = number of variables.
    """

    ambient: str
    n: int
    equations: tuple

    @property
    def nvars(self) -> int:
        return self.n if self.ambient == "affine" else self.n + 1

    def __post_init__(self):
        if self.ambient not in ("affine", "projective"):
            raise ValidationError(f"unknown ambient {self.ambient!r}")
        if self.n < 0:
            raise ValidationError("ambient dimension must be >= 0")
        eqs = []
        for eq in self.equations:
            terms = []
            degrees = set()
            for coef, exps in eq:
                exps = tuple(int(e) for e in exps)
                if len(exps) != self.nvars:
                    raise ValidationError(
                        f"term exponent vector {exps} does not have {self.nvars} entries"
                    )
                if any(e < 0 for e in exps):
                    raise ValidationError("negative exponents are not allowed")
                degrees.add(sum(exps))
                terms.append((int(coef), exps))
            if self.ambient == "projective" and len(degrees) > 1:
                raise ValidationError("projective equations must be homogeneous")
            eqs.append(tuple(terms))
        object.__setattr__(self, "equations", tuple(eqs))


def _flatten_equations(spec: VarietySpec, p: int):
    coef_idx, exps, offsets = [], [], [0]
    for eq in spec.equations:
        for coef, ev in eq:
            coef_idx.append(coef % p)
            exps.append(ev)
        offsets.append(len(coef_idx))
    nvars = spec.nvars
    coef_arr = np.asarray(coef_idx, dtype=np.int64)
    exp_arr = (
        np.asarray(exps, dtype=np.int64)
        if exps
        else np.zeros((0, nvars), dtype=np.int64)
    )
    return coef_arr, exp_arr, np.asarray(offsets, dtype=np.int64)


def count_naive(spec: VarietySpec, fld: FiniteField) -> int:
    """Exact point count by exhaustive enumeration.

    Affine specs enumerate all q^n points.  Projective specs enumerate the
    normalized representatives (first nonzero coordinate equal to 1), one per
    projective point, so no quotient bookkeeping is needed.
    """
    q = fld.q
    if spec.ambient == "affine":
        npoints = q**spec.n
    else:
        if spec.n == 0 and not spec.equations:
            raise ValidationError("projective ambient with n = 0 and no equations")
        npoints = (q ** (spec.n + 1) - 1) // (q - 1)
    if npoints > ENUMERATION_BUDGET:
        raise BudgetExceeded(
            f"{npoints} points to enumerate exceeds the budget 2^20"
        )
    if not spec.equations and spec.ambient == "affine":
        return npoints
    coef_arr, exp_arr, offsets = _flatten_equations(spec, fld.p)
    if spec.ambient == "affine":
        return kernels.count_zero_locus(
            fld.p, fld.k, fld.modulus, coef_arr, exp_arr, offsets, (), spec.n
        )
    total = 0
    for lead in range(spec.n + 1):
        fixed = (0,) * lead + (1,)
        total += kernels.count_zero_locus(
            fld.p, fld.k, fld.modulus, coef_arr, exp_arr, offsets, fixed, spec.n - lead
        )
    return total


def split_quadric_spec(n: int, m: int, alpha: int) -> VarietySpec:
    """The split quadric x_1 y_1 + ... + x_h y_h = alpha in n variables.

    This is the variety whose count the quadric_type1 closed form gives;
    h = (m-1)/2 pairs plus n-2h free coordinates.
    """
    h = _check_quadric_params(n, m, alpha)
    terms = []
    for i in range(h):
        ev = [0] * n
        ev[2 * i] = 1
        ev[2 * i + 1] = 1
        terms.append((1, tuple(ev)))
    terms.append((-alpha, (0,) * n))
    return VarietySpec("affine", n, (tuple(terms),))


def _check_quadric_params(n: int, m: int, alpha) -> int:
    if m % 2 == 0 or m < 3:
        raise ValidationError("quadric_type1 needs odd m >= 3")
    h = (m - 1) // 2
    if 2 * h > n:
        raise ValidationError(f"quadric_type1 needs n >= m-1 (= {2*h}) variables")
    if alpha == 0:
        raise ValidationError("quadric_type1 needs alpha != 0")
    return h


_FAMILY_PARAMS = {
    "affine": ("n",),
    "torus": ("n",),
    "projective": ("n",),
    "gl": ("k",),
    "grassmann": ("k", "n"),
    "full_grassmann": ("n",),
    "quadric_type1": ("n", "m", "alpha"),
}


def _family_params(family: str, params) -> tuple:
    """Accept positional sequences or name->value dicts for family parameters."""
    if family not in _FAMILY_PARAMS:
        raise ValidationError(f"unknown closed-form family {family!r}")
    names = _FAMILY_PARAMS[family]
    if isinstance(params, dict):
        missing = [n for n in names if n not in params]
        extra = [k for k in params if k not in names]
        if missing or extra:
            raise ValidationError(
                f"family {family!r} takes parameters {names}, got {sorted(params)}"
            )
        return tuple(int(params[n]) for n in names)
    params = tuple(int(v) for v in params)
    if len(params) != len(names):
        raise ValidationError(f"family {family!r} takes {len(names)} parameters")
    return params


def count_closed_form(family: str, params, q: int, r: int) -> int:
    """Exact count for one of the closed-form families (see module docstring)."""
    if r < 1 or q < 2:
        raise ValidationError("need q >= 2 and r >= 1")
    params = _family_params(family, params)
    Q = q**r
    if family == "affine":
        (n,) = params
        return Q**n
    if family == "torus":
        (n,) = params
        return (Q - 1) ** n
    if family == "projective":
        (n,) = params
        return (Q ** (n + 1) - 1) // (Q - 1)
    if family == "gl":
        (k,) = params
        out = Q ** (k * (k - 1) // 2)
        for l in range(1, k + 1):
            out *= Q**l - 1
        return out
    if family == "grassmann":
        k, n = params
        if not 0 <= k <= n:
            raise ValidationError("grassmann needs 0 <= k <= n")
        num, den = 1, 1
        for l in range(n - k + 1, n + 1):
            num *= Q**l - 1
        for l in range(1, k + 1):
            den *= Q**l - 1
        assert num % den == 0
        return num // den
    if family == "full_grassmann":
        (n,) = params
        return sum(count_closed_form("grassmann", (k, n), q, r) for k in range(n + 1))
    if family == "quadric_type1":
        n, m, alpha = params
        h = _check_quadric_params(n, m, alpha)
        return Q ** (n - h - 1) * (Q**h - 1)
    raise ValidationError(f"unknown closed-form family {family!r}")  # unreachable


# ---------------------------------------------------------------------------
# count sequences
# ---------------------------------------------------------------------------


@dataclass
class CountSequence:
    """N_r for r = 1..R plus provenance.

    ``values`` are ints (or Fractions when sourced from virtual counts).  For
    Z_log use every value must be >= 1; ``require_positive`` checks this at
    hand-off.
    """

    q: int
    values: list
    source: str = "naive"

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValidationError("count sequence must have length >= 1")

    @property
    def R(self) -> int:
        return len(self.values)

    def require_positive(self) -> "CountSequence":
        for i, v in enumerate(self.values):
            if v <= 0:
                raise UndefinedZlog(
                    f"N_{i+1} = {v} <= 0: the multiplicative zeta function is undefined"
                )
        return self

    def log_values(self) -> np.ndarray:
        self.require_positive()
        # math.log handles arbitrarily large ints exactly enough (float result)
        return np.array([math.log(v) for v in self.values], dtype=float)


def counts_from_variety(spec: VarietySpec, p: int, k: int, R: int) -> CountSequence:
    """N_r = count over F_{q^r} for r = 1..R by enumeration (q = p^k)."""
    values = []
    for r in range(1, R + 1):
        fld = make_field(p, k * r)
        values.append(count_naive(spec, fld))
    return CountSequence(q=p**k, values=values, source="naive")


def counts_from_family(family: str, params: Sequence, q: int, R: int) -> CountSequence:
    values = [count_closed_form(family, params, q, r) for r in range(1, R + 1)]
    return CountSequence(q=q, values=values, source=f"closed_form({family})")


def counts_from_weil(weil, r: int, model: str = "abelian"):
    """Count at extension degree r from a Weil-number set.

    For ``model="abelian"`` this is |prod_j (1 - alpha_j^r)|, computed through
    the integer power sums of the characteristic polynomial (exact when the
    charpoly has integer coefficients).  For ``model="motive"`` it is the
    virtual count sum_{v,j} (-1)^v alpha_{v,j}^r, which may be <= 0.
    """
    from zlog import motive

    if model == "abelian":
        return motive.abelian_count(weil, r)
    if model == "motive":
        vals = motive.virtual_counts(weil, r).values
        return vals[r - 1]
    raise ValidationError(f"unknown Weil count model {model!r}")


def counts_from_weil_sequence(weil, R: int, model: str = "abelian") -> CountSequence:
    from zlog import motive

    if model == "abelian":
        values = [motive.abelian_count(weil, r) for r in range(1, R + 1)]
    else:
        values = list(motive.virtual_counts(weil, R).values)
    return CountSequence(q=weil.q, values=values, source="weil")


def product_counts(a: CountSequence, b: CountSequence) -> CountSequence:
    """Counts of a product: N_r(X x Y) = N_r(X) N_r(Y)."""
    if a.q != b.q:
        raise ValidationError("product requires matching base fields")
    R = min(a.R, b.R)
    vals = [a.values[i] * b.values[i] for i in range(R)]
    return CountSequence(q=a.q, values=vals, source="product")
