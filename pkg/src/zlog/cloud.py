"""Term cloud: the multinomial expansion of log(1 - sum_i eps_i lambda_i^r).

For spectral data (eps_i, lambda_i)_{i=1..N},

    log(1 - sum_i eps_i lambda_i^r) = - sum_{l >= 1} sum_{|k| = l} C_k mu_k^r,

    C_k  = (l-1)!/(k_1! ... k_N!) * prod eps_i^{k_i}   (exact rational),
    mu_k = prod lambda_i^{k_i},      w_k = sum k_i Log(lambda_i),

with the sum over compositions k of l.  Everything downstream is built from
these terms: the meromorphic tail has one simple pole per distinct 1/mu_k,
divisor support points live at w_k (and their 2 pi i translates), and loop
integrals pick up 2 pi i C_k per enclosed term.

The level-l block is bounded by A^l / l with A the certified strip majorant,
so clouds truncated at L_max carry a geometric tail bound.  Cloud size is
binomial(L_max + N, N) - 1; a hard cap guards combinatorial blow-up for
wide data.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from zlog.errors import BudgetExceeded

MAX_TERMS = 500_000


@dataclass(frozen=True)
class TermCloud:
    """Flat arrays over all terms with level <= L_max (see module docstring).

    ``coeffs_exact`` keeps the C_k as Fractions for rationality checks;
    ``coeffs``/``mus`` are the complex128 views used by the evaluation
    kernels; ``w_points`` are the divisor locations sum k_i Log(lambda_i).
    """

    levels: tuple
    k_tuples: tuple
    coeffs_exact: tuple
    coeffs: np.ndarray
    mus: np.ndarray
    w_points: np.ndarray

    @property
    def size(self) -> int:
        return len(self.levels)


def _compositions(l: int, n: int):
    """All n-tuples of nonnegative integers summing to l (stars and bars)."""
    for bars in combinations(range(l + n - 1), n - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(l + n - 2 - prev)
        yield tuple(out)


@lru_cache(maxsize=64)
def build_cloud(data, L_max: int) -> TermCloud:
    """Enumerate all terms with 1 <= level <= L_max for the given data."""
    n = data.N
    if n == 0:
        empty = np.zeros(0, dtype=np.complex128)
        return TermCloud((), (), (), empty, empty.copy(), empty.copy())
    total = math.comb(L_max + n, n) - 1
    if total > MAX_TERMS:
        raise BudgetExceeded(
            f"term cloud would hold {total} terms (> {MAX_TERMS}); "
            "reduce L_max or merge parallel slots"
        )
    eps = [d.eps for d in data.items]
    logs = [cmath.log(d.lam) for d in data.items]
    lams = [d.lam for d in data.items]
    levels, ks, cs_exact = [], [], []
    mus, ws = [], []
    for l in range(1, L_max + 1):
        base = math.factorial(l - 1)
        for k in _compositions(l, n):
            c = Fraction(base)
            for ki, ei in zip(k, eps):
                if ki:
                    c = c / math.factorial(ki) * ei**ki
            if c == 0:
                continue
            w = 0j
            mu = 1.0 + 0j
            for ki, lg, lam in zip(k, logs, lams):
                if ki:
                    w += ki * lg
                    mu *= lam**ki
            levels.append(l)
            ks.append(k)
            cs_exact.append(c)
            mus.append(mu)
            ws.append(w)
    return TermCloud(
        levels=tuple(levels),
        k_tuples=tuple(ks),
        coeffs_exact=tuple(cs_exact),
        coeffs=np.array([complex(c) for c in cs_exact], dtype=np.complex128),
        mus=np.array(mus, dtype=np.complex128),
        w_points=np.array(ws, dtype=np.complex128),
    )


def level_tail_bound(tail_base: float, L_max: int) -> float:
    """Geometric bound on the sum of all levels above L_max (coefficient of
    the |z|^{r0} / dist factor): A^{L+1} / ((L+1)(1-A))."""
    if tail_base <= 0.0:
        return 0.0
    if tail_base >= 1.0:
        return math.inf
    return tail_base ** (L_max + 1) / ((L_max + 1) * (1.0 - tail_base))
