"""Linear-recurrence detection and falsification for log count sequences.

If N_r were the coefficients of a rational generating function, log N_r
would inherit a linear recurrence with constant coefficients over any window
where the dominant root wins.  Such a recurrence is detected by least squares
on the Hankel system: predict a_{r+d} from the d preceding terms over every
window that fits in the horizon, and normalize the squared misfit by the
sequence's own energy.  Genuinely transcendental-growth sequences (the log
counts of positive-dimensional varieties beyond pure prefix models) leave
residuals many orders of magnitude above the detection threshold at modest
horizons; sequences that truly satisfy a recurrence sit at float noise or,
for exact integer inputs, at an exact zero computed in rational arithmetic.

A small residual alone cannot distinguish "exactly recurrent" from
"spectral corrections that decay below double precision within the horizon"
-- the log counts of a curve sit within 1e-22 of an order-6 recurrence at
horizon 48 while satisfying none.  A candidate therefore counts as *found*
only after passing an exact-arithmetic gate: its coefficients must lie
within 1e-6 of rationals with denominator <= 64, and the rationalized
recurrence must hold as an exact big-integer multiplicative identity
N_{r+d}^D = prod_i N_{r+d-i}^{D c_i} on every window.  Genuine recurrences
(pure power counts) pass; near-recurrences get caught by the first window
whose discarded spectral mode is still bigger than zero -- which is all of
them, exactly.

A "falsified" verdict is empirical -- the sweep checks orders 1..d_max at a
finite horizon; it is evidence, never a proof, and the report says so.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Optional, Sequence, Tuple

import numpy as np

from zlog.counts import CountSequence
from zlog.errors import ValidationError

# normalized-residual boundary between "found" and "falsified": positive
# controls sit below 1e-16, curve/abelian log-count sequences above 1e-6 at
# horizon 48, so the decision has two orders of margin on each side
RESIDUAL_THRESHOLD = 1e-8


@dataclass(frozen=True)
class OrderFit:
    """Best order-d fit: coefficients are kept only below the threshold;
    validated means the exact-arithmetic identity held on every window."""

    order: int
    coefficients: Optional[Tuple[float, ...]]
    residual: float
    validated: bool = False

    def __post_init__(self):
        if self.residual < 0:
            raise ValidationError("residuals are nonnegative")


@dataclass(frozen=True)
class RecurrenceReport:
    sequence_id: str
    horizon: int
    fits: Tuple[OrderFit, ...]
    verdict: str  # "recurrence_found" | "falsified_up_to"
    order: int  # the order found, or the largest order swept
    note: str

    def label(self) -> str:
        return f"{self.verdict}({self.order})"

    def to_json_dict(self) -> dict:
        return {
            "sequence_id": self.sequence_id,
            "horizon": self.horizon,
            "verdict": self.verdict,
            "order": self.order,
            "note": self.note,
            "fits": [
                {
                    "order": f.order,
                    "residual": f.residual,
                    "coefficients": None
                    if f.coefficients is None
                    else list(f.coefficients),
                    "validated": f.validated,
                }
                for f in self.fits
            ],
        }

    def table(self) -> str:
        lines = [
            f"sequence  {self.sequence_id}",
            f"horizon   {self.horizon}",
            f"verdict   {self.label()}",
            "",
            f"{'order':>5}  {'residual':>12}  {'exact':>5}  coefficients",
        ]
        for f in self.fits:
            coeffs = (
                "-"
                if f.coefficients is None
                else ", ".join(f"{c:.12g}" for c in f.coefficients)
            )
            exact = "yes" if f.validated else "no"
            lines.append(f"{f.order:>5}  {f.residual:>12.5e}  {exact:>5}  {coeffs}")
        lines.append("")
        lines.append(self.note)
        return "\n".join(lines)


def _is_exact(seq) -> bool:
    return all(isinstance(a, Rational) for a in seq)


def _solve_rational(M, v, d):
    """Gaussian elimination over the rationals on the (symmetric, positive
    semidefinite) normal equations; a vanishing pivot marks a direction the
    data does not constrain, and that coefficient is pinned to zero."""
    A = [[Fraction(M[i][j]) for j in range(d)] + [Fraction(v[i])] for i in range(d)]
    where = list(range(d))
    rank_rows = 0
    for col in range(d):
        pivot = None
        for row in range(rank_rows, d):
            if A[row][col] != 0:
                pivot = row
                break
        if pivot is None:
            continue
        A[rank_rows], A[pivot] = A[pivot], A[rank_rows]
        where[col] = rank_rows
        lead = A[rank_rows][col]
        A[rank_rows] = [x / lead for x in A[rank_rows]]
        for row in range(d):
            if row != rank_rows and A[row][col] != 0:
                factor = A[row][col]
                A[row] = [x - factor * y for x, y in zip(A[row], A[rank_rows])]
        rank_rows += 1
    sol = [Fraction(0)] * d
    row = 0
    for col in range(d):
        if row < rank_rows and A[row][col] == 1 and all(
            A[row][c] == 0 for c in range(col)
        ):
            sol[col] = A[row][d]
            row += 1
    return sol


def fit_recurrence(
    seq: Sequence, d: int, R: Optional[int] = None
) -> Tuple[Tuple[float, ...], float]:
    """Least-squares recurrence of order d over the first R terms.

    Minimizes sum over windows of (a_{r+d} - sum_i c_i a_{r+d-i})^2 and
    reports the misfit normalized by sum a_r^2.  Exact rational inputs are
    fitted in exact arithmetic, so a true recurrence yields a residual of
    exactly zero rather than float noise."""
    if d < 1:
        raise ValidationError("recurrence order must be >= 1")
    values = list(seq)
    if R is None:
        R = len(values)
    if R > len(values):
        raise ValidationError(f"horizon {R} exceeds the {len(values)} known terms")
    if R < 2 * d + 8:
        raise ValidationError(
            f"horizon {R} too short for order {d}: need R >= 2d + 8 = {2 * d + 8}"
        )
    values = values[:R]
    if all(a == 0 for a in values):
        raise ValidationError("degenerate all-zero sequence")

    if _is_exact(values):
        vals = [Fraction(a) for a in values]
        rows = [[vals[i - j] for j in range(1, d + 1)] for i in range(d, R)]
        rhs = vals[d:R]
        M = [
            [sum(row[i] * row[j] for row in rows) for j in range(d)]
            for i in range(d)
        ]
        v = [sum(row[i] * b for row, b in zip(rows, rhs)) for i in range(d)]
        sol = _solve_rational(M, v, d)
        misfit = sum(
            (b - sum(c * x for c, x in zip(sol, row))) ** 2
            for row, b in zip(rows, rhs)
        )
        energy = sum(a * a for a in vals)
        return tuple(float(c) for c in sol), float(misfit / energy)

    arr = np.asarray([float(a) for a in values], dtype=float)
    rows = np.column_stack([arr[d - j : R - j] for j in range(1, d + 1)])
    rhs = arr[d:R]
    sol, _, _, _ = np.linalg.lstsq(rows, rhs, rcond=None)
    misfit = float(np.sum((rhs - rows @ sol) ** 2))
    energy = float(np.sum(arr * arr))
    return tuple(float(c) for c in sol), misfit / energy


def _rationalize(coeffs: Sequence[float], max_den: int = 64):
    """Rationals with denominator <= max_den within 1e-6 of every
    coefficient, sharing a common denominator <= max_den; None otherwise."""
    rats = []
    for c in coeffs:
        frac = Fraction(c).limit_denominator(max_den)
        if abs(c - float(frac)) > 1e-6 * (1.0 + abs(c)):
            return None
        rats.append(frac)
    common = 1
    for frac in rats:
        common = common * frac.denominator // math.gcd(common, frac.denominator)
        if common > max_den:
            return None
    return rats, common


def _validate_exact(values: Sequence, rats, common: int, d: int, R: int) -> bool:
    """The rationalized recurrence as an exact multiplicative identity
    N_{t}^D * prod_{e_i<0} N_{t-i}^{-e_i} == prod_{e_i>0} N_{t-i}^{e_i}
    (e_i = D c_i), checked on every window in the horizon."""
    exps = [int(f * common) for f in rats]
    for t in range(d, R):
        lhs = values[t] ** common
        rhs = 1
        for i, e in enumerate(exps, start=1):
            if e > 0:
                rhs *= values[t - i] ** e
            elif e < 0:
                lhs *= values[t - i] ** (-e)
        if lhs != rhs:
            return False
    return True


def falsify_report(counts: CountSequence, d_max: int, R: int) -> RecurrenceReport:
    """Sweep orders 1..d_max over log N_r and classify the sequence.

    The verdict is recurrence_found(d) at the smallest order that clears the
    residual threshold *and* survives the exact-arithmetic gate; otherwise
    falsified_up_to(d_max).  Positive counts are required (the logarithms
    must exist)."""
    if d_max < 1:
        raise ValidationError("d_max must be >= 1")
    if R > counts.R:
        raise ValidationError(
            f"horizon {R} exceeds the {counts.R} available counts"
        )
    counts.require_positive()
    logs = [math.log(v) for v in counts.values[:R]]
    fits = []
    found: Optional[int] = None
    rejected: list = []
    for d in range(1, d_max + 1):
        coeffs, residual = fit_recurrence(logs, d, R)
        hit = residual < RESIDUAL_THRESHOLD
        validated = False
        if hit:
            rationalized = _rationalize(coeffs)
            if rationalized is not None:
                rats, common = rationalized
                validated = _validate_exact(counts.values, rats, common, d, R)
            if not validated:
                rejected.append(d)
        fits.append(
            OrderFit(
                order=d,
                coefficients=coeffs if hit else None,
                residual=residual,
                validated=validated,
            )
        )
        if validated and found is None:
            found = d
    sequence_id = f"{counts.source}/q={counts.q}"
    if found is not None:
        verdict, order = "recurrence_found", found
        note = f"order-{found} recurrence validated exactly at horizon {R}"
    else:
        verdict, order = "falsified_up_to", d_max
        note = (
            f"no recurrence of order <= {d_max} holds at horizon {R}; "
            "empirical evidence, not a proof"
        )
        if rejected:
            note += (
                "; numeric fits below threshold at order"
                + ("s " if len(rejected) > 1 else " ")
                + ", ".join(str(d) for d in rejected)
                + " were rejected by the exact-arithmetic gate"
            )
    return RecurrenceReport(
        sequence_id=sequence_id,
        horizon=R,
        fits=tuple(fits),
        verdict=verdict,
        order=order,
        note=note,
    )
