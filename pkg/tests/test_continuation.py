"""Path-based continuation layer: tail evaluators, the step integral and its
branch bookkeeping, four-factor models, monodromy/residue probes, and the
Weil-number recovery loop.

Oracle notes
------------
Trivial: affine space gives exp(n log q * z/(1-z)), so Z(A^3/F_5) at z = 1/2
is exactly 125; d/dz log Z(A^1/F_q) at 0 is exactly log q.
Derived: every continued value inside the unit disc is checked against the
direct partial sum of the defining series (horizon 400 or a settled tail);
outside, against a second independent integration method ("terms" vs "quad"),
against translate sums in w-coordinates, and against hand-summed level series
for the single-slot datum {(1, 1/2)} whose cloud is just mu_l = 2^{-l} with
weight 1/l.
Derived: loop/branch values are pinned to exact rationals (winding numbers
times exact level weights): the up/down paths to 3 for {(1, 1/2)} differ by
exactly -2*pi*i, the wide detour to -3 multiplies the half-exponential factor
by exp(2*pi*i/6), and the h^0+h^1 direct sum over F_3 picks up the
*transcendental* phase (log 2)/2 around z = 1 -- that last phase must fail
every small-denominator rationality test.
Derived: residues of d/dz log Z for E/F_11 at the weight-1 Frobenius roots
are 1 (simple zeros of the continuation) and 1/2 at their squares; z = 1
carries a double pole with top Laurent coefficient g log q = log 11.
"""

import cmath
import math
import time
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zlog.continuation import (
    ContinuationResult,
    OrderMismatch,
    PathSpec,
    ZlogModel,
    abelian_model,
    affine_model,
    cellular_model,
    check_path_clearance,
    continued_log_along,
    detect_pole_order,
    eval_abs_factor,
    eval_half_exp,
    eval_tail_w,
    eval_tail_z,
    eval_zlog,
    integrate_tail,
    lambda_model,
    locate_weil_poles,
    log_derivative,
    map_path_power,
    model_log_coefficient,
    model_support,
    monodromy_expected,
    monodromy_loop,
    motive_model,
    raw_model,
    residue_estimate,
    supersingular_sum_model,
    tail_series,
    zlog_series,
)
from zlog.divisor import Window
from zlog.errors import NumericFailure, UndefinedZlog, ValidationError
from zlog.motive import (
    TruncationParams,
    full_motive_from_charpoly,
    select_truncation,
    spectral,
    spectral_from_weil,
    supersingular_motive,
    weil_from_charpoly,
)

HALF = spectral((1, 0.5))
TR_HALF = select_truncation(HALF)

SS4_DATA, _ = spectral_from_weil(supersingular_motive(4))
TR_SS4 = select_truncation(SS4_DATA)

E11_CHARPOLY = (11, -1, 1)  # x^2 - x + 11
E11_WEIL = weil_from_charpoly(11, E11_CHARPOLY)
E11 = abelian_model(E11_WEIL)
ALPHA = (1 + 1j * math.sqrt(43)) / 2  # the root with positive imaginary part
LOG11 = math.log(11)


def half_tail_reference(z: complex, r0: int = 2, levels: int = 200) -> complex:
    """Hand-summed level series for {(1, 1/2)}: the cloud is mu_l = 2^{-l}
    with weight 1/l, so the tail is -sum_l (z/2^l)^{r0} / (l (1 - z/2^l)).
    Valid at any z off the poles 2^l (it is the meromorphic closed form)."""
    total = 0j
    for level in range(1, levels + 1):
        mu = 2.0**-level
        total -= (mu * z) ** r0 / (level * (1.0 - mu * z))
    return total


def up_and_down_paths(x: float, height: float, clearance: float = 0.4):
    up = PathSpec((0, height * 1j, x + height * 1j, x), clearance=clearance)
    down = PathSpec((0, -height * 1j, x - height * 1j, x), clearance=clearance)
    return up, down


class TestPathSpec:
    def test_must_start_at_origin(self):
        with pytest.raises(ValidationError):
            PathSpec((0.1, 1.0))

    def test_consecutive_vertices_distinct(self):
        with pytest.raises(ValidationError):
            PathSpec((0, 1.0, 1.0))

    def test_clearance_positive(self):
        with pytest.raises(ValidationError):
            PathSpec((0, 1.0), clearance=0.0)

    def test_straight_to_and_geometry(self):
        p = PathSpec.straight_to(3 + 4j)
        assert p.end == 3 + 4j
        assert p.segments() == ((0, 3 + 4j),)
        assert p.length() == pytest.approx(5.0)
        box = p.bbox(pad=1.0)
        assert box.contains(0) and box.contains(3 + 4j)
        assert not box.contains(3 + 6j)

    def test_clearance_check_reports_distance(self):
        p = PathSpec((0, 4.0), clearance=0.5)
        assert check_path_clearance(p, [2 + 1j]) == pytest.approx(1.0)
        with pytest.raises(ValidationError):
            check_path_clearance(p, [2 + 0.25j])

    def test_result_rejects_nonfinite_error(self):
        with pytest.raises(ValidationError):
            ContinuationResult(1 + 0j, 0j, math.inf)


class TestTailEvaluators:
    def test_closed_form_matches_direct_series(self):
        z = 0.3
        ref = tail_series(HALF, TR_HALF.r0, z)
        got = eval_tail_z(z, HALF, TR_HALF)
        assert abs(got.value - ref) < 1e-10
        assert abs(got.value - ref) <= max(got.error_estimate, 1e-12)

    def test_branch_log_is_inert(self):
        z = 0.3 + 0.1j
        base = eval_tail_z(z, HALF, TR_HALF).value
        shifted = eval_tail_z(
            z, HALF, TR_HALF, branch_log=cmath.log(z) + 2j * math.pi
        ).value
        assert abs(base - shifted) < 1e-10

    def test_branch_log_must_lie_over_z(self):
        with pytest.raises(ValidationError):
            eval_tail_z(0.3, HALF, TR_HALF, branch_log=cmath.log(0.4))

    def test_value_beyond_the_disc_is_finite_and_level_exact(self):
        got = eval_tail_z(3.0, HALF, TR_HALF).value
        assert abs(got - half_tail_reference(3.0)) < 1e-10

    def test_pole_proximity_refused(self):
        with pytest.raises(NumericFailure):
            eval_tail_z(2.0 + 1e-9, HALF, TR_HALF)

    def test_empty_data_evaluates_to_zero(self):
        empty = spectral()
        tr = select_truncation(empty)
        assert eval_tail_z(0.5, empty, tr).value == 0

    def test_translate_form_at_contract_points(self):
        start = time.monotonic()
        for w in (1.0, 1.0 + 0.3j, 2.0 - 1.0j):
            ref = 0j
            for r in range(TR_SS4.r0, 401):
                ref += cmath.log(1.0 - SS4_DATA.inner_sum(r)) * cmath.exp(-w * r)
            got = eval_tail_w(w, SS4_DATA, TR_SS4)
            assert abs(got.value - ref) < 1e-8
        assert time.monotonic() - start < 6.0

    def test_literal_translates_agree_within_their_error_bar(self):
        w = 0.8 - 0.5j
        closed = eval_tail_w(w, HALF, TR_HALF, mode="closed")
        literal = eval_tail_w(w, HALF, TR_HALF, mode="literal")
        diff = abs(closed.value - literal.value)
        assert diff <= max(literal.error_estimate, 1e-12)
        assert literal.error_estimate < 1e-3  # the bar is fat but not useless

    def test_literal_mode_rejects_support_proximity(self):
        with pytest.raises(NumericFailure):
            eval_tail_w(math.log(0.5) + 1e-9, HALF, TR_HALF, mode="literal")

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValidationError):
            eval_tail_w(1.0, HALF, TR_HALF, mode="resummed")

    def test_direct_series_requires_unit_disc(self):
        with pytest.raises(ValidationError):
            tail_series(HALF, TR_HALF.r0, 1.0)

    def test_tail_bound_cap_refusal(self):
        wide = spectral((1, 0.9))
        tr = TruncationParams(K=math.pi, r0=7, L_max=8, J_max=8, M=1.0, tail_base=0.45)
        with pytest.raises(NumericFailure):
            eval_tail_z(1.6, wide, tr)


class TestStepIntegral:
    def test_disc_path_reproduces_integrated_series(self):
        path = PathSpec.straight_to(0.3)
        ref = tail_series(HALF, TR_HALF.r0, 0.3, per_r=True)
        got = integrate_tail(path, HALF, TR_HALF)
        assert abs(got.value - ref) < 1e-12

    def test_quadrature_agrees_with_series_inside_disc(self):
        # force real quadrature by leaving the series disc on the way
        path = PathSpec((0, -1.2j, 0.85 - 1.2j, 0.85), clearance=0.4)
        ref = tail_series(HALF, TR_HALF.r0, 0.85, per_r=True)
        got = integrate_tail(path, HALF, TR_HALF)
        assert abs(got.value - ref) < 1e-9

    def test_methods_agree_off_the_disc(self):
        path = PathSpec((0, 1.5j, 3 + 1.5j, 3), clearance=0.4)
        quad = integrate_tail(path, HALF, TR_HALF, method="quad")
        terms = integrate_tail(path, HALF, TR_HALF, method="terms")
        assert abs(quad.value - terms.value) < 1e-9

    def test_homotopic_paths_agree(self):
        a = PathSpec((0, -1 + 1j), clearance=0.3)
        b = PathSpec((0, 0.8j, -1 + 0.8j, -1 + 1j), clearance=0.3)
        va = integrate_tail(a, HALF, TR_HALF).value
        vb = integrate_tail(b, HALF, TR_HALF).value
        assert abs(va - vb) < 1e-9

    def test_up_down_paths_differ_by_exactly_one_period(self):
        up, down = up_and_down_paths(3.0, 1.5)
        vu = integrate_tail(up, HALF, TR_HALF).value
        vd = integrate_tail(down, HALF, TR_HALF).value
        d = (vu - vd) / (2j * math.pi)
        # the closed loop (up, then down reversed) runs clockwise around
        # z = 2, whose level weight is exactly 1
        assert abs(d - (-1)) < 1e-9
        assert Fraction(d.real).limit_denominator(TR_HALF.L_max) == -1
        # the same statement for both methods
        tu = integrate_tail(up, HALF, TR_HALF, method="terms").value
        td = integrate_tail(down, HALF, TR_HALF, method="terms").value
        assert abs((tu - td) / (2j * math.pi) - (-1)) < 1e-9

    def test_path_through_support_refused(self):
        with pytest.raises(ValidationError):
            integrate_tail(PathSpec((0, 2.5)), HALF, TR_HALF)

    def test_terms_method_refuses_a_pole_hit(self):
        grazing = PathSpec((0, 1.6j, 4 - 1e-13 + 1.6j, 4 - 1e-13), clearance=1e-15)
        with pytest.raises(NumericFailure):
            integrate_tail(grazing, HALF, TR_HALF, method="terms")

    def test_unknown_method_rejected(self):
        with pytest.raises(ValidationError):
            integrate_tail(PathSpec.straight_to(0.3), HALF, TR_HALF, method="euler")

    def test_empty_data_integrates_to_zero(self):
        empty = spectral()
        got = integrate_tail(PathSpec.straight_to(0.5), empty, select_truncation(empty))
        assert got.value == 0 and got.error_estimate == 0


class TestBranchHelpers:
    def test_continued_log_keeps_the_running_branch(self):
        end = -1 + 4j  # exp(end) has principal argument 4 - 2*pi
        path = PathSpec((0, end))
        got = continued_log_along(path, cmath.exp)
        assert abs(got - end) < 1e-9
        assert abs(cmath.log(cmath.exp(end)) - end) > 1.0  # principal disagrees

    def test_map_path_power_squares_the_endpoint(self):
        path = PathSpec((0, 1j, -1 + 1j), clearance=0.2)
        image = map_path_power(path, 2)
        assert isinstance(image, PathSpec)
        assert image.vertices[0] == 0
        assert abs(image.end - (-1 + 1j) ** 2) < 1e-12

    def test_map_path_power_identity(self):
        path = PathSpec((0, 0.5 + 0.5j))
        image = map_path_power(path, 1)
        assert abs(image.end - path.end) < 1e-12

    def test_half_exp_squares_back(self):
        path = PathSpec.straight_to(0.4)
        half = eval_half_exp(path, HALF, TR_HALF)
        full = cmath.exp(integrate_tail(path, HALF, TR_HALF).value)
        assert abs(half.value**2 - full) < 1e-12


class TestModels:
    def test_affine_is_a_pure_prefix(self):
        m = affine_model(3, 5)
        assert m.data.N == 0 and m.finite_prefix == ()
        got = eval_zlog(PathSpec.straight_to(0.5), m)
        assert abs(got.value - 125.0) < 1e-9 * 125.0

    def test_elliptic_counts_are_the_frozen_group_orders(self):
        assert E11.counts_fn(1) == 11
        assert E11.counts_fn(2) == 143

    def test_log_coefficients_reproduce_every_exact_count(self):
        models = [
            E11,
            motive_model(full_motive_from_charpoly(11, E11_CHARPOLY)),
            lambda_model(2, 3),
            cellular_model((0, 1, 2), 2),
            affine_model(1, 7),
            supersingular_sum_model(3, (0, 1)),
            supersingular_sum_model(5, (0, 1)),
            supersingular_sum_model(3, (1, 2)),
            supersingular_sum_model(7, (1, 2)),
        ]
        for m in models:
            worst = 0.0
            for r in range(1, 25):
                n = m.counts_fn(r)
                assert n != 0
                worst = max(
                    worst, abs(model_log_coefficient(m, r) - math.log(abs(n)) / r)
                )
            assert worst < 1e-12, m.kind

    def test_degenerate_direct_sum_is_refused(self):
        with pytest.raises(UndefinedZlog):
            supersingular_sum_model(2, (1, 2))

    def test_bad_model_parameters_are_refused(self):
        with pytest.raises(ValidationError):
            affine_model(-1, 5)
        with pytest.raises(ValidationError):
            lambda_model(0, 5)
        with pytest.raises(ValidationError):
            cellular_model((), 2)
        with pytest.raises(ValidationError):
            supersingular_sum_model(3, (0, 2))
        with pytest.raises(ValidationError):
            ZlogModel(
                kind="raw", data=HALF, trunc=TR_HALF, c1=0.0, s1=0
            )

    def test_series_oracle_flags_a_zero_count(self):
        with pytest.raises(UndefinedZlog):
            zlog_series(lambda r: r - 3, 0.2, R=5)

    def test_model_support_lists_prefix_and_tail_poles(self):
        box = Window(-4.5, 4.5, -4.5, 4.5)
        pts = model_support(supersingular_sum_model(3, (0, 1)), box)
        expected = [1.0, -1.0, math.sqrt(3), -math.sqrt(3), 3.0, -3.0]
        for e in expected:
            assert min(abs(p - e) for p in pts) < 1e-9
        prefix_only = model_support(affine_model(2, 5), box)
        assert len(prefix_only) == 1 and abs(prefix_only[0] - 1.0) < 1e-12
        assert not model_support(affine_model(0, 5), box)  # a point: Z = 1/(1)


class TestEvalZlog:
    def test_unit_disc_oracle_for_the_elliptic_curve(self):
        start = time.monotonic()
        for z in (0.3, 0.4, -0.25 + 0.2j):
            ref = zlog_series(E11.counts_fn, z)
            got = eval_zlog(PathSpec.straight_to(z, clearance=0.1), E11)
            assert abs(got.value - ref) <= 1e-7 * abs(ref)
        assert time.monotonic() - start < 5.0

    def test_unit_disc_oracle_across_model_kinds(self):
        models = [
            E11,
            motive_model(full_motive_from_charpoly(11, E11_CHARPOLY)),
            lambda_model(2, 3),
            cellular_model((0, 1, 2), 2),
            affine_model(1, 7),
            supersingular_sum_model(3, (0, 1)),
            supersingular_sum_model(5, (0, 1)),
            supersingular_sum_model(3, (1, 2)),
            supersingular_sum_model(7, (1, 2)),
        ]
        for m in models:
            for z in (0.3, -0.2 + 0.35j, 0.45j):
                ref = zlog_series(m.counts_fn, z)
                got = eval_zlog(PathSpec.straight_to(z, clearance=0.1), m)
                assert abs(got.value - ref) <= 1e-7 * abs(ref), (m.kind, z)

    def test_projective_line_is_the_lambda_quotient(self):
        z = 0.35
        p1 = eval_zlog(PathSpec.straight_to(z), cellular_model((0, 1), 2)).value
        l2 = eval_zlog(PathSpec.straight_to(z), lambda_model(2, 2)).value
        l1 = eval_zlog(PathSpec.straight_to(z), lambda_model(1, 2)).value
        assert abs(p1 - l2 / l1) < 1e-9 * abs(p1)

    def test_branch_independence_of_homotopic_paths(self):
        a = PathSpec((0, -1 + 1j), clearance=0.3)
        b = PathSpec((0, 0.8j, -1 + 0.8j, -1 + 1j), clearance=0.3)
        c = PathSpec((0, -0.3 - 1.2j, -1.6 - 0.3j, -1 + 1j), clearance=0.3)
        va = eval_zlog(a, E11)
        vb = eval_zlog(b, E11)
        vc = eval_zlog(c, E11)
        assert abs(va.value - vb.value) < 1e-9
        assert abs(va.value - vc.value) < 1e-9
        assert abs(va.branch_offset - vc.branch_offset) < 1e-9

    def test_algebraic_factor_monodromy_is_transcendental(self):
        # h^0 + h^1 over F_3: the square-root-of-2 prefactor turns the loop
        # around z = 1 into multiplication by exp(+-2*pi*i*(log 2)/2) -- a
        # phase no small-denominator rational approximates.
        m = supersingular_sum_model(3, (0, 1))
        up = PathSpec((0, 0.5j, 1.35 + 0.5j, 1.35), clearance=0.25)
        down = PathSpec((0, -0.5j, 1.35 - 0.5j, 1.35), clearance=0.25)
        ratio = eval_zlog(up, m).value / eval_zlog(down, m).value
        assert abs(abs(ratio) - 1.0) < 1e-9
        phase = (cmath.phase(ratio) / (2.0 * math.pi)) % 1.0
        beta = math.log(2.0) / 2.0
        assert min(abs(phase - beta), abs(phase - (1.0 - beta))) < 1e-9
        near = Fraction(phase).limit_denominator(64)
        assert abs(phase - float(near)) > 1e-6

    def test_support_clearance_is_enforced(self):
        with pytest.raises(ValidationError):
            eval_zlog(PathSpec((0, 1.0 + 1e-9)), affine_model(1, 5))


class TestLogDerivative:
    def test_exact_value_at_the_origin(self):
        assert log_derivative(0, affine_model(1, 7)) == pytest.approx(math.log(7))
        assert log_derivative(0, E11) == pytest.approx(
            math.log(11), abs=1e-12
        )

    def test_matches_centered_differences_of_the_continued_log(self):
        h = 1e-5
        for z0 in (0.3, -0.2 + 0.1j, 0.6j):
            exact = log_derivative(z0, E11)
            plus = eval_zlog(PathSpec.straight_to(z0 + h), E11).branch_offset
            minus = eval_zlog(PathSpec.straight_to(z0 - h), E11).branch_offset
            approx = (plus - minus) / (2.0 * h)
            assert abs(exact - approx) < 1e-5

    def test_prefix_pole_is_refused(self):
        with pytest.raises(NumericFailure):
            log_derivative(1.0, E11)


class TestMonodromy:
    def test_loop_weights_are_the_exact_level_fractions(self):
        start = time.monotonic()
        v2 = monodromy_loop(2.0, 0.5, HALF, TR_HALF)
        v4 = monodromy_loop(4.0, 0.5, HALF, TR_HALF)
        assert abs(abs(v2) / (2.0 * math.pi) - 1.0) < 1e-6
        assert abs(abs(v4) / (2.0 * math.pi) - 0.5) < 1e-6
        assert monodromy_expected(2.0, 0.5, HALF, TR_HALF) == Fraction(1)
        assert monodromy_expected(4.0, 0.5, HALF, TR_HALF) == Fraction(1, 2)
        assert monodromy_expected(8.0, 0.5, HALF, TR_HALF) == Fraction(1, 3)
        assert time.monotonic() - start < 5.0

    def test_empty_loop_vanishes(self):
        v = monodromy_loop(1 + 1j, 0.3, HALF, TR_HALF)
        assert abs(v) < 1e-10
        assert monodromy_expected(1 + 1j, 0.3, HALF, TR_HALF) == 0

    def test_loop_refusals(self):
        with pytest.raises(ValidationError):
            monodromy_loop(2.0, -0.1, HALF, TR_HALF)
        with pytest.raises(ValidationError):
            monodromy_loop(3.0, 1.5, HALF, TR_HALF)  # encloses both 2 and 4
        with pytest.raises(ValidationError):
            monodromy_loop(2.0, 2.0, HALF, TR_HALF)  # passes through 4

    def test_branch_period_ratio_is_a_small_rational(self):
        # two routes to -3: straight, and a wide detour that walks clockwise
        # around the poles 2, 4, 8 (level weights 1, 1/2, 1/3; their sum
        # 11/6 folds to a phase of exactly 1/6).
        start = time.monotonic()
        direct = PathSpec((0, -3.0), clearance=0.4)
        detour = PathSpec(
            (0, 6j, 12 + 6j, 12 - 6j, -3 - 6j, -3.0), clearance=0.4
        )
        fd = eval_abs_factor(direct, HALF, TR_HALF)
        fl = eval_abs_factor(detour, HALF, TR_HALF)
        ratio = fl.value / fd.value
        assert abs(abs(ratio) - 1.0) <= 1e-8
        phase = cmath.phase(ratio) / (2.0 * math.pi)
        near = Fraction(phase).limit_denominator(TR_HALF.L_max)
        assert abs(phase - float(near)) < 1e-6
        assert near == Fraction(1, 6)
        assert time.monotonic() - start < 5.0


class TestResidues:
    def test_weight_one_roots_carry_residue_one(self):
        report = residue_estimate(ALPHA, E11)
        assert report.rational == 1
        assert abs(report.residue - 1.0) < 1e-4
        assert report.fit_error < 1e-4

    def test_squared_root_carries_residue_one_half(self):
        report = residue_estimate(ALPHA**2, E11)
        assert report.rational == Fraction(1, 2)
        assert abs(report.residue - 0.5) < 1e-4

    def test_conjugate_root_matches(self):
        report = residue_estimate(ALPHA.conjugate(), E11)
        assert report.rational == 1

    def test_z_equals_one_is_a_double_pole(self):
        with pytest.raises(OrderMismatch) as exc:
            residue_estimate(1.0, E11)
        assert exc.value.order == 2
        # top Laurent coefficient of d/dz log Z at 1 is g log q
        assert abs(exc.value.coefficients[1] - LOG11) < 1e-6
        assert detect_pole_order(1.0, E11) == 2

    def test_regular_points_have_order_zero(self):
        assert detect_pole_order(0.5, E11) == 0
        assert detect_pole_order(-1.2 + 0.4j, E11) == 0

    def test_simple_pole_order_detected(self):
        assert detect_pole_order(ALPHA, E11) == 1


class TestWeilRecovery:
    def test_elliptic_curve_roots_recovered(self):
        start = time.monotonic()
        found = locate_weil_poles(E11)
        assert len(found) == 2
        for z in found:
            assert abs(z * z - z + 11) < 1e-8 * 11.0
        assert abs(found[0] - ALPHA.conjugate()) < 1e-8
        assert abs(found[1] - ALPHA) < 1e-8
        assert time.monotonic() - start < 5.0

    def test_supersingular_motive_recovers_plus_minus_two(self):
        m = motive_model(supersingular_motive(4))
        found = locate_weil_poles(m)
        assert len(found) == 2
        assert abs(found[0] - (-2.0)) < 1e-8
        assert abs(found[1] - 2.0) < 1e-8

    def test_prefix_only_model_has_no_weil_circle_points(self):
        assert locate_weil_poles(affine_model(2, 5)) == []

    def test_model_without_q_is_refused(self):
        bare = raw_model(HALF)
        with pytest.raises(ValidationError):
            locate_weil_poles(bare)


class TestStructuralInvariants:
    def test_zero_set_scales_linearly_at_a_weil_root(self):
        # |Z| has a simple zero at each weight-1 root: the minimum of |Z|
        # over small probe circles shrinks linearly with the radius, while
        # a generic point stays bounded away from zero.
        def probe_path(theta: float, rho: float) -> PathSpec:
            inward = cmath.phase(-ALPHA)
            span = (theta - inward + math.pi) % (2.0 * math.pi) - math.pi
            hops = max(1, int(math.ceil(abs(span) / 1.0)))
            verts = [0, ALPHA * (1.0 - 0.3 / abs(ALPHA))]
            for j in range(1, hops + 1):
                verts.append(ALPHA + 0.3 * cmath.exp(1j * (inward + span * j / hops)))
            verts.append(ALPHA + rho * cmath.exp(1j * theta))
            return PathSpec(tuple(verts), clearance=0.8 * rho)

        def circle_min(rho: float) -> float:
            vals = []
            for k in range(6):
                theta = 2.0 * math.pi * k / 6
                vals.append(abs(eval_zlog(probe_path(theta, rho), E11).value))
            return min(vals)

        m2, m3, m4 = circle_min(1e-2), circle_min(1e-3), circle_min(1e-4)
        assert 7.0 < m2 / m3 < 13.0
        assert 7.0 < m3 / m4 < 13.0
        far = eval_zlog(PathSpec((0, 0.75 * ALPHA), clearance=0.3), E11)
        assert abs(far.value) > 1e-6

    def test_essential_singularity_asymmetry_at_one(self):
        # approaching z = 1 from the left the prefix blows up like
        # q^{g(1-eps)/eps}; from the right it collapses like q^{-g(1+eps)/eps}
        previous_right = math.inf
        for eps in (0.1, 0.05, 0.02):
            left = eval_zlog(
                PathSpec.straight_to(1.0 - eps, clearance=eps / 2), E11
            )
            ratio = math.log(abs(left.value)) / (LOG11 * (1.0 - eps) / eps)
            assert abs(ratio - 1.0) < 0.01
            right = eval_zlog(
                PathSpec(
                    (0, -0.6j, (1.0 + eps) - 0.6j, 1.0 + eps),
                    clearance=eps / 2,
                ),
                E11,
            )
            ratio = math.log(abs(right.value)) / (-LOG11 * (1.0 + eps) / eps)
            assert abs(ratio - 1.0) < 0.01
            assert abs(right.value) < previous_right
            previous_right = abs(right.value)
        assert previous_right < 1e-40  # and still a genuine nonzero double

    def test_continuation_error_estimates_are_honest(self):
        for z in (0.3, 0.45j):
            ref = zlog_series(E11.counts_fn, z)
            got = eval_zlog(PathSpec.straight_to(z, clearance=0.1), E11)
            # the partial-sum oracle itself trails by ~ |z|^400, so compare
            # against the estimate plus that trailing wedge
            slack = got.error_estimate + abs(ref) * abs(z) ** 400
            assert abs(got.value - ref) <= slack + 1e-12 * abs(ref)


class TestPropertyBased:
    @settings(max_examples=20, deadline=None)
    @given(
        st.complex_numbers(max_magnitude=0.7, allow_infinity=False, allow_nan=False)
    )
    def test_closed_tail_equals_series_in_the_disc(self, z):
        ref = tail_series(HALF, TR_HALF.r0, z)
        got = eval_tail_z(z, HALF, TR_HALF).value
        assert abs(got - ref) < 1e-10

    @settings(max_examples=20, deadline=None)
    @given(
        st.complex_numbers(max_magnitude=1.1, allow_infinity=False, allow_nan=False)
    )
    def test_detour_through_a_safe_midpoint_changes_nothing(self, mid):
        end = -1.2 + 0j
        if abs(mid) < 0.05 or abs(mid - end) < 0.05:
            return
        straight = PathSpec((0, end), clearance=0.3)
        bent = PathSpec((0, mid, end), clearance=0.3)
        vs = integrate_tail(straight, HALF, TR_HALF).value
        vb = integrate_tail(bent, HALF, TR_HALF).value
        assert abs(vs - vb) < 1e-9

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=1, max_value=40))
    def test_model_coefficients_track_counts_everywhere(self, r):
        m = supersingular_sum_model(3, (1, 2))
        n = m.counts_fn(r)
        assert abs(model_log_coefficient(m, r) - math.log(abs(n)) / r) < 1e-12
