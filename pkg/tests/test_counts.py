"""Point counting: fields, naive enumeration, closed forms, Weil models."""

import pytest

from zlog.counts import (
    CountSequence,
    VarietySpec,
    count_closed_form,
    count_naive,
    counts_from_family,
    counts_from_variety,
    counts_from_weil,
    make_field,
    product_counts,
    split_quadric_spec,
)
from zlog.errors import BudgetExceeded, UndefinedZlog, ValidationError
from zlog.motive import weil_from_charpoly

# the curve y^2 z + y z^2 = x^3 in P^2; charpoly of Frobenius over F_2 is x^2 + 2
CURVE = VarietySpec(
    "projective",
    2,
    (((1, (0, 2, 1)), (1, (0, 1, 2)), (-1, (3, 0, 0))),),
)


class TestMakeField:
    def test_prime_field(self):
        f = make_field(2, 1)
        assert f.q == 2
        assert f.modulus == (0, 1)  # x

    def test_f4_modulus(self):
        # unique monic irreducible quadratic over F_2
        assert make_field(2, 2).modulus == (1, 1, 1)  # x^2 + x + 1

    def test_f9_modulus_is_lexicographically_smallest(self):
        f = make_field(3, 2)
        assert f.modulus == (1, 0, 1)  # x^2 + 1 beats x^2 + x + 2 etc.
        assert f.q == 9

    def test_nonprime_p_rejected(self):
        with pytest.raises(ValidationError):
            make_field(4, 1)

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            make_field(2, 21)


class TestCountNaive:
    def test_affine_line(self):
        spec = VarietySpec("affine", 1, ())
        assert count_naive(spec, make_field(2, 3)) == 8

    @pytest.mark.parametrize("k,expected", [(1, 3), (2, 9)])
    def test_curve(self, k, expected):
        assert count_naive(CURVE, make_field(2, k)) == expected

    def test_projective_plane(self):
        spec = VarietySpec("projective", 2, ())
        assert count_naive(spec, make_field(2, 1)) == 7

    def test_projective_point_without_equations_rejected(self):
        with pytest.raises(ValidationError):
            count_naive(VarietySpec("projective", 0, ()), make_field(2, 1))

    def test_budget_exceeded(self):
        spec = VarietySpec("affine", 25, ())
        with pytest.raises(BudgetExceeded):
            count_naive(spec, make_field(2, 1))

    def test_inhomogeneous_projective_rejected(self):
        with pytest.raises(ValidationError):
            VarietySpec("projective", 1, (((1, (1, 0)), (1, (0, 2))),))

    def test_extension_field_enumeration(self):
        # x^2 = -1 has two solutions in F_9 (modulus x^2+1: the generator), none in F_3
        spec = VarietySpec("affine", 1, (((1, (2,)), (1, (0,))),))
        assert count_naive(spec, make_field(3, 1)) == 0
        assert count_naive(spec, make_field(3, 2)) == 2


class TestClosedForms:
    def test_projective_example(self):
        assert count_closed_form("projective", (2,), 2, 1) == 7

    def test_gl_example(self):
        assert count_closed_form("gl", (2,), 2, 1) == 6

    def test_grassmann_example(self):
        assert count_closed_form("grassmann", (1, 2), 3, 1) == 4

    def test_dict_params(self):
        assert count_closed_form("projective", {"n": 2}, 2, 1) == 7
        with pytest.raises(ValidationError):
            count_closed_form("projective", {"m": 2}, 2, 1)

    def test_unknown_family(self):
        with pytest.raises(ValidationError):
            count_closed_form("elliptic", (1,), 2, 1)

    def test_gl_vs_brute_force(self):
        # |GL_2(F_q)| = q^4 - |{ad = bc}|
        det_zero = VarietySpec(
            "affine", 4, (((1, (1, 0, 0, 1)), (-1, (0, 1, 1, 0))),)
        )
        for q in (2, 3):
            f = make_field(q, 1)
            assert count_closed_form("gl", (2,), q, 1) == q**4 - count_naive(det_zero, f)

    def test_gl_via_det_unit_graph(self):
        # {(x, y) : det(x) * y = 1} in k^2 + 1 affine variables has |GL_k| points
        eq = (
            (1, (1, 0, 0, 1, 1)),
            (-1, (0, 1, 1, 0, 1)),
            (-1, (0, 0, 0, 0, 0)),
        )
        spec = VarietySpec("affine", 5, (eq,))
        assert count_naive(spec, make_field(3, 1)) == count_closed_form("gl", (2,), 3, 1)

    def test_grassmann_frame_count_identity(self):
        # |G(k,n)| = prod_i (q^n - q^i) / prod_i (q^k - q^i), i = 0..k-1
        for q in (2, 3, 5):
            for n in range(5):
                for k in range(n + 1):
                    num, den = 1, 1
                    for i in range(k):
                        num *= q**n - q**i
                        den *= q**k - q**i
                    assert count_closed_form("grassmann", (k, n), q, 1) * den == num

    def test_full_grassmann(self):
        total = sum(count_closed_form("grassmann", (k, 3), 2, 1) for k in range(4))
        assert count_closed_form("full_grassmann", (3,), 2, 1) == total

    def test_torus_vs_brute_force(self):
        # (F_q^*)^1 as the hyperbola x y = 1
        spec = VarietySpec("affine", 2, (((1, (1, 1)), (-1, (0, 0))),))
        for q, r in ((2, 1), (2, 2), (3, 1), (5, 1)):
            f = make_field(q, r)
            assert count_naive(spec, f) == count_closed_form("torus", (1,), q, r)

    @pytest.mark.parametrize(
        "n,m,q,alpha",
        [(3, 3, 3, 1), (3, 3, 5, 2), (4, 3, 3, 1), (4, 5, 3, 1), (5, 5, 2, 1), (2, 3, 7, 3)],
    )
    def test_quadric_vs_brute_force(self, n, m, q, alpha):
        spec = split_quadric_spec(n, m, alpha)
        got = count_closed_form("quadric_type1", (n, m, alpha), q, 1)
        assert count_naive(spec, make_field(q, 1)) == got

    def test_quadric_extension_agreement(self):
        spec = split_quadric_spec(3, 3, 1)
        for r in (1, 2):
            assert count_naive(spec, make_field(3, r)) == count_closed_form(
                "quadric_type1", (3, 3, 1), 3, r
            )

    def test_quadric_invalid_params(self):
        with pytest.raises(ValidationError):
            count_closed_form("quadric_type1", (3, 4, 1), 3, 1)  # even m
        with pytest.raises(ValidationError):
            count_closed_form("quadric_type1", (1, 3, 1), 3, 1)  # n < m-1
        with pytest.raises(ValidationError):
            count_closed_form("quadric_type1", (3, 3, 0), 3, 1)  # alpha = 0

    def test_affine_agreement(self):
        for n in (1, 2, 3):
            spec = VarietySpec("affine", n, ())
            assert count_naive(spec, make_field(2, 2)) == count_closed_form(
                "affine", (n,), 2, 2
            )

    def test_projective_agreement(self):
        for n in (1, 2, 3):
            spec = VarietySpec("projective", n, ())
            assert count_naive(spec, make_field(3, 1)) == count_closed_form(
                "projective", (n,), 3, 1
            )


class TestWeilCounts:
    def test_curve_charpoly_agreement(self):
        w = weil_from_charpoly(2, (2, 0, 1))  # x^2 + 2
        assert counts_from_weil(w, 1) == 3
        assert counts_from_weil(w, 2) == 9
        for r in (1, 2):
            assert counts_from_weil(w, r) == count_naive(CURVE, make_field(2, r))

    def test_example_charpoly(self):
        w = weil_from_charpoly(11, (11, -1, 1))
        assert counts_from_weil(w, 1) == 11
        assert counts_from_weil(w, 2) == 143


class TestCountSequence:
    def test_require_positive(self):
        seq = CountSequence(q=2, values=[3, 9, 24])
        assert seq.require_positive() is seq
        with pytest.raises(UndefinedZlog):
            CountSequence(q=2, values=[3, 0, 24]).require_positive()

    def test_product(self):
        a = counts_from_family("torus", (1,), 3, 4)
        b = counts_from_family("torus", (1,), 3, 4)
        prod = product_counts(a, b)
        assert prod.values == counts_from_family("torus", (2,), 3, 4).values

    def test_variety_sequence(self):
        seq = counts_from_variety(CURVE, 2, 1, 3)
        assert seq.values[:2] == [3, 9]
        assert seq.q == 2
