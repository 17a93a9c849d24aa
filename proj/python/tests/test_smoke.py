import cmath
import math
from fractions import Fraction

import pytest

import shiftconv as sc


@pytest.fixture(scope="module")
def tables():
    return sc.ArithmeticTables.build(20000, 3000)


def test_tau_small_values():
    tau = sc.compute_tau(10)
    assert tau[1:11] == [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]


def test_sieve_d3():
    d3 = sc.sieve_d3(12)
    assert list(d3[1:13]) == [1, 3, 3, 6, 3, 9, 3, 10, 6, 9, 3, 18]


def test_tables_accessors(tables):
    assert tables.tau(2) == -24
    assert tables.tau0(1) == 1.0
    assert tables.d3(8) == 10
    with pytest.raises(IndexError):
        tables.tau0(10**6)


def test_kloosterman_weil_bound():
    for q in (5, 7, 11, 13):
        for a in range(1, q):
            assert abs(sc.kloosterman(a, 1, q)) <= 2 * math.sqrt(q) + 1e-9


def test_charsum_methods_agree():
    a = sc.d3_charsum(2, 5, 6, +1, "naive")
    b = sc.d3_charsum(2, 5, 6, +1, "reduced")
    assert abs(a - b) < 1e-9
    with pytest.raises(ValueError):
        sc.d3_charsum(2, 5, 6, +1, "fast")


def test_gl2_identity(tables):
    rep = sc.verify_gl2(tables, 3, 1, 100.0)
    assert rep["rel_diff"] <= 1e-6


def test_family_and_discrepancy():
    fam = sc.build_modulus_family(2.1, 5.2, 1, Fraction(1, 100))
    assert fam.products == [21]
    assert fam.L == 12
    d = sc.l2_discrepancy(fam)
    assert d["mass_is_one"]
    assert d["pieces"] <= 2 * fam.L + 1
    with pytest.raises(ValueError):
        sc.build_modulus_family(10, 15, 1)


def test_d_tilde_alpha_is_finite(tables):
    fam = sc.build_modulus_family(2.1, 5.2, 1, Fraction(1, 100))
    v = sc.d_tilde_alpha(fam, 0.0, tables, 100.0, 1, 5.0)
    assert cmath.isfinite(v)


def test_psi_and_params(tables):
    assert sc.psi_direct(1, 2, tables) == 1.0
    assert sc.psi_direct(1, 1, tables) == 0.0
    p = sc.choose_parameters(1e10, 1)
    assert abs(p["exponent_delta"] - 1 / 35) < 1e-15
    assert abs(p["Q1"] * p["Q2"] / p["Q"] - 1) < 1e-9
