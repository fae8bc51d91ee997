import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarce import (
    Atom,
    AtomOverflowError,
    Backend,
    BitPattern,
    CheckState,
    EngineConfig,
    VarState,
    all_bhattacharyya,
    bec_density,
    bhattacharyya,
    bhattacharyya_var,
    bsc_density,
    check_to_var,
    check_update,
    cross_update,
    density_from_atoms,
    evolve,
    init_states,
    polarize,
    select_info_set,
    var_to_check,
    var_update,
)
from polarce.bsc import BscConstants, closed_form_k3

from conftest import densities, rational_densities

P = Fraction(1, 10)
C = P * (1 - P)


def rational_bsc_var(steps: int) -> VarState:
    _, v = init_states(bsc_density(P, Backend.RATIONAL))
    for _ in range(steps):
        v = var_update(v, cross_update(v))
    return v


def test_init_states_bsc():
    check, var = init_states(bsc_density(P, Backend.RATIONAL))
    assert check.interior == (Atom(1, Fraction(4, 5)),)
    assert var.interior == (Atom(Fraction(9, 10), Fraction(1, 9)),)
    assert check.total_mass() == var.total_mass() == 1


def test_init_states_bec_empty_interiors():
    check, var = init_states(bec_density(0.3))
    for s in (check, var):
        assert s.interior == ()
        assert (s.mass_at_zero, s.mass_at_one) == (0.3, 0.7)


def test_check_update_examples():
    s = check_update(init_states(bsc_density(P, Backend.RATIONAL))[0])
    assert s.interior == (Atom(1, Fraction(16, 25)),)
    assert s.mass_at_zero == s.mass_at_one == 0
    s = check_update(init_states(bec_density(0.3))[0])
    assert s.mass_at_zero == pytest.approx(0.51, abs=1e-15)
    assert s.mass_at_one == pytest.approx(0.49, abs=1e-15)
    noise = CheckState(np.empty(0), np.empty(0), 1.0, 0.0)
    assert check_update(noise) == noise


def test_check_update_noiseless_boundary_term():
    d = density_from_atoms([(Fraction(1, 2), Fraction(1, 2))], 0, Fraction(1, 2), Backend.RATIONAL)
    s = check_update(init_states(d)[0])
    # (1/2)^2 at 1/4 from the pair, 2 * (1/2) * (1/2) at 1/2 from the noiseless boundary
    assert s.interior == (Atom(Fraction(1, 4), Fraction(1, 4)), Atom(Fraction(1, 2), Fraction(1, 2)))
    assert s.mass_at_one == Fraction(1, 4)


def test_cross_update_constant_term():
    assert cross_update(rational_bsc_var(0)).dc == C
    assert cross_update(rational_bsc_var(0)).psi1 == ()
    assert cross_update(rational_bsc_var(1)).dc == C**2
    c2 = cross_update(rational_bsc_var(2))
    assert c2.dc == 17 * C**4
    # one cross atom whose transform is 4 C^3 (1-p)^2 (p / (1-p))^(2s)
    assert c2.psi1 == (Atom(4 * C**3 * (1 - P) ** 2, (P / (1 - P)) ** 2),)
    assert float(c2.dc) == pytest.approx(0.00111537, abs=1e-17)


def test_var_update_bsc_rows():
    v1 = rational_bsc_var(1)
    assert v1.interior == (Atom(Fraction(81, 100), Fraction(1, 81)),)
    assert v1.mass_at_zero == 2 * C
    v2 = rational_bsc_var(2)
    assert v2.interior == (Atom(Fraction(6561, 10000), Fraction(1, 6561)), Atom(Fraction(2916, 10000), Fraction(1, 81)))
    assert v2.mass_at_zero == 6 * C**2
    assert rational_bsc_var(3).mass_at_zero == 70 * C**4
    assert rational_bsc_var(4).mass_at_zero == 12870 * C**8
    assert cross_update(rational_bsc_var(3)).dc == 3985 * C**8


def test_var_update_bec():
    _, v = init_states(bec_density(Fraction(3, 10), Backend.RATIONAL))
    v = var_update(v, cross_update(v))
    assert v.interior == ()
    assert v.mass_at_zero == Fraction(9, 100)
    assert v.mass_at_one == Fraction(91, 100)


def test_interior_counts_under_repeated_var_steps():
    counts = [rational_bsc_var(m).n_interior for m in range(4)]
    assert counts == [1, 1, 2, 4]


def test_var_to_check_after_two_var_steps():
    k = BscConstants(P)
    s = var_to_check(rational_bsc_var(2))
    assert s.interior == (Atom(4 * k.C * k.S(2), k.D(2) / k.S(2)), Atom(k.S(4), k.D(4) / k.S(4)))
    assert s.total_mass() == 1


def test_var_to_check_inverts_single_atom():
    s = var_to_check(rational_bsc_var(0))
    assert s.interior == (Atom(1, Fraction(4, 5)),)


def test_check_to_var_matches_three_term_transform():
    k = BscConstants(0.1)
    v = check_to_var(evolve(bsc_density(0.1), "110"))
    C, S = k.C, k.S
    for s in (0.2, 0.5, 0.8, 1.3):
        direct = math.fsum(b * w**s for b, w in v.interior)
        expected = (
            2 ** (s + 4) * C ** (2 * (s + 1)) * S(4) ** (1 - s)
            + 8 * C ** (2 * s + 1) * S(2) ** s * S(6) ** (1 - s)
            + 2**s * C ** (4 * s) * S(8) ** (1 - s)
        )
        assert direct == pytest.approx(expected, rel=1e-12)


def test_bhattacharyya_var_examples():
    assert bhattacharyya_var(rational_bsc_var(0)) == pytest.approx(0.6, abs=1e-15)
    assert bhattacharyya_var(rational_bsc_var(3)) == pytest.approx(0.01679616, abs=1e-16)
    _, v = init_states(bec_density(0.37))
    assert bhattacharyya_var(v) == 0.37


def test_polarize_examples():
    assert polarize(bsc_density(0.1), "110") == pytest.approx(float(closed_form_k3(7, 0.1)), abs=1e-14)
    assert polarize(bec_density(0.3), "01") == pytest.approx(0.2601, abs=1e-15)
    assert polarize(bsc_density(0.1), "1") == pytest.approx(0.36, abs=1e-15)
    assert polarize(bsc_density(0.1), BitPattern.parse("⊛")) == pytest.approx(0.36, abs=1e-15)


def test_all_bhattacharyya_examples():
    assert all_bhattacharyya(bec_density(0.5), 2) == pytest.approx([0.9375, 0.5625, 0.4375, 0.0625], abs=1e-15)
    expected = [float(closed_form_k3(i, 0.1)) for i in range(1, 9)]
    assert all_bhattacharyya(bsc_density(0.1), 3) == pytest.approx(expected, abs=1e-13)
    with pytest.raises(ValueError):
        all_bhattacharyya(bsc_density(0.1), 0)


@given(densities(max_atoms=3), st.integers(1, 3))
def test_all_bhattacharyya_agrees_with_polarize(d, k):
    z = all_bhattacharyya(d, k)
    for i in range(1, 2**k + 1):
        assert z[i - 1] == polarize(d, BitPattern.from_index(i, k))


@given(densities())
def test_level_one_squaring(d):
    z_check, z_var = all_bhattacharyya(d, 1)
    z = bhattacharyya(d)
    assert z_var == pytest.approx(z * z, abs=1e-12)
    assert z_check >= z


@given(densities(max_atoms=3), st.lists(st.booleans(), min_size=1, max_size=3))
def test_float_mass_conservation(d, bits):
    check, var = init_states(d)
    assert abs(var.total_mass() - 1) <= 1e-12
    state = check
    for b in bits:
        if b:
            v = state if isinstance(state, VarState) else check_to_var(state)
            state = var_update(v, cross_update(v))
        else:
            c = state if isinstance(state, CheckState) else var_to_check(state)
            state = check_update(c)
        assert abs(state.total_mass() - 1) <= 1e-12
        state.check_structure()


@given(rational_densities(), st.lists(st.booleans(), min_size=1, max_size=3))
def test_rational_mass_conservation_and_round_trip(d, bits):
    state = init_states(d)[0]
    for b in bits:
        assert var_to_check(check_to_var(state)) == state
        if b:
            v = check_to_var(state)
            assert v.total_mass() == 1
            state = var_to_check(var_update(v, cross_update(v)))
        else:
            state = check_update(state)
        assert state.total_mass() == 1


@given(densities(max_atoms=4))
def test_cross_state_reconstructs_product_on_critical_line(d):
    _, v = init_states(d)
    c = cross_update(v)
    beta, w = v.masses, v.positions
    for u in (0.0, 1.0, -1.0, 2.0, -2.0):
        tau = 0.5 + 1j * u
        f = np.sum(beta * w**tau)
        direct = (f * np.conj(f)).real
        cosines = 2 * np.sum(c.psi_masses * np.sqrt(c.psi_positions) * np.cos(np.log(c.psi_positions) * u))
        assert c.dc + cosines == pytest.approx(direct, abs=1e-12)
    assert c.dc == pytest.approx(float(np.sum(beta**2 * w)), abs=1e-15)
    assert np.all((c.psi_positions > 0) & (c.psi_positions < 1))


@pytest.mark.parametrize("eps", [0.1, 0.3, 0.5, 0.9])
def test_bec_closure(eps):
    k = 6
    z = all_bhattacharyya(bec_density(eps), k)
    for i, value in enumerate(z, start=1):
        e = eps
        for b in BitPattern.from_index(i, k):
            e = e * e if b else 2 * e - e * e
        assert value == pytest.approx(e, abs=1e-14)
        assert evolve(bec_density(eps), BitPattern.from_index(i, k)).interior == ()


def test_bsc_check_closure():
    state = init_states(bsc_density(P, Backend.RATIONAL))[0]
    for m in range(1, 6):
        state = check_update(state)
        assert state.interior == (Atom(1, Fraction(4, 5) ** (2**m)),)


def test_rational_and_float_backends_agree():
    zf = all_bhattacharyya(bsc_density(0.1), 4)
    zr = all_bhattacharyya(bsc_density("1/10", Backend.RATIONAL), 4)
    assert zf == pytest.approx(zr, abs=1e-12)


def test_atom_overflow_reports_location():
    with pytest.raises(AtomOverflowError) as info:
        polarize(bsc_density(0.1), "1111", EngineConfig(atom_cap=2))
    # the third variable step is the first with more than two atoms
    assert info.value.level == 3 and info.value.index == 16
    assert "level 3" in str(info.value)
    with pytest.raises(AtomOverflowError) as info:
        all_bhattacharyya(bsc_density(0.1), 4, EngineConfig(atom_cap=2))
    assert info.value.index is not None


def test_float_boundary_routing_keeps_states_valid():
    # w^16 underflows to zero; positions near z = 1 round onto the boundary
    for p in (1e-10, 1e-30):
        d = bsc_density(p)
        for pat in ("1111", "11110", "111101"):
            s = evolve(d, pat)
            s.check_structure()
            assert abs(s.total_mass() - 1) <= 1e-12
            assert 0 <= polarize(d, pat) <= 1


def test_prune_drops_light_atoms():
    d = density_from_atoms([(1e-16, 0.5), (1 - 1e-16, 0.9)], 0, 0)
    s = check_update(init_states(d)[0], EngineConfig(prune=True))
    assert all(a.mass >= 1e-15 for a in s.interior)
    assert check_update(init_states(d)[0]).n_interior > s.n_interior


def test_select_info_set_examples():
    z = [0.9375, 0.5625, 0.4375, 0.0625]
    assert select_info_set(z, threshold=0.5) == [3, 4]
    assert select_info_set(z, rate=0.25) == [4]
    assert select_info_set([0.3] * 4, rate=0.5) == [1, 2]
    with pytest.raises(ValueError):
        select_info_set(z)
    with pytest.raises(ValueError):
        select_info_set(z, threshold=0.5, rate=0.5)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=64), st.floats(0.01, 0.99))
def test_select_rate_size_and_optimality(z, rate):
    chosen = select_info_set(z, rate=rate)
    assert len(chosen) == math.floor(Fraction(repr(rate)) * len(z))
    rest = [v for i, v in enumerate(z, start=1) if i not in chosen]
    if chosen and rest:
        assert max(z[i - 1] for i in chosen) <= min(rest)
