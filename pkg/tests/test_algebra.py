from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nqsim.algebra import (
    Family,
    Infeasible,
    Unique,
    mod3_invariant,
    parity_invariant,
    solve_occupancy_asym,
    solve_occupancy_sym,
)
from nqsim.ring import Neighborhood, potentials

ASYM = Neighborhood.ASYMMETRIC
SYM = Neighborhood.SYMMETRIC


def fr(*xs):
    return tuple(Fraction(x) for x in xs)


class TestAsymmetricSolve:
    def test_odd_unique_example(self):
        assert solve_occupancy_asym((2, 2, 2)) == Unique(fr(1, 1, 1))

    def test_even_infeasible_example(self):
        assert solve_occupancy_asym((1, 0, 0, 0)) == Infeasible("parity")

    def test_even_family_example(self):
        out = solve_occupancy_asym((1, 1, 1, 1))
        assert out == Family(fr(0, 1, 0, 1), free_parameters=1)

    def test_family_parameter_sweeps_solutions(self):
        out = solve_occupancy_asym((1, 1, 1, 1))
        for c in (Fraction(1, 3), Fraction(-2), Fraction(1)):
            xi = [b + (c if k % 2 == 0 else -c) for k, b in enumerate(out.base)]
            assert potentials(xi, ASYM) == fr(1, 1, 1, 1)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            solve_occupancy_asym((1, 2))

    @given(st.lists(st.integers(0, 25), min_size=3, max_size=13).filter(lambda x: len(x) % 2 == 1))
    def test_round_trip_odd(self, xi):
        out = solve_occupancy_asym(potentials(xi, ASYM))
        assert isinstance(out, Unique)
        assert out.xi == fr(*xi)

    @given(st.lists(st.integers(0, 25), min_size=4, max_size=12).filter(lambda x: len(x) % 2 == 0))
    def test_even_family_reproduces_potentials(self, xi):
        u = potentials(xi, ASYM)
        out = solve_occupancy_asym(u)
        assert isinstance(out, Family) and out.free_parameters == 1
        assert potentials(out.base, ASYM) == fr(*u)

    @given(st.lists(st.integers(0, 25), min_size=4, max_size=12).filter(lambda x: len(x) % 2 == 0))
    def test_even_infeasible_iff_parity_broken(self, u):
        out = solve_occupancy_asym(u)
        if parity_invariant(u):
            assert not isinstance(out, Infeasible)
        else:
            assert out == Infeasible("parity")


class TestSymmetricSolve:
    def test_unique_example(self):
        assert solve_occupancy_sym((3, 3, 3, 3)) == Unique(fr(1, 1, 1, 1))

    def test_mod3_infeasible_example(self):
        assert solve_occupancy_sym((1, 0, 0, 0, 0, 0)) == Infeasible("mod3")

    def test_mod3_family_example(self):
        out = solve_occupancy_sym((1, 1, 1, 1, 1, 1))
        assert isinstance(out, Family) and out.free_parameters == 2
        assert potentials(out.base, SYM) == fr(1, 1, 1, 1, 1, 1)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            solve_occupancy_sym((1, 2, 3))

    @given(st.lists(st.integers(0, 25), min_size=4, max_size=14).filter(lambda x: len(x) % 3 != 0))
    def test_round_trip_non_div3(self, xi):
        out = solve_occupancy_sym(potentials(xi, SYM))
        assert isinstance(out, Unique)
        assert out.xi == fr(*xi)

    @given(st.lists(st.integers(0, 25), min_size=6, max_size=12).filter(lambda x: len(x) % 3 == 0))
    def test_div3_family_reproduces_potentials(self, xi):
        u = potentials(xi, SYM)
        out = solve_occupancy_sym(u)
        assert isinstance(out, Family) and out.free_parameters == 2
        assert potentials(out.base, SYM) == fr(*u)

    @given(st.lists(st.integers(0, 25), min_size=6, max_size=12).filter(lambda x: len(x) % 3 == 0))
    def test_div3_infeasible_iff_mod3_broken(self, u):
        out = solve_occupancy_sym(u)
        if mod3_invariant(u):
            assert not isinstance(out, Infeasible)
        else:
            assert out == Infeasible("mod3")

    @given(st.lists(st.integers(0, 25), min_size=6, max_size=12).filter(lambda x: len(x) % 3 == 0),
           st.integers(-5, 5), st.integers(-5, 5))
    def test_family_parameters_sweep_solutions(self, xi, a, b):
        u = potentials(xi, SYM)
        base = solve_occupancy_sym(u).base
        m = len(u)
        # shifting (xi_1, xi_2) by (a, b) shifts the rest with period-3 pattern
        hom = {0: a, 1: b, 2: -a - b}
        shifted = [base[k] + hom[k % 3] for k in range(m)]
        assert potentials(shifted, SYM) == fr(*u)


class TestConditions:
    def test_parity_examples(self):
        assert parity_invariant((0, 0, 0, 0)) is True
        assert parity_invariant((1, 0, 1, 0)) is False

    def test_conditions_hold_along_simulations(self):
        # potentials of an occupancy always satisfy the solvability conditions,
        # so they stay true at every step of a chain
        from nqsim.dynamics import ChainState, MinRule, RandomStream, run

        out = run(
            ChainState.empty(6, SYM), MinRule(), 1500, RandomStream(4, 0), sample_every=1
        )
        assert all(mod3_invariant(rec.u) for rec in out.records)
        out = run(
            ChainState.empty(6, ASYM), MinRule(), 1500, RandomStream(4, 0), sample_every=1
        )
        assert all(parity_invariant(rec.u) for rec in out.records)
        assert all(parity_invariant(rec.v) for rec in out.records)

    def test_parity_rejects_odd_m(self):
        with pytest.raises(ValueError):
            parity_invariant((1, 2, 3))

    def test_mod3_examples(self):
        assert mod3_invariant((7, 7, 7, 7, 7, 7)) is True
        assert mod3_invariant((1, 0, 0, 1, 0, 0)) is False

    def test_mod3_rejects_other_m(self):
        with pytest.raises(ValueError):
            mod3_invariant((1, 2, 3, 4))
