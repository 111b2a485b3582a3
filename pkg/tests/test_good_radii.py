from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sio_lab.errors import BudgetError, InputError
from sio_lab.good_radii import (GoodSetParams, build_removed_families,
                                concentration_violations, is_good_radius,
                                materialize_good_set,
                                select_good_radius_near, verify_good_set)
from sio_lab.measure import interval_mass, make_step_measure

DELTA_HALF = make_step_measure([(Fraction(1, 2), Fraction(1))])
EMPTY = make_step_measure([])
P5 = GoodSetParams(lam=5, depth=1)


def test_params_validation():
    with pytest.raises(InputError):
        GoodSetParams(lam=2, depth=1)
    with pytest.raises(InputError):
        GoodSetParams(lam=5, depth=0)
    assert GoodSetParams(lam=3, depth=1).bound_is_vacuous
    assert not GoodSetParams(lam=5, depth=1).bound_is_vacuous


def test_heavy_cell_for_point_mass():
    fam = build_removed_families(DELTA_HALF, P5)
    assert fam.heavy_at(1) == ((12, Fraction(1)),)  # [0.48, 0.52)


def test_no_heavy_cells_for_light_separated_atoms():
    params = GoodSetParams(lam=5, depth=2)
    # masses < 5^-2, gaps > 5^-4
    v = make_step_measure([(Fraction(1, 10), Fraction(1, 30)),
                           (Fraction(5, 10), Fraction(1, 30)),
                           (Fraction(9, 10), Fraction(1, 30))])
    fam = build_removed_families(v, params)
    assert fam.heavy_at(1) == ()
    assert fam.heavy_at(2) == ()


def test_heavy_cells_uniform_quarter():
    v = make_step_measure([(Fraction(1, 10), Fraction(1, 4)),
                           (Fraction(2, 10), Fraction(1, 4)),
                           (Fraction(3, 10), Fraction(1, 4)),
                           (Fraction(9, 10), Fraction(1, 4))])
    fam = build_removed_families(v, P5)
    assert tuple(j for j, _ in fam.heavy_at(1)) == (2, 5, 7, 22)


def test_is_good_radius_certificate_03():
    params = GoodSetParams(lam=5, depth=2)
    res = is_good_radius(DELTA_HALF, Fraction(3, 10), params)
    assert res.ok
    (n1, j1, m1, c1), (n2, j2, m2, c2) = res.witnesses
    assert (n1, j1, m1) == (1, 7, 0)
    assert c1 == Fraction(1, 50) and c1 >= Fraction(1, 125)
    assert (n2, m2) == (2, 0)
    assert j2 == 187  # 0.3 * 625 = 187.5
    assert c2 == Fraction(1, 1250) and c2 >= Fraction(1, 15625)


def test_is_good_radius_rejections():
    params = GoodSetParams(lam=5, depth=2)
    rej = is_good_radius(DELTA_HALF, Fraction(1, 2), params)
    assert not rej.ok and rej.generation == 1 and rej.reason == "heavy_cell"
    rej = is_good_radius(DELTA_HALF, Fraction(1, 25), params)
    assert not rej.ok and rej.reason == "gridline_shell"
    with pytest.raises(InputError):
        is_good_radius(DELTA_HALF, Fraction(2), params)


def test_materialize_point_mass_exact():
    iset = materialize_good_set(DELTA_HALF, P5)
    assert iset.total_length == Fraction(72, 125)
    assert iset.n_intervals == 24
    assert iset.total_length >= P5.lower_bound  # 0.576 >= 0.4


def test_materialize_empty_measure():
    iset = materialize_good_set(EMPTY, P5)
    assert iset.total_length == Fraction(3, 5)  # shells only


def test_materialize_budget_error():
    params = GoodSetParams(lam=16, depth=3, budget=10 ** 6)
    with pytest.raises(BudgetError) as exc:
        materialize_good_set(DELTA_HALF, params)
    assert exc.value.max_feasible == 2


def test_select_near_center_of_heavy_cell():
    t = select_good_radius_near(DELTA_HALF, Fraction(1, 2), P5)
    assert t == Fraction(23, 50)  # nearest certified cell midpoint, tie low
    assert is_good_radius(DELTA_HALF, t, P5).ok


def test_select_near_own_midpoint():
    t = select_good_radius_near(DELTA_HALF, Fraction(3, 10), P5)
    assert t == Fraction(3, 10)  # 0.3 is cell 7's midpoint (7.5/25)


def test_select_with_zero_mass():
    t = select_good_radius_near(EMPTY, Fraction(1, 3), P5)
    assert is_good_radius(EMPTY, t, P5).ok


def test_soundness_midpoints_and_near_endpoints():
    params = GoodSetParams(lam=5, depth=2)
    v = make_step_measure([(Fraction(1, 2), Fraction(1, 2)),
                           (Fraction(1, 7), Fraction(1, 4)),
                           (Fraction(6, 7), Fraction(1, 4))])
    iset = materialize_good_set(v, params)
    eps = iset.unit / 10 ** 6
    for k in range(iset.n_intervals):
        lo, hi = iset.interval(k)
        for t in (iset.midpoint(k), lo + eps, hi - eps):
            assert is_good_radius(v, t, params).ok, t


def test_completeness_rejected_midcells_outside():
    params = GoodSetParams(lam=5, depth=2)
    v = make_step_measure([(Fraction(1, 2), Fraction(1, 2)),
                           (Fraction(1, 7), Fraction(1, 2))])
    iset = materialize_good_set(v, params)
    ivals = list(iset.intervals())
    w = params.cell_width(params.depth)
    for j in range(params.n_cells(params.depth)):
        t = (2 * j + 1) * w / 2
        inside = any(lo <= t <= hi for lo, hi in ivals)
        assert is_good_radius(v, t, params).ok == inside


def test_monotone_in_depth():
    v = make_step_measure([(Fraction(1, 3), Fraction(1, 2)),
                           (Fraction(2, 3), Fraction(1, 2))])
    sets = {d: materialize_good_set(v, GoodSetParams(lam=5, depth=d))
            for d in (1, 2, 3)}
    for d in (2, 3):
        deeper = list(sets[d].intervals())
        shallower = list(sets[d - 1].intervals())
        for lo, hi in deeper:
            assert any(slo <= lo and hi <= shi for slo, shi in shallower)


def test_non_concentration_consequence():
    params = GoodSetParams(lam=5, depth=2)
    v = make_step_measure([(Fraction(1, 2), Fraction(1, 2)),
                           (Fraction(3, 9), Fraction(1, 2))])
    iset = materialize_good_set(v, params)
    for k in range(0, iset.n_intervals, 7):
        t = iset.midpoint(k)
        for n in (1, 2):
            w = params.shell_half_width(n)
            assert interval_mass(v, t - w, t + w) < Fraction(1, 5 ** n)


def test_concentration_violations_exact():
    params = GoodSetParams(lam=5, depth=1)
    v = make_step_measure([(Fraction(1, 2), Fraction(1))])
    viols = concentration_violations(v, params, 1)
    # window half-width 1/125: t in [1/2 - 1/125, 1/2 + 1/125] is violating
    assert viols == [(Fraction(1, 2) - Fraction(1, 125),
                      Fraction(1, 2) + Fraction(1, 125))]


def test_verify_good_set_clean():
    params = GoodSetParams(lam=5, depth=2)
    v = make_step_measure([(Fraction(1, 2), Fraction(1, 2)),
                           (Fraction(2, 7), Fraction(1, 2))])
    iset = materialize_good_set(v, params)
    rep = verify_good_set(v, params, iset)
    assert rep.midpoints_ok and rep.non_concentration_ok and rep.light_cells_ok
    assert rep.n_midpoints == iset.n_intervals


frac01 = st.fractions(min_value=0, max_value=1, max_denominator=10 ** 6)


@settings(max_examples=60, deadline=None)
@given(atoms=st.lists(st.tuples(frac01, frac01), min_size=0, max_size=12),
       lam=st.sampled_from([3, 5, 8]),
       depth=st.integers(min_value=1, max_value=3))
def test_measure_bound_property(atoms, lam, depth):
    total = sum(m for _, m in atoms)
    if total > 1:
        atoms = [(p, m / total) for p, m in atoms]
    v = make_step_measure(atoms)
    params = GoodSetParams(lam=lam, depth=depth)
    iset = materialize_good_set(v, params)
    # exact rational comparison of the guaranteed truncated bound
    assert iset.total_length >= params.length * params.lower_bound
    rep = verify_good_set(v, params, iset, n_samples=8)
    assert rep.midpoints_ok and rep.non_concentration_ok and rep.light_cells_ok
