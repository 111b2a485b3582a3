"""Walk through the good-set construction for the point mass at 1/2.

With lambda = 5, depth 1 on I = [0, 1]: generation 1 partitions I into 25
cells of width 1/25; the atom's cell [12/25, 13/25) is heavy (mass 1 >= 1/5)
and is removed fused with its flanking shells, [0.472, 0.528]; every gridline
carries a shell of half-width 1/125. What survives: 24 intervals of total
length 72/125 = 0.576, above the guaranteed 1 - 3/5 = 0.4.
"""

from fractions import Fraction

from sio_lab.good_radii import (GoodSetParams, build_removed_families,
                                is_good_radius, materialize_good_set,
                                select_good_radius_near, verify_good_set)
from sio_lab.measure import make_step_measure


def main() -> None:
    v = make_step_measure([(Fraction(1, 2), Fraction(1))])
    params = GoodSetParams(lam=5, depth=1)

    fam = build_removed_families(v, params)
    print("heavy cells (generation 1):",
          [(j, str(mass)) for j, mass in fam.heavy_at(1)])

    iset = materialize_good_set(v, params)
    print(f"good set: {iset.n_intervals} intervals, total length "
          f"{iset.total_length} = {float(iset.total_length)}")
    print(f"guaranteed lower bound: {params.lower_bound} "
          f"= {float(params.lower_bound)}")
    first_lo, first_hi = iset.interval(0)
    print(f"first surviving interval: [{first_lo}, {first_hi}]")

    check = verify_good_set(v, params, iset)
    print(f"whole-set verification: midpoints_ok={check.midpoints_ok}, "
          f"non_concentration_ok={check.non_concentration_ok}, "
          f"light_cells_ok={check.light_cells_ok}")

    for t in (Fraction(3, 10), Fraction(1, 2), Fraction(1, 25)):
        res = is_good_radius(v, t, params)
        if res.ok:
            n, j, mass, clr = res.witnesses[0]
            print(f"t = {t}: good (cell {j}, mass {mass}, clearance {clr})")
        else:
            print(f"t = {t}: rejected at generation {res.generation} "
                  f"({res.reason})")

    near = select_good_radius_near(v, Fraction(1, 2), params)
    print(f"nearest certified radius to 1/2: {near} = {float(near)}")


if __name__ == "__main__":
    main()
