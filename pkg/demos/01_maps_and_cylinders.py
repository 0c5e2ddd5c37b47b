"""Maps and cylinder sets: exact branch algebra on [0,1]^d.

Every map here is a product of one-dimensional expanding piecewise-linear
maps whose branches each cover [0,1] fully.  Depth-m cylinders are the
maximal intervals on which the m-fold composition is affine; their slopes,
offsets and endpoints are exact rationals.
"""

from fractions import Fraction as F

from orbitcount import (
    cylinders,
    doubling_map,
    eval_map,
    iterate_map,
    locate,
    luroth_map,
    tent_map,
    toral_diag_map,
)

print("== one step of a few maps ==")
print("doubling: T(3/8) =", eval_map(doubling_map(), (F(3, 8),))[0])
print("tent:     T(4/5) =", eval_map(tent_map(), (F(4, 5),))[0])
print("toral-diag(2,3): T(1/4, 1/5) =", eval_map(toral_diag_map([2, 3]), (F(1, 4), F(1, 5))))

print("\n== depth-2 cylinders of the doubling map ==")
for c in cylinders(doubling_map(), 2):
    print(
        f"  [{c.lows[0]}, {c.highs[0]})  T^2(x) = {c.slopes[0]} x - {c.offsets[0]}"
    )

print("\n== tent map: negative slopes compose ==")
for c in cylinders(tent_map(), 2):
    print(f"  [{c.lows[0]}, {c.highs[0]})  K = {c.slopes[0]}, z = {c.offsets[0]}")

print("\n== partition identities at depth 6 (exact) ==")
for name, m in (("doubling", doubling_map()), ("tent", tent_map()), ("luroth-trunc-5", luroth_map(5))):
    total_len = sum(c.highs[0] - c.lows[0] for c in cylinders(m, 6))
    total_inv = sum(1 / abs(c.slopes[0]) for c in cylinders(m, 6))
    print(f"  {name:15s} sum |J| = {total_len}, sum 1/|K| = {total_inv}")

print("\n== locate: the cylinder of a point, consistent with the orbit ==")
m = doubling_map()
x = (F(1, 3),)
cyl = locate(m, x, 5)
print(f"  x = 1/3 sits in [{cyl.lows[0]}, {cyl.highs[0]}) at depth 5")
print(f"  affine form gives T^5(x) = {cyl.apply(x)[0]}, orbit gives {iterate_map(m, x, 5)[0]}")
