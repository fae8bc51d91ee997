"""Closed-form Bhattacharyya parameters against the evolution engine.

At level 4 every bit-channel of a BSC has a closed form in ``p``.  The
engine tracks atomic densities numerically, so the two are independent.
"""

from fractions import Fraction

from polarce import Backend, BitPattern, bsc_density, evolve, polarize
from polarce.bsc import closed_form_k4, recursive_bhatt

for p in (0.05, 0.2, 0.45):
    d = bsc_density(p)
    worst = max(abs(polarize(d, BitPattern.from_index(i, 4)) - closed_form_k4(i, p)) for i in range(1, 17))
    print(f"p={p}: max |engine - closed form| = {worst:.2e}")

# recursion over prefix and suffix runs reproduces the same numbers
pat = BitPattern.parse("0011")
print("0011 via recursion:", recursive_bhatt(pat, 0.1), "engine:", polarize(bsc_density(0.1), pat))

# exact arithmetic: after four check steps a BSC is still a single atom
state = evolve(bsc_density(Fraction(1, 10), Backend.RATIONAL), "0000")
print("rational state after 0000:", state)
