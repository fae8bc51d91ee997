"""Bit-channel reliabilities of a BSC and the information set they induce.

Run with ``python demos/reliability_table.py``.
"""

from polarce import BitPattern, all_bhattacharyya, bsc_density, select_info_set

p = 0.11
level = 4

d = bsc_density(p)
z = all_bhattacharyya(d, level)

# Z for every bit-channel in index order
for i, zi in enumerate(z, start=1):
    print(f"{i:3d}  {BitPattern.from_index(i, level)}  {zi:.6e}")

# half-rate code: keep the 8 most reliable positions
info = select_info_set(z, rate=0.5)
print("information set:", info)
print("sum of Z over the set (union bound on block error):", sum(z[i - 1] for i in info))
