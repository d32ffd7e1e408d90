"""Compute subgroup distortion three ways: exact witness families (one
exponential, one iterated-exponential, one faster than every iterate),
symbolic tower lengths, and an empirical Cayley-ball curve on a small
instance where everything can be enumerated.

Run:  python demos/03_distortion_towers.py
"""

from catdistort import (
    BlockParams,
    build_block,
    build_chain,
    build_double,
    expr_cmp,
    lower_bound_curve,
    measure_distortion,
    normalize,
    to_base,
    witness_block,
    witness_chain,
    witness_tower,
)
from catdistort.distortion import iterated_exp

# Exponential distortion in one block: t^n a t^-n has word length 2n+1
# but its expression in the base letters has length exactly 14^n.
block = build_block(BlockParams(1, 14, 14))
print("block witnesses (word length -> subgroup length):")
for n in range(6):
    w = witness_block(block, n)
    print(f"  {w.word_length:>2} -> {normalize(w.subgroup_length)}")

# Chains compose the exponentials: the l-th witness reaches the l-fold
# iterate of x -> 14^x while its word length stays linear in n.
w3 = witness_chain(3, 14, 2)
print(f"\nchain l=3 witness: word length {w3.word_length} <= "
      f"{w3.length_bound}, subgroup length {normalize(w3.subgroup_length)}")

# On the small chain (L = 2) the same witness can be materialized and the
# calculus value checked letter for letter.
c22 = build_chain(2, 2)
for n in range(4):
    w = witness_chain(2, 2, n, c22)
    base = to_base(c22, w.word)
    print(f"  l=2, L=2, n={n}: materialized {len(base)} letters == "
          f"{normalize(w.subgroup_length)}")

# The double extension stacks a new stable letter on top; its witnesses
# outgrow every iterated exponential.  Later stages are lazy towers that
# no big integer could hold, so print a summary rather than the digits.
def summary(expr):
    text = str(normalize(expr))
    return text if len(text) <= 60 else f"{text[:40]}... ({len(text)} chars)"

double = build_double(9, 27, 3)
for k in (1, 2, 3, 4):
    w = witness_tower(k, 3, double)
    print(f"\ntower stage {k}: word length {w.word_length} "
          f"(bound {w.length_bound}), subgroup length {summary(w.subgroup_length)}")
    dominated = iterated_exp(3, k, 1)
    print(f"  dominates f^{k}(1) = {summary(dominated)}: "
          f"{expr_cmp(w.subgroup_length, dominated) >= 0}")

w2 = witness_tower(2, 3, double)
base = to_base(double, w2.word)
print(f"\nmaterialized tower stage 2: {len(base)} letters "
      f"(= 3^(3*3), matching the calculus)")

# Empirical curve on the smallest block: enumerate the whole radius-6
# ball with the word problem as the equality oracle, and confirm the
# curve dominates every witness that fits in the radius.
b22 = build_block(BlockParams(1, 2, 2))
emp = measure_distortion(b22, 6)
lb = lower_bound_curve(b22, 2)
print("\nempirical distortion on block(1, 2, 2):")
print(emp.to_csv())
print("witness lower bounds:")
print(lb.to_csv())
