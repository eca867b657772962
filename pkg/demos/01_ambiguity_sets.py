"""Worst-case expectations over the supported ambiguity sets.

Each set answers the same question: how large can <p, z> get if p is only
known to lie in the set? We use one cost vector z on four outcomes and look
at how the answer and the maximizing distribution change with the set.
"""
import numpy as np

from cadro import CadroSet, FullSimplex, KlBall, ProbVector, TvBall, WBall, contains, worst_case

z = np.array([1.0, 2.0, 4.0, 8.0])          # cost of each outcome
p_hat = ProbVector([0.4, 0.3, 0.2, 0.1])    # an empirical distribution
print(f"cost vector z = {z}, nominal expectation <p_hat, z> = {p_hat.weights @ z:.3f}\n")

# The cost-aware set only constrains one direction v: <p, v> <= alpha.
# With v = z the worst case is exactly alpha.
v = z.copy()
for alpha in (2.5, 4.0, 8.0):
    val, p = worst_case(CadroSet(v, alpha), z)
    print(f"half-space  alpha={alpha:4.1f}: worst case {val:.3f} at p={np.round(p.weights, 3)}")

# A direction that disagrees with z leaves more room to the adversary.
v_other = np.array([4.0, 1.0, 3.0, 2.0])
val, p = worst_case(CadroSet(v_other, 2.0), z)
print(f"half-space along another direction: {val:.3f} at p={np.round(p.weights, 3)}\n")

for r in (0.0, 0.2, 0.6, 2.0):
    val, p = worst_case(TvBall(p_hat, r), z)
    print(f"L1 ball     r={r:3.1f}: {val:.3f} at p={np.round(p.weights, 3)}")
print()
for r in (0.01, 0.1, 0.5, 3.0):
    val, p = worst_case(KlBall(p_hat, r), z)
    print(f"KL ball     r={r:4.2f}: {val:.3f} at p={np.round(p.weights, 3)}")
print()

# Transport ball: outcomes on a line, moving mass costs the distance travelled.
K = np.abs(np.subtract.outer(np.arange(4), np.arange(4))).astype(float)
for r in (0.1, 0.5, 1.5, 3.0):
    val, p = worst_case(WBall(p_hat, K, r), z)
    print(f"transport   r={r:3.1f}: {val:.3f} at p={np.round(p.weights, 3)}")

val, _ = worst_case(FullSimplex(4), z)
print(f"\nfull simplex: {val:.3f} (the robust answer, max z)")

q = ProbVector([0.1, 0.2, 0.3, 0.4])
print("\nmembership of q =", q.weights)
for s in (CadroSet(v, 5.0), TvBall(p_hat, 0.5), KlBall(p_hat, 0.5), WBall(p_hat, K, 1.0)):
    print(f"  {type(s).__name__:9s} contains q: {contains(s, q)}")
