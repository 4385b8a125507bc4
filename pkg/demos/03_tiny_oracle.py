"""
Heuristic versus exhaustive search
==================================

Two BSs, three WDs, 2-4 RBs each: small enough to enumerate every association
and every RB split.
"""

from semalloc.assoc import associate
from semalloc.oracle import exact_solve, tiny_config
from semalloc.scenario import generate

for seed in range(8):
    s = generate(tiny_config(seed))
    a, o = associate(s), exact_solve(s)
    flag = "" if a.total_utility >= 0.95 * o.value else "   <- below 95%"
    print(f"seed {seed}: K = {[b.rb_count for b in s.base_stations]}  heuristic {a.total_utility:.4f}"
          f"  optimum {o.value:.4f}  ({a.total_utility / o.value:.3f}){flag}")
    if a.association != o.assignment.association:
        print(f"         heuristic x = {a.association}, optimum x = {o.assignment.association}")
