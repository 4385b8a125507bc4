"""
A 5-cell network against the baselines
=======================================

Default scenario (5 BSs, 30 WDs), concave utility.
"""

from semalloc.assoc import associate, scenario_tables
from semalloc.baselines import BaselineKind, run_baseline
from semalloc.netmodel import validate_assignment
from semalloc.scenario import GenConfig, generate

s = generate(GenConfig(seed=0))
tables = scenario_tables(s)  # u*(z) for every (WD, BS); shared by all table-based methods

trace = []
prop = associate(s, tables=tables, trace=trace)
print(f"proposed: total {prop.total_utility:.3f}, bound with everyone everywhere {prop.upper_bound:.3f}")
print(f"detach steps {len(trace) - 1}, utility along the way {trace[0]:.2f} -> {trace[-1]:.2f}")

for m in range(s.num_bs):
    members = prop.members(m)
    print(f"  BS {m}: {len(members):2d} WDs  RBs {sum(prop.allocation[n] for n in members):3d}"
          f"/{s.base_stations[m].rb_count:<3d}  utility {prop.bs_utility(m):.3f}")

print()
for kind in BaselineKind:
    a = run_baseline(kind, s, tables=tables)
    assert not validate_assignment(a, s)
    served = sum(x.utility > 0 for x in a.schedules)
    print(f"{kind.value:4s} total {a.total_utility:7.3f}   served {served}/{s.num_wd}")
