"""
One device, one base station
============================

How much compute and how much data does a single WD pick as its RB count grows?
"""

import numpy as np

from semalloc.scenario import GenConfig, generate
from semalloc.wdsched import feasible_freq_interval, utility_table

s = generate(GenConfig(num_bs=1, num_wd=1, seed=3))
wd, link = s.devices[0], s.link(0, 0)
print(f"distance {s.distance(0, 0):.0f} m, gain {link.gain:.3e}, f_max {wd.max_freq_hz / 1e9:.2f} GHz")

# the frequency window that keeps both deadline and energy budget, at half the workload cap
iv = feasible_freq_interval(wd.app_params.c_max_cycles / 2, wd, link)
print(f"feasible f at c = C/2: [{iv.lo_hz / 1e9:.3f}, {iv.hi_hz / 1e9:.3f}] GHz")

# the whole table u*(z), z = 0..40
t = utility_table(wd, link, 40)
print("\n  z   utility    c (Mcyc)   d (kbit)   f (GHz)   P (W)")
for z in (1, 2, 5, 10, 20, 40):
    print(f"{z:3d}   {t.utility[z]:.4f}   {t.c_cycles[z] / 1e6:8.3f}   {t.data_bits[z] / 1e3:8.1f}"
          f"   {t.freq_hz[z] / 1e9:7.3f}   {t.power_w[z]:.3f}")

# marginal gains shrink once d sits in the well-behaved part of the fit
gains = np.diff(t.utility)
print("\nfirst marginal gains:", np.round(gains[:6], 4))
