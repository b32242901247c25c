# # Disagreements, drought events and return periods

import numpy as np

from arspi import McmcConfig, Rng, arspi_series, extract_events, mismatch, moving_total, return_period, run_chains, spi_series
from synthetic import monthly_precip

precip = monthly_precip(years=40)
mtr = moving_total(precip, 6)
spi = spi_series(mtr)
arspi = arspi_series(run_chains(mtr, McmcConfig(2, 6_000, 2_000, 10, base_seed=3)), mtr, m=5_000, rng=Rng(3))

# ## Where the two indices disagree
#
# Type 1: ARSPI above 0 while SPI is below -1.5 (SPI calls a severe drought
# the model finds unremarkable given last window). Type 2 is the reverse.

rep = mismatch(spi, arspi)
print(f"aligned windows {rep.aligned_length}")
print(f"type 1: {rep.type1_count} ({100 * rep.type1_rate:.2f}%)")
print(f"type 2: {rep.type2_count} ({100 * rep.type2_rate:.2f}%)")

# ## Events
#
# A drought event is a maximal run below a threshold. Severity sums the
# negated index over the run, peak is the most negative value.

years = len(precip) / 12
for name, idx in (("SPI", spi), ("ARSPI", arspi)):
    for thr in (0.0, -1.0):
        ev = extract_events(idx, thr)
        dur = np.array([e.duration for e in ev])
        print(f"{name:<5} below {thr:+.1f}: {len(ev):3d} events, mean duration {dur.mean():.1f}, "
              f"longest {dur.max()}")

# Return period of a drought lasting more than 6 months, counted from the
# events below zero.

for name, idx in (("SPI", spi), ("ARSPI", arspi)):
    ev = extract_events(idx, 0.0)
    print(f"{name:<5} duration > 6: every {return_period(ev, 'duration', 6, years):.1f} years")
