# # Classic SPI
#
# Moving totals are fitted with a Gamma law (Thom's approximation) plus a
# point mass at zero, then pushed through the standard normal quantile.

from pathlib import Path

import numpy as np

from arspi import fit_gamma_mom, moving_total, spi_series
from arspi.indexseries import Category
from arspi.svg import line_plot
from synthetic import monthly_precip

precip = monthly_precip()
print(f"{len(precip)} months from {precip.start_year}")

# ## Moving totals and the Gamma fit
#
# A window of 3 sums the current month and the two before it, so the first
# two months have no value.

mtr = moving_total(precip, 3)
fit = fit_gamma_mom(mtr)
print(f"windows: {len(mtr)}, dry windows: {mtr.n_dry}")
print(f"shape {fit.params.shape:.3f}, scale {fit.params.scale:.3f}, P(zero) {fit.zero_prob:.4f}")

# ## The index
#
# Over a long record the SPI is close to standard normal by construction.

spi = spi_series(mtr)
print(f"SPI mean {spi.values.mean():+.3f}, sd {spi.values.std(ddof=1):.3f}")
print(f"range [{spi.values.min():.2f}, {spi.values.max():.2f}]")

# Share of months in each drought class; a standard normal would give
# 0.341 / 0.092 / 0.044 / 0.023.

for c in (Category.MildDrought, Category.ModerateDrought, Category.SevereDrought, Category.ExtremeDrought):
    share = np.mean([k == c for k in spi.categories])
    print(f"  {c.name:<16} {share:.3f}")

# Fitting each calendar month separately removes the seasonal cycle from
# the reference distribution.

spi_pm = spi_series(mtr, per_month=True)
print(f"per-month SPI sd {spi_pm.values.std(ddof=1):.3f}")

# ## Plot

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
x = spi.year + (spi.month - 1) / 12
(out / "spi_3.svg").write_text(line_plot({"SPI-3": (x, spi.values)}, "SPI, 3-month totals",
                                         "year", "index", hlines=(-2, -1.5, -1, 0, 1, 1.5, 2)))
print(f"wrote {out / 'spi_3.svg'}")
