# # Why an autoregressive index
#
# Overlapping windows make moving totals strongly autocorrelated even when
# the monthly values are independent. The partial autocorrelation is what
# motivates a first-order model.

import numpy as np

from arspi import acf, moving_total, pacf
from synthetic import monthly_precip

precip = monthly_precip(years=80)
for window in (1, 3, 6, 12):
    mtr = moving_total(precip, window)
    y = np.log(mtr.encoded_values)
    a = acf(y, 24)
    p = pacf(y, 24)
    print(f"window {window:>2}: acf lag1 {a.coefficients[1]:.3f} lag{window} {a.coefficients[window]:.3f}, "
          f"pacf lag1 {p.coefficients[1]:.3f}, significant pacf lags {p.significant_lags()[:6].tolist()}")

# Lag-one partial autocorrelation grows with the window, while the seasonal
# cycle of this synthetic record leaves smaller partial terms at later lags.
