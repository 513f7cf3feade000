"""
Checking the fractional Gaussian noise generator
================================================

Two checks of the noise source: the sample covariance of simulated fBm
against ``(s^{2H} + t^{2H} - |t - s|^{2H}) / 2``, and the normalized quadratic
variation of the increments, which should be close to the identity.
"""

import numpy as np

from vasifit import NoiseSpec
from vasifit.noise import fbm_covariance_zscores, fgn_autocovariance, quadratic_variation_ratio

for hurst in (0.35, 0.5, 0.8):
    z = fbm_covariance_zscores(hurst, n_grid=256, replications=2000, seed=0)
    ratio = quadratic_variation_ratio(NoiseSpec(kind="fbm", d=2, hurst=hurst), n=100_000, seed=0)
    print(f"H = {hurst}: max |z| = {np.max(np.abs(z)):.2f}, QV ratio diagonal = {np.diag(ratio).round(4)}")

#%%
# Increments are positively correlated for H > 1/2 and negatively for H < 1/2.
for hurst in (0.35, 0.8):
    print(hurst, fgn_autocovariance(hurst, 4).round(4))
