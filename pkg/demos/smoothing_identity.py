"""Integration by parts in the smoothing average: the running-average
semigroup increment equals a slope-kernel integral, mode by mode."""

import math

from oulab import kernels as K

if __name__ == "__main__":
    print("residual of the by-parts identity per spectral weight mu and time t")
    header = "      t ->" + "".join(f"  {t:8.1f}" for t in (0.1, 1.0, 10.0))
    print(header)
    for mu in (0.01, 0.1, 1.0, 10.0, 100.0):
        cells = "".join(f"  {K.smoothing_identity_residual(mu, t):8.1e}"
                        for t in (0.1, 1.0, 10.0))
        print(f"  mu = {mu:6.2f}{cells}")

    print("\nthe identity carries the running-average multiplier "
          "(1 - e^{-mu s}) / (mu s)")
    print("inside the integral, not the endpoint semigroup e^{-mu s}:")
    for s in (0.1, 1.0, 10.0):
        run = -math.expm1(-s) / s
        end = math.exp(-s)
        print(f"  mu s = {s:5.1f}   running average {run:.6f}   "
              f"endpoint {end:.6f}")
