"""Closed-form kernel calculus: values, mass pieces, scaling, and the
integral identity the increment kernel was built to satisfy."""

import math

import numpy as np

from oulab import kernels as K

if __name__ == "__main__":
    print("pointwise kernel values at t = 1")
    for s in (0.25, 0.5, 1.5, 2.5):
        row = f"  s = {s:4.2f}   increment {K.increment_kernel(s, 1.0):+9.6f}"
        row += f"   averaged {K.averaged_kernel(s, 1.0):+9.6f}"
        row += f"   slope {K.slope_kernel(s, 1.0):+9.6f}"
        print(row)

    below, mid, above = K.slope_kernel_mass_pieces(1.0)
    total = K.slope_kernel_mass(1.0)
    print("\nabsolute slope-kernel mass at t = 1, split at s = t and s = 2t")
    print(f"  (0, t)   {below:.10f}   closed form {1 / math.sqrt(math.pi):.10f}")
    print(f"  (t, 2t)  {mid:.10f}")
    print(f"  (2t, oo) {above:.10f}")
    print(f"  total    {total:.10f}   unit constant {K.SLOPE_KERNEL_MASS_UNIT:.10f}")

    print("\nsqrt(t) scaling of the total mass")
    for t in (0.25, 1.0, 4.0, 16.0):
        mass = K.slope_kernel_mass(t)
        print(f"  t = {t:5.2f}   mass {mass:9.6f}   mass / sqrt(t) "
              f"{mass / math.sqrt(t):9.6f}")

    print("\nincrement identity: exp(-mu r) - 1 vs its kernel integral")
    for mu in (0.01, 1.0, 100.0):
        for r in (0.1, 10.0):
            res = K.increment_identity_residual(mu, r)
            print(f"  mu = {mu:6.2f}  r = {r:5.1f}   residual {res:.2e}")

    print("\nslope-kernel tail at t = 1 (expected exponent -1.5)")
    s = np.array([1e3, 1e4, 1e5])
    vals = np.array([abs(K.slope_kernel(x, 1.0)) for x in s])
    slope = np.polyfit(np.log(s), np.log(vals), 1)[0]
    print(f"  fitted log-log slope {slope:.4f}")
