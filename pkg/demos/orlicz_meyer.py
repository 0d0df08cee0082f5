"""L log L norms and the Meyer-type first-order comparisons: square root
of the generator against the gradient, in both directions."""

import math

import numpy as np

from oulab.model import GaussianModel, HermiteSeries
from oulab.orlicz import (
    luxemburg_norm,
    meyer_forward_check,
    meyer_reverse_check,
    poincare_check,
)

if __name__ == "__main__":
    model = GaussianModel.standard(1)
    h1 = HermiteSeries(model, 1, {(1,): 1.0})

    print("Luxemburg norm of the first Hermite mode and of constants")
    print(f"  ||h1||      = {luxemburg_norm(h1).value:.10f}")
    for c in (0.5, 1.0, 2.0):
        n = luxemburg_norm(HermiteSeries(model, 0, {(0,): c})).value
        print(f"  ||{c:3.1f}||     = {n:.10f}   (c / (e - 1) = "
              f"{c / (math.e - 1):.10f})")

    print("\nMeyer ratios for a small family, alpha in {0, 1}")
    rng = np.random.default_rng(21)
    print("  fn        alpha   forward   reverse")
    for k in range(4):
        f = HermiteSeries(model, 4, {(1,): float(rng.normal()),
                                     (2,): float(rng.normal()),
                                     (4,): float(rng.normal())})
        for alpha in (0.0, 1.0):
            fwd = meyer_forward_check(f, alpha, method="grid")
            rev = meyer_reverse_check(f, alpha, method="grid")
            print(f"  f{k}        {alpha:3.0f}   {fwd:9.4f} {rev:9.4f}")

    print(f"\nfirst-mode pins: forward at alpha = 0 is sqrt(2/pi)(e-1) = "
          f"{math.sqrt(2 / math.pi) * (math.e - 1):.6f}, measured "
          f"{meyer_forward_check(h1, 0.0):.6f}")
    print(f"L log L Poincare ratio of h1: {poincare_check(h1):.6f}")
