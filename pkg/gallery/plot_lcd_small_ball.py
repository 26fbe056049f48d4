"""
Least common denominator and small-ball probability
===================================================

Compare the LCD of an equal-weight vector with a generic one, then fit the
smallest constant that makes the LCD small-ball bound hold on exact
Rademacher concentrations.
"""

import numpy as np

from wigdist.lcd import LcdParams, fit_small_ball_constant, lcd, levy_concentration

rng = np.random.default_rng(0)
equal = np.ones(10) / np.sqrt(10)
generic = rng.standard_normal(10)
generic /= np.linalg.norm(generic)

# with a strict alpha, equal weights are nearly integral at theta = sqrt(10)
strict = LcdParams(alpha=0.3, gamma=0.5)
for name, x in (("equal", equal), ("generic", generic)):
    r = lcd(x, strict)
    print(f"{name:>8}: LCD {r.value:.4f}" if r.found else f"{name:>8}: no LCD below {r.search_bound:.1f}")

# a loose alpha gives a finite LCD for both; fit C0 over eps >= 1 / LCD
loose = LcdParams(alpha=1.5, gamma=0.5)
for name, x in (("equal", equal), ("generic", generic)):
    D = lcd(x, loose).value
    eps = np.array([1.0, 2.0, 4.0]) / D
    est = [levy_concentration(x, e).estimate for e in eps]
    print(f"{name:>8}: LCD {D:.3f}, L(S, eps) {np.round(est, 4).tolist()}, "
          f"fitted C0 {fit_small_ball_constant(est, eps, loose):.3f}")

# four weights 1/2 put 3/8 of the mass on zero
print("L(S, 0.1) for x = (1,1,1,1)/2:", levy_concentration(np.ones(4) / 2, 0.1).estimate)
