#pragma once

namespace tvfr {

// Standard normal quantile function Φ^{-1}(p) for p in (0,1), Wichura's AS 241 (PPND16);
// relative accuracy about 1e-16. Returns ±infinity at p = 0 or 1; throws InvalidInput outside [0,1].
double normal_quantile(double p);

// Standard normal distribution function Φ(x).
double normal_cdf(double x);

}  // namespace tvfr
