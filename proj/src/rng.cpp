#include "tvfr/rng.hpp"

#include <cmath>

#include "tvfr/errors.hpp"
#include "tvfr/normal.hpp"

namespace tvfr {

double standard_normal(CounterRng& rng) { return normal_quantile(rng.uniform()); }

double gamma_draw(CounterRng& rng, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw InvalidInput("gamma: shape and rate must be positive");
    if (shape < 1.0) {
        const double u = rng.uniform();
        return gamma_draw(rng, shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = standard_normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

}  // namespace tvfr
