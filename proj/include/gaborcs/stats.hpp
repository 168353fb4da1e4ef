#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gaborcs {

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

/// 95% Wilson score interval for a binomial proportion.  Used instead of the
/// normal approximation because several experiments sit at 0 or very few
/// events, where the Wald interval collapses to a useless [p, p].
inline WilsonInterval wilson_interval(long long events, long long trials, double z = 1.959963984540054) {
    if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be positive");
    if (events < 0 || events > trials)
        throw std::invalid_argument("wilson_interval: events outside [0, trials]");
    const double nn = static_cast<double>(trials);
    const double p = static_cast<double>(events) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = p + z2 / (2.0 * nn);
    const double spread = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    // Clamp away roundoff: at 0 or all events one endpoint is exactly 0 or 1.
    return WilsonInterval{std::max(0.0, (centre - spread) / denom),
                          std::min(1.0, (centre + spread) / denom)};
}

}  // namespace gaborcs
