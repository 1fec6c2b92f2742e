#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>

namespace vstab {

/// Spacing between |v| and the next representable magnitude.
inline double ulp_of(double v) {
    double m = std::fabs(v);
    if (!std::isfinite(m))
        return std::numeric_limits<double>::infinity();
    double next = std::nextafter(m, std::numeric_limits<double>::infinity());
    return next - m;
}

/// lhs <= rhs up to `ulps` units in the last place of the larger magnitude.
inline bool leq_with_ulp_slack(double lhs, double rhs, int ulps) {
    if (lhs <= rhs)
        return true;
    double scale = std::max(std::fabs(lhs), std::fabs(rhs));
    return lhs - rhs <= static_cast<double>(ulps) * ulp_of(scale);
}

/// Shortest-exact decimal form used everywhere machine-readable output must
/// be byte-reproducible and value-preserving on re-parse.
std::string format_g17(double v);

/// Uniform double in [0, 1) from the top 53 bits of the generator output.
/// Used instead of std::uniform_real_distribution so seeded sampling is
/// reproducible across standard libraries.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform point in the closed complex disk of the given radius.
inline std::complex<double> sample_disk(std::mt19937_64& rng, double radius) {
    double r = radius * std::sqrt(uniform_unit(rng));
    double angle = 8.0 * std::atan(1.0) * uniform_unit(rng);
    return {r * std::cos(angle), r * std::sin(angle)};
}

} // namespace vstab
