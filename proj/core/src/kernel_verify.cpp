#include "vstab/kernel_verify.hpp"

#include <cmath>
#include <random>

#include "vstab/errors.hpp"
#include "vstab/numeric.hpp"

namespace vstab {

LipschitzResult verify_lipschitz_condition(const KernelExpr& kernel,
                                           const MTFunc& phi, double a,
                                           double b,
                                           const LipschitzSampleSpec& spec) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
        throw DomainError("verification domain requires finite a < b");
    if (spec.count < 1)
        throw DomainError("verification requires at least one sample");
    if (!std::isfinite(spec.radius) || spec.radius <= 0.0)
        throw DomainError("verification disk radius must be positive");

    std::mt19937_64 rng(spec.seed);
    KernelEvaluator eval(kernel);

    const std::size_t strata =
        std::max<std::size_t>(2, static_cast<std::size_t>(
                                     std::ceil(std::sqrt(static_cast<double>(spec.count)))));
    auto stratum_point = [&](std::size_t index) {
        return a + (b - a) * static_cast<double>(index) /
                       static_cast<double>(strata - 1);
    };

    for (std::size_t s = 0; s < spec.count; ++s) {
        double x = stratum_point(s % strata);
        double tau = stratum_point((s / strata) % strata);
        std::complex<double> y = sample_disk(rng, spec.radius);
        std::complex<double> z = sample_disk(rng, spec.radius);

        double lhs = std::abs(eval(x, tau, y) - eval(x, tau, z));
        double gap = std::abs(y - z);
        double rhs = phi.eval(gap) * gap;
        if (!leq_with_ulp_slack(lhs, rhs, 4))
            return LipschitzCounterSample{x, tau, y, z, lhs, rhs};
    }
    return LipschitzVerified{spec.count};
}

} // namespace vstab
