#pragma once

#include <complex>
#include <cstdint>
#include <variant>

#include "vstab/kernel_expr.hpp"
#include "vstab/mt_func.hpp"

namespace vstab {

/// Deterministic sampling plan for the Lipschitz-modulus check: a
/// stratified (x, tau) grid over [a,b]^2 paired with seeded random y, z in
/// the complex disk of the given radius.
struct LipschitzSampleSpec {
    std::size_t count = 2000;
    double radius = 10.0;
    std::uint64_t seed = 42;
};

struct LipschitzVerified {
    std::size_t samples = 0;
};

struct LipschitzCounterSample {
    double x = 0.0;
    double tau = 0.0;
    std::complex<double> y{};
    std::complex<double> z{};
    double lhs = 0.0; // |V(x,tau,y) - V(x,tau,z)|
    double rhs = 0.0; // phi(|y-z|) * |y-z|
};

using LipschitzResult = std::variant<LipschitzVerified, LipschitzCounterSample>;

/// Sample |V(x,tau,y) - V(x,tau,z)| <= phi(|y-z|) |y-z| (4-ulp slack) over
/// the plan. Returns the first violation found; verification is sound for
/// rejection only and is conditional on the sampled disk.
LipschitzResult verify_lipschitz_condition(const KernelExpr& kernel,
                                           const MTFunc& phi, double a,
                                           double b,
                                           const LipschitzSampleSpec& spec);

} // namespace vstab
