#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "vstab/errors.hpp"
#include "vstab/ext_real.hpp"

namespace vstab {

enum class IterationOutcome { CaseA, Converged, BudgetExhausted };

/// Record of a successive-approximation run. increments[n] is the distance
/// p(T^n u, T^(n+1) u); ell marks where the increments become (and stay)
/// finite. On Converged, fixed_point is the iterate v = T^n u whose
/// self-consistency residual p(v, T v) = increments[n] met the stop
/// tolerance. last_iterate is the element the engine stopped at regardless
/// of outcome (useful when the budget ran out).
template <typename Element>
struct IterationTrace {
    std::vector<ExtReal> increments;
    std::optional<std::size_t> ell;
    IterationOutcome outcome = IterationOutcome::BudgetExhausted;
    std::optional<Element> fixed_point;
    std::size_t iterations_used = 0;
    std::optional<Element> last_iterate;
};

struct IterateOptions {
    double stop_tol = 1e-10;
    std::size_t max_iter = 10000;
};

namespace detail {

/// First index from which every recorded increment is finite, if any.
/// For contraction maps this coincides with the first finite index.
inline std::optional<std::size_t>
finite_suffix_start(const std::vector<ExtReal>& increments) {
    std::optional<std::size_t> start;
    for (std::size_t n = 0; n < increments.size(); ++n) {
        if (increments[n].is_finite()) {
            if (!start)
                start = n;
        } else {
            start.reset();
        }
    }
    return start;
}

} // namespace detail

/// Plain successive approximation on a generalized metric space.
///
/// `distance` must be a generalized metric (ExtReal-valued), `apply` a total
/// self-map; both must be pure. The engine classifies the orbit from
/// `start`: all increments infinite within the budget reports CaseA (a
/// budget-limited reading of "infinite for all n"); an increment at or
/// below stop_tol reports Converged with that iterate as the fixed point;
/// otherwise BudgetExhausted. Failures inside `apply` or `distance` are
/// rethrown as IterationAborted with the failing index.
template <typename Element, typename Distance, typename Map>
IterationTrace<Element> iterate(Distance&& distance, Map&& apply,
                                Element start, IterateOptions options = {}) {
    if (!(options.stop_tol > 0.0) || !std::isfinite(options.stop_tol))
        throw DomainError("stop tolerance must be positive and finite");
    if (options.max_iter < 1)
        throw DomainError("iteration budget must be at least 1");

    IterationTrace<Element> trace;
    trace.increments.reserve(std::min<std::size_t>(options.max_iter, 1024));

    Element current = std::move(start);
    for (std::size_t n = 0; n < options.max_iter; ++n) {
        Element next = [&]() -> Element {
            try {
                return apply(current);
            } catch (const std::exception& e) {
                throw IterationAborted(n, e.what());
            }
        }();
        ExtReal increment = [&]() -> ExtReal {
            try {
                return distance(current, next);
            } catch (const std::exception& e) {
                throw IterationAborted(n, e.what());
            }
        }();
        trace.increments.push_back(increment);

        if (increment.is_finite() && increment.value() <= options.stop_tol) {
            trace.outcome = IterationOutcome::Converged;
            trace.iterations_used = n;
            trace.fixed_point = current;
            trace.last_iterate = std::move(current);
            trace.ell = detail::finite_suffix_start(trace.increments);
            return trace;
        }
        current = std::move(next);
    }

    trace.ell = detail::finite_suffix_start(trace.increments);
    trace.outcome = trace.ell.has_value() ? IterationOutcome::BudgetExhausted
                                          : IterationOutcome::CaseA;
    trace.iterations_used = options.max_iter;
    trace.last_iterate = std::move(current);
    return trace;
}

/// Explicit a-priori bound dist / (1 - delta) with the infinite case mapped
/// through. delta is the global cap on the contraction factor.
inline ExtReal a_priori_bound(ExtReal dist_to_image, double delta) {
    if (!std::isfinite(delta) || delta < 0.0 || delta >= 1.0)
        throw DomainError("a-priori bound requires delta in [0, 1)");
    if (dist_to_image.is_infinite())
        return ExtReal::infinity();
    return ExtReal(dist_to_image.value() / (1.0 - delta));
}

struct CaseA {};
struct CaseB {
    std::size_t ell = 0;
};
using Classification = std::variant<CaseA, CaseB>;

/// CaseA iff every increment is infinite; otherwise CaseB with the first
/// finite index. Exactly one case holds for any nonempty trace.
inline Classification classify_alternative(std::span<const ExtReal> increments) {
    if (increments.empty())
        throw DomainError("classification requires a nonempty increment trace");
    for (std::size_t n = 0; n < increments.size(); ++n)
        if (increments[n].is_finite())
            return CaseB{n};
    return CaseA{};
}

} // namespace vstab
