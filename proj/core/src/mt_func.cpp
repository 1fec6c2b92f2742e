#include "vstab/mt_func.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vstab/errors.hpp"
#include "vstab/numeric.hpp"

namespace vstab {

namespace {

// Discrimination margin for "the sampled values reach 1".
constexpr double kReachesOneTol = 1e-12;

void require_unit_interval(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0 || v >= 1.0)
        throw DomainError(std::string(what) + " must lie in [0, 1), got " +
                          format_g17(v));
}

struct RegistryEntry {
    const char* name;
    const char* description;
    double claimed_sup_cap;
    bool nondecreasing;
    double (*fn)(double);
};

// Closed forms for the check batteries. "one-minus-s" is deliberately not
// an MT-function (its limsup at 0+ is 1) and claims a cap it cannot keep;
// sampled checks must refute it. "half-exp-decay" is a genuine MT-function
// (nonincreasing) that no finite table can express exactly.
constexpr RegistryEntry kRegistry[] = {
    {"one-minus-s",
     "f(0) = 0, f(s) = 1 - s on (0,1), f(s) = 0 for s >= 1; not an "
     "MT-function, claimed cap 0.9 is false",
     0.9, false, [](double s) {
         if (s == 0.0 || s >= 1.0)
             return 0.0;
         return 1.0 - s;
     }},
    {"half-exp-decay", "f(s) = 0.5 * exp(-s); nonincreasing, cap 0.5", 0.5,
     false, [](double s) { return 0.5 * std::exp(-s); }},
};

} // namespace

MTFunc MTFunc::constant(double level) {
    require_unit_interval(level, "constant phi level");
    MTFunc phi;
    phi.kind_ = Kind::Constant;
    phi.constant_ = level;
    phi.sup_cap_ = level;
    phi.nondecreasing_ = true;
    return phi;
}

MTFunc MTFunc::table(std::vector<double> breakpoints,
                     std::vector<double> values,
                     std::optional<double> sup_cap) {
    if (breakpoints.empty() || breakpoints.size() != values.size())
        throw DomainError("phi table requires equally sized, nonempty "
                          "breakpoint and value lists");
    if (breakpoints.front() != 0.0)
        throw DomainError("phi table must start at breakpoint 0");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        if (!std::isfinite(breakpoints[i]))
            throw DomainError("phi table breakpoints must be finite");
        if (i > 0 && !(breakpoints[i - 1] < breakpoints[i]))
            throw DomainError("phi table breakpoints must be strictly increasing");
        require_unit_interval(values[i], "phi table value");
    }
    double max_value = *std::max_element(values.begin(), values.end());
    double cap = sup_cap.value_or(max_value);
    require_unit_interval(cap, "phi sup cap");
    if (cap < max_value)
        throw DomainError("phi sup cap " + format_g17(cap) +
                          " is below the largest table value " +
                          format_g17(max_value));

    MTFunc phi;
    phi.kind_ = Kind::Table;
    phi.breakpoints_ = std::move(breakpoints);
    phi.values_ = std::move(values);
    phi.sup_cap_ = cap;
    phi.nondecreasing_ = std::is_sorted(phi.values_.begin(), phi.values_.end());
    return phi;
}

MTFunc MTFunc::from_registry(const std::string& name) {
    for (const auto& entry : kRegistry) {
        if (name == entry.name) {
            MTFunc phi;
            phi.kind_ = Kind::ClosedForm;
            phi.closed_form_ = entry.fn;
            phi.registry_name_ = entry.name;
            phi.sup_cap_ = entry.claimed_sup_cap;
            phi.nondecreasing_ = entry.nondecreasing;
            return phi;
        }
    }
    throw DomainError("unknown phi registry entry '" + name + "'");
}

std::vector<std::string> MTFunc::registry_names() {
    std::vector<std::string> names;
    for (const auto& entry : kRegistry)
        names.emplace_back(entry.name);
    return names;
}

double MTFunc::eval(double t) const {
    if (!std::isfinite(t) || t < 0.0)
        throw DomainError("phi is defined on [0, inf); got t = " +
                          format_g17(t));
    switch (kind_) {
    case Kind::Constant:
        return constant_;
    case Kind::Table: {
        // Largest breakpoint <= t; right-continuous steps.
        auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
    }
    case Kind::ClosedForm: {
        double v = closed_form_(t);
        if (!std::isfinite(v) || v < 0.0 || v >= 1.0)
            throw DomainError("registry function '" + registry_name_ +
                              "' left the codomain [0, 1) at t = " +
                              format_g17(t));
        return v;
    }
    }
    throw DomainError("corrupt MTFunc kind");
}

std::string MTFunc::describe() const {
    std::ostringstream os;
    switch (kind_) {
    case Kind::Constant:
        os << "constant " << format_g17(constant_);
        break;
    case Kind::Table:
        os << "step table with " << values_.size() << " pieces";
        break;
    case Kind::ClosedForm:
        os << "registry '" << registry_name_ << "'";
        break;
    }
    os << " (sup cap " << format_g17(sup_cap_) << ", "
       << (nondecreasing_ ? "nondecreasing" : "not nondecreasing") << ")";
    return os.str();
}

MTFunc scale_to_alpha(const MTFunc& phi, double K) {
    if (!std::isfinite(K) || K <= 0.0)
        throw DomainError("scaling factor K must be positive and finite");
    double scaled_cap = K * phi.sup_cap();
    if (scaled_cap >= 1.0)
        throw ContractionViolation(
            "K * sup phi = " + format_g17(scaled_cap) +
            " >= 1: the contraction hypothesis delta < 1 fails");

    switch (phi.kind()) {
    case MTFunc::Kind::Constant:
        return MTFunc::constant(K * phi.eval(0.0));
    case MTFunc::Kind::Table:
        break;
    case MTFunc::Kind::ClosedForm: {
        // Wrap so the scaled eval is exactly the product K * phi.eval(t).
        MTFunc alpha = phi;
        alpha.closed_form_ = [base = phi, K](double t) {
            return K * base.eval(t);
        };
        alpha.registry_name_ = phi.registry_name() + " * " + format_g17(K);
        alpha.sup_cap_ = scaled_cap;
        return alpha;
    }
    }

    MTFunc alpha = phi;
    for (double& v : alpha.values_)
        v = K * v;
    alpha.sup_cap_ = scaled_cap;
    return alpha;
}

namespace {

SequenceCheck run_sequence_check(const MTFunc& phi, std::span<const double> xs) {
    SequenceCheck result;
    result.sup_observed = 0.0;
    result.witness_x = xs.front();
    bool first = true;
    for (double x : xs) {
        double v = phi.eval(x);
        if (first || v > result.sup_observed) {
            result.sup_observed = v;
            result.witness_x = x;
            first = false;
        }
    }
    result.passes = result.sup_observed <= phi.sup_cap();
    return result;
}

void validate_sequence_domain(std::span<const double> xs) {
    if (xs.empty())
        throw DomainError("sequence check requires a nonempty sequence");
    for (double x : xs)
        if (!std::isfinite(x) || x < 0.0)
            throw DomainError("sequence entries must be finite and nonnegative");
}

} // namespace

SequenceCheck check_nonincreasing_sequence(const MTFunc& phi,
                                           std::span<const double> xs) {
    validate_sequence_domain(xs);
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] > xs[i - 1])
            throw NotNonincreasing("sequence increases at index " +
                                   std::to_string(i));
    return run_sequence_check(phi, xs);
}

SequenceCheck check_strictly_decreasing_sequence(const MTFunc& phi,
                                                 std::span<const double> xs) {
    validate_sequence_domain(xs);
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] < xs[i - 1]))
            throw NotNonincreasing("sequence is not strictly decreasing at "
                                   "index " +
                                   std::to_string(i));
    return run_sequence_check(phi, xs);
}

LocalCapResult check_local_cap(const MTFunc& phi, double t,
                               std::span<const double> eps_grid,
                               IntervalEnds ends) {
    if (!std::isfinite(t) || t < 0.0)
        throw DomainError("local cap base point t must be finite and "
                          "nonnegative");
    if (eps_grid.empty())
        throw DomainError("local cap check requires a nonempty eps grid");
    for (double eps : eps_grid)
        if (!std::isfinite(eps) || eps <= 0.0)
            throw DomainError("local cap widths must be positive and finite");

    const bool include_left = ends == IntervalEnds::ClosedClosed ||
                              ends == IntervalEnds::ClosedOpen;
    const bool include_right = ends == IntervalEnds::ClosedClosed ||
                               ends == IntervalEnds::OpenClosed;

    CapCounterSample worst;
    bool have_worst = false;
    for (double eps : eps_grid) {
        double window_max = -1.0;
        double window_argmax = t;
        auto probe = [&](double s) {
            double v = phi.eval(s);
            if (v > window_max) {
                window_max = v;
                window_argmax = s;
            }
        };

        if (include_left)
            probe(t);
        for (int j = 1; j < 64; ++j)
            probe(t + eps * static_cast<double>(j) / 64.0);
        for (int k = 1; k <= 12; ++k) {
            double off = std::pow(10.0, -k);
            if (off < eps)
                probe(t + off);
        }
        if (include_right)
            probe(t + eps);

        if (window_max < 1.0 - kReachesOneTol)
            return LocalCap{window_max, eps};
        if (!have_worst || window_max > worst.value) {
            worst = CapCounterSample{window_argmax, window_max};
            have_worst = true;
        }
    }
    return worst;
}

} // namespace vstab
