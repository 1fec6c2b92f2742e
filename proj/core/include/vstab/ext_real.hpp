#pragma once

#include <cmath>
#include <limits>

#include "vstab/errors.hpp"

namespace vstab {

/// Nonnegative extended real in [0, inf], the codomain of generalized
/// metrics. Infinity is absorbing under addition and maximal in the order.
/// NaN is rejected at construction, so comparisons are total.
class ExtReal {
public:
    ExtReal() = default;

    explicit ExtReal(double v) : v_(v) {
        if (std::isnan(v) || v < 0.0)
            throw DomainError("ExtReal requires a nonnegative value or infinity");
    }

    static ExtReal infinity() {
        ExtReal r;
        r.v_ = std::numeric_limits<double>::infinity();
        return r;
    }

    bool is_finite() const { return std::isfinite(v_); }
    bool is_infinite() const { return !is_finite(); }

    /// Raw value; +inf when infinite.
    double value() const { return v_; }

    /// Value with the finiteness contract enforced.
    double finite_value() const {
        if (!is_finite())
            throw DomainError("ExtReal value is infinite");
        return v_;
    }

    friend ExtReal operator+(ExtReal lhs, ExtReal rhs) {
        ExtReal r;
        r.v_ = lhs.v_ + rhs.v_; // inf absorbs; both operands >= 0, no NaN
        return r;
    }

    friend bool operator==(ExtReal lhs, ExtReal rhs) { return lhs.v_ == rhs.v_; }
    friend bool operator!=(ExtReal lhs, ExtReal rhs) { return lhs.v_ != rhs.v_; }
    friend bool operator<(ExtReal lhs, ExtReal rhs) { return lhs.v_ < rhs.v_; }
    friend bool operator<=(ExtReal lhs, ExtReal rhs) { return lhs.v_ <= rhs.v_; }
    friend bool operator>(ExtReal lhs, ExtReal rhs) { return lhs.v_ > rhs.v_; }
    friend bool operator>=(ExtReal lhs, ExtReal rhs) { return lhs.v_ >= rhs.v_; }

private:
    double v_ = 0.0;
};

inline ExtReal ext_add(ExtReal lhs, ExtReal rhs) { return lhs + rhs; }

} // namespace vstab
