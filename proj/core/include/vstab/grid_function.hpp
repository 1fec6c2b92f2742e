#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "vstab/ext_real.hpp"

namespace vstab {

/// Complex-valued function tabulated on the uniform grid
/// x_k = a + k (b - a) / (n - 1), k = 0 .. n-1.
///
/// The discrete stand-in for continuous functions on [a, b]. Values are
/// validated finite at construction (NaN or overflow anywhere would poison
/// the max-based distance silently). Instances are immutable.
///
/// Two grid functions are conformable only when (a, b, n) match exactly;
/// there is no resampling.
class GridFunction {
public:
    GridFunction(double a, double b, std::vector<std::complex<double>> values);

    static GridFunction zero(double a, double b, std::size_t n);
    static GridFunction constant(double a, double b, std::size_t n,
                                 std::complex<double> value);

    double a() const { return a_; }
    double b() const { return b_; }
    std::size_t size() const { return values_.size(); }

    /// k-th grid node, computed the same way everywhere in the library.
    double node(std::size_t k) const;

    std::span<const std::complex<double>> values() const { return values_; }
    const std::complex<double>& operator[](std::size_t k) const {
        return values_[k];
    }

    bool conformable_with(const GridFunction& other) const {
        return a_ == other.a_ && b_ == other.b_ &&
               values_.size() == other.values_.size();
    }

private:
    double a_;
    double b_;
    std::vector<std::complex<double>> values_;
};

/// Uniform node formula shared by GridFunction, quadrature and file ingestion.
double grid_node(double a, double b, std::size_t n, std::size_t k);

/// max_k |f(x_k) - g(x_k)| as an extended real. On a finite grid this equals
/// inf { M >= 0 : |f - g| <= M pointwise }; infinity is unreachable for
/// finite tabulated values but remains in the codomain.
ExtReal sup_distance(const GridFunction& f, const GridFunction& g);

/// Nodewise f + c * g on a shared grid.
GridFunction grid_axpy(const GridFunction& f, std::complex<double> c,
                       const GridFunction& g);

} // namespace vstab
