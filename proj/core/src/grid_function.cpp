#include "vstab/grid_function.hpp"

#include <cmath>
#include <string>

#include "vstab/errors.hpp"

namespace vstab {

namespace {

void require_conformable(const GridFunction& f, const GridFunction& g) {
    if (!f.conformable_with(g))
        throw NonConformable("grid functions are not conformable: (a, b, n) differ");
}

} // namespace

GridFunction::GridFunction(double a, double b,
                           std::vector<std::complex<double>> values)
    : a_(a), b_(b), values_(std::move(values)) {
    if (!std::isfinite(a_) || !std::isfinite(b_))
        throw DomainError("grid interval endpoints must be finite");
    if (!(a_ < b_))
        throw DomainError("grid interval requires a < b");
    if (values_.size() < 2)
        throw DomainError("grid requires at least n = 2 nodes");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        const auto& v = values_[k];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw DomainError("grid value at node " + std::to_string(k) +
                              " is not finite");
    }
}

GridFunction GridFunction::zero(double a, double b, std::size_t n) {
    return GridFunction(a, b, std::vector<std::complex<double>>(n));
}

GridFunction GridFunction::constant(double a, double b, std::size_t n,
                                    std::complex<double> value) {
    return GridFunction(a, b, std::vector<std::complex<double>>(n, value));
}

double grid_node(double a, double b, std::size_t n, std::size_t k) {
    return a + static_cast<double>(k) * (b - a) / static_cast<double>(n - 1);
}

double GridFunction::node(std::size_t k) const {
    return grid_node(a_, b_, values_.size(), k);
}

ExtReal sup_distance(const GridFunction& f, const GridFunction& g) {
    require_conformable(f, g);
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        double d = std::abs(f[k] - g[k]);
        if (d > m)
            m = d;
    }
    return ExtReal(m);
}

GridFunction grid_axpy(const GridFunction& f, std::complex<double> c,
                       const GridFunction& g) {
    require_conformable(f, g);
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw DomainError("axpy coefficient must be finite");
    std::vector<std::complex<double>> out(f.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        out[k] = f[k] + c * g[k];
    return GridFunction(f.a(), f.b(), std::move(out));
}

} // namespace vstab
