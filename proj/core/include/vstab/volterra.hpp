#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "vstab/fixpoint.hpp"
#include "vstab/grid_function.hpp"
#include "vstab/kernel_expr.hpp"
#include "vstab/mt_func.hpp"

namespace vstab {

/// A discretized problem y(x) = integral_a^x V(x, tau, y(tau)) dtau with a
/// contraction-factor function phi for the kernel's modulus of continuity
/// in y.
///
/// Construction enforces the solvability hypotheses: phi must be a
/// nondecreasing constant/table and delta = K * sup phi must stay below 1,
/// where K = b - a. The Lipschitz hypothesis itself is declared (and at
/// most sample-checked), valid on the disk |y| <= disk_radius; every
/// operator application verifies its input stays inside that disk.
class KernelProblem {
public:
    KernelProblem(KernelExpr kernel, MTFunc phi, double a, double b,
                  std::size_t n, double disk_radius = 10.0);

    const KernelExpr& kernel() const { return kernel_; }
    const MTFunc& phi() const { return phi_; }
    double a() const { return a_; }
    double b() const { return b_; }
    std::size_t n() const { return n_; }

    /// Interval length K = b - a.
    double interval_length() const { return length_; }

    /// Contraction factor delta = K * sup phi, always < 1.
    double delta() const { return delta_; }

    double disk_radius() const { return disk_radius_; }

    /// alpha(t) = K * phi(t), the factor the fixed-point engine sees.
    MTFunc alpha() const;

    double node(std::size_t k) const { return grid_node(a_, b_, n_, k); }
    GridFunction zero_start() const { return GridFunction::zero(a_, b_, n_); }

private:
    KernelExpr kernel_;
    MTFunc phi_;
    double a_;
    double b_;
    std::size_t n_;
    double length_;
    double delta_;
    double disk_radius_;
};

/// Quadrature evaluation strategy for the operator. Results are bit
/// identical across strategies: each node value is defined as the
/// left-to-right sum of its trapezoid terms, and both implementations
/// perform exactly that operation sequence.
enum class ApplyStrategy {
    Auto,    // PrefixSum for x-free kernels, PerNode otherwise
    PerNode, // O(n^2) kernel evaluations, nodes computed independently
    PrefixSum, // O(n) kernel evaluations; requires an x-free kernel
};

/// (T f)(x_i) = sum_{j<=i} w_j V(x_i, tau_j, f(tau_j)) with composite
/// trapezoid weights on the uniform grid; (T f)(x_0) = 0. The weights sum
/// to exactly x_i - a, which is what makes the discrete contraction
/// inequality hold without quadrature-error slack. Throws
/// IterateEscapedDisk when f leaves the problem disk.
GridFunction apply_operator(const KernelProblem& problem,
                            const GridFunction& f,
                            ApplyStrategy strategy = ApplyStrategy::Auto);

struct SolveOptions {
    double stop_tol = 1e-10;
    std::size_t max_iter = 10000;
};

struct SolveResult {
    GridFunction y0; // converged fixed point, or last iterate on exhaustion
    IterationTrace<GridFunction> trace;
};

/// Successive approximation from the zero function (or a caller-supplied
/// start). On the grid-function space every distance is finite, so the
/// infinite-increments case cannot occur; outcomes are Converged or
/// BudgetExhausted.
SolveResult solve(const KernelProblem& problem, SolveOptions options = {});
SolveResult solve(const KernelProblem& problem, const GridFunction& initial,
                  SolveOptions options = {});

/// Measured residual theta-hat = max_i |y(x_i) - (T y)(x_i)|.
double residual_theta(const KernelProblem& problem, const GridFunction& y);

enum class LipschitzStatus { Skipped, Verified };

/// The deliverable: a measured residual theta together with the guaranteed
/// bound theta / (1 - delta) and the discretization metadata that
/// conditions it.
struct StabilityCertificate {
    double theta = 0.0;
    double delta = 0.0;
    double bound = 0.0; // theta / (1 - delta), computed exactly this way
    double grid_a = 0.0;
    double grid_b = 0.0;
    std::size_t grid_n = 0;
    std::string quadrature = "composite-trapezoid";
    double disk_radius = 0.0;
    LipschitzStatus lipschitz = LipschitzStatus::Skipped;
};

StabilityCertificate certify(const KernelProblem& problem, double theta,
                             LipschitzStatus lipschitz = LipschitzStatus::Skipped);

/// Candidate ingestion: delimited text rows `x re(y) [im(y)]`, '#' comments
/// allowed. Every node must match the problem grid within 1e-12; otherwise
/// GridMismatch.
GridFunction read_candidate(std::istream& in, const KernelProblem& problem);
GridFunction read_candidate_file(const std::string& path,
                                 const KernelProblem& problem);

/// Writes a grid function in the candidate format (17 significant digits,
/// so read_candidate reproduces the values exactly).
void write_candidate(std::ostream& out, const GridFunction& f);

} // namespace vstab
