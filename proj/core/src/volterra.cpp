#include "vstab/volterra.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "vstab/errors.hpp"
#include "vstab/numeric.hpp"

namespace vstab {

KernelProblem::KernelProblem(KernelExpr kernel, MTFunc phi, double a, double b,
                             std::size_t n, double disk_radius)
    : kernel_(std::move(kernel)),
      phi_(std::move(phi)),
      a_(a),
      b_(b),
      n_(n),
      length_(b - a),
      delta_(0.0),
      disk_radius_(disk_radius) {
    if (!std::isfinite(a_) || !std::isfinite(b_) || !(a_ < b_))
        throw DomainError("problem interval requires finite a < b");
    if (n_ < 2)
        throw DomainError("problem grid requires n >= 2 nodes");
    if (!std::isfinite(disk_radius_) || disk_radius_ <= 0.0)
        throw DomainError("disk radius must be positive and finite");
    if (phi_.kind() == MTFunc::Kind::ClosedForm)
        throw DomainError("the solver accepts only constant or table phi; "
                          "registry entries are for the check batteries");
    if (!phi_.nondecreasing())
        throw DomainError("the solver requires a nondecreasing phi");
    delta_ = length_ * phi_.sup_cap();
    if (!(delta_ < 1.0))
        throw ContractionViolation(
            "delta = K * sup phi = " + format_g17(delta_) +
            " violates the requirement delta < 1; shrink the interval or "
            "the phi cap");
}

MTFunc KernelProblem::alpha() const { return scale_to_alpha(phi_, length_); }

namespace {

void require_problem_grid(const KernelProblem& problem, const GridFunction& f) {
    if (f.a() != problem.a() || f.b() != problem.b() || f.size() != problem.n())
        throw NonConformable("grid function does not live on the problem grid");
}

void require_inside_disk(const KernelProblem& problem, const GridFunction& f) {
    for (std::size_t k = 0; k < f.size(); ++k) {
        double m = std::abs(f[k]);
        if (m > problem.disk_radius())
            throw IterateEscapedDisk(k, m, problem.disk_radius());
    }
}

// Trapezoid sum for node i, left to right: (h/2) g_0 + h g_1 + ... + (h/2) g_i.
// Both strategies below reproduce exactly this operation sequence per node.

GridFunction apply_per_node(const KernelProblem& problem,
                            const GridFunction& f) {
    const std::size_t n = problem.n();
    const double h = (problem.b() - problem.a()) / static_cast<double>(n - 1);
    std::vector<std::complex<double>> out(n);

    auto compute_rows = [&](std::size_t begin, std::size_t end) {
        KernelEvaluator eval(problem.kernel());
        for (std::size_t i = begin; i < end; ++i) {
            if (i == 0) {
                out[0] = 0.0;
                continue;
            }
            double xi = problem.node(i);
            std::complex<double> sum =
                (h / 2.0) * eval(xi, problem.node(0), f[0]);
            for (std::size_t j = 1; j < i; ++j)
                sum += h * eval(xi, problem.node(j), f[j]);
            sum += (h / 2.0) * eval(xi, problem.node(i), f[i]);
            out[i] = sum;
        }
    };

    // Rows are independent; split them across threads when the quadratic
    // work is large. Values are identical to the sequential computation
    // because each row's sum stays row-local.
    const std::size_t total_evals = n * (n + 1) / 2;
    unsigned workers = std::thread::hardware_concurrency();
    if (total_evals < (1u << 21) || workers < 2) {
        compute_rows(0, n);
    } else {
        workers = std::min<unsigned>(workers, 16);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        // Interleave-free contiguous blocks; later blocks hold longer rows,
        // so bias the split toward equal quadratic work.
        std::vector<std::size_t> cuts(workers + 1, 0);
        for (unsigned w = 1; w < workers; ++w) {
            double frac = static_cast<double>(w) / workers;
            cuts[w] = static_cast<std::size_t>(std::sqrt(frac) * static_cast<double>(n));
        }
        cuts[workers] = n;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    compute_rows(cuts[w], cuts[w + 1]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            });
        }
        for (auto& t : pool)
            t.join();
        if (failure)
            std::rethrow_exception(failure);
    }
    return GridFunction(problem.a(), problem.b(), std::move(out));
}

GridFunction apply_prefix_sum(const KernelProblem& problem,
                              const GridFunction& f) {
    const std::size_t n = problem.n();
    const double h = (problem.b() - problem.a()) / static_cast<double>(n - 1);
    KernelEvaluator eval(problem.kernel());

    // The kernel ignores x, so V(x_i, tau_j, f_j) is one value g_j per j.
    std::vector<std::complex<double>> g(n);
    const double x_unused = problem.a();
    for (std::size_t j = 0; j < n; ++j)
        g[j] = eval(x_unused, problem.node(j), f[j]);

    std::vector<std::complex<double>> out(n);
    out[0] = 0.0;
    // acc after node i equals the left-to-right partial sum through the
    // interior terms of node i+1's rule, so each node value matches the
    // per-node strategy bit for bit.
    std::complex<double> acc = (h / 2.0) * g[0];
    for (std::size_t i = 1; i < n; ++i) {
        out[i] = acc + (h / 2.0) * g[i];
        acc += h * g[i];
    }
    return GridFunction(problem.a(), problem.b(), std::move(out));
}

} // namespace

GridFunction apply_operator(const KernelProblem& problem, const GridFunction& f,
                            ApplyStrategy strategy) {
    require_problem_grid(problem, f);
    require_inside_disk(problem, f);

    const bool x_free = !problem.kernel().depends_on(VarId::X);
    switch (strategy) {
    case ApplyStrategy::Auto:
        return x_free ? apply_prefix_sum(problem, f) : apply_per_node(problem, f);
    case ApplyStrategy::PerNode:
        return apply_per_node(problem, f);
    case ApplyStrategy::PrefixSum:
        if (!x_free)
            throw DomainError("prefix-sum strategy requires a kernel that "
                              "does not reference x");
        return apply_prefix_sum(problem, f);
    }
    throw DomainError("corrupt apply strategy");
}

SolveResult solve(const KernelProblem& problem, const GridFunction& initial,
                  SolveOptions options) {
    require_problem_grid(problem, initial);

    auto distance = [](const GridFunction& f, const GridFunction& g) {
        return sup_distance(f, g);
    };
    auto apply = [&problem](const GridFunction& f) {
        return apply_operator(problem, f);
    };
    IterationTrace<GridFunction> trace =
        iterate(distance, apply, initial,
                IterateOptions{options.stop_tol, options.max_iter});

    // Grid-function distances are always finite, so CaseA cannot happen.
    GridFunction y0 = trace.outcome == IterationOutcome::Converged
                          ? *trace.fixed_point
                          : *trace.last_iterate;
    return SolveResult{std::move(y0), std::move(trace)};
}

SolveResult solve(const KernelProblem& problem, SolveOptions options) {
    return solve(problem, problem.zero_start(), options);
}

double residual_theta(const KernelProblem& problem, const GridFunction& y) {
    return sup_distance(y, apply_operator(problem, y)).finite_value();
}

StabilityCertificate certify(const KernelProblem& problem, double theta,
                             LipschitzStatus lipschitz) {
    if (!std::isfinite(theta) || theta < 0.0)
        throw DomainError("certificate requires a finite theta >= 0");
    StabilityCertificate cert;
    cert.theta = theta;
    cert.delta = problem.delta();
    cert.bound = theta / (1.0 - problem.delta());
    cert.grid_a = problem.a();
    cert.grid_b = problem.b();
    cert.grid_n = problem.n();
    cert.disk_radius = problem.disk_radius();
    cert.lipschitz = lipschitz;
    return cert;
}

GridFunction read_candidate(std::istream& in, const KernelProblem& problem) {
    std::vector<std::complex<double>> values;
    values.reserve(problem.n());
    std::string line;
    std::size_t line_no = 0;
    std::size_t k = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t')
                c = ' ';
        std::istringstream row(line);
        double x = 0.0;
        if (!(row >> x)) {
            if (line.find_first_not_of(" \r\n") != std::string::npos)
                throw GridMismatch("candidate line " + std::to_string(line_no) +
                                   ": expected a numeric row");
            continue; // blank or comment-only line
        }
        double re = 0.0, im = 0.0;
        if (!(row >> re))
            throw GridMismatch("candidate line " + std::to_string(line_no) +
                               ": expected `x re [im]`");
        row >> im; // optional third column
        double trailing;
        if (row >> trailing)
            throw GridMismatch("candidate line " + std::to_string(line_no) +
                               ": too many columns");

        if (k >= problem.n())
            throw GridMismatch("candidate has more rows than the problem "
                               "grid (n = " + std::to_string(problem.n()) + ")");
        double expected = problem.node(k);
        if (!(std::fabs(x - expected) <= 1e-12))
            throw GridMismatch("candidate line " + std::to_string(line_no) +
                               ": node " + format_g17(x) +
                               " does not match grid node " +
                               format_g17(expected));
        values.emplace_back(re, im);
        ++k;
    }
    if (k != problem.n())
        throw GridMismatch("candidate has " + std::to_string(k) +
                           " rows; the problem grid has n = " +
                           std::to_string(problem.n()));
    return GridFunction(problem.a(), problem.b(), std::move(values));
}

GridFunction read_candidate_file(const std::string& path,
                                 const KernelProblem& problem) {
    std::ifstream in(path);
    if (!in)
        throw GridMismatch("cannot open candidate file '" + path + "'");
    return read_candidate(in, problem);
}

void write_candidate(std::ostream& out, const GridFunction& f) {
    out << "# columns: x re(y) im(y)\n";
    for (std::size_t k = 0; k < f.size(); ++k)
        out << format_g17(f.node(k)) << ' ' << format_g17(f[k].real()) << ' '
            << format_g17(f[k].imag()) << '\n';
}

} // namespace vstab
