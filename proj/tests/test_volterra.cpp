#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "vstab/numeric.hpp"
#include "vstab/volterra.hpp"

#include "support/test_support.hpp"

using namespace vstab;
using cplx = std::complex<double>;

namespace {

KernelProblem make(const char* kernel, double phi_level, double a, double b,
                   std::size_t n, double radius = 10.0) {
    return KernelProblem(parse_kernel(kernel), MTFunc::constant(phi_level), a,
                         b, n, radius);
}

} // namespace

TEST_CASE("problem construction enforces the hypotheses") {
    CHECK_THROWS_AS(make("y", 0.5, 0.0, 2.0, 11), ContractionViolation); // K*L = 1
    CHECK_THROWS_AS(make("y", 0.6, 0.0, 2.0, 11), ContractionViolation);
    CHECK_THROWS_AS(make("y", 0.2, 1.0, 0.0, 11), DomainError);
    CHECK_THROWS_AS(make("y", 0.2, 0.0, 1.0, 1), DomainError);
    CHECK_THROWS_AS(make("y", 0.2, 0.0, 1.0, 11, -1.0), DomainError);
    CHECK_THROWS_AS(KernelProblem(parse_kernel("y"),
                                  MTFunc::from_registry("half-exp-decay"), 0.0,
                                  1.0, 11),
                    DomainError); // registry phis are for check batteries only
    CHECK_THROWS_AS(KernelProblem(parse_kernel("y"),
                                  MTFunc::table({0.0, 1.0}, {0.4, 0.3}), 0.0,
                                  1.0, 11),
                    DomainError); // solver path needs nondecreasing phi

    KernelProblem ok = make("0.5*y", 0.5, 0.0, 1.0, 11);
    CHECK(ok.delta() == 0.5);
    CHECK(ok.interval_length() == 1.0);
    CHECK(ok.alpha().eval(0.0) == 0.5);
}

TEST_CASE("zero kernel maps everything to the zero function") {
    KernelProblem prob = make("0", 0.1, 0.0, 1.0, 51);
    std::mt19937_64 rng(501);
    GridFunction f = testsup::random_grid_function(rng, 0.0, 1.0, 51, 5.0);
    GridFunction Tf = apply_operator(prob, f);
    for (std::size_t k = 0; k < Tf.size(); ++k)
        CHECK(Tf[k] == cplx(0.0, 0.0));
}

TEST_CASE("apply matches the closed form for cos(tau)") {
    KernelProblem prob = make("cos(tau)", 0.1, 0.0, 1.0, 1001);
    GridFunction Tf = apply_operator(prob, prob.zero_start());
    CHECK(Tf[0] == cplx(0.0, 0.0));
    double worst = 0.0;
    for (std::size_t k = 0; k < Tf.size(); ++k)
        worst = std::max(worst, std::abs(Tf[k] - cplx(std::sin(prob.node(k)), 0.0)));
    // h^2 (b-a)/12 * max|cos''| is about 8.3e-8 here.
    CHECK(worst <= 1e-6);
}

TEST_CASE("apply agrees with an independent cumulative trapezoid oracle") {
    KernelProblem prob = make("cos(tau) + 0.25*sin(y)", 0.25, 0.0, 1.0, 201);
    std::mt19937_64 rng(502);
    GridFunction f = testsup::random_grid_function(rng, 0.0, 1.0, 201, 2.0, true);

    std::vector<cplx> g(f.size());
    for (std::size_t j = 0; j < f.size(); ++j)
        g[j] = std::cos(prob.node(j)) + 0.25 * std::sin(f[j]);
    auto oracle = testsup::cumulative_trapezoid_oracle(g, 0.0, 1.0);

    GridFunction Tf = apply_operator(prob, f);
    for (std::size_t k = 0; k < Tf.size(); ++k)
        CHECK(std::abs(Tf[k] - oracle[k]) <= 1e-12);
}

TEST_CASE("trapezoid weights are exact for constant integrands") {
    // Dyadic spacing: the running sums hit the nodes bit-exactly.
    KernelProblem dyadic = make("y", 0.4, 0.0, 2.0, 3);
    GridFunction ones = GridFunction::constant(0.0, 2.0, 3, {1.0, 0.0});
    GridFunction T1 = apply_operator(dyadic, ones);
    CHECK(T1[0] == cplx(0.0, 0.0));
    CHECK(T1[1] == cplx(1.0, 0.0));
    CHECK(T1[2] == cplx(2.0, 0.0));

    // General spacing: the quadrature is exact, so only accumulation
    // rounding separates the sums from the nodes.
    KernelProblem prob = make("y", 0.9, 0.0, 1.0, 101);
    GridFunction ones101 = GridFunction::constant(0.0, 1.0, 101, {1.0, 0.0});
    GridFunction Tf = apply_operator(prob, ones101);
    const double h = 1.0 / 100.0;
    for (std::size_t k = 0; k < Tf.size(); ++k) {
        CHECK(std::abs(Tf[k] - cplx(prob.node(k), 0.0)) <= 1e-13);
        if (k > 0) {
            // Left-to-right reference replicating the summation contract.
            cplx ref = (h / 2.0) * cplx(1.0, 0.0);
            for (std::size_t j = 1; j < k; ++j)
                ref += h * cplx(1.0, 0.0);
            ref += (h / 2.0) * cplx(1.0, 0.0);
            CHECK(Tf[k] == ref);
        }
    }
}

TEST_CASE("strategies agree bit for bit") {
    KernelProblem prob = make("cos(tau) + 0.25*sin(y)", 0.25, 0.0, 1.0, 401);
    std::mt19937_64 rng(503);
    for (int round = 0; round < 5; ++round) {
        GridFunction f =
            testsup::random_grid_function(rng, 0.0, 1.0, 401, 3.0, true);
        GridFunction per_node = apply_operator(prob, f, ApplyStrategy::PerNode);
        GridFunction prefix = apply_operator(prob, f, ApplyStrategy::PrefixSum);
        GridFunction automatic = apply_operator(prob, f);
        for (std::size_t k = 0; k < f.size(); ++k) {
            CHECK(per_node[k] == prefix[k]);
            CHECK(automatic[k] == prefix[k]);
        }
    }
}

TEST_CASE("threaded per-node path equals the sequential prefix path") {
    // n is large enough that PerNode splits across threads; PrefixSum is
    // sequential, so agreement pins thread-count independence.
    KernelProblem prob = make("cos(tau) + 0.25*sin(y)", 0.25, 0.0, 1.0, 2501);
    std::mt19937_64 rng(504);
    GridFunction f = testsup::random_grid_function(rng, 0.0, 1.0, 2501, 2.0, true);
    GridFunction threaded = apply_operator(prob, f, ApplyStrategy::PerNode);
    GridFunction sequential = apply_operator(prob, f, ApplyStrategy::PrefixSum);
    for (std::size_t k = 0; k < f.size(); ++k)
        CHECK(threaded[k] == sequential[k]);
}

TEST_CASE("x-dependent kernels take the per-node path") {
    KernelProblem prob = make("x*cos(tau)", 0.1, 0.0, 1.0, 501);
    GridFunction Tf = apply_operator(prob, prob.zero_start());
    double worst = 0.0;
    for (std::size_t k = 0; k < Tf.size(); ++k) {
        double x = prob.node(k);
        worst = std::max(worst, std::abs(Tf[k] - cplx(x * std::sin(x), 0.0)));
    }
    CHECK(worst <= 1e-5);
    CHECK_THROWS_AS(apply_operator(prob, prob.zero_start(), ApplyStrategy::PrefixSum),
                    DomainError);
}

TEST_CASE("the disk constraint is enforced with the offending node") {
    KernelProblem prob = make("0.5*y", 0.5, 0.0, 1.0, 11, 10.0);
    std::vector<cplx> values(11, cplx(0.0, 0.0));
    values[7] = {11.0, 0.0};
    GridFunction f(0.0, 1.0, std::move(values));
    try {
        apply_operator(prob, f);
        FAIL("expected IterateEscapedDisk");
    } catch (const IterateEscapedDisk& e) {
        CHECK(e.node() == 7);
        CHECK(e.magnitude() == 11.0);
    }
}

TEST_CASE("solve: cos(tau) converges in exactly one iteration to sin") {
    KernelProblem prob = make("cos(tau)", 0.1, 0.0, 1.0, 1001);
    SolveResult result = solve(prob);
    CHECK(result.trace.outcome == IterationOutcome::Converged);
    CHECK(result.trace.iterations_used == 1);
    double worst = 0.0;
    for (std::size_t k = 0; k < result.y0.size(); ++k)
        worst = std::max(worst,
                         std::abs(result.y0[k] - cplx(std::sin(prob.node(k)), 0.0)));
    CHECK(worst <= 1e-6);
}

TEST_CASE("solve: homogeneous linear problem collapses to zero") {
    KernelProblem prob = make("0.5*y", 0.5, 0.0, 1.0, 301);
    std::mt19937_64 rng(505);
    for (int round = 0; round < 3; ++round) {
        GridFunction start = testsup::random_grid_function(rng, 0.0, 1.0, 301, 1.0);
        SolveResult result = solve(prob, start);
        REQUIRE(result.trace.outcome == IterationOutcome::Converged);
        double norm = sup_distance(result.y0, prob.zero_start()).finite_value();
        CHECK(norm <= 1e-9);

        const auto& inc = result.trace.increments;
        for (std::size_t n = 0; n + 1 < inc.size(); ++n) {
            double prev = inc[n].finite_value();
            double next = inc[n + 1].finite_value();
            if (prev > 0.0)
                CHECK(leq_with_ulp_slack(next, 0.5 * prev, 2));
        }
    }
}

TEST_CASE("solve: nonlinear problem self-consistency and fine-grid agreement") {
    KernelProblem coarse = make("cos(tau) + 0.25*sin(y)", 0.25, 0.0, 1.0, 201);
    SolveResult rc = solve(coarse);
    REQUIRE(rc.trace.outcome == IterationOutcome::Converged);
    CHECK(residual_theta(coarse, rc.y0) <= 1e-10);

    KernelProblem fine = make("cos(tau) + 0.25*sin(y)", 0.25, 0.0, 1.0, 2001);
    SolveResult rf = solve(fine);
    REQUIRE(rf.trace.outcome == IterationOutcome::Converged);
    double worst = 0.0;
    for (std::size_t k = 0; k < rc.y0.size(); ++k)
        worst = std::max(worst, std::abs(rc.y0[k] - rf.y0[10 * k]));
    CHECK(worst <= 1e-4); // second-order quadrature at h = 5e-3
}

TEST_CASE("solve aborts when an iterate escapes the disk") {
    // (T 0)(x) = x reaches 0.9 > R on the second application's input.
    KernelProblem prob(parse_kernel("y + 1"), MTFunc::constant(0.999), 0.0,
                       0.9, 51, 0.5);
    try {
        solve(prob);
        FAIL("expected IterationAborted");
    } catch (const IterationAborted& e) {
        CHECK(e.failing_index() == 1);
        CHECK(std::string(e.what()).find("escaped") != std::string::npos);
    }
}

TEST_CASE("table phi drives delta and the contraction bound") {
    MTFunc phi = MTFunc::table({0.0, 1.0}, {0.5, 0.6});
    KernelProblem prob(parse_kernel("0.5*y"), phi, 0.0, 1.0, 101);
    CHECK(prob.delta() == 0.6);

    std::mt19937_64 rng(509);
    for (int round = 0; round < 100; ++round) {
        GridFunction f = testsup::random_grid_function(rng, 0.0, 1.0, 101, 4.0);
        GridFunction g = testsup::random_grid_function(rng, 0.0, 1.0, 101, 4.0);
        double d = sup_distance(f, g).finite_value();
        double lhs = sup_distance(apply_operator(prob, f), apply_operator(prob, g))
                         .finite_value();
        CHECK(leq_with_ulp_slack(lhs, prob.interval_length() * phi.eval(d) * d, 4));
    }

    SolveResult result = solve(prob);
    CHECK(result.trace.outcome == IterationOutcome::Converged);
    CHECK(certify(prob, 0.2).bound == 0.2 / (1.0 - 0.6));
}

TEST_CASE("solve reports budget exhaustion as an outcome") {
    KernelProblem prob = make("cos(tau) + 0.25*sin(y)", 0.25, 0.0, 1.0, 101);
    SolveResult result = solve(prob, SolveOptions{1e-10, 2});
    CHECK(result.trace.outcome == IterationOutcome::BudgetExhausted);
    CHECK(result.trace.iterations_used == 2);
    CHECK(result.y0.size() == 101); // last iterate is still returned
}

TEST_CASE("residual examples") {
    KernelProblem zero_kernel = make("0", 0.1, 0.0, 1.0, 21);
    GridFunction flat = GridFunction::constant(0.0, 1.0, 21, {0.37, 0.0});
    CHECK(residual_theta(zero_kernel, flat) == 0.37); // T y = 0, bit-exact

    KernelProblem prob = make("cos(tau)", 0.1, 0.0, 1.0, 501);
    SolveResult result = solve(prob);
    CHECK(residual_theta(prob, result.y0) <= 1e-10);

    // Constant perturbation of a y-independent problem shifts the residual
    // by exactly |c| up to one rounding of each node value.
    GridFunction ones = GridFunction::constant(0.0, 1.0, 501, {1.0, 0.0});
    GridFunction perturbed = grid_axpy(result.y0, {0.1, 0.0}, ones);
    double theta = residual_theta(prob, perturbed);
    CHECK(std::fabs(theta - 0.1) <= 4.0 * ulp_of(1.0));
}

TEST_CASE("certify: formula, metadata, and validation") {
    KernelProblem prob = make("0.5*y", 0.5, 0.0, 1.0, 11);
    StabilityCertificate cert = certify(prob, 0.1);
    CHECK(cert.theta == 0.1);
    CHECK(cert.delta == 0.5);
    CHECK(cert.bound == 0.2); // 0.1 / 0.5 is exact
    CHECK(cert.bound >= cert.theta);
    CHECK(cert.grid_a == 0.0);
    CHECK(cert.grid_b == 1.0);
    CHECK(cert.grid_n == 11);
    CHECK(cert.quadrature == "composite-trapezoid");
    CHECK(cert.disk_radius == 10.0);
    CHECK(cert.lipschitz == LipschitzStatus::Skipped);

    CHECK(certify(prob, 0.0).bound == 0.0);
    CHECK_THROWS_AS(certify(prob, -0.1), DomainError);

    StabilityCertificate verified = certify(prob, 0.0, LipschitzStatus::Verified);
    CHECK(verified.lipschitz == LipschitzStatus::Verified);
}

TEST_CASE("certify reduces to the constant-factor formula bit-exactly") {
    // phi == L constant: the certified bound must equal theta / (1 - K L)
    // exactly as doubles.
    const double levels[] = {0.1, 0.3, 0.5, 0.9};
    const double lengths[] = {0.5, 1.0, 2.0};
    const double thetas[] = {0.0, 0.1, 1.0, 3.7};
    for (double L : levels) {
        for (double K : lengths) {
            if (!(K * L < 1.0))
                continue;
            KernelProblem prob = make("0", L, 0.0, K, 11);
            for (double theta : thetas) {
                double direct = theta / (1.0 - K * L);
                CHECK(certify(prob, theta).bound == direct);
            }
        }
    }
}

TEST_CASE("discrete contraction inequality on random pairs") {
    KernelProblem prob = make("cos(tau) + 0.25*sin(y)", 0.25, 0.0, 1.0, 101);
    std::mt19937_64 rng(506);
    for (int round = 0; round < 200; ++round) {
        GridFunction f = testsup::random_grid_function(rng, 0.0, 1.0, 101, 5.0, true);
        GridFunction g = testsup::random_grid_function(rng, 0.0, 1.0, 101, 5.0, true);
        double d = sup_distance(f, g).finite_value();
        double lhs = sup_distance(apply_operator(prob, f), apply_operator(prob, g))
                         .finite_value();
        double rhs = prob.interval_length() * prob.phi().eval(d) * d;
        CHECK(leq_with_ulp_slack(lhs, rhs, 4));
    }
}

TEST_CASE("candidate io round trips and validates the grid") {
    KernelProblem prob = make("0.5*y", 0.5, 0.0, 1.0, 21);
    std::mt19937_64 rng(507);
    GridFunction f = testsup::random_grid_function(rng, 0.0, 1.0, 21, 2.0);

    std::ostringstream out;
    write_candidate(out, f);
    std::istringstream in(out.str());
    GridFunction back = read_candidate(in, prob);
    for (std::size_t k = 0; k < f.size(); ++k)
        CHECK(back[k] == f[k]); // 17 significant digits reparse exactly

    // Comments and two-column (real) rows are accepted.
    std::istringstream real_rows("# header\n0 1.5\n0.05, 1.5\n0.1\t1.5\n"
                                 "0.15 1.5\n0.2 1.5\n0.25 1.5\n0.3 1.5\n"
                                 "0.35 1.5\n0.4 1.5\n0.45 1.5\n0.5 1.5\n"
                                 "0.55 1.5\n0.6 1.5\n0.65 1.5\n0.7 1.5\n"
                                 "0.75 1.5\n0.8 1.5\n0.85 1.5\n0.9 1.5\n"
                                 "0.95 1.5\n1 1.5\n");
    GridFunction constant = read_candidate(real_rows, prob);
    CHECK(constant[3] == cplx(1.5, 0.0));

    std::istringstream short_file("0 1\n");
    CHECK_THROWS_AS(read_candidate(short_file, prob), GridMismatch);

    std::istringstream wrong_node("0 1\n0.06 1\n");
    CHECK_THROWS_AS(read_candidate(wrong_node, prob), GridMismatch);

    std::istringstream too_wide("0 1 2 3\n");
    CHECK_THROWS_AS(read_candidate(too_wide, prob), GridMismatch);

    std::istringstream garbage("not a number\n");
    CHECK_THROWS_AS(read_candidate(garbage, prob), GridMismatch);

    CHECK_THROWS_AS(read_candidate_file("/nonexistent/file.dat", prob),
                    GridMismatch);
}

TEST_CASE("grid-space orbits are always in the finite class") {
    KernelProblem prob = make("0.5*y", 0.5, 0.0, 1.0, 51);
    std::mt19937_64 rng(508);
    GridFunction start = testsup::random_grid_function(rng, 0.0, 1.0, 51, 1.0);
    SolveResult result = solve(prob, start);
    auto classified = classify_alternative(result.trace.increments);
    REQUIRE(std::holds_alternative<CaseB>(classified));
    CHECK(std::get<CaseB>(classified).ell == 0);
    REQUIRE(result.trace.ell.has_value());
    CHECK(*result.trace.ell == 0);
}
