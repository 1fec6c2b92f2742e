#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>

#include "vstab/fixpoint.hpp"
#include "vstab/numeric.hpp"

#include "support/test_support.hpp"

using namespace vstab;
using testsup::Sqrt2Elem;

namespace {

ExtReal abs_distance(double x, double y) { return ExtReal(std::fabs(x - y)); }

} // namespace

TEST_CASE("constant map converges at iteration 1 with increments (p(u,c), 0)") {
    const double c = 3.7;
    auto trace = iterate(abs_distance, [&](double) { return c; }, 0.0,
                         IterateOptions{1e-10, 100});
    CHECK(trace.outcome == IterationOutcome::Converged);
    CHECK(trace.iterations_used == 1);
    REQUIRE(trace.increments.size() == 2);
    CHECK(trace.increments[0] == ExtReal(3.7));
    CHECK(trace.increments[1] == ExtReal(0.0));
    CHECK(*trace.fixed_point == c);
    REQUIRE(trace.ell.has_value());
    CHECK(*trace.ell == 0);
}

TEST_CASE("start at the fixed point converges with zero iterations") {
    auto trace = iterate(abs_distance, [](double x) { return x; }, 5.0,
                         IterateOptions{1e-10, 10});
    CHECK(trace.outcome == IterationOutcome::Converged);
    CHECK(trace.iterations_used == 0);
    CHECK(*trace.fixed_point == 5.0);
}

TEST_CASE("rational-offset toy space is classified CaseA at budget 50") {
    // Oracle first: T(v) = v/2 + sqrt(2) from 0 has iterates q_n * sqrt(2)
    // with q_n = (2^(n+1) - 2) / 2^n. Exact integer arithmetic shows the
    // consecutive difference is 2 / 2^(n+1) != 0, so every increment is an
    // irrational (nonzero multiple of sqrt(2)) and the distance is infinite.
    for (int n = 0; n < 50; ++n) {
        std::uint64_t p_n = (std::uint64_t{1} << (n + 1)) - 2;
        std::uint64_t p_next = (std::uint64_t{1} << (n + 2)) - 2;
        CHECK(p_next - 2 * p_n == 2); // numerator of q_{n+1} - q_n over 2^(n+1)
        // The doubles in the engine's elements are these exact dyadics.
        double q_n = std::ldexp(static_cast<double>(p_n), -n);
        CHECK(q_n == 2.0 - std::ldexp(1.0, 1 - n));
    }

    auto trace = iterate(testsup::sqrt2_distance, testsup::sqrt2_halving_map,
                         Sqrt2Elem{0.0, 0.0}, IterateOptions{1e-10, 50});
    CHECK(trace.outcome == IterationOutcome::CaseA);
    CHECK(trace.increments.size() == 50);
    for (const ExtReal& inc : trace.increments)
        CHECK(inc.is_infinite());
    CHECK(!trace.ell.has_value());
    CHECK(!trace.fixed_point.has_value());
    CHECK(std::holds_alternative<CaseA>(
        classify_alternative(trace.increments)));
}

TEST_CASE("orbit entering the finite class mid-flight sets ell") {
    // sqrt(2)-coefficient decays to 0 after three steps; increments are
    // infinite while it still moves and finite afterwards.
    auto map = [](const Sqrt2Elem& v) {
        return Sqrt2Elem{v.rational / 2.0,
                         v.sqrt2_coeff > 0.25 ? v.sqrt2_coeff / 2.0 : 0.0};
    };
    auto trace = iterate(testsup::sqrt2_distance, map, Sqrt2Elem{1.0, 1.0},
                         IterateOptions{1e-12, 100});
    CHECK(trace.outcome == IterationOutcome::Converged);
    REQUIRE(trace.ell.has_value());
    CHECK(*trace.ell == 3);
    auto classified = classify_alternative(trace.increments);
    REQUIRE(std::holds_alternative<CaseB>(classified));
    CHECK(std::get<CaseB>(classified).ell == 3);
    CHECK(trace.fixed_point->rational <= 4e-12); // exact dyadic tail, never 0
    CHECK(trace.fixed_point->sqrt2_coeff == 0.0);
}

TEST_CASE("contraction decay: increments shrink by at least the factor") {
    const double delta = 0.5;
    auto map = [&](double x) { return delta * x + 1.0; };
    auto trace =
        iterate(abs_distance, map, 40.0, IterateOptions{1e-12, 1000});
    CHECK(trace.outcome == IterationOutcome::Converged);
    for (std::size_t n = 0; n + 1 < trace.increments.size(); ++n) {
        double prev = trace.increments[n].finite_value();
        double next = trace.increments[n + 1].finite_value();
        if (prev > 0.0)
            CHECK(leq_with_ulp_slack(next, delta * prev, 2));
    }
    // Fixed-point residual of the reported v.
    double v = *trace.fixed_point;
    CHECK(std::holds_alternative<CaseB>(classify_alternative(trace.increments)));
    CHECK(std::fabs(v - map(v)) <= 1e-12);
    CHECK(std::fabs(v - 2.0) <= 1e-11); // exact fixed point of x/2 + 1
}

TEST_CASE("bound soundness on a known contraction") {
    const double delta = 0.5;
    const double stop_tol = 1e-12;
    auto map = [&](double x) { return delta * x + 1.0; };
    auto trace = iterate(abs_distance, map, 0.0, IterateOptions{stop_tol, 1000});
    REQUIRE(trace.outcome == IterationOutcome::Converged);
    double v = *trace.fixed_point;

    // v carries numerical-fixed-point error up to stop_tol / (1 - delta)
    // (geometric tail from the stopping increment), and the bound is
    // exactly tight for this affine map, so that is the whole slack.
    const double slack = stop_tol / (1.0 - delta);
    std::mt19937_64 rng(301);
    for (int i = 0; i < 200; ++i) {
        double x = testsup::urand_in(rng, -50.0, 50.0);
        ExtReal dist_to_image = abs_distance(x, map(x));
        double bound = a_priori_bound(dist_to_image, delta).finite_value();
        CHECK(leq_with_ulp_slack(std::fabs(x - v), bound + slack, 4));
    }
}

TEST_CASE("restarts in the same finiteness class share the limit") {
    auto map = [](double x) { return 0.7 * x + 3.0; };
    const double stop_tol = 1e-11;
    double limits[4];
    int idx = 0;
    for (double start : {-100.0, 0.0, 10.0, 55.5}) {
        auto trace = iterate(abs_distance, map, start,
                             IterateOptions{stop_tol, 2000});
        REQUIRE(trace.outcome == IterationOutcome::Converged);
        limits[idx++] = *trace.fixed_point;
    }
    for (int i = 1; i < 4; ++i)
        CHECK(std::fabs(limits[i] - limits[0]) <= 10.0 * stop_tol);
}

TEST_CASE("budget exhaustion is reported, not thrown") {
    auto map = [](double x) { return 0.999999 * x; };
    auto trace = iterate(abs_distance, map, 1.0, IterateOptions{1e-14, 5});
    CHECK(trace.outcome == IterationOutcome::BudgetExhausted);
    CHECK(trace.iterations_used == 5);
    CHECK(trace.increments.size() == 5);
    CHECK(!trace.fixed_point.has_value());
    REQUIRE(trace.last_iterate.has_value());
    REQUIRE(trace.ell.has_value());
    CHECK(*trace.ell == 0);
}

TEST_CASE("failures inside the map become IterationAborted with the index") {
    auto map = [](double x) -> double {
        if (x > 10.0)
            throw EvalError("synthetic blowup");
        return 2.0 * x;
    };
    try {
        iterate(abs_distance, map, 1.0, IterateOptions{1e-10, 100});
        FAIL("expected IterationAborted");
    } catch (const IterationAborted& e) {
        // 1 -> 2 -> 4 -> 8 -> 16(throws while computing T at index 4)
        CHECK(e.failing_index() == 4);
        CHECK(std::string(e.what()).find("synthetic blowup") != std::string::npos);
    }
}

TEST_CASE("iterate validates its options") {
    auto id = [](double x) { return x; };
    CHECK_THROWS_AS(iterate(abs_distance, id, 0.0, IterateOptions{0.0, 10}),
                    DomainError);
    CHECK_THROWS_AS(iterate(abs_distance, id, 0.0, IterateOptions{-1.0, 10}),
                    DomainError);
    CHECK_THROWS_AS(iterate(abs_distance, id, 0.0, IterateOptions{1e-10, 0}),
                    DomainError);
}

TEST_CASE("a_priori_bound formula and domain") {
    CHECK(a_priori_bound(ExtReal(0.0), 0.9) == ExtReal(0.0));
    CHECK(a_priori_bound(ExtReal(0.1), 0.5) == ExtReal(0.2));
    CHECK(a_priori_bound(ExtReal::infinity(), 0.5) == ExtReal::infinity());
    CHECK_THROWS_AS(a_priori_bound(ExtReal(1.0), 1.0), DomainError);
    CHECK_THROWS_AS(a_priori_bound(ExtReal(1.0), -0.1), DomainError);
}

TEST_CASE("classification examples are exhaustive and exclusive") {
    std::vector<ExtReal> all_inf = {ExtReal::infinity(), ExtReal::infinity(),
                                    ExtReal::infinity()};
    CHECK(std::holds_alternative<CaseA>(classify_alternative(all_inf)));

    std::vector<ExtReal> mid = {ExtReal::infinity(), ExtReal(3.0), ExtReal(1.4)};
    auto c1 = classify_alternative(mid);
    REQUIRE(std::holds_alternative<CaseB>(c1));
    CHECK(std::get<CaseB>(c1).ell == 1);

    std::vector<ExtReal> finite = {ExtReal(0.5), ExtReal(0.2)};
    auto c2 = classify_alternative(finite);
    REQUIRE(std::holds_alternative<CaseB>(c2));
    CHECK(std::get<CaseB>(c2).ell == 0);

    std::vector<ExtReal> empty;
    CHECK_THROWS_AS(classify_alternative(empty), DomainError);

    // Exactly one alternative for random traces.
    std::mt19937_64 rng(302);
    for (int round = 0; round < 100; ++round) {
        std::vector<ExtReal> increments;
        for (int i = 0; i < 10; ++i)
            increments.push_back(rng() % 3 == 0
                                     ? ExtReal::infinity()
                                     : ExtReal(testsup::urand(rng)));
        auto c = classify_alternative(increments);
        CHECK((std::holds_alternative<CaseA>(c) ^
               std::holds_alternative<CaseB>(c)) == 1);
    }
}
