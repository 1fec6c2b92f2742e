// vstab: solve homogeneous nonlinear Volterra integral equations by
// successive approximation and certify candidate solutions with
// residual-based stability bounds.
//
// Exit codes: 0 success, 1 input/validation error, 2 iteration budget
// exhausted, 3 verification counterexample.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vstab/config.hpp"
#include "vstab/errors.hpp"
#include "vstab/fixpoint.hpp"
#include "vstab/kernel_verify.hpp"
#include "vstab/mt_func.hpp"
#include "vstab/numeric.hpp"
#include "vstab/volterra.hpp"

namespace {

using namespace vstab;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitBudget = 2;
constexpr int kExitCounterExample = 3;

struct CommandArgs {
    std::string config_path;
    std::string output_path;
    std::string candidate_path;
    std::string phi_spec_path;
    bool machine = false;
    bool verify_lipschitz = false;
    std::optional<std::int64_t> seed;

    // check-mt inline phi
    std::optional<double> phi_constant;
    std::string phi_registry;
    std::vector<double> phi_breakpoints;
    std::vector<double> phi_values;
    std::optional<double> phi_sup_cap;
};

const char* outcome_name(IterationOutcome outcome) {
    switch (outcome) {
    case IterationOutcome::Converged: return "converged";
    case IterationOutcome::BudgetExhausted: return "budget-exhausted";
    case IterationOutcome::CaseA: return "case-a";
    }
    return "?";
}

void print_caveats(std::ostream& os, const StabilityCertificate& cert) {
    os << "certificate caveats:\n"
       << "  quadrature: " << cert.quadrature << " on n = " << cert.grid_n
       << " nodes over [" << format_g17(cert.grid_a) << ", "
       << format_g17(cert.grid_b) << "] -- the bound is grid-conditional\n"
       << "  disk: contraction hypothesis declared for |y| <= "
       << format_g17(cert.disk_radius) << " only -- the bound is disk-conditional\n"
       << "  lipschitz verification: "
       << (cert.lipschitz == LipschitzStatus::Verified ? "verified (sampled)"
                                                       : "skipped")
       << "\n";
}

void print_machine_block(std::ostream& os, const StabilityCertificate& cert,
                         std::size_t iterations, const std::string& outcome) {
    os << "theta = " << format_g17(cert.theta) << "\n"
       << "delta = " << format_g17(cert.delta) << "\n"
       << "bound = " << format_g17(cert.bound) << "\n"
       << "grid.a = " << format_g17(cert.grid_a) << "\n"
       << "grid.b = " << format_g17(cert.grid_b) << "\n"
       << "grid.n = " << cert.grid_n << "\n"
       << "iterations = " << iterations << "\n"
       << "outcome = " << outcome << "\n";
}

ProblemConfig load_problem_config(const CommandArgs& args) {
    ProblemConfig pc = ProblemConfig::from_file(args.config_path);
    if (args.seed)
        pc.seed = static_cast<std::uint64_t>(*args.seed);
    return pc;
}

int run_solve(const CommandArgs& args) {
    ProblemConfig pc = load_problem_config(args);
    KernelProblem problem = pc.make_problem();
    SolveResult result = solve(problem, pc.solve_options());

    double theta = residual_theta(problem, result.y0);
    StabilityCertificate cert = certify(problem, theta);
    double final_increment = result.trace.increments.back().value();
    double tail = final_increment * problem.delta() / (1.0 - problem.delta());

    std::ostream& os = std::cout;
    os << "problem: " << args.config_path << "\n"
       << "kernel: " << problem.kernel().pretty() << "\n"
       << "interval: [" << format_g17(problem.a()) << ", "
       << format_g17(problem.b()) << "]   n = " << problem.n() << "\n"
       << "phi: " << problem.phi().describe() << "\n"
       << "K = " << format_g17(problem.interval_length())
       << "   delta = " << format_g17(problem.delta()) << "\n"
       << "outcome: " << outcome_name(result.trace.outcome) << "\n"
       << "iterations: " << result.trace.iterations_used << "\n";
    if (result.trace.ell)
        os << "ell (first finite increment): " << *result.trace.ell << "\n";
    os << "residual theta of returned iterate: " << format_g17(theta) << "\n"
       << "tail estimate (increment * delta / (1 - delta)): "
       << format_g17(tail) << "\n"
       << "self-certified bound theta / (1 - delta): " << format_g17(cert.bound)
       << "\n";
    os << "increments:\n";
    for (std::size_t i = 0; i < result.trace.increments.size(); ++i)
        os << "  [" << i << "] " << format_g17(result.trace.increments[i].value())
           << "\n";
    print_caveats(os, cert);

    if (!args.output_path.empty()) {
        std::ofstream out(args.output_path);
        if (!out) {
            std::cerr << "error: cannot write '" << args.output_path << "'\n";
            return kExitInput;
        }
        out << "# solution table written by `vstab solve`\n"
            << "# kernel: " << problem.kernel().pretty() << "\n"
            << "# interval: [" << format_g17(problem.a()) << ", "
            << format_g17(problem.b()) << "]  n: " << problem.n() << "\n"
            << "# outcome: " << outcome_name(result.trace.outcome) << "\n";
        write_candidate(out, result.y0);
        os << "solution table written to: " << args.output_path << "\n";
    } else {
        os << "solution table:\n";
        write_candidate(os, result.y0);
    }

    if (args.machine)
        print_machine_block(os, cert, result.trace.iterations_used,
                            outcome_name(result.trace.outcome));

    return result.trace.outcome == IterationOutcome::Converged ? kExitOk
                                                               : kExitBudget;
}

int run_certify(const CommandArgs& args) {
    ProblemConfig pc = load_problem_config(args);
    KernelProblem problem = pc.make_problem();
    GridFunction candidate = read_candidate_file(args.candidate_path, problem);

    LipschitzStatus status = LipschitzStatus::Skipped;
    if (args.verify_lipschitz) {
        LipschitzResult verdict = verify_lipschitz_condition(
            problem.kernel(), problem.phi(), problem.a(), problem.b(),
            pc.sample_spec());
        if (auto* cs = std::get_if<LipschitzCounterSample>(&verdict)) {
            std::cout << "lipschitz counterexample:\n"
                      << "  x = " << format_g17(cs->x)
                      << "  tau = " << format_g17(cs->tau) << "\n"
                      << "  y = (" << format_g17(cs->y.real()) << ", "
                      << format_g17(cs->y.imag()) << ")\n"
                      << "  z = (" << format_g17(cs->z.real()) << ", "
                      << format_g17(cs->z.imag()) << ")\n"
                      << "  |V(x,tau,y) - V(x,tau,z)| = " << format_g17(cs->lhs)
                      << "\n"
                      << "  phi(|y-z|) * |y-z|        = " << format_g17(cs->rhs)
                      << "\n";
            return kExitCounterExample;
        }
        status = LipschitzStatus::Verified;
    }

    double theta = residual_theta(problem, candidate);
    StabilityCertificate cert = certify(problem, theta, status);

    std::ostream& os = std::cout;
    os << "candidate: " << args.candidate_path << "\n"
       << "kernel: " << problem.kernel().pretty() << "\n"
       << "measured residual theta: " << format_g17(cert.theta) << "\n"
       << "delta: " << format_g17(cert.delta) << "\n"
       << "certified bound theta / (1 - delta): " << format_g17(cert.bound)
       << "\n"
       << "meaning: every exact solution of the discretized equation lies "
          "within the bound of this candidate in the sup norm\n";
    print_caveats(os, cert);
    if (args.machine)
        print_machine_block(os, cert, 0, "certified");
    return kExitOk;
}

MTFunc phi_from_args(const CommandArgs& args) {
    int sources = 0;
    sources += !args.phi_spec_path.empty();
    sources += !args.config_path.empty();
    sources += args.phi_constant.has_value();
    sources += !args.phi_registry.empty();
    sources += !args.phi_breakpoints.empty() || !args.phi_values.empty();
    if (sources != 1)
        throw DomainError("check-mt needs exactly one phi source: a phi spec "
                          "file, --config, --constant, --registry, or "
                          "--breakpoints/--values");

    if (!args.phi_spec_path.empty()) {
        FlatConfig config = FlatConfig::parse_file(args.phi_spec_path);
        config.require_known_keys({"phi."});
        return phi_from_config(config);
    }
    if (!args.config_path.empty()) {
        // Take the phi out of a full problem config.
        return phi_from_config(FlatConfig::parse_file(args.config_path));
    }
    if (args.phi_constant)
        return MTFunc::constant(*args.phi_constant);
    if (!args.phi_registry.empty())
        return MTFunc::from_registry(args.phi_registry);
    return MTFunc::table(args.phi_breakpoints, args.phi_values,
                         args.phi_sup_cap);
}

int run_check_mt(const CommandArgs& args) {
    MTFunc phi = phi_from_args(args);
    std::uint64_t seed = args.seed ? static_cast<std::uint64_t>(*args.seed) : 42;
    std::cout << "phi: " << phi.describe() << "\n"
              << "seed: " << seed << "\n";

    bool all_pass = true;

    // (f): nonincreasing sequences. The harmonic tail probes behavior
    // toward 0, where limsup failures live.
    {
        std::vector<double> harmonic(1'000'000);
        for (std::size_t i = 0; i < harmonic.size(); ++i)
            harmonic[i] = 1.0 / static_cast<double>(i + 1);

        std::mt19937_64 rng(seed);
        std::size_t sequences = 0;
        double sup_seen = 0.0;
        std::optional<SequenceCheck> failure;
        auto run_one = [&](std::span<const double> xs) {
            SequenceCheck check = check_nonincreasing_sequence(phi, xs);
            ++sequences;
            sup_seen = std::max(sup_seen, check.sup_observed);
            if (!check.passes && (!failure || check.sup_observed > failure->sup_observed))
                failure = check;
        };
        run_one(harmonic);
        for (int round = 0; round < 200; ++round) {
            std::size_t len = 2 + rng() % 40;
            std::vector<double> xs(len);
            for (double& v : xs)
                v = 20.0 * uniform_unit(rng);
            std::sort(xs.rbegin(), xs.rend());
            run_one(xs);
        }
        if (!failure) {
            std::cout << "(f) nonincreasing-sequence battery: PASS  ["
                      << sequences << " sequences, sup observed "
                      << format_g17(sup_seen) << "]\n";
        } else {
            all_pass = false;
            std::cout << "(f) nonincreasing-sequence battery: FAIL  [witness x = "
                      << format_g17(failure->witness_x) << ", phi(x) = "
                      << format_g17(failure->sup_observed)
                      << " exceeds declared cap "
                      << format_g17(phi.sup_cap()) << "]\n";
        }
    }

    // (g): strictly decreasing sequences, delegated through the same check.
    {
        std::mt19937_64 rng(seed + 1);
        bool pass = true;
        SequenceCheck witness;
        double sup_seen = 0.0;
        for (int round = 0; round < 200; ++round) {
            std::vector<double> xs;
            double cur = 20.0 * uniform_unit(rng) + 1.0;
            while (cur > 1e-9 && xs.size() < 60) {
                xs.push_back(cur);
                cur *= 0.3 + 0.6 * uniform_unit(rng);
            }
            if (xs.size() < 2)
                xs = {1.0, 0.5};
            SequenceCheck check = check_strictly_decreasing_sequence(phi, xs);
            sup_seen = std::max(sup_seen, check.sup_observed);
            if (!check.passes) {
                pass = false;
                witness = check;
                break;
            }
        }
        if (pass) {
            std::cout << "(g) strictly-decreasing battery: PASS  [200 "
                         "sequences, sup observed "
                      << format_g17(sup_seen) << "]\n";
        } else {
            all_pass = false;
            std::cout << "(g) strictly-decreasing battery: FAIL  [witness x = "
                      << format_g17(witness.witness_x) << ", phi(x) = "
                      << format_g17(witness.sup_observed) << "]\n";
        }
    }

    // (b)-(e): right-neighborhood caps at fixed and seeded base points,
    // all four endpoint conventions.
    {
        const double eps_grid[] = {0.5, 0.1, 0.01, 0.001};
        std::vector<double> bases = {0.0, 1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
        std::mt19937_64 rng(seed + 2);
        for (int i = 0; i < 20; ++i)
            bases.push_back(20.0 * uniform_unit(rng));
        const IntervalEnds modes[] = {IntervalEnds::OpenOpen,
                                      IntervalEnds::ClosedClosed,
                                      IntervalEnds::OpenClosed,
                                      IntervalEnds::ClosedOpen};
        bool pass = true;
        CapCounterSample witness;
        double witness_t = 0.0;
        for (double t : bases) {
            for (IntervalEnds mode : modes) {
                LocalCapResult result = check_local_cap(phi, t, eps_grid, mode);
                if (auto* cs = std::get_if<CapCounterSample>(&result)) {
                    pass = false;
                    witness = *cs;
                    witness_t = t;
                    break;
                }
            }
            if (!pass)
                break;
        }
        if (pass) {
            std::cout << "(b) local-cap battery: PASS  [" << bases.size()
                      << " base points x 4 endpoint modes]\n";
        } else {
            all_pass = false;
            std::cout << "(b) local-cap battery: FAIL  [at t = "
                      << format_g17(witness_t) << ", phi(s) = "
                      << format_g17(witness.value) << " at s = "
                      << format_g17(witness.s) << " stays within 1e-12 of 1]\n";
        }
    }

    std::cout << "verdict: "
              << (all_pass ? "consistent with the MT property at sample scale"
                           : "NOT an MT-function (refuted by sampling)")
              << "\n";
    return all_pass ? kExitOk : kExitCounterExample;
}

int run_verify_kernel(const CommandArgs& args) {
    // Deliberately does not construct the full problem: the Lipschitz
    // check is meaningful for registry phis and for delta >= 1 setups too.
    ProblemConfig pc = load_problem_config(args);
    KernelExpr kernel = parse_kernel(pc.kernel_src);
    LipschitzSampleSpec spec = pc.sample_spec();

    std::cout << "kernel: " << kernel.pretty() << "\n"
              << "phi: " << pc.phi.describe() << "\n"
              << "domain: [" << format_g17(pc.a) << ", " << format_g17(pc.b)
              << "]^2   disk radius: " << format_g17(spec.radius)
              << "   samples: " << spec.count << "   seed: " << spec.seed
              << "\n";

    LipschitzResult result =
        verify_lipschitz_condition(kernel, pc.phi, pc.a, pc.b, spec);
    if (auto* ok = std::get_if<LipschitzVerified>(&result)) {
        std::cout << "verified: |V(x,tau,y) - V(x,tau,z)| <= phi(|y-z|)*|y-z| "
                     "held at all "
                  << ok->samples << " samples (conditional on the disk)\n";
        return kExitOk;
    }
    const auto& cs = std::get<LipschitzCounterSample>(result);
    std::cout << "counterexample:\n"
              << "  x = " << format_g17(cs.x) << "  tau = " << format_g17(cs.tau)
              << "\n"
              << "  y = (" << format_g17(cs.y.real()) << ", "
              << format_g17(cs.y.imag()) << ")\n"
              << "  z = (" << format_g17(cs.z.real()) << ", "
              << format_g17(cs.z.imag()) << ")\n"
              << "  |V(x,tau,y) - V(x,tau,z)| = " << format_g17(cs.lhs) << "\n"
              << "  phi(|y-z|) * |y-z|        = " << format_g17(cs.rhs) << "\n";
    return kExitCounterExample;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vstab: Volterra integral equation solver with "
                 "residual-based stability certificates"};
    app.require_subcommand(1);

    CommandArgs args;

    auto add_common = [&](CLI::App* cmd, bool needs_config, bool has_machine) {
        auto* config = cmd->add_option("--config", args.config_path,
                                       "problem config file");
        if (needs_config)
            config->required();
        cmd->add_option("--seed", args.seed,
                        "override the sampling seed from the config");
        if (has_machine)
            cmd->add_flag("--machine", args.machine,
                          "append the machine-readable key = value block");
    };

    CLI::App* solve_cmd =
        app.add_subcommand("solve", "solve the configured problem by "
                                    "successive approximation");
    add_common(solve_cmd, true, true);
    solve_cmd->add_option("--output", args.output_path,
                          "write the solution table here (certify accepts it "
                          "as a candidate)");

    CLI::App* certify_cmd = app.add_subcommand(
        "certify", "measure a candidate's residual and certify the bound");
    add_common(certify_cmd, true, true);
    certify_cmd
        ->add_option("candidate", args.candidate_path,
                     "candidate solution table (rows: x re [im])")
        ->required();
    certify_cmd->add_flag("--verify-lipschitz", args.verify_lipschitz,
                          "sample-check the kernel hypothesis first and "
                          "record it in the certificate");

    CLI::App* check_cmd = app.add_subcommand(
        "check-mt", "run the MT-function check batteries on a phi");
    add_common(check_cmd, false, false);
    check_cmd->add_option("phi-spec", args.phi_spec_path,
                          "config file with phi.* keys");
    check_cmd->add_option("--constant", args.phi_constant,
                          "inline constant phi level");
    check_cmd->add_option("--registry", args.phi_registry,
                          "named registry entry (see docs)");
    check_cmd->add_option("--breakpoints", args.phi_breakpoints,
                          "inline table breakpoints (first must be 0)");
    check_cmd->add_option("--values", args.phi_values, "inline table values");
    check_cmd->add_option("--sup-cap", args.phi_sup_cap,
                          "declared sup cap for the inline table");

    CLI::App* verify_cmd = app.add_subcommand(
        "verify-kernel", "sample-check the kernel Lipschitz hypothesis");
    add_common(verify_cmd, true, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (solve_cmd->parsed())
            return run_solve(args);
        if (certify_cmd->parsed())
            return run_certify(args);
        if (check_cmd->parsed())
            return run_check_mt(args);
        if (verify_cmd->parsed())
            return run_verify_kernel(args);
    } catch (const vstab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
