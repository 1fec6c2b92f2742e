#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace vstab {

/// Contraction-factor function phi : [0, inf) -> [0, 1) with a declared
/// supremum cap.
///
/// Three representations:
///  - constant level L,
///  - right-continuous step table over sorted breakpoints (breakpoints[0]
///    must be 0; phi(t) = values[i] for the largest i with
///    breakpoints[i] <= t, so the last value holds beyond the last
///    breakpoint),
///  - named closed forms from a small registry.
///
/// Constants and tables are validated at construction: every value and the
/// cap lie in [0, 1) and the cap dominates every value. Closed forms carry
/// only a *claimed* cap; the sampled checks below can refute such claims,
/// which is what the adversarial registry entries are for. The solver path
/// accepts only nondecreasing constants/tables.
class MTFunc {
public:
    enum class Kind { Constant, Table, ClosedForm };

    static MTFunc constant(double level);

    /// `sup_cap` defaults to the largest table value.
    static MTFunc table(std::vector<double> breakpoints,
                        std::vector<double> values,
                        std::optional<double> sup_cap = std::nullopt);

    static MTFunc from_registry(const std::string& name);
    static std::vector<std::string> registry_names();

    Kind kind() const { return kind_; }
    double sup_cap() const { return sup_cap_; }
    bool nondecreasing() const { return nondecreasing_; }
    const std::string& registry_name() const { return registry_name_; }

    /// phi(t). Throws DomainError for t < 0 or non-finite t, and when a
    /// closed form leaves the codomain [0, 1) in double arithmetic.
    double eval(double t) const;

    /// Human-readable one-line description.
    std::string describe() const;

    friend MTFunc scale_to_alpha(const MTFunc& phi, double K);

private:
    MTFunc() = default;

    Kind kind_ = Kind::Constant;
    double constant_ = 0.0;
    std::vector<double> breakpoints_;
    std::vector<double> values_;
    std::function<double(double)> closed_form_;
    std::string registry_name_;
    double sup_cap_ = 0.0;
    bool nondecreasing_ = true;
};

/// alpha(t) = K * phi(t), with sup cap K * sup_cap(phi). Throws
/// ContractionViolation when K * sup_cap >= 1 (the hypothesis delta < 1
/// would fail). The returned function evaluates to exactly the double
/// product K * phi(t).
MTFunc scale_to_alpha(const MTFunc& phi, double K);

/// Result of a sampled sequence check: sup of phi over the sequence, the
/// sequence entry attaining it, and whether the declared cap held.
struct SequenceCheck {
    bool passes = false;
    double sup_observed = 0.0;
    double witness_x = 0.0;
};

/// sup phi(x_n) over a nonincreasing sequence; passes iff it stays within
/// the declared cap (< 1). Throws NotNonincreasing on misordered input.
SequenceCheck check_nonincreasing_sequence(const MTFunc& phi,
                                           std::span<const double> xs);

/// Same check restricted to strictly decreasing sequences.
SequenceCheck check_strictly_decreasing_sequence(const MTFunc& phi,
                                                 std::span<const double> xs);

/// Endpoint inclusion for the local-cap sample window at t.
enum class IntervalEnds { OpenOpen, ClosedClosed, OpenClosed, ClosedOpen };

struct LocalCap {
    double r = 0.0;   // sampled max of phi over the window
    double eps = 0.0; // window width that produced it
};

struct CapCounterSample {
    double s = 0.0;     // sample point where phi came within 1e-12 of 1
    double value = 0.0; // phi(s)
};

using LocalCapResult = std::variant<LocalCap, CapCounterSample>;

/// Sampled search for a right-neighborhood cap at t: returns the first
/// window width from eps_grid whose sampled max stays below 1 - 1e-12,
/// or a counter-sample if every width fails (impossible for validated
/// constants/tables, possible for adversarial closed forms).
///
/// The window sample is fixed and deterministic: 63 uniform interior
/// points plus offsets 10^-k, k = 1..12, plus the endpoints selected by
/// `ends`.
LocalCapResult check_local_cap(const MTFunc& phi, double t,
                               std::span<const double> eps_grid,
                               IntervalEnds ends = IntervalEnds::OpenOpen);

} // namespace vstab
