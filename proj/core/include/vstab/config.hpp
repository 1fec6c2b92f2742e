#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vstab/kernel_verify.hpp"
#include "vstab/mt_func.hpp"
#include "vstab/volterra.hpp"

namespace vstab {

/// One typed value from a config file, remembering its source line.
struct ConfigValue {
    std::variant<std::int64_t, double, bool, std::string, std::vector<double>>
        value;
    std::size_t line = 0;
};

/// Flat `key = value` text with `[section]` headers and `#` comments.
/// Sections prefix the keys that follow (`[grid]` + `n = 5` stores
/// `grid.n`); dotted keys and inline tables (`phi = {type = "constant",
/// value = 0.5}`) flatten the same way. Values: integers, reals, booleans,
/// quoted strings and arrays of reals.
class FlatConfig {
public:
    static FlatConfig parse_file(const std::string& path);
    static FlatConfig parse_text(std::string text, std::string origin = "");

    bool has(const std::string& key) const;
    const std::string& origin() const { return origin_; }

    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
    std::string get_string(const std::string& key) const;
    std::vector<double> get_double_array(const std::string& key) const;

    /// Fails with a ConfigError naming the first key outside the allowed
    /// set (prefix entries like "solver." allow a whole section).
    void require_known_keys(const std::vector<std::string>& allowed) const;

    const std::map<std::string, ConfigValue>& entries() const { return entries_; }

private:
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;
    const ConfigValue& lookup(const std::string& key) const;

    std::string origin_;
    std::map<std::string, ConfigValue> entries_;
};

/// Builds the phi described by the `phi.*` keys: type "constant" (value),
/// "table" (breakpoints, values, optional sup_cap) or "registry" (name).
MTFunc phi_from_config(const FlatConfig& config);

/// A full problem description: interval, grid, kernel text, phi, solver
/// controls and sampling controls.
struct ProblemConfig {
    double a = 0.0;
    double b = 1.0;
    std::size_t n = 2;
    std::string kernel_src;
    MTFunc phi = MTFunc::constant(0.0);
    double stop_tol = 1e-10;
    std::size_t max_iter = 10000;
    double disk_radius = 10.0;
    std::size_t lipschitz_samples = 2000;
    std::uint64_t seed = 42;

    static ProblemConfig from_file(const std::string& path);
    static ProblemConfig from_flat(const FlatConfig& config);

    /// Parses the kernel and constructs the validated problem. ParseError
    /// offsets refer to the kernel string.
    KernelProblem make_problem() const;

    SolveOptions solve_options() const { return {stop_tol, max_iter}; }
    LipschitzSampleSpec sample_spec() const {
        return {lipschitz_samples, disk_radius, seed};
    }
};

} // namespace vstab
