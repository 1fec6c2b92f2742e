#include "vstab/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vstab/errors.hpp"

namespace vstab {

namespace {

bool key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

/// Cursor over one logical line of config text.
struct LineCursor {
    std::string_view text;
    std::size_t pos = 0;
    std::string file;
    std::size_t line = 0;

    [[noreturn]] void fail(const std::string& message) const {
        throw ConfigError(file, line, "", message);
    }
    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t'))
            ++pos;
    }
    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    bool consume(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    std::string parse_key() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && key_char(text[pos]))
            ++pos;
        if (pos == start)
            fail("expected a key");
        return std::string(text.substr(start, pos - start));
    }

    std::string parse_quoted_string() {
        ++pos; // opening quote
        std::string out;
        while (pos < text.size() && text[pos] != '"') {
            if (text[pos] == '\\' && pos + 1 < text.size()) {
                ++pos;
                char c = text[pos];
                out.push_back(c == 'n' ? '\n' : c == 't' ? '\t' : c);
            } else {
                out.push_back(text[pos]);
            }
            ++pos;
        }
        if (pos >= text.size())
            fail("unterminated string");
        ++pos; // closing quote
        return out;
    }

    std::variant<std::int64_t, double> parse_number() {
        skip_ws();
        std::size_t start = pos;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-'))
            ++pos;
        bool is_integer = true;
        while (pos < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[pos])) ||
                text[pos] == '.' || text[pos] == 'e' || text[pos] == 'E' ||
                ((text[pos] == '+' || text[pos] == '-') &&
                 (text[pos - 1] == 'e' || text[pos - 1] == 'E')))) {
            if (!std::isdigit(static_cast<unsigned char>(text[pos])))
                is_integer = false;
            ++pos;
        }
        std::string_view token = text.substr(start, pos - start);
        if (token.empty() || token == "+" || token == "-")
            fail("expected a number");
        if (is_integer) {
            std::int64_t iv = 0;
            auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), iv);
            if (ec == std::errc() && p == token.data() + token.size())
                return iv;
        }
        double dv = 0.0;
        auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), dv);
        if (ec != std::errc() || p != token.data() + token.size())
            fail("malformed number '" + std::string(token) + "'");
        return dv;
    }
};

} // namespace

FlatConfig FlatConfig::parse_text(std::string text, std::string origin) {
    FlatConfig config;
    config.origin_ = std::move(origin);

    std::istringstream stream(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        // Strip comments outside quotes.
        bool in_string = false;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '"')
                in_string = !in_string;
            else if (raw[i] == '#' && !in_string) {
                raw.resize(i);
                break;
            }
        }
        LineCursor cur{raw, 0, config.origin_, line_no};
        if (cur.at_end())
            continue;

        if (cur.peek() == '[') {
            cur.consume('[');
            section = cur.parse_key();
            if (!cur.consume(']'))
                cur.fail("expected ']' after section name");
            if (!cur.at_end())
                cur.fail("unexpected text after section header");
            continue;
        }

        std::string key = cur.parse_key();
        if (!cur.consume('='))
            cur.fail("expected '=' after key '" + key + "'");
        std::string full_key = section.empty() ? key : section + "." + key;

        auto store = [&](const std::string& k, ConfigValue v) {
            if (config.entries_.count(k))
                throw ConfigError(config.origin_, line_no, k, "duplicate key");
            config.entries_.emplace(k, std::move(v));
        };

        auto parse_scalar_or_array = [&](LineCursor& c) -> ConfigValue {
            char head = c.peek();
            if (head == '"')
                return {c.parse_quoted_string(), line_no};
            if (head == '[') {
                c.consume('[');
                std::vector<double> items;
                if (!c.consume(']')) {
                    while (true) {
                        auto num = c.parse_number();
                        items.push_back(std::holds_alternative<double>(num)
                                            ? std::get<double>(num)
                                            : static_cast<double>(
                                                  std::get<std::int64_t>(num)));
                        if (c.consume(']'))
                            break;
                        if (!c.consume(','))
                            c.fail("expected ',' or ']' in array");
                    }
                }
                return {std::move(items), line_no};
            }
            if (std::isalpha(static_cast<unsigned char>(head))) {
                std::string word = c.parse_key();
                if (word == "true")
                    return {true, line_no};
                if (word == "false")
                    return {false, line_no};
                c.fail("unquoted value '" + word + "' (strings need quotes)");
            }
            auto num = c.parse_number();
            if (std::holds_alternative<double>(num))
                return {std::get<double>(num), line_no};
            return {std::get<std::int64_t>(num), line_no};
        };

        if (cur.peek() == '{') {
            cur.consume('{');
            if (!cur.consume('}')) {
                while (true) {
                    std::string sub = cur.parse_key();
                    if (!cur.consume('='))
                        cur.fail("expected '=' in inline table");
                    store(full_key + "." + sub, parse_scalar_or_array(cur));
                    if (cur.consume('}'))
                        break;
                    if (!cur.consume(','))
                        cur.fail("expected ',' or '}' in inline table");
                }
            }
        } else {
            store(full_key, parse_scalar_or_array(cur));
        }
        if (!cur.at_end())
            cur.fail("unexpected trailing text");
    }
    return config;
}

FlatConfig FlatConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path, 0, "", "cannot open config file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str(), path);
}

bool FlatConfig::has(const std::string& key) const {
    return entries_.count(key) > 0;
}

void FlatConfig::fail(const std::string& key, const std::string& message) const {
    std::size_t line = 0;
    auto it = entries_.find(key);
    if (it != entries_.end())
        line = it->second.line;
    throw ConfigError(origin_, line, key, message);
}

const ConfigValue& FlatConfig::lookup(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
        fail(key, "missing required key");
    return it->second;
}

double FlatConfig::get_double(const std::string& key) const {
    const ConfigValue& v = lookup(key);
    if (auto* d = std::get_if<double>(&v.value))
        return *d;
    if (auto* i = std::get_if<std::int64_t>(&v.value))
        return static_cast<double>(*i);
    fail(key, "expected a number");
}

double FlatConfig::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t FlatConfig::get_int(const std::string& key) const {
    const ConfigValue& v = lookup(key);
    if (auto* i = std::get_if<std::int64_t>(&v.value))
        return *i;
    fail(key, "expected an integer");
}

std::int64_t FlatConfig::get_int_or(const std::string& key,
                                    std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::string FlatConfig::get_string(const std::string& key) const {
    const ConfigValue& v = lookup(key);
    if (auto* s = std::get_if<std::string>(&v.value))
        return *s;
    fail(key, "expected a quoted string");
}

std::vector<double> FlatConfig::get_double_array(const std::string& key) const {
    const ConfigValue& v = lookup(key);
    if (auto* a = std::get_if<std::vector<double>>(&v.value))
        return *a;
    fail(key, "expected an array of numbers");
}

void FlatConfig::require_known_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : entries_) {
        bool ok = false;
        for (const auto& pattern : allowed) {
            if (pattern.back() == '.' ? key.rfind(pattern, 0) == 0
                                      : key == pattern) {
                ok = true;
                break;
            }
        }
        if (!ok)
            throw ConfigError(origin_, value.line, key, "unknown key");
    }
}

MTFunc phi_from_config(const FlatConfig& config) {
    std::string type = config.get_string("phi.type");
    if (type == "constant")
        return MTFunc::constant(config.get_double("phi.value"));
    if (type == "table") {
        std::optional<double> cap;
        if (config.has("phi.sup_cap"))
            cap = config.get_double("phi.sup_cap");
        return MTFunc::table(config.get_double_array("phi.breakpoints"),
                             config.get_double_array("phi.values"), cap);
    }
    if (type == "registry")
        return MTFunc::from_registry(config.get_string("phi.name"));
    throw ConfigError(config.origin(), 0, "phi.type",
                      "expected \"constant\", \"table\" or \"registry\"");
}

ProblemConfig ProblemConfig::from_flat(const FlatConfig& config) {
    config.require_known_keys({
        "interval.a", "interval.b", "grid.n", "kernel", "phi.",
        "solver.stop_tol", "solver.max_iter", "sampling.disk_radius",
        "sampling.lipschitz_samples", "sampling.seed",
    });

    ProblemConfig pc;
    pc.a = config.get_double("interval.a");
    pc.b = config.get_double("interval.b");
    std::int64_t n = config.get_int("grid.n");
    if (n < 2)
        throw ConfigError(config.origin(), 0, "grid.n", "need n >= 2");
    pc.n = static_cast<std::size_t>(n);
    pc.kernel_src = config.get_string("kernel");
    pc.phi = phi_from_config(config);
    pc.stop_tol = config.get_double_or("solver.stop_tol", 1e-10);
    std::int64_t max_iter = config.get_int_or("solver.max_iter", 10000);
    if (max_iter < 1)
        throw ConfigError(config.origin(), 0, "solver.max_iter",
                          "need at least 1 iteration");
    pc.max_iter = static_cast<std::size_t>(max_iter);
    pc.disk_radius = config.get_double_or("sampling.disk_radius", 10.0);
    std::int64_t samples = config.get_int_or("sampling.lipschitz_samples", 2000);
    if (samples < 1)
        throw ConfigError(config.origin(), 0, "sampling.lipschitz_samples",
                          "need at least 1 sample");
    pc.lipschitz_samples = static_cast<std::size_t>(samples);
    std::int64_t seed = config.get_int_or("sampling.seed", 42);
    pc.seed = static_cast<std::uint64_t>(seed);
    return pc;
}

ProblemConfig ProblemConfig::from_file(const std::string& path) {
    return from_flat(FlatConfig::parse_file(path));
}

KernelProblem ProblemConfig::make_problem() const {
    KernelExpr kernel = parse_kernel(kernel_src);
    return KernelProblem(std::move(kernel), phi, a, b, n, disk_radius);
}

} // namespace vstab
