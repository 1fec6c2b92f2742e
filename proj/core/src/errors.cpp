#include "vstab/errors.hpp"

#include <sstream>

namespace vstab {

namespace {

std::string parse_error_message(std::size_t offset,
                                const std::vector<std::string>& expected) {
    std::ostringstream os;
    os << "parse error at offset " << offset << ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i > 0)
            os << (i + 1 == expected.size() ? " or " : ", ");
        os << expected[i];
    }
    if (expected.empty())
        os << "nothing (internal)";
    return os.str();
}

} // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected)
    : Error(parse_error_message(offset, expected)),
      offset_(offset),
      expected_(std::move(expected)) {}

IterateEscapedDisk::IterateEscapedDisk(std::size_t node, double magnitude,
                                       double radius)
    : Error("iterate escaped the Lipschitz disk: |y(x_" + std::to_string(node) +
            ")| = " + std::to_string(magnitude) + " > R = " +
            std::to_string(radius)),
      node_(node),
      magnitude_(magnitude) {}

IterationAborted::IterationAborted(std::size_t failing_index,
                                   const std::string& cause)
    : Error("iteration aborted at index " + std::to_string(failing_index) +
            ": " + cause),
      failing_index_(failing_index) {}

ConfigError::ConfigError(std::string file, std::size_t line,
                         std::string key_path, const std::string& message)
    : Error((file.empty() ? std::string("<config>") : file) + ":" +
            std::to_string(line) +
            (key_path.empty() ? "" : ": key '" + key_path + "'") + ": " +
            message),
      file_(std::move(file)),
      line_(line),
      key_path_(std::move(key_path)) {}

} // namespace vstab
