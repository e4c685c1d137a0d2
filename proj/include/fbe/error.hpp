#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fbe {

enum class ErrorKind {
    unsupported_length,
    invalid_parameter,
    invalid_input,
    invalid_design,
    search_space_too_large,
    degenerate_input,
    io,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::unsupported_length: return "unsupported-length";
        case ErrorKind::invalid_parameter: return "invalid-parameter";
        case ErrorKind::invalid_input: return "invalid-input";
        case ErrorKind::invalid_design: return "invalid-design";
        case ErrorKind::search_space_too_large: return "search-space-too-large";
        case ErrorKind::degenerate_input: return "degenerate-input";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

/// Every failure raised by the library carries a category so the CLI can map
/// it to an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace fbe
