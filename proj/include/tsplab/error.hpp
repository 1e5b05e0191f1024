#pragma once

#include <stdexcept>
#include <string>

namespace tsplab {

enum class ErrorKind {
    invalid_size,
    invalid_argument,
    unsupported_format,
    parse_error,
    degenerate_instance,
    too_large,
    numeric_failure,
    invalid_state,
    corrupt_file,
    configuration_error,
    refuse_overwrite,
    io_error,
};

/// All library errors are reported through this exception; `kind()` keys the
/// failure class so callers (and the CLI exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond) fail(kind, msg);
}

} // namespace tsplab
