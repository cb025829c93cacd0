#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qconv {

enum class ErrorKind {
    Capacity,
    Index,
    InvalidGate,
    Arity,
    InvalidObservable,
    Config,
    Normalization,
    Step,
    Shape,
    State,
    Label,
    Format,
    Version,
    Consistency,
    Size,
    Unsupported,
    Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the
/// CLI) can tell a malformed file from a bad configuration.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &message)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind), message_(message) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix, for rethrowing with added context.
    [[nodiscard]] const std::string &message() const noexcept { return message_; }

  private:
    ErrorKind kind_;
    std::string message_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &message) { throw Error(kind, message); }

} // namespace qconv
