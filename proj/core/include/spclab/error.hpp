#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spclab {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function (E <= 0, T <= 0, ...).
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// An iterative solver or fit did not reach its convergence criterion.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// File could not be read, parsed or written.
class IoError : public Error {
public:
    using Error::Error;
};

// Warnings go through a process-wide sink so that pure numerical routines can
// report recoverable conditions without changing their return types. The
// default sink prints to stderr.
using WarningSink = std::function<void(std::string_view)>;

/// Installs a new sink and returns the previous one. Passing an empty
/// function restores the stderr sink.
WarningSink set_warning_sink(WarningSink sink);

void warn(std::string_view message);

/// RAII helper that captures warnings for the lifetime of the object.
class ScopedWarningCapture {
public:
    ScopedWarningCapture();
    ~ScopedWarningCapture();
    ScopedWarningCapture(const ScopedWarningCapture&) = delete;
    ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

    const std::vector<std::string>& messages() const { return messages_; }
    bool contains(std::string_view needle) const;

private:
    std::vector<std::string> messages_;
    WarningSink previous_;
};

} // namespace spclab
