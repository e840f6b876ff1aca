#pragma once

#include <stdexcept>
#include <string>

namespace stego {

// Error taxonomy shared by the library and the CLI exit codes.
enum class ErrorKind {
    usage = 1,      // bad arguments, missing paths, out-of-range parameters
    format = 2,     // malformed carrier or container file
    capacity = 3,   // payload does not fit
    integrity = 4,  // bad magic, CRC mismatch, wrong passphrase
    numeric = 5,    // degenerate or ill-conditioned computation
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(ErrorKind::usage, msg) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error(ErrorKind::format, msg) {}
};

struct CapacityError : Error {
    explicit CapacityError(const std::string& msg) : Error(ErrorKind::capacity, msg) {}
};

struct IntegrityError : Error {
    explicit IntegrityError(const std::string& msg) : Error(ErrorKind::integrity, msg) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

} // namespace stego
