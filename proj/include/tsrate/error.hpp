#pragma once

#include <stdexcept>
#include <string>

namespace tsrate {

// Error taxonomy used for process exit codes: validation errors (bad input
// data or config) exit with 2, everything else with 1.
enum class ErrorKind { Validation, Io, Internal };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    const char* kind_name() const noexcept {
        switch (kind_) {
            case ErrorKind::Validation: return "validation";
            case ErrorKind::Io: return "io";
            default: return "internal";
        }
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_validation(const std::string& msg) {
    throw Error(ErrorKind::Validation, msg);
}

[[noreturn]] inline void fail_io(const std::string& msg) {
    throw Error(ErrorKind::Io, msg);
}

[[noreturn]] inline void fail_internal(const std::string& msg) {
    throw Error(ErrorKind::Internal, msg);
}

}  // namespace tsrate
