#pragma once

#include <stdexcept>
#include <string>

namespace shearscope {

// Exit-code classes used by the CLI: config 2, numerical precondition 3, I/O 4.
enum class ErrorKind { config = 2, numerical = 3, io = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }
    const char* kind_name() const noexcept {
        switch (kind_) {
        case ErrorKind::config: return "config";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::io: return "io";
        }
        return "unknown";
    }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorKind::config, m) {}
};
struct NumericalError : Error {
    explicit NumericalError(const std::string& m) : Error(ErrorKind::numerical, m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error(ErrorKind::io, m) {}
};

}  // namespace shearscope
