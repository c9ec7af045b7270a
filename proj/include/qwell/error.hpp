#pragma once

#include <stdexcept>
#include <string>

namespace qwell {

/// Error with a stable machine-readable code alongside the human message.
/// Codes in use: parse_error, bad_argument, domain_error, numeric_error, io_error.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
    throw Error(code, message);
}

} // namespace qwell
