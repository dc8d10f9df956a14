#pragma once

#include <stdexcept>
#include <string>

namespace shelby {

// Error taxonomy shared by the C++ core and the C API status codes.
enum class Errc {
    ok = 0,
    param = 1,
    insufficient_shards = 2,
    format = 3,
    payment = 4,
    conflict = 5,
    not_found = 6,
    protocol = 7,
    too_early = 8,
    range = 9,
    irrecoverable = 10,
    io = 11,
    expectation = 12,
    internal = 13,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void throw_error(Errc code, const std::string& what) {
    throw Error(code, what);
}

} // namespace shelby
