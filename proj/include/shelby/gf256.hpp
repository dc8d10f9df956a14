#pragma once

#include <cstdint>

namespace shelby::gf {

// GF(2^8) with primitive polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11D),
// generator alpha = 2. Addition is XOR. Tables are built once at static
// init and read-only afterwards, so all operations are thread-safe.

struct Tables {
    std::uint8_t exp[512]; // exp[i] = alpha^i, duplicated to skip a modulo
    std::uint8_t log[256]; // log[0] unused
};

const Tables& tables();

inline std::uint8_t add(std::uint8_t a, std::uint8_t b) {
    return a ^ b;
}

inline std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
    if (a == 0 || b == 0) return 0;
    const Tables& t = tables();
    return t.exp[t.log[a] + t.log[b]];
}

// Multiplicative inverse; a must be nonzero.
std::uint8_t inv(std::uint8_t a);

// a / b; b must be nonzero.
std::uint8_t div(std::uint8_t a, std::uint8_t b);

// alpha^e for arbitrary e >= 0.
std::uint8_t pow_alpha(unsigned e);

std::uint8_t pow(std::uint8_t a, unsigned e);

// out[i] ^= coef * in[i]; the codec's inner loop.
void mul_acc(std::uint8_t* out, const std::uint8_t* in, std::size_t len, std::uint8_t coef);

} // namespace shelby::gf
