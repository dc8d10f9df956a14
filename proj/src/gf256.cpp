#include "shelby/gf256.hpp"

#include <cstddef>

#include "shelby/errors.hpp"

namespace shelby::gf {

namespace {

constexpr std::uint16_t kPoly = 0x11D;

Tables build_tables() {
    Tables t{};
    std::uint16_t x = 1;
    for (int i = 0; i < 255; ++i) {
        t.exp[i] = static_cast<std::uint8_t>(x);
        t.log[t.exp[i]] = static_cast<std::uint8_t>(i);
        x <<= 1;
        if (x & 0x100) x ^= kPoly;
    }
    for (int i = 255; i < 512; ++i) {
        t.exp[i] = t.exp[i - 255];
    }
    return t;
}

} // namespace

const Tables& tables() {
    static const Tables t = build_tables();
    return t;
}

std::uint8_t inv(std::uint8_t a) {
    if (a == 0) throw_error(Errc::param, "gf256: inverse of zero");
    const Tables& t = tables();
    return t.exp[255 - t.log[a]];
}

std::uint8_t div(std::uint8_t a, std::uint8_t b) {
    if (b == 0) throw_error(Errc::param, "gf256: division by zero");
    if (a == 0) return 0;
    const Tables& t = tables();
    return t.exp[t.log[a] + 255 - t.log[b]];
}

std::uint8_t pow_alpha(unsigned e) {
    return tables().exp[e % 255];
}

std::uint8_t pow(std::uint8_t a, unsigned e) {
    if (e == 0) return 1;
    if (a == 0) return 0;
    const Tables& t = tables();
    const unsigned l = (static_cast<unsigned>(t.log[a]) * e) % 255;
    return t.exp[l];
}

void mul_acc(std::uint8_t* out, const std::uint8_t* in, std::size_t len, std::uint8_t coef) {
    if (coef == 0) return;
    if (coef == 1) {
        for (std::size_t i = 0; i < len; ++i) out[i] ^= in[i];
        return;
    }
    const Tables& t = tables();
    const std::uint8_t* row = t.exp + t.log[coef];
    for (std::size_t i = 0; i < len; ++i) {
        const std::uint8_t s = in[i];
        if (s != 0) out[i] ^= row[t.log[s]];
    }
}

} // namespace shelby::gf
