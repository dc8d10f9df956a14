#pragma once

// Minimal arbitrary-precision unsigned integer and rational, used only as an
// independent exact-arithmetic oracle in tests. Supports what the reliability
// formula needs: products of u64 factors and small powers, then conversion to
// long double for relative comparison.

#include <cstdint>
#include <vector>

namespace testsupport {

class BigUint {
public:
    BigUint() : limbs_{0} {}
    explicit BigUint(std::uint64_t v) : limbs_{v} {}

    BigUint& mul(std::uint64_t f) {
        unsigned __int128 carry = 0;
        for (auto& limb : limbs_) {
            const unsigned __int128 prod = (unsigned __int128)limb * f + carry;
            limb = static_cast<std::uint64_t>(prod);
            carry = prod >> 64;
        }
        if (carry != 0) limbs_.push_back(static_cast<std::uint64_t>(carry));
        return *this;
    }

    [[nodiscard]] long double to_long_double() const {
        long double acc = 0.0L;
        for (auto it = limbs_.rbegin(); it != limbs_.rend(); ++it) {
            acc = acc * 18446744073709551616.0L + static_cast<long double>(*it);
        }
        return acc;
    }

private:
    std::vector<std::uint64_t> limbs_; // little-endian base 2^64
};

struct BigRational {
    BigUint num{1};
    BigUint den{1};

    BigRational& mul_ratio(std::uint64_t n, std::uint64_t d) {
        num.mul(n);
        den.mul(d);
        return *this;
    }

    BigRational& pow_ratio(std::uint64_t n, std::uint64_t d, unsigned e) {
        for (unsigned i = 0; i < e; ++i) mul_ratio(n, d);
        return *this;
    }

    [[nodiscard]] long double to_long_double() const {
        return num.to_long_double() / den.to_long_double();
    }
};

inline std::uint64_t binomial_u64(std::uint32_t n, std::uint32_t r) {
    if (r > n) return 0;
    if (r > n - r) r = n - r;
    std::uint64_t acc = 1;
    for (std::uint32_t i = 1; i <= r; ++i) {
        acc = acc * (n - r + i) / i;
    }
    return acc;
}

// Exact evaluation of the annual-loss formula
//   n * (pn/pd) * C(n-1, m) * ((pn/pd) * T / 8760)^m
// with the loss probability given as the rational pn/pd and T in whole hours.
inline long double exact_durability(std::uint32_t n_nodes, std::uint64_t p_num,
                                    std::uint64_t p_den, std::uint64_t t_critical_hours,
                                    std::uint32_t m) {
    BigRational r;
    r.mul_ratio(n_nodes, 1);
    r.mul_ratio(p_num, p_den);
    r.mul_ratio(binomial_u64(n_nodes - 1, m), 1);
    r.pow_ratio(p_num * t_critical_hours, p_den * 8760, m);
    return r.to_long_double();
}

} // namespace testsupport
