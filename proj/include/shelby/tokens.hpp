#pragma once

#include <cmath>
#include <cstdint>

namespace shelby {

// Ledger accounting is integer, in units of 1e-9 token, so conservation
// invariants hold exactly and replays are bit-identical. One unit is also the
// smallest micropayment the channels support.
using Tokens = std::int64_t;

inline constexpr double kTokenUnit = 1e-9;

inline Tokens to_units(double tokens) {
    return static_cast<Tokens>(std::llround(tokens / kTokenUnit));
}

inline double to_value(Tokens units) {
    return static_cast<double>(units) * kTokenUnit;
}

} // namespace shelby
