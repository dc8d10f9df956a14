#pragma once

#include <cstddef>
#include <cstdint>

#include "shelby/bytes.hpp"

namespace shelby {

// Streaming SHA-256 (FIPS 180-4). Self-contained so the core library has no
// crypto dependency; validated against the standard test vectors.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    void update(ByteSpan data) { update(data.data(), data.size()); }
    [[nodiscard]] Hash32 finish();

    static Hash32 digest(ByteSpan data) {
        Sha256 h;
        h.update(data);
        return h.finish();
    }

private:
    void compress(const std::uint8_t* block);

    std::uint32_t state_[8];
    std::uint64_t total_len_;
    std::uint8_t buffer_[64];
    std::size_t buffer_len_;
};

} // namespace shelby
