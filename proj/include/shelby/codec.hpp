#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "shelby/bytes.hpp"

namespace shelby {

enum class Scheme : std::uint8_t {
    ReedSolomon = 0,
    Clay = 1,
};

// Erasure-coding configuration. n = k + m chunks per chunkset; d is the
// helper count for single-node repair. The coupled-layer scheme requires
// q = d - k + 1 to divide n (n = q * t) and stores alpha = q^t field-element
// rows per chunk; Reed-Solomon is the scalar case (alpha = 1).
struct CodingParams {
    std::uint32_t k = 0;
    std::uint32_t m = 0;
    std::uint32_t d = 0;
    Scheme scheme = Scheme::ReedSolomon;
    std::uint64_t chunk_size = 0;

    [[nodiscard]] std::uint32_t n() const { return k + m; }
    [[nodiscard]] std::uint32_t q() const { return d - k + 1; }
    [[nodiscard]] std::uint32_t t() const { return n() / q(); }
    [[nodiscard]] std::uint32_t alpha() const;
    [[nodiscard]] std::uint64_t chunkset_size() const { return std::uint64_t(k) * chunk_size; }

    // Throws Errc::param when the configuration is unusable.
    void validate() const;

    static CodingParams reed_solomon(std::uint32_t k, std::uint32_t m, std::uint64_t chunk_size);
    static CodingParams clay(std::uint32_t k, std::uint32_t m, std::uint32_t d,
                             std::uint64_t chunk_size);
};

struct CodedChunk {
    std::uint32_t index = 0;
    Bytes payload;
};

struct RepairReport {
    std::uint32_t repaired_index = 0;
    std::uint64_t bytes_downloaded = 0;          // helper bytes actually read
    std::vector<std::uint32_t> helpers_used;
    std::uint64_t rs_equivalent_bytes = 0;       // B: what a full-decode repair reads
};

class Codec {
public:
    explicit Codec(const CodingParams& params);
    ~Codec();
    Codec(Codec&&) noexcept;
    Codec& operator=(Codec&&) noexcept;
    Codec(const Codec&) = delete;
    Codec& operator=(const Codec&) = delete;

    [[nodiscard]] const CodingParams& params() const;

    // data.size() must equal k * chunk_size. Chunks 0..k-1 are systematic
    // copies of the data stripes for both schemes.
    [[nodiscard]] std::vector<CodedChunk> encode(ByteSpan data) const;

    // Any >= k distinct chunks reconstruct the original data exactly.
    [[nodiscard]] Bytes decode(const std::vector<CodedChunk>& chunks) const;

    // Reconstructs the full codeword (all n chunks) from >= k chunks.
    [[nodiscard]] std::vector<CodedChunk> decode_all(const std::vector<CodedChunk>& chunks) const;

    // Rebuilds one lost chunk. The coupled-layer scheme with d = n - 1 and all
    // survivors helping reads only d * B / (k * (d - k + 1)) helper bytes; any
    // other pattern falls back to decode-then-reencode (B bytes). The report
    // counts bytes actually read from helpers.
    [[nodiscard]] std::pair<CodedChunk, RepairReport>
    repair(std::uint32_t lost_index, const std::vector<CodedChunk>& helpers) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace shelby
