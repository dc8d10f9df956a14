#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shelby/bytes.hpp"
#include "shelby/codec.hpp"
#include "shelby/merkle.hpp"

namespace shelby {

inline constexpr std::uint64_t kDefaultChunksetSize = 10ull << 20; // ~10 MiB

struct Blob {
    std::string id;
    Bytes bytes;
    std::uint64_t paid_duration_epochs = 0;
};

struct PreparedChunkset {
    std::uint32_t chunkset_index = 0;
    std::vector<CodedChunk> chunks;             // n coded chunks
    std::vector<MerkleCommitment> chunk_roots;  // one sample-leaf tree per chunk
};

// Output of the client-side preparation pipeline: the blob partitioned into
// zero-padded chunksets, each erasure coded and committed; the blob root
// commits the ordered list of all chunk roots.
struct PreparedBlob {
    std::string blob_id;
    CodingParams params;
    std::uint64_t chunkset_size = 0;
    std::uint32_t sample_size = kDefaultSampleSize;
    std::uint64_t original_length = 0;
    std::vector<PreparedChunkset> chunksets;
    MerkleCommitment blob_root;
};

struct ReassembleStats {
    std::uint64_t chunksets_decoded = 0;
    std::uint64_t decode_calls = 0;
};

PreparedBlob prepare(const Blob& blob, const CodingParams& params,
                     std::uint64_t chunkset_size = kDefaultChunksetSize,
                     std::uint32_t sample_size = kDefaultSampleSize);

// Returns exactly the requested original bytes; only chunksets intersecting
// the range are decoded (observable through `stats`).
Bytes reassemble(const PreparedBlob& prepared, std::uint64_t offset, std::uint64_t length,
                 ReassembleStats* stats = nullptr);

Bytes reassemble_all(const PreparedBlob& prepared, ReassembleStats* stats = nullptr);

// Commits the ordered chunk roots of all chunksets into the blob-level tree.
MerkleCommitment commit_chunk_roots(const std::vector<PreparedChunkset>& chunksets);

// JSON manifest used by the prepare/reassemble CLI subcommands.
std::string manifest_json(const PreparedBlob& prepared);

} // namespace shelby
