#pragma once

#include <cstdint>
#include <vector>

#include "shelby/bytes.hpp"

namespace shelby {

// Merkle vector commitments over fixed-width leaves. Leaf and interior hashes
// carry distinct one-byte domain prefixes; an odd node at any layer is paired
// with itself. Default leaf width is the 1 KiB audit sample.
inline constexpr std::uint32_t kDefaultSampleSize = 1024;

struct MerkleCommitment {
    Hash32 root{};
    std::uint64_t leaf_count = 0;
    std::uint32_t leaf_width = kDefaultSampleSize;
};

struct ProofStep {
    std::uint8_t sibling_on_right = 0; // 1: sibling hashes on the right
    Hash32 sibling{};
};

struct InclusionProof {
    std::uint64_t leaf_index = 0;
    Bytes leaf_bytes;
    std::vector<ProofStep> path;

    // Wire layout (big-endian, bit-exact):
    //   u64 leaf_index | u32 leaf_len | leaf bytes | u32 path_len |
    //   path entries of 1-byte side (0 = sibling left, 1 = sibling right)
    //   followed by the 32-byte sibling hash.
    [[nodiscard]] Bytes serialize() const;
    static InclusionProof deserialize(ByteSpan data); // throws Errc::format
};

// Splits `data` into leaf_width leaves, zero-padding the last.
std::vector<Bytes> split_leaves(ByteSpan data, std::uint32_t leaf_width);

MerkleCommitment commit(const std::vector<Bytes>& leaves,
                        std::uint32_t leaf_width = kDefaultSampleSize);

MerkleCommitment commit_data(ByteSpan data, std::uint32_t leaf_width = kDefaultSampleSize);

InclusionProof open(const std::vector<Bytes>& leaves, std::uint64_t index,
                    std::uint32_t leaf_width = kDefaultSampleSize);

InclusionProof open_data(ByteSpan data, std::uint64_t index,
                         std::uint32_t leaf_width = kDefaultSampleSize);

// True iff the proof reconstructs commitment.root at leaf_index. Malformed
// proofs (wrong path length, side bytes inconsistent with the index) return
// false rather than throwing.
bool verify(const MerkleCommitment& commitment, const InclusionProof& proof);

Hash32 leaf_hash(ByteSpan leaf);
Hash32 node_hash(const Hash32& left, const Hash32& right);

} // namespace shelby
