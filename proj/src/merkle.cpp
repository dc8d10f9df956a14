#include "shelby/merkle.hpp"

#include <cstring>

#include "shelby/errors.hpp"
#include "shelby/sha256.hpp"

namespace shelby {

namespace {

constexpr std::uint8_t kLeafDomain = 0x00;
constexpr std::uint8_t kNodeDomain = 0x01;

std::uint32_t tree_height(std::uint64_t leaf_count) {
    std::uint32_t h = 0;
    std::uint64_t width = 1;
    while (width < leaf_count) {
        width <<= 1;
        ++h;
    }
    return h;
}

// Hashes of one layer reduced to the next; odd tail pairs with itself.
std::vector<Hash32> reduce_layer(const std::vector<Hash32>& layer) {
    std::vector<Hash32> next((layer.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i) {
        const Hash32& left = layer[2 * i];
        const Hash32& right = (2 * i + 1 < layer.size()) ? layer[2 * i + 1] : layer[2 * i];
        next[i] = node_hash(left, right);
    }
    return next;
}

std::vector<Hash32> hash_leaves(const std::vector<Bytes>& leaves, std::uint32_t leaf_width) {
    std::vector<Hash32> out(leaves.size());
    Bytes padded;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].size() == leaf_width) {
            out[i] = leaf_hash(leaves[i]);
        } else if (leaves[i].size() < leaf_width) {
            padded.assign(leaf_width, 0);
            std::memcpy(padded.data(), leaves[i].data(), leaves[i].size());
            out[i] = leaf_hash(padded);
        } else {
            throw_error(Errc::param, "merkle: leaf wider than leaf_width");
        }
    }
    return out;
}

} // namespace

Hash32 leaf_hash(ByteSpan leaf) {
    Sha256 h;
    h.update(&kLeafDomain, 1);
    h.update(leaf);
    return h.finish();
}

Hash32 node_hash(const Hash32& left, const Hash32& right) {
    Sha256 h;
    h.update(&kNodeDomain, 1);
    h.update(left.data(), left.size());
    h.update(right.data(), right.size());
    return h.finish();
}

std::vector<Bytes> split_leaves(ByteSpan data, std::uint32_t leaf_width) {
    if (leaf_width == 0) throw_error(Errc::param, "merkle: leaf_width must be positive");
    if (data.empty()) throw_error(Errc::param, "merkle: empty data");
    std::vector<Bytes> leaves;
    for (std::size_t off = 0; off < data.size(); off += leaf_width) {
        const std::size_t len = std::min<std::size_t>(leaf_width, data.size() - off);
        leaves.emplace_back(data.begin() + off, data.begin() + off + len);
    }
    return leaves;
}

MerkleCommitment commit(const std::vector<Bytes>& leaves, std::uint32_t leaf_width) {
    if (leaves.empty()) throw_error(Errc::param, "merkle: empty leaf list");
    std::vector<Hash32> layer = hash_leaves(leaves, leaf_width);
    while (layer.size() > 1) {
        layer = reduce_layer(layer);
    }
    MerkleCommitment c;
    c.root = layer[0];
    c.leaf_count = leaves.size();
    c.leaf_width = leaf_width;
    return c;
}

MerkleCommitment commit_data(ByteSpan data, std::uint32_t leaf_width) {
    return commit(split_leaves(data, leaf_width), leaf_width);
}

InclusionProof open(const std::vector<Bytes>& leaves, std::uint64_t index,
                    std::uint32_t leaf_width) {
    if (leaves.empty()) throw_error(Errc::param, "merkle: empty leaf list");
    if (index >= leaves.size()) throw_error(Errc::param, "merkle: leaf index out of range");

    InclusionProof proof;
    proof.leaf_index = index;
    proof.leaf_bytes = leaves[index];
    proof.leaf_bytes.resize(leaf_width, 0);

    std::vector<Hash32> layer = hash_leaves(leaves, leaf_width);
    std::uint64_t pos = index;
    const std::uint32_t height = tree_height(leaves.size());
    for (std::uint32_t level = 0; level < height; ++level) {
        ProofStep step;
        if (pos % 2 == 0) {
            step.sibling_on_right = 1;
            step.sibling = (pos + 1 < layer.size()) ? layer[pos + 1] : layer[pos];
        } else {
            step.sibling_on_right = 0;
            step.sibling = layer[pos - 1];
        }
        proof.path.push_back(step);
        layer = reduce_layer(layer);
        pos /= 2;
    }
    return proof;
}

InclusionProof open_data(ByteSpan data, std::uint64_t index, std::uint32_t leaf_width) {
    return open(split_leaves(data, leaf_width), index, leaf_width);
}

bool verify(const MerkleCommitment& commitment, const InclusionProof& proof) {
    if (commitment.leaf_count == 0) return false;
    if (proof.leaf_index >= commitment.leaf_count) return false;
    if (proof.path.size() != tree_height(commitment.leaf_count)) return false;

    Hash32 acc = leaf_hash(proof.leaf_bytes);
    std::uint64_t pos = proof.leaf_index;
    for (const auto& step : proof.path) {
        // The side must match the bit of the index path; a proof shown under
        // a different index fails here or reassembles to a different root.
        const std::uint8_t expect_right = (pos % 2 == 0) ? 1 : 0;
        if (step.sibling_on_right != expect_right) return false;
        acc = step.sibling_on_right ? node_hash(acc, step.sibling)
                                    : node_hash(step.sibling, acc);
        pos /= 2;
    }
    return acc == commitment.root;
}

Bytes InclusionProof::serialize() const {
    Bytes out;
    put_u64_be(out, leaf_index);
    put_u32_be(out, static_cast<std::uint32_t>(leaf_bytes.size()));
    out.insert(out.end(), leaf_bytes.begin(), leaf_bytes.end());
    put_u32_be(out, static_cast<std::uint32_t>(path.size()));
    for (const auto& step : path) {
        out.push_back(step.sibling_on_right);
        out.insert(out.end(), step.sibling.begin(), step.sibling.end());
    }
    return out;
}

InclusionProof InclusionProof::deserialize(ByteSpan data) {
    const auto need = [&](std::size_t off, std::size_t len) {
        if (off + len > data.size()) throw_error(Errc::format, "merkle proof: truncated");
    };
    std::size_t off = 0;
    InclusionProof proof;
    need(off, 8);
    proof.leaf_index = get_u64_be(data.data() + off);
    off += 8;
    need(off, 4);
    const std::uint32_t leaf_len = get_u32_be(data.data() + off);
    off += 4;
    need(off, leaf_len);
    proof.leaf_bytes.assign(data.begin() + off, data.begin() + off + leaf_len);
    off += leaf_len;
    need(off, 4);
    const std::uint32_t path_len = get_u32_be(data.data() + off);
    off += 4;
    if (path_len > 64) throw_error(Errc::format, "merkle proof: path too long");
    proof.path.resize(path_len);
    for (auto& step : proof.path) {
        need(off, 33);
        step.sibling_on_right = data[off];
        if (step.sibling_on_right > 1) throw_error(Errc::format, "merkle proof: bad side byte");
        std::memcpy(step.sibling.data(), data.data() + off + 1, 32);
        off += 33;
    }
    if (off != data.size()) throw_error(Errc::format, "merkle proof: trailing bytes");
    return proof;
}

} // namespace shelby
