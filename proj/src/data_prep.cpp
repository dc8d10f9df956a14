#include "shelby/data_prep.hpp"

#include <algorithm>

#include "json.hpp"

#include "shelby/errors.hpp"

namespace shelby {

namespace {

std::vector<Bytes> chunk_sample_leaves(const Bytes& payload, std::uint32_t sample_size) {
    return split_leaves(ByteSpan(payload.data(), payload.size()), sample_size);
}

} // namespace

MerkleCommitment commit_chunk_roots(const std::vector<PreparedChunkset>& chunksets) {
    std::vector<Bytes> leaves;
    for (const auto& cs : chunksets) {
        for (const auto& root : cs.chunk_roots) {
            leaves.emplace_back(root.root.begin(), root.root.end());
        }
    }
    return commit(leaves, 32);
}

PreparedBlob prepare(const Blob& blob, const CodingParams& params, std::uint64_t chunkset_size,
                     std::uint32_t sample_size) {
    params.validate();
    if (blob.bytes.empty()) throw_error(Errc::param, "prepare: empty blob");
    if (chunkset_size == 0 || chunkset_size % params.k != 0) {
        throw_error(Errc::param, "prepare: chunkset_size must be a positive multiple of k");
    }
    const std::uint64_t chunk_size = chunkset_size / params.k;
    if (chunk_size % params.alpha() != 0) {
        throw_error(Errc::param, "prepare: chunk size must be divisible by alpha");
    }
    if (sample_size == 0) throw_error(Errc::param, "prepare: sample_size must be positive");

    CodingParams p = params;
    p.chunk_size = chunk_size;
    Codec codec(p);

    PreparedBlob out;
    out.blob_id = blob.id;
    out.params = p;
    out.chunkset_size = chunkset_size;
    out.sample_size = sample_size;
    out.original_length = blob.bytes.size();

    const std::uint64_t count = (blob.bytes.size() + chunkset_size - 1) / chunkset_size;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t begin = i * chunkset_size;
        const std::uint64_t end = std::min<std::uint64_t>(begin + chunkset_size, blob.bytes.size());
        Bytes piece(blob.bytes.begin() + begin, blob.bytes.begin() + end);
        piece.resize(chunkset_size, 0); // final chunkset zero-padded

        PreparedChunkset cs;
        cs.chunkset_index = static_cast<std::uint32_t>(i);
        cs.chunks = codec.encode(piece);
        cs.chunk_roots.reserve(cs.chunks.size());
        for (const auto& chunk : cs.chunks) {
            cs.chunk_roots.push_back(commit(chunk_sample_leaves(chunk.payload, sample_size),
                                            sample_size));
        }
        out.chunksets.push_back(std::move(cs));
    }
    out.blob_root = commit_chunk_roots(out.chunksets);
    return out;
}

Bytes reassemble(const PreparedBlob& prepared, std::uint64_t offset, std::uint64_t length,
                 ReassembleStats* stats) {
    if (offset + length > prepared.original_length || offset > prepared.original_length) {
        throw_error(Errc::range, "reassemble: range beyond original length");
    }
    Bytes out;
    out.reserve(length);
    if (length == 0) return out;

    Codec codec(prepared.params);
    const std::uint64_t cs_size = prepared.chunkset_size;
    const std::uint64_t first = offset / cs_size;
    const std::uint64_t last = (offset + length - 1) / cs_size;

    for (std::uint64_t i = first; i <= last; ++i) {
        const auto& cs = prepared.chunksets[i];
        const Bytes data = codec.decode(cs.chunks);
        if (stats) {
            ++stats->chunksets_decoded;
            ++stats->decode_calls;
        }
        const std::uint64_t cs_begin = i * cs_size;
        const std::uint64_t lo = std::max(offset, cs_begin) - cs_begin;
        const std::uint64_t hi = std::min(offset + length, cs_begin + cs_size) - cs_begin;
        out.insert(out.end(), data.begin() + lo, data.begin() + hi);
    }
    return out;
}

Bytes reassemble_all(const PreparedBlob& prepared, ReassembleStats* stats) {
    return reassemble(prepared, 0, prepared.original_length, stats);
}

std::string manifest_json(const PreparedBlob& prepared) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["blob_id"] = prepared.blob_id;
    j["original_length"] = prepared.original_length;
    j["chunkset_size"] = prepared.chunkset_size;
    j["sample_size"] = prepared.sample_size;
    j["coding"] = {
        {"scheme", prepared.params.scheme == Scheme::Clay ? "clay" : "reed_solomon"},
        {"k", prepared.params.k},
        {"m", prepared.params.m},
        {"d", prepared.params.d},
        {"chunk_size", prepared.params.chunk_size},
        {"alpha", prepared.params.alpha()},
    };
    j["blob_root"] = to_hex(prepared.blob_root.root);
    auto chunksets = nlohmann::ordered_json::array();
    for (const auto& cs : prepared.chunksets) {
        auto roots = nlohmann::ordered_json::array();
        for (const auto& r : cs.chunk_roots) roots.push_back(to_hex(r.root));
        chunksets.push_back({{"chunkset_index", cs.chunkset_index}, {"chunk_roots", roots}});
    }
    j["chunksets"] = std::move(chunksets);
    return j.dump(2);
}

} // namespace shelby
