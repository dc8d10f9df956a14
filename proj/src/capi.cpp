#include "shelby.h"

#include <cstring>
#include <string>

#include "json.hpp"

#include "shelby/codec.hpp"
#include "shelby/economics.hpp"
#include "shelby/errors.hpp"
#include "shelby/merkle.hpp"
#include "shelby/reliability.hpp"
#include "shelby/scenario.hpp"

using namespace shelby;

namespace {

thread_local std::string g_last_error;

shelby_status status_of(const Error& e) {
    return static_cast<shelby_status>(static_cast<int>(e.code()));
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Runs `fn`, translating the C++ error taxonomy into status codes.
template <typename Fn>
shelby_status guarded(Fn&& fn) {
    try {
        fn();
        return SHELBY_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SHELBY_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return SHELBY_ERR_INTERNAL;
    }
}

} // namespace

struct shelby_codec {
    Codec codec;
};

extern "C" {

const char* shelby_version(void) {
    return "0.1.0";
}

const char* shelby_last_error(void) {
    return g_last_error.c_str();
}

void shelby_string_free(char* s) {
    std::free(s);
}

void shelby_buffer_free(uint8_t* p) {
    std::free(p);
}

shelby_status shelby_codec_create(uint32_t k, uint32_t m, uint32_t d, uint32_t scheme,
                                  uint64_t chunk_size, shelby_codec** out) {
    if (!out) {
        g_last_error = "null output pointer";
        return SHELBY_ERR_PARAM;
    }
    *out = nullptr;
    return guarded([&] {
        const CodingParams params = scheme == SHELBY_SCHEME_CLAY
                                        ? CodingParams::clay(k, m, d, chunk_size)
                                        : CodingParams::reed_solomon(k, m, chunk_size);
        *out = new shelby_codec{Codec(params)};
    });
}

void shelby_codec_destroy(shelby_codec* codec) {
    delete codec;
}

uint32_t shelby_codec_n(const shelby_codec* codec) {
    return codec ? codec->codec.params().n() : 0;
}

uint32_t shelby_codec_alpha(const shelby_codec* codec) {
    return codec ? codec->codec.params().alpha() : 0;
}

uint64_t shelby_codec_chunk_size(const shelby_codec* codec) {
    return codec ? codec->codec.params().chunk_size : 0;
}

shelby_status shelby_codec_encode(const shelby_codec* codec, const uint8_t* data,
                                  size_t data_len, uint8_t* out_chunks) {
    if (!codec || !data || !out_chunks) {
        g_last_error = "null argument";
        return SHELBY_ERR_PARAM;
    }
    return guarded([&] {
        const auto chunks = codec->codec.encode(ByteSpan(data, data_len));
        const auto chunk_size = codec->codec.params().chunk_size;
        for (const auto& c : chunks) {
            std::memcpy(out_chunks + std::uint64_t(c.index) * chunk_size, c.payload.data(),
                        chunk_size);
        }
    });
}

shelby_status shelby_codec_decode(const shelby_codec* codec, const uint32_t* indices,
                                  const uint8_t* const* chunks, size_t count,
                                  uint8_t* out_data) {
    if (!codec || !indices || !chunks || !out_data) {
        g_last_error = "null argument";
        return SHELBY_ERR_PARAM;
    }
    return guarded([&] {
        const auto chunk_size = codec->codec.params().chunk_size;
        std::vector<CodedChunk> in(count);
        for (size_t i = 0; i < count; ++i) {
            if (!chunks[i]) throw_error(Errc::param, "null chunk pointer");
            in[i].index = indices[i];
            in[i].payload.assign(chunks[i], chunks[i] + chunk_size);
        }
        const Bytes data = codec->codec.decode(in);
        std::memcpy(out_data, data.data(), data.size());
    });
}

shelby_status shelby_codec_repair(const shelby_codec* codec, uint32_t lost_index,
                                  const uint32_t* helper_indices,
                                  const uint8_t* const* helper_chunks, size_t helper_count,
                                  uint8_t* out_chunk, uint64_t* out_bytes_downloaded,
                                  uint64_t* out_rs_equivalent_bytes) {
    if (!codec || !helper_indices || !helper_chunks || !out_chunk) {
        g_last_error = "null argument";
        return SHELBY_ERR_PARAM;
    }
    return guarded([&] {
        const auto chunk_size = codec->codec.params().chunk_size;
        std::vector<CodedChunk> helpers(helper_count);
        for (size_t i = 0; i < helper_count; ++i) {
            if (!helper_chunks[i]) throw_error(Errc::param, "null helper pointer");
            helpers[i].index = helper_indices[i];
            helpers[i].payload.assign(helper_chunks[i], helper_chunks[i] + chunk_size);
        }
        auto [chunk, report] = codec->codec.repair(lost_index, helpers);
        std::memcpy(out_chunk, chunk.payload.data(), chunk_size);
        if (out_bytes_downloaded) *out_bytes_downloaded = report.bytes_downloaded;
        if (out_rs_equivalent_bytes) *out_rs_equivalent_bytes = report.rs_equivalent_bytes;
    });
}

shelby_status shelby_merkle_commit(const uint8_t* data, size_t data_len, uint32_t leaf_width,
                                   uint8_t out_root[32], uint64_t* out_leaf_count) {
    if (!data || !out_root) {
        g_last_error = "null argument";
        return SHELBY_ERR_PARAM;
    }
    return guarded([&] {
        const auto c = commit_data(ByteSpan(data, data_len), leaf_width);
        std::memcpy(out_root, c.root.data(), 32);
        if (out_leaf_count) *out_leaf_count = c.leaf_count;
    });
}

shelby_status shelby_merkle_open(const uint8_t* data, size_t data_len, uint32_t leaf_width,
                                 uint64_t leaf_index, uint8_t** out_proof,
                                 size_t* out_proof_len) {
    if (!data || !out_proof || !out_proof_len) {
        g_last_error = "null argument";
        return SHELBY_ERR_PARAM;
    }
    *out_proof = nullptr;
    *out_proof_len = 0;
    return guarded([&] {
        const auto proof = open_data(ByteSpan(data, data_len), leaf_index, leaf_width);
        const Bytes wire = proof.serialize();
        auto* buf = static_cast<uint8_t*>(std::malloc(wire.size()));
        if (!buf) throw_error(Errc::internal, "out of memory");
        std::memcpy(buf, wire.data(), wire.size());
        *out_proof = buf;
        *out_proof_len = wire.size();
    });
}

int shelby_merkle_verify(const uint8_t root[32], uint64_t leaf_count, const uint8_t* proof,
                         size_t proof_len) {
    if (!root || !proof) return 0;
    try {
        const auto parsed = InclusionProof::deserialize(ByteSpan(proof, proof_len));
        MerkleCommitment c;
        std::memcpy(c.root.data(), root, 32);
        c.leaf_count = leaf_count;
        return verify(c, parsed) ? 1 : 0;
    } catch (...) {
        return 0;
    }
}

shelby_status shelby_prepare_file(const char* input_path, const char* out_dir,
                                  const char* params_json, char** out_manifest_path) {
    if (!input_path || !out_dir) {
        g_last_error = "null argument";
        return SHELBY_ERR_PARAM;
    }
    return guarded([&] {
        nlohmann::json j = nlohmann::json::object();
        if (params_json && *params_json) {
            try {
                j = nlohmann::json::parse(params_json);
            } catch (const nlohmann::json::exception& e) {
                throw_error(Errc::format, std::string("params: ") + e.what());
            }
        }
        const auto scheme = j.value("scheme", std::string("reed_solomon"));
        const auto k = j.value("k", 10u);
        const auto m = j.value("m", 6u);
        const auto chunkset_size = j.value("chunkset_size", kDefaultChunksetSize);
        const auto sample_size = j.value("sample_size", kDefaultSampleSize);
        const std::uint64_t chunk_size = chunkset_size / std::max(1u, k);
        const CodingParams params =
            scheme == "clay"
                ? CodingParams::clay(k, m, j.value("d", k + m - 1), chunk_size)
                : CodingParams::reed_solomon(k, m, chunk_size);
        const auto manifest = prepare_file(input_path, out_dir, params, chunkset_size,
                                           sample_size);
        if (out_manifest_path) *out_manifest_path = dup_string(manifest);
    });
}

shelby_status shelby_reassemble_file(const char* manifest_path, const char* output_path,
                                     uint64_t offset, uint64_t length) {
    if (!manifest_path || !output_path) {
        g_last_error = "null argument";
        return SHELBY_ERR_PARAM;
    }
    return guarded([&] { reassemble_file(manifest_path, output_path, offset, length); });
}

shelby_status shelby_econ_check(const char* params_json, char** out_report_json) {
    if (!out_report_json) {
        g_last_error = "null output pointer";
        return SHELBY_ERR_PARAM;
    }
    return guarded([&] {
        const auto params = EconomicParams::from_json(params_json ? params_json : "{}");
        *out_report_json = dup_string(full_report(params).to_json());
    });
}

shelby_status shelby_econ_check_table(const char* params_json, char** out_table_text) {
    if (!out_table_text) {
        g_last_error = "null output pointer";
        return SHELBY_ERR_PARAM;
    }
    return guarded([&] {
        const auto params = EconomicParams::from_json(params_json ? params_json : "{}");
        *out_table_text = dup_string(full_report(params).to_table());
    });
}

shelby_status shelby_reliability_report(char** out_report_json) {
    if (!out_report_json) {
        g_last_error = "null output pointer";
        return SHELBY_ERR_PARAM;
    }
    return guarded([&] { *out_report_json = dup_string(reliability_report_json()); });
}

shelby_status shelby_reliability_table(char** out_csv) {
    if (!out_csv) {
        g_last_error = "null output pointer";
        return SHELBY_ERR_PARAM;
    }
    return guarded([&] { *out_csv = dup_string(reliability_table_csv()); });
}

shelby_status shelby_run_scenario(const char* scenario_path, const char* out_dir,
                                  const char* experiment_override, int deterministic,
                                  int force, uint64_t seed_override, uint32_t trials_override,
                                  char** out_summary_json) {
    if (!scenario_path || !out_dir) {
        g_last_error = "null argument";
        return SHELBY_ERR_PARAM;
    }
    bool expectations_ok = true;
    const auto status = guarded([&] {
        Scenario scenario = Scenario::load_file(scenario_path);
        if (experiment_override && *experiment_override) {
            scenario.experiment = experiment_override;
        }
        if (seed_override != 0) scenario.seed = seed_override;
        if (trials_override != 0) scenario.trials = trials_override;
        const auto outcome =
            run_scenario(scenario, out_dir, deterministic != 0, force != 0);
        expectations_ok = outcome.expectations_ok;
        if (out_summary_json) *out_summary_json = dup_string(outcome.summary_json);
        if (!outcome.expectations_ok) {
            std::string what = "scenario expectations failed:";
            for (const auto& f : outcome.failed_expectations) what += " " + f;
            g_last_error = what;
        }
    });
    if (status != SHELBY_OK) return status;
    return expectations_ok ? SHELBY_OK : SHELBY_ERR_EXPECTATION;
}

} // extern "C"
