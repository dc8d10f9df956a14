#include "doctest.h"

#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "shelby.h"

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("shelby-capi-" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::vector<uint8_t> pseudo_bytes(size_t len, uint64_t seed) {
    std::vector<uint8_t> out(len);
    uint64_t s = seed;
    for (auto& b : out) {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        b = static_cast<uint8_t>(s >> 33);
    }
    return out;
}

} // namespace

TEST_CASE("version and error strings exist") {
    CHECK(std::strlen(shelby_version()) > 0);
    CHECK(shelby_last_error() != nullptr);
}

TEST_CASE("codec handle: encode, decode, repair through the C ABI") {
    shelby_codec* codec = nullptr;
    REQUIRE(shelby_codec_create(4, 2, 5, SHELBY_SCHEME_CLAY, 1024, &codec) == SHELBY_OK);
    REQUIRE(codec != nullptr);
    CHECK(shelby_codec_n(codec) == 6);
    CHECK(shelby_codec_alpha(codec) == 8);
    CHECK(shelby_codec_chunk_size(codec) == 1024);

    const auto data = pseudo_bytes(4 * 1024, 1);
    std::vector<uint8_t> chunks(6 * 1024);
    REQUIRE(shelby_codec_encode(codec, data.data(), data.size(), chunks.data()) == SHELBY_OK);

    // Decode from chunks {5, 2, 0, 3}.
    const uint32_t indices[4] = {5, 2, 0, 3};
    const uint8_t* ptrs[4];
    for (int i = 0; i < 4; ++i) ptrs[i] = chunks.data() + indices[i] * 1024;
    std::vector<uint8_t> decoded(4 * 1024);
    REQUIRE(shelby_codec_decode(codec, indices, ptrs, 4, decoded.data()) == SHELBY_OK);
    CHECK(decoded == data);

    // Repair chunk 1 from the other five.
    uint32_t helper_idx[5];
    const uint8_t* helper_ptr[5];
    int h = 0;
    for (uint32_t i = 0; i < 6; ++i) {
        if (i == 1) continue;
        helper_idx[h] = i;
        helper_ptr[h] = chunks.data() + i * 1024;
        ++h;
    }
    std::vector<uint8_t> rebuilt(1024);
    uint64_t bytes_downloaded = 0, rs_equiv = 0;
    REQUIRE(shelby_codec_repair(codec, 1, helper_idx, helper_ptr, 5, rebuilt.data(),
                                &bytes_downloaded, &rs_equiv) == SHELBY_OK);
    CHECK(std::memcmp(rebuilt.data(), chunks.data() + 1024, 1024) == 0);
    CHECK(rs_equiv == 4 * 1024);
    CHECK(bytes_downloaded == 5ull * 4 * 1024 / (4 * 2)); // d*B/(k*(d-k+1))

    // Too few shards surfaces the dedicated status code.
    std::vector<uint8_t> small(4 * 1024);
    REQUIRE(shelby_codec_decode(codec, indices, ptrs, 3, small.data()) ==
            SHELBY_ERR_INSUFFICIENT_SHARDS);
    CHECK(std::strlen(shelby_last_error()) > 0);

    shelby_codec_destroy(codec);
}

TEST_CASE("invalid coding parameters are rejected with SHELBY_ERR_PARAM") {
    shelby_codec* codec = nullptr;
    CHECK(shelby_codec_create(5, 2, 6, SHELBY_SCHEME_CLAY, 64, &codec) == SHELBY_ERR_PARAM);
    CHECK(codec == nullptr);
    CHECK(shelby_codec_create(0, 2, 0, SHELBY_SCHEME_REED_SOLOMON, 64, &codec) ==
          SHELBY_ERR_PARAM);
}

TEST_CASE("merkle commit/open/verify through the C ABI") {
    const auto data = pseudo_bytes(2048 + 37, 7);
    uint8_t root[32];
    uint64_t leaf_count = 0;
    REQUIRE(shelby_merkle_commit(data.data(), data.size(), 256, root, &leaf_count) ==
            SHELBY_OK);
    CHECK(leaf_count == 9);

    uint8_t* proof = nullptr;
    size_t proof_len = 0;
    REQUIRE(shelby_merkle_open(data.data(), data.size(), 256, 8, &proof, &proof_len) ==
            SHELBY_OK);
    REQUIRE(proof != nullptr);
    CHECK(shelby_merkle_verify(root, leaf_count, proof, proof_len) == 1);

    proof[20] ^= 1; // corrupt a leaf byte
    CHECK(shelby_merkle_verify(root, leaf_count, proof, proof_len) == 0);
    proof[20] ^= 1;
    CHECK(shelby_merkle_verify(root, leaf_count, proof, proof_len - 1) == 0);
    shelby_buffer_free(proof);

    CHECK(shelby_merkle_open(data.data(), data.size(), 256, 9, &proof, &proof_len) ==
          SHELBY_ERR_PARAM);
}

TEST_CASE("file pipeline: prepare then reassemble, with chunk loss") {
    TempDir tmp;
    const auto input = tmp.path / "input.bin";
    const auto data = pseudo_bytes(50000, 3);
    {
        std::ofstream out(input, std::ios::binary);
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
    }
    const std::string params =
        R"({"scheme":"clay","k":4,"m":2,"d":5,"chunkset_size":16384,"sample_size":512})";
    char* manifest = nullptr;
    REQUIRE(shelby_prepare_file(input.string().c_str(), (tmp.path / "prep").string().c_str(),
                                params.c_str(), &manifest) == SHELBY_OK);
    REQUIRE(manifest != nullptr);

    // Drop two chunks of the first chunkset; still decodable.
    fs::remove(tmp.path / "prep/chunks/cs00000_c000.bin");
    fs::remove(tmp.path / "prep/chunks/cs00000_c004.bin");

    const auto output = tmp.path / "restored.bin";
    REQUIRE(shelby_reassemble_file(manifest, output.string().c_str(), 0, UINT64_MAX) ==
            SHELBY_OK);
    std::ifstream in(output, std::ios::binary);
    std::vector<uint8_t> restored((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    CHECK(restored == data);

    // A third loss in the same chunkset goes below k.
    fs::remove(tmp.path / "prep/chunks/cs00000_c001.bin");
    CHECK(shelby_reassemble_file(manifest, output.string().c_str(), 0, UINT64_MAX) ==
          SHELBY_ERR_INSUFFICIENT_SHARDS);

    CHECK(shelby_reassemble_file("no-such-manifest.json", output.string().c_str(), 0, 1) ==
          SHELBY_ERR_IO);
    shelby_string_free(manifest);
}

TEST_CASE("economics and reliability reports through the C ABI") {
    char* report = nullptr;
    REQUIRE(shelby_econ_check("{}", &report) == SHELBY_OK);
    std::string text(report);
    shelby_string_free(report);
    CHECK(text.find("\"all_satisfied\": true") != std::string::npos);

    CHECK(shelby_econ_check("{not json", &report) == SHELBY_ERR_FORMAT);

    REQUIRE(shelby_reliability_report(&report) == SHELBY_OK);
    text = report;
    shelby_string_free(report);
    CHECK(text.find("p_annual_data_loss") != std::string::npos);

    char* csv = nullptr;
    REQUIRE(shelby_reliability_table(&csv) == SHELBY_OK);
    CHECK(std::string(csv).find("durability,16,6") != std::string::npos);
    shelby_string_free(csv);
}

TEST_CASE("scenario runner through the C ABI") {
    TempDir tmp;
    const auto scenario_path = tmp.path / "tiny.scenario";
    {
        std::ofstream out(scenario_path);
        out << R"({
  "name": "tiny", "experiment": "simulate", "seed": 9, "epochs": 3, "trials": 2,
  "sp_count": 10,
  "workload": {"blob_count": 1, "chunksets_per_blob": 4},
  "coding": {"scheme": "reed_solomon", "k": 4, "m": 2, "chunk_size": 512},
  "sample_size": 128,
  "economics": {"W": 0.1, "split": 0.7, "p_a": 0.2, "p_ata": 0.05, "S_a": 0.001,
                 "S_ata_factor": 10.0},
  "expect": {"zero_slash_events": true, "all_scores_one": true}
})";
    }
    char* summary = nullptr;
    REQUIRE(shelby_run_scenario(scenario_path.string().c_str(),
                                (tmp.path / "out").string().c_str(), nullptr, 1, 0, 0, 0,
                                &summary) == SHELBY_OK);
    REQUIRE(summary != nullptr);
    CHECK(std::string(summary).find("\"expectations_ok\": true") != std::string::npos);
    shelby_string_free(summary);
    CHECK(fs::exists(tmp.path / "out/ledger_events.ndjson"));
    CHECK(fs::exists(tmp.path / "out/results.csv"));
    CHECK(fs::exists(tmp.path / "out/summary.json"));
    CHECK(fs::exists(tmp.path / "out/incentive_report.json"));
    CHECK(fs::exists(tmp.path / "out/reliability.csv"));

    CHECK(shelby_run_scenario("missing.scenario", (tmp.path / "o2").string().c_str(), nullptr,
                              1, 0, 0, 0, nullptr) == SHELBY_ERR_IO);

    // A scenario whose expectations cannot hold exits with the dedicated code.
    const auto bad_path = tmp.path / "bad.scenario";
    {
        std::ofstream out(bad_path);
        out << R"({
  "name": "bad", "experiment": "simulate", "seed": 9, "epochs": 3, "trials": 1,
  "sp_count": 10,
  "workload": {"blob_count": 1, "chunksets_per_blob": 4},
  "coding": {"scheme": "reed_solomon", "k": 4, "m": 2, "chunk_size": 512},
  "sample_size": 128,
  "economics": {"W": 0.1, "split": 0.7, "p_a": 0.2, "p_ata": 0.05, "S_a": 0.001,
                 "S_ata_factor": 10.0},
  "strategy_mix": {"default": "honest", "overrides": {"0": "forge"}},
  "expect": {"zero_slash_events": true}
})";
    }
    CHECK(shelby_run_scenario(bad_path.string().c_str(), (tmp.path / "o3").string().c_str(),
                              nullptr, 1, 0, 0, 0, nullptr) == SHELBY_ERR_EXPECTATION);
}
