#include "doctest.h"

#include "shelby/data_prep.hpp"
#include "shelby/errors.hpp"
#include "shelby/rng.hpp"

using namespace shelby;

namespace {

constexpr std::uint64_t kCsSize = 16 << 10; // 16 KiB chunksets for tests

Blob make_blob(DetRng& rng, std::size_t len) {
    Blob b;
    b.id = "blob-" + std::to_string(len);
    b.bytes.resize(len);
    for (auto& v : b.bytes) v = static_cast<std::uint8_t>(rng.next_u64());
    b.paid_duration_epochs = 30;
    return b;
}

CodingParams test_params() {
    return CodingParams::clay(4, 2, 5, kCsSize / 4);
}

} // namespace

TEST_CASE("exact fit: two chunksets, no padding") {
    DetRng rng(1);
    const Blob blob = make_blob(rng, 2 * kCsSize);
    const auto prepared = prepare(blob, test_params(), kCsSize, 512);
    CHECK(prepared.chunksets.size() == 2);
    CHECK(prepared.original_length == 2 * kCsSize);
    CHECK(reassemble_all(prepared) == blob.bytes);
}

TEST_CASE("one byte over: second chunkset nearly all padding") {
    DetRng rng(2);
    const Blob blob = make_blob(rng, kCsSize + 1);
    const auto prepared = prepare(blob, test_params(), kCsSize, 512);
    CHECK(prepared.chunksets.size() == 2);
    // Padding is reversible: output equals input, no zero tail.
    CHECK(reassemble_all(prepared) == blob.bytes);
    // The padded region really is zeros inside the systematic chunks.
    const auto& second = prepared.chunksets[1];
    CHECK(second.chunks[0].payload[1] == 0);
}

TEST_CASE("round trip identity across boundary lengths") {
    DetRng rng(3);
    for (std::uint64_t len : {std::uint64_t(1), kCsSize - 1, kCsSize, kCsSize + 1,
                              10 * kCsSize + 7}) {
        const Blob blob = make_blob(rng, len);
        const auto prepared = prepare(blob, test_params(), kCsSize, 512);
        CHECK(prepared.chunksets.size() == (len + kCsSize - 1) / kCsSize);
        CHECK(reassemble_all(prepared) == blob.bytes);
    }
}

TEST_CASE("random 3.5-chunkset blob round-trips") {
    DetRng rng(4);
    const Blob blob = make_blob(rng, 3 * kCsSize + kCsSize / 2);
    const auto prepared = prepare(blob, test_params(), kCsSize, 512);
    CHECK(reassemble_all(prepared) == blob.bytes);
}

TEST_CASE("range reads decode only intersecting chunksets") {
    DetRng rng(5);
    const Blob blob = make_blob(rng, 4 * kCsSize);
    const auto prepared = prepare(blob, test_params(), kCsSize, 512);

    SUBCASE("inside one chunkset") {
        ReassembleStats stats;
        const auto got = reassemble(prepared, kCsSize + 100, 1000, &stats);
        CHECK(stats.chunksets_decoded == 1);
        CHECK(got == Bytes(blob.bytes.begin() + kCsSize + 100,
                           blob.bytes.begin() + kCsSize + 1100));
    }
    SUBCASE("crossing a chunkset boundary") {
        ReassembleStats stats;
        const auto got = reassemble(prepared, 2 * kCsSize - 64, 128, &stats);
        CHECK(stats.chunksets_decoded == 2);
        CHECK(got == Bytes(blob.bytes.begin() + 2 * kCsSize - 64,
                           blob.bytes.begin() + 2 * kCsSize + 64));
    }
    SUBCASE("full range decodes everything") {
        ReassembleStats stats;
        CHECK(reassemble(prepared, 0, blob.bytes.size(), &stats) == blob.bytes);
        CHECK(stats.chunksets_decoded == 4);
    }
}

TEST_CASE("range beyond original length errors") {
    DetRng rng(6);
    const Blob blob = make_blob(rng, kCsSize + 5);
    const auto prepared = prepare(blob, test_params(), kCsSize, 512);
    CHECK_THROWS_AS((void)reassemble(prepared, kCsSize, 6), Error);
    CHECK_THROWS_AS((void)reassemble(prepared, kCsSize + 6, 0), Error);
}

TEST_CASE("blob root changes when any chunk byte changes") {
    DetRng rng(7);
    const Blob blob = make_blob(rng, kCsSize * 2);
    auto prepared = prepare(blob, test_params(), kCsSize, 512);
    const auto original_root = prepared.blob_root.root;

    auto& payload = prepared.chunksets[1].chunks[3].payload;
    payload[payload.size() / 2] ^= 1;
    prepared.chunksets[1].chunk_roots[3] =
        commit(split_leaves(ByteSpan(payload.data(), payload.size()), 512), 512);
    CHECK(commit_chunk_roots(prepared.chunksets).root != original_root);
}

TEST_CASE("parameter errors") {
    DetRng rng(8);
    Blob empty;
    empty.id = "empty";
    CHECK_THROWS_AS((void)prepare(empty, test_params(), kCsSize, 512), Error);

    const Blob blob = make_blob(rng, 100);
    // chunkset size not a multiple of k.
    CHECK_THROWS_AS((void)prepare(blob, test_params(), kCsSize + 1, 512), Error);
    // chunk size not divisible by alpha = 8.
    CHECK_THROWS_AS((void)prepare(blob, test_params(), 4 * 12, 512), Error);
}

TEST_CASE("manifest lists roots, params and lengths") {
    DetRng rng(9);
    const Blob blob = make_blob(rng, kCsSize + 3);
    const auto prepared = prepare(blob, test_params(), kCsSize, 512);
    const std::string j = manifest_json(prepared);
    CHECK(j.find("\"blob_root\"") != std::string::npos);
    CHECK(j.find("\"original_length\": " + std::to_string(kCsSize + 3)) != std::string::npos);
    CHECK(j.find("\"scheme\": \"clay\"") != std::string::npos);
}
