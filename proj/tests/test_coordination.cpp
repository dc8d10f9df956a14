#include "doctest.h"

#include <cmath>

#include "shelby/coordination.hpp"
#include "shelby/data_prep.hpp"
#include "shelby/errors.hpp"
#include "shelby/rng.hpp"

using namespace shelby;

namespace {

struct Fixture {
    Ledger ledger;
    PreparedBlob prepared;

    explicit Fixture(std::uint32_t sp_count = 20, Hash32 seed = {42})
        : ledger(make_config(seed)), prepared(make_prepared()) {
        ledger.mint("client", to_units(10000.0));
        for (std::uint32_t i = 0; i < sp_count; ++i) {
            ledger.add_sp(to_units(10.0), to_units(1.0), 10ull << 30);
        }
    }

    static LedgerConfig make_config(const Hash32& seed) {
        LedgerConfig cfg;
        cfg.genesis_seed = seed;
        cfg.econ.W = 0.023;
        return cfg;
    }

    static PreparedBlob make_prepared() {
        DetRng rng(5);
        Blob blob;
        blob.id = "blob-1";
        blob.bytes.resize(40960);
        for (auto& b : blob.bytes) b = static_cast<std::uint8_t>(rng.next_u64());
        return prepare(blob, CodingParams::reed_solomon(10, 6, 1), 40960, 512);
    }

    const BlobMetadata& register_it(const std::string& id = "blob-1") {
        return ledger.register_blob(id, prepared.blob_root.root, roots(), prepared.params.chunk_size,
                                    static_cast<std::uint32_t>(prepared.params.chunk_size / 512),
                                    "client", to_units(1.0), 30);
    }

    [[nodiscard]] std::vector<std::vector<Hash32>> roots() const {
        std::vector<std::vector<Hash32>> out;
        for (const auto& cs : prepared.chunksets) {
            std::vector<Hash32> row;
            for (const auto& r : cs.chunk_roots) row.push_back(r.root);
            out.push_back(row);
        }
        return out;
    }
};

} // namespace

TEST_CASE("registration assigns 16 distinct SPs for one (10,6) chunkset") {
    Fixture fx;
    const auto& meta = fx.register_it();
    CHECK(meta.assignment.size() == 1);
    CHECK(meta.assignment[0].size() == 16);
    CHECK(meta.assigned_sps().size() == 16); // distinct: one chunk per SP per chunkset
    CHECK(meta.state == BlobState::Registered);
}

TEST_CASE("same seed and inputs give the identical assignment") {
    Fixture a(20, Hash32{7});
    Fixture b(20, Hash32{7});
    CHECK(a.register_it().assignment == b.register_it().assignment);

    Fixture c(20, Hash32{8});
    // Different genesis seed: overwhelmingly likely to differ.
    CHECK(c.register_it().assignment != a.register_it("blob-other").assignment);
}

TEST_CASE("payment below the required escrow is rejected") {
    Fixture fx;
    const Tokens required =
        fx.ledger.required_payment(16 * fx.prepared.params.chunk_size, 30);
    CHECK_THROWS_AS((void)fx.ledger.register_blob("poor", fx.prepared.blob_root.root, fx.roots(),
                                                  fx.prepared.params.chunk_size, 8, "client",
                                                  required - 1, 30),
                    Error);
}

TEST_CASE("duplicate blob id conflicts: blobs are immutable") {
    Fixture fx;
    fx.register_it();
    CHECK_THROWS_AS((void)fx.register_it(), Error);
    try {
        fx.register_it();
    } catch (const Error& e) {
        CHECK(e.code() == Errc::conflict);
    }
}

TEST_CASE("a wrong blob root is rejected at registration") {
    Fixture fx;
    Hash32 bogus{};
    bogus[0] = 0xFF;
    CHECK_THROWS_AS((void)fx.ledger.register_blob("bad", bogus, fx.roots(),
                                                  fx.prepared.params.chunk_size, 8, "client",
                                                  to_units(1.0), 30),
                    Error);
}

TEST_CASE("mark_ready requires every assigned SP to ack") {
    Fixture fx;
    const auto& meta = fx.register_it();
    auto acks = meta.assigned_sps();
    const SpId missing = *acks.begin();
    acks.erase(missing);
    CHECK_THROWS_AS(fx.ledger.mark_ready("blob-1", acks), Error);
    acks.insert(missing);
    fx.ledger.mark_ready("blob-1", acks);
    CHECK(fx.ledger.blobs().at("blob-1").state == BlobState::Ready);
}

TEST_CASE("beacon determinism and separation") {
    Fixture fx;
    CHECK(fx.ledger.beacon(3, "internal-audit") == fx.ledger.beacon(3, "internal-audit"));
    // Tag separation over many tag pairs.
    DetRng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const auto a = "tag-" + std::to_string(rng.next_u64());
        const auto b = "tag-" + std::to_string(rng.next_u64());
        if (a == b) continue;
        CHECK(fx.ledger.beacon(5, a) != fx.ledger.beacon(5, b));
    }
    // Epoch separation.
    for (std::uint64_t e = 0; e < 1000; ++e) {
        CHECK(fx.ledger.beacon(e, "x") != fx.ledger.beacon(e + 1, "x"));
    }
}

TEST_CASE("token conservation across registration, disbursement, slashing, channels") {
    Fixture fx;
    const Tokens supply = fx.ledger.total_supply();
    const auto& meta = fx.register_it();

    CHECK(fx.ledger.total_supply() == supply);

    EpochOutcome outcome;
    for (auto sp : meta.assigned_sps()) {
        outcome.per_sp[sp] = {0.9, 1, 12};
    }
    outcome.slashes.push_back({*meta.assigned_sps().begin(), to_units(0.5),
                               *std::next(meta.assigned_sps().begin()), "test"});
    (void)fx.ledger.disburse_epoch(outcome);
    CHECK(fx.ledger.total_supply() == supply);

    const auto ch = fx.ledger.open_channel("client", sp_account(3), 12345, 10);
    CHECK(fx.ledger.total_supply() == supply);
    (void)fx.ledger.settle_channel(ch, 11);
    CHECK(fx.ledger.total_supply() == supply);

    fx.ledger.advance_epoch();
    CHECK(fx.ledger.total_supply() == supply);
}

TEST_CASE("slashing floors at zero stake and deactivates the SP") {
    Fixture fx;
    const Tokens stake = fx.ledger.sp(0).stake;
    fx.ledger.slash(0, stake + 12345, std::nullopt, "overkill");
    CHECK(fx.ledger.sp(0).stake == 0);
    CHECK_FALSE(fx.ledger.sp(0).active);
    CHECK_THROWS_AS(fx.ledger.slash(99, 1, std::nullopt, "missing"), Error);
}

TEST_CASE("reporter receives the configured share, remainder burns") {
    Fixture fx;
    const Tokens before_burn = fx.ledger.burned();
    const Tokens reporter_before = fx.ledger.sp(5).balance;
    fx.ledger.slash(0, 1000, SpId(5), "evidence");
    CHECK(fx.ledger.sp(5).balance - reporter_before == 500); // default 50% share
    CHECK(fx.ledger.burned() - before_burn == 500);
}

TEST_CASE("assignment frequencies are uniform within 5 sigma over 10000 draws") {
    // 20 SPs, n = 16 per chunkset: inclusion probability 0.8 per SP.
    Fixture fx;
    const int draws = 10000;
    std::vector<int> hits(20, 0);
    for (int i = 0; i < draws; ++i) {
        const auto& meta = fx.register_it("blob-u" + std::to_string(i));
        for (auto sp : meta.assigned_sps()) hits[sp] += 1;
    }
    const double mean = draws * 0.8;
    const double sigma = std::sqrt(draws * 0.8 * 0.2);
    for (int sp = 0; sp < 20; ++sp) {
        CHECK(std::abs(hits[sp] - mean) < 5.0 * sigma);
    }
}

TEST_CASE("event log is NDJSON with epoch and event fields") {
    Fixture fx;
    fx.register_it();
    REQUIRE_FALSE(fx.ledger.events().empty());
    for (const auto& line : fx.ledger.events()) {
        CHECK(line.find("\"epoch\"") != std::string::npos);
        CHECK(line.find("\"event\"") != std::string::npos);
        CHECK(line.find('\n') == std::string::npos);
    }
}
