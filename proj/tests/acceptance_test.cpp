// Acceptance suite: runs every laboratory-level claim end to end and prints
// one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.
//
// Usage: shelby_acceptance [--cli <path-to-shelby-lab>] [--scenarios <dir>]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "shelby/audit.hpp"
#include "shelby/codec.hpp"
#include "shelby/economics.hpp"
#include "shelby/merkle.hpp"
#include "shelby/payments.hpp"
#include "shelby/reliability.hpp"
#include "shelby/rng.hpp"
#include "shelby/scenario.hpp"
#include "shelby/sim.hpp"

using namespace shelby;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("%s  %2d. %-28s %s  (%.2fs)\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

Bytes random_bytes(DetRng& rng, std::size_t len) {
    Bytes b(len);
    for (auto& v : b) v = static_cast<std::uint8_t>(rng.next_u64());
    return b;
}

std::vector<std::vector<std::uint32_t>> subsets(std::uint32_t n, std::uint32_t pick) {
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> cur;
    auto rec = [&](auto&& self, std::uint32_t start) -> void {
        if (cur.size() == pick) {
            out.push_back(cur);
            return;
        }
        for (std::uint32_t i = start; i < n; ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

// ---------------------------------------------------------------- 1
void criterion_durability() {
    Timer t;
    const FailureModel model; // 16 nodes, p=0.5, 24h + 12h, m=6
    const Timer inner;
    const double loss = durability_loss_probability(model);
    const double eval_ms = inner.seconds() * 1e3;
    const double rel = std::abs(loss - 3.01e-12) / 3.01e-12;
    char detail[128];
    std::snprintf(detail, sizeof detail, "loss=%.4e rel_err=%.4f eval=%.3fms", loss, rel,
                  eval_ms);
    report(1, "durability reproduction", rel <= 0.01 && eval_ms < 1.0, detail, t.seconds());
}

// ---------------------------------------------------------------- 2
void criterion_availability() {
    Timer t;
    AvailabilityModel model; // 5 DCs, 98%, min 3, 30 min/yr
    model.p_data_loss = durability_loss_probability(FailureModel{});
    const double p = availability_loss_probability(model);
    const double rel = std::abs(p - 1.35e-4) / 1.35e-4;
    char detail[128];
    std::snprintf(detail, sizeof detail, "p_unavail=%.4e rel_err=%.4f", p, rel);
    report(2, "availability reproduction", rel <= 0.01, detail, t.seconds());
}

// ---------------------------------------------------------------- 3
void criterion_incentive_threshold() {
    Timer t;
    const auto costs = aws_chunk_costs(0.023, 0.02, 5.0);
    const double min_pa = min_audit_probability(costs.c_s, costs.c_r);
    char detail[128];
    std::snprintf(detail, sizeof detail, "min_p_a=%.6f", min_pa);
    report(3, "incentive threshold", min_pa >= 0.0076 && min_pa <= 0.0077, detail, t.seconds());
}

// ---------------------------------------------------------------- 4
void criterion_fake_storage() {
    Timer t;
    const double bound = fake_storage_catch_bound(0.1, 50);
    const double rate = mc_fake_storage_catch(0.1, 50, 1000, 100000, 0xfa4e);
    const double sigma = std::sqrt(std::max(rate * (1.0 - rate), 1e-12) / 100000.0);
    const bool ok = bound >= 0.632 && rate >= bound - 3.0 * sigma;
    char detail[128];
    std::snprintf(detail, sizeof detail, "P_Sa>=%.4f mc_rate=%.4f (1e5 trials)", bound, rate);
    report(4, "fake-storage detection", ok, detail, t.seconds());
}

// ---------------------------------------------------------------- 5
void criterion_mds() {
    Timer t;
    bool ok = true;
    std::uint64_t checked = 0;
    DetRng rng(0x3d5);

    const auto run = [&](const CodingParams& params) {
        Codec codec(params);
        const Bytes data = random_bytes(rng, params.chunkset_size());
        const auto chunks = codec.encode(data);
        for (const auto& subset : subsets(params.n(), params.k)) {
            std::vector<CodedChunk> take;
            take.reserve(subset.size());
            for (auto i : subset) take.push_back(chunks[i]);
            if (codec.decode(take) != data) ok = false;
            ++checked;
        }
    };
    run(CodingParams::clay(4, 2, 5, 64 << 10));        // C(6,4) = 15
    run(CodingParams::clay(8, 4, 11, 64 << 10));       // C(12,8) = 495
    run(CodingParams::reed_solomon(8, 4, 64 << 10));   // C(12,8) = 495

    char detail[128];
    std::snprintf(detail, sizeof detail, "%llu subsets decoded at 64 KiB chunks",
                  static_cast<unsigned long long>(checked));
    report(5, "MDS exhaustive", ok && checked == 15 + 495 + 495 && t.seconds() < 60.0, detail,
           t.seconds());
}

// ---------------------------------------------------------------- 6
void criterion_repair_bandwidth() {
    Timer t;
    const auto params = CodingParams::clay(8, 4, 11, 64 << 10);
    Codec codec(params);
    DetRng rng(0x6e4);
    const Bytes data = random_bytes(rng, params.chunkset_size());
    const auto chunks = codec.encode(data);
    const std::uint64_t b = params.chunkset_size();
    const std::uint64_t expect = std::uint64_t(params.d) * b / (params.k * params.q());

    bool ok = true;
    std::uint64_t measured = 0;
    for (std::uint32_t lost = 0; lost < params.n(); ++lost) {
        std::vector<CodedChunk> helpers;
        for (const auto& c : chunks) {
            if (c.index != lost) helpers.push_back(c);
        }
        auto [rebuilt, rep] = codec.repair(lost, helpers);
        measured = rep.bytes_downloaded;
        if (rebuilt.payload != chunks[lost].payload) ok = false;
        if (rep.bytes_downloaded != expect) ok = false;
        if (rep.rs_equivalent_bytes != b) ok = false;
    }
    const double saving = 1.0 - static_cast<double>(measured) / static_cast<double>(b);
    ok = ok && saving >= 0.60;
    char detail[160];
    std::snprintf(detail, sizeof detail, "bytes=%llu of B=%llu, saving=%.1f%%, 12/12 identical",
                  static_cast<unsigned long long>(measured), static_cast<unsigned long long>(b),
                  saving * 100.0);
    report(6, "repair bandwidth", ok, detail, t.seconds());
}

// ---------------------------------------------------------------- 7
void criterion_tamper() {
    Timer t;
    DetRng rng(0x7a3);
    std::vector<Bytes> leaves;
    for (int i = 0; i < 64; ++i) leaves.push_back(random_bytes(rng, 1024));
    const auto commitment = commit(leaves, 1024);

    std::uint32_t false_accepts = 0;
    const int iterations = 10000;
    for (int i = 0; i < iterations; ++i) {
        const auto index = rng.next_below(leaves.size());
        auto proof = open(leaves, index, 1024);
        auto c = commitment;
        switch (rng.next_below(3)) {
        case 0: { // leaf bytes
            proof.leaf_bytes[rng.next_below(proof.leaf_bytes.size())] ^=
                std::uint8_t(1u << rng.next_below(8));
            break;
        }
        case 1: { // a path sibling
            auto& step = proof.path[rng.next_below(proof.path.size())];
            step.sibling[rng.next_below(32)] ^= std::uint8_t(1u << rng.next_below(8));
            break;
        }
        default: { // the root
            c.root[rng.next_below(32)] ^= std::uint8_t(1u << rng.next_below(8));
            break;
        }
        }
        if (verify(c, proof)) ++false_accepts;
    }
    char detail[128];
    std::snprintf(detail, sizeof detail, "%d mutations, %u false accepts", iterations,
                  false_accepts);
    report(7, "commitment tamper detection", false_accepts == 0, detail, t.seconds());
}

// ---------------------------------------------------------------- 8
void criterion_bft_bound() {
    Timer t;
    DetRng rng(0xbf7);
    bool ok = true;
    const int cases = 1000;
    for (int iter = 0; iter < cases && ok; ++iter) {
        const std::uint32_t n_sp = 7 + static_cast<std::uint32_t>(rng.next_below(25));
        const std::uint32_t f = (n_sp - 1) / 3;
        const std::uint32_t evaluators = n_sp - 1;
        const std::uint32_t adversarial = static_cast<std::uint32_t>(rng.next_below(f + 1));

        double lo = 1.0, hi = 0.0;
        std::map<SpId, std::pair<std::uint64_t, std::uint64_t>> evals;
        for (SpId a = 0; a < evaluators; ++a) {
            const std::uint64_t total = 1 + rng.next_below(10);
            std::uint64_t successes;
            if (a < adversarial) {
                successes = rng.next_below(total + 1);
            } else {
                successes = rng.next_below(total + 1);
                const double frac = double(successes) / double(total);
                lo = std::min(lo, frac);
                hi = std::max(hi, frac);
            }
            evals[a] = {successes, total};
        }
        const double score = compute_score(n_sp - 1, 1, evals, f).score;
        if (score < lo - 1e-12 || score > hi + 1e-12) ok = false;
    }
    char detail[128];
    std::snprintf(detail, sizeof detail, "%d randomized cases, n_sp in [7,31]", cases);
    report(8, "BFT score bound", ok, detail, t.seconds());
}

// ---------------------------------------------------------------- 9
WorldConfig grid_config(int point) {
    WorldConfig cfg;
    cfg.sp_count = 10;
    cfg.blob_count = 2;
    cfg.chunksets_per_blob = 6;
    cfg.coding = CodingParams::reed_solomon(4, 2, 512);
    cfg.sample_size = 128;

    EconomicParams& e = cfg.econ;
    double split = 0.7;
    if (point == 0) {
        e.W = 0.1;
        e.p_a = 0.2;
        e.p_ata = 0.05;
        e.S_a = 0.001;
    } else if (point == 1) {
        e.W = 0.2;
        split = 0.6;
        e.p_a = 0.3;
        e.p_ata = 0.1;
        e.S_a = 0.002;
    } else {
        e.W = 0.15;
        split = 0.8;
        e.p_a = 0.25;
        e.p_ata = 0.08;
        e.S_a = 0.005;
    }
    const auto norm = normalize_rewards(e.W, e.p_a, e.chunks_per_gb, e.auditors_per_audit,
                                        e.epochs_per_month, split);
    e.rwd_st = norm.rwd_st_per_chunk_epoch;
    e.rwd_au = norm.rwd_au;
    e.n_a = norm.n_a;
    const double factor = point == 0 ? 10.0 : (point == 1 ? 6.0 : 20.0);
    e.S_ata = factor * e.rwd_au / (e.p_ata * e.epsilon);
    return cfg;
}

void criterion_equilibrium() {
    Timer t;
    const std::uint32_t trials = 1000;
    bool ok = true;
    std::string detail;

    // Unilateral deviations: the full set loses at every grid point.
    std::vector<std::pair<std::string, Strategy>> deviations;
    for (const auto& name : default_deviation_names()) {
        deviations.emplace_back(name, deviation_preset(name));
    }
    for (int point = 0; point < 3 && ok; ++point) {
        const auto cfg = grid_config(point);
        if (!full_report(cfg.econ, 0.1, 30.0).all_with_ratio(2.0)) {
            ok = false;
            detail = "grid point " + std::to_string(point) + " lacks 2x margins";
            break;
        }
        const auto rows = nash_test(cfg, deviations, 6, trials, 0x9a5 + point);
        for (const auto& row : rows) {
            if (!row.pass) {
                ok = false;
                detail = "nash fail at grid " + std::to_string(point) + ": " + row.deviation;
            }
        }
    }

    // Collusive all-ones reporting pays rwd_au - p_ata * S_ata per reported success.
    if (ok) {
        const auto r = mutual_dishonesty_test(grid_config(0), 4, trials, 0xd15);
        if (!(r.negative && r.within_3_sigma && r.defection_improves)) {
            ok = false;
            detail = "mutual dishonesty check failed";
        }
    }

    // Joint deviations: coalition gains bounded by the verification budget.
    if (ok) {
        const auto cfg = grid_config(0);
        std::vector<std::pair<std::string, Strategy>> joint;
        joint.emplace_back("trust_coalition", deviation_preset("trust_coalition"));
        joint.emplace_back("zero_outsiders", deviation_preset("zero_outsiders"));
        const auto rows = coalition_test(cfg, {2, cfg.f_trim()}, joint, 4, trials, 0xc0a);
        for (const auto& row : rows) {
            if (!row.pass) {
                ok = false;
                detail = "coalition bound fail: " + row.deviation;
            }
        }
    }

    const double secs = t.seconds();
    if (ok) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "nash(3 grids) + mutual + coalition at %u trials",
                      trials);
        detail = buf;
    }
    report(9, "equilibrium suite", ok && secs < 600.0, detail, secs);
}

// ---------------------------------------------------------------- 10
void criterion_channels() {
    Timer t;
    DetRng rng(0xc4a);
    bool ok = true;
    for (int trial = 0; trial < 10000 && ok; ++trial) {
        const Tokens deposit = 1 + static_cast<Tokens>(rng.next_below(1000000000));
        auto c = open_channel_state(trial, "client", "rpc", deposit, 1 << 30);
        Tokens last_refund = c.refund_amount;
        std::int64_t last_settle = c.settle_after;
        const int steps = static_cast<int>(rng.next_below(50));
        for (int s = 0; s < steps && c.refund_amount > 0; ++s) {
            const Tokens amount = 1 + static_cast<Tokens>(rng.next_below(
                                          static_cast<std::uint64_t>(c.refund_amount)));
            c = pay(c, amount, c.settle_after - static_cast<std::int64_t>(rng.next_below(3)));
            if (c.refund_amount >= last_refund || c.settle_after > last_settle) ok = false;
            last_refund = c.refund_amount;
            last_settle = c.settle_after;
        }
        const auto split = settlement_split(c);
        if (split.payee_amount + split.payer_amount != deposit) ok = false;
        if (split.payee_amount < 0 || split.payer_amount < 0) ok = false;
    }
    report(10, "channel conservation", ok, "10^4 fuzzed payment sequences", t.seconds());
}

// ---------------------------------------------------------------- 11
void criterion_determinism(const std::string& cli, const std::string& scenarios) {
    Timer t;
    const fs::path base = fs::temp_directory_path() / "shelby-acceptance";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base);

    bool ok = true;
    std::string detail;
    const std::string scenario = scenarios + "/all_honest.scenario";

    if (!cli.empty() && fs::exists(cli)) {
        for (int run = 0; run < 2; ++run) {
            const std::string cmd = cli + " simulate " + scenario + " --deterministic --out " +
                                    (base / ("run" + std::to_string(run))).string() +
                                    " > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) {
                ok = false;
                detail = "cli run failed";
            }
        }
        detail = detail.empty() ? "two cli replays byte-identical" : detail;
    } else {
        const Scenario sc = Scenario::load_file(scenario);
        for (int run = 0; run < 2; ++run) {
            (void)run_scenario(sc, (base / ("run" + std::to_string(run))).string(), true, false);
        }
        detail = "two library replays byte-identical";
    }

    if (ok) {
        std::uint32_t files = 0;
        for (const auto& entry : fs::directory_iterator(base / "run0")) {
            const auto name = entry.path().filename();
            std::ifstream a(entry.path(), std::ios::binary);
            std::ifstream b(base / "run1" / name, std::ios::binary);
            if (!a || !b) {
                ok = false;
                detail = "missing replay output " + name.string();
                break;
            }
            const std::string ca((std::istreambuf_iterator<char>(a)),
                                 std::istreambuf_iterator<char>());
            const std::string cb((std::istreambuf_iterator<char>(b)),
                                 std::istreambuf_iterator<char>());
            if (ca != cb) {
                ok = false;
                detail = "replay mismatch in " + name.string();
                break;
            }
            ++files;
        }
        if (ok && files == 0) {
            ok = false;
            detail = "no outputs produced";
        }
    }
    fs::remove_all(base, ec);
    report(11, "determinism", ok, detail, t.seconds());
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    std::string scenarios = "scenarios";
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") cli = argv[i + 1];
        if (flag == "--scenarios") scenarios = argv[i + 1];
    }

    std::printf("acceptance criteria\n-------------------\n");
    criterion_durability();
    criterion_availability();
    criterion_incentive_threshold();
    criterion_fake_storage();
    criterion_mds();
    criterion_repair_bandwidth();
    criterion_tamper();
    criterion_bft_bound();
    criterion_equilibrium();
    criterion_channels();
    criterion_determinism(cli, scenarios);

    std::printf("-------------------\n%s (%d failure%s)\n",
                g_failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED", g_failures,
                g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
