#include "shelby/economics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"

#include "shelby/errors.hpp"
#include "shelby/rng.hpp"

namespace shelby {

namespace {

IncentiveEntry make_entry(std::string name, double lhs, double rhs, bool satisfied,
                          std::string detail = {}) {
    IncentiveEntry e;
    e.name = std::move(name);
    e.lhs = lhs;
    e.rhs = rhs;
    e.satisfied = satisfied;
    e.margin = lhs - rhs;
    e.ratio = rhs == 0.0 ? std::numeric_limits<double>::infinity() : lhs / rhs;
    e.detail = std::move(detail);
    return e;
}

} // namespace

NormalizedRewards normalize_rewards(double W, double p_a, double chunks_per_gb,
                                    std::uint32_t auditors_per_audit,
                                    std::uint32_t epochs_per_month, double split) {
    if (split <= 0.0 || split > 1.0) {
        throw_error(Errc::param, "normalize_rewards: split must be in (0, 1]");
    }
    NormalizedRewards out;
    out.n_a = p_a * chunks_per_gb * auditors_per_audit * epochs_per_month;
    if (split < 1.0 && out.n_a == 0.0) {
        throw_error(Errc::param, "normalize_rewards: n_a = 0 leaves no channel for auditor pay");
    }
    out.rwd_au = split < 1.0 ? (1.0 - split) * W / out.n_a : 0.0;
    out.rwd_st_per_gb_month = split * W;
    out.rwd_st_per_chunk_epoch = out.rwd_st_per_gb_month / (chunks_per_gb * epochs_per_month);
    return out;
}

IncentiveEntry check_participation(const EconomicParams& p) {
    return make_entry("participation", p.rwd_st, p.c_s, p.rwd_st >= p.c_s,
                      "rwd_st >= c_s per chunk per epoch");
}

double min_audit_probability(double c_s, double c_r) {
    if (c_r <= 0.0) throw_error(Errc::param, "min_audit_probability: c_r must be positive");
    return c_s / c_r;
}

IncentiveEntry check_store_vs_retrieve(const EconomicParams& p) {
    const double min_pa = min_audit_probability(p.c_s, p.c_r);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "min p_a = %.6g (configured %.6g)", min_pa, p.p_a);
    return make_entry("store_vs_retrieve", p.p_a * p.c_r, p.c_s, p.p_a * p.c_r >= p.c_s, detail);
}

double fake_storage_catch_bound(double prct_fake, std::uint32_t C) {
    if (prct_fake <= 0.0 || prct_fake > 1.0) {
        throw_error(Errc::param, "fake_storage_catch_bound: prct_fake must be in (0, 1]");
    }
    if (prct_fake == 1.0) return C >= 1 ? 1.0 : 0.0;
    const double keep = 1.0 - prct_fake;
    const double samples = (1.0 - keep * keep) * C;
    return 1.0 - std::pow(keep, samples);
}

IncentiveEntry check_fake_storage(const EconomicParams& p, double prct_fake,
                                  double total_committed_chunks) {
    const double p_sa = fake_storage_catch_bound(prct_fake, p.C);
    const double lhs = p_sa * p.S_a;
    const double rhs = (1.0 - p.p_a) * p.rwd_st * prct_fake * total_committed_chunks;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "P_Sa >= %.6g at prct_fake=%.3g, C=%u", p_sa,
                  prct_fake, p.C);
    return make_entry("fake_storage", lhs, rhs, lhs > rhs, detail);
}

IncentiveEntry check_ata_calibration(const EconomicParams& p) {
    if (p.p_ata <= 0.0 || p.epsilon <= 0.0) {
        throw_error(Errc::param, "check_ata_calibration: p_ata and epsilon must be positive");
    }
    return make_entry("ata_calibration", p.S_ata * p.p_ata * p.epsilon, p.rwd_au,
                      p.S_ata * p.p_ata * p.epsilon >= p.rwd_au,
                      "S_ata * p_ata * epsilon >= rwd_au");
}

IncentiveReport full_report(const EconomicParams& p, double prct_fake,
                            double total_committed_chunks) {
    IncentiveReport r;
    r.entries.push_back(check_participation(p));
    r.entries.push_back(check_store_vs_retrieve(p));
    r.entries.push_back(check_fake_storage(p, prct_fake, total_committed_chunks));
    r.entries.push_back(check_ata_calibration(p));
    return r;
}

bool IncentiveReport::all_satisfied() const {
    for (const auto& e : entries) {
        if (!e.satisfied) return false;
    }
    return true;
}

bool IncentiveReport::all_with_ratio(double factor) const {
    for (const auto& e : entries) {
        if (!e.satisfied || e.ratio < factor) return false;
    }
    return true;
}

std::string IncentiveReport::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        arr.push_back({{"name", e.name},
                       {"lhs", e.lhs},
                       {"rhs", e.rhs},
                       {"satisfied", e.satisfied},
                       {"margin", e.margin},
                       {"ratio", e.ratio},
                       {"detail", e.detail}});
    }
    j["inequalities"] = std::move(arr);
    j["all_satisfied"] = all_satisfied();
    return j.dump(2);
}

std::string IncentiveReport::to_table() const {
    std::string out = "inequality            lhs           rhs           ok   margin\n";
    char line[160];
    for (const auto& e : entries) {
        std::snprintf(line, sizeof(line), "%-20s  %-12.6g  %-12.6g  %-3s  %.6g\n",
                      e.name.c_str(), e.lhs, e.rhs, e.satisfied ? "yes" : "NO", e.margin);
        out += line;
    }
    return out;
}

ChunkCosts aws_chunk_costs(double storage_usd_gb_month, double read_usd_gb, double k_factor,
                           double chunk_mb, double epoch_days) {
    ChunkCosts c;
    c.c_s = storage_usd_gb_month / 1000.0 / 30.0 * chunk_mb * epoch_days;
    c.c_r = k_factor * read_usd_gb / 1000.0 * chunk_mb;
    return c;
}

double mc_fake_storage_catch(double prct_fake, std::uint32_t C, std::uint32_t total_chunks,
                             std::uint32_t trials, std::uint64_t seed) {
    if (total_chunks == 0 || trials == 0) {
        throw_error(Errc::param, "mc_fake_storage_catch: need chunks and trials");
    }
    const auto fake_count =
        static_cast<std::uint32_t>(std::llround(prct_fake * total_chunks));
    const double keep = 1.0 - prct_fake;
    // Same expected-sample-size rule the contract applies at score = 1 - prct_fake.
    auto samples = static_cast<std::uint32_t>(std::floor((1.0 - keep * keep) * C + 0.5 + 1e-9));
    if (samples > total_chunks) samples = total_chunks;

    DetRng rng(seed);
    std::uint64_t caught = 0;
    for (std::uint32_t t = 0; t < trials; ++t) {
        // Chunks [0, fake_count) are the faked ones; order is irrelevant.
        const auto picks = rng.sample_indices(total_chunks, samples);
        for (auto idx : picks) {
            if (idx < fake_count) {
                ++caught;
                break;
            }
        }
    }
    return static_cast<double>(caught) / trials;
}

EconomicParams EconomicParams::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_error(Errc::format, std::string("econ params: ") + e.what());
    }
    EconomicParams p;
    const auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("W", p.W);
    get("rwd_st", p.rwd_st);
    get("rwd_au", p.rwd_au);
    get("p_a", p.p_a);
    get("C", p.C);
    get("p_ata", p.p_ata);
    get("S_a", p.S_a);
    get("S_ata", p.S_ata);
    get("r_slash", p.r_slash);
    get("c_s", p.c_s);
    get("c_r", p.c_r);
    get("epsilon", p.epsilon);
    get("n_a", p.n_a);
    get("epochs_per_month", p.epochs_per_month);
    get("auditors_per_audit", p.auditors_per_audit);
    get("chunks_per_gb", p.chunks_per_gb);
    get("audit_verify_cost", p.audit_verify_cost);
    return p;
}

std::string EconomicParams::to_json() const {
    nlohmann::ordered_json j{
        {"W", W},
        {"rwd_st", rwd_st},
        {"rwd_au", rwd_au},
        {"p_a", p_a},
        {"C", C},
        {"p_ata", p_ata},
        {"S_a", S_a},
        {"S_ata", S_ata},
        {"r_slash", r_slash},
        {"c_s", c_s},
        {"c_r", c_r},
        {"epsilon", epsilon},
        {"n_a", n_a},
        {"epochs_per_month", epochs_per_month},
        {"auditors_per_audit", auditors_per_audit},
        {"chunks_per_gb", chunks_per_gb},
        {"audit_verify_cost", audit_verify_cost},
    };
    return j.dump(2);
}

} // namespace shelby
