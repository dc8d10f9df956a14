#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace shelby {

// All reward/penalty/cost knobs of the incentive model. Monetary values are
// in tokens (pegged 1:1 to dollars); the epoch is one day, so per-day audit
// probabilities apply directly. Costs default to the AWS-derived figures
// ($0.023/GB/month storage, 5 x $0.02/GB retrieval); the reward defaults are
// the W = 0.1, 70/30 split normalization, which clears every incentive
// inequality with at least a 2x ratio.
struct EconomicParams {
    double W = 0.1;                   // tokens / GB / month, storage fee
    double rwd_st = 0.07 / 30720.0;   // tokens / chunk / epoch (split * W, normalized)
    double rwd_au = 0.03 / 10752.0;   // tokens / successful audit
    double p_a = 0.05;                // per-epoch audit probability per chunk
    std::uint32_t C = 50;             // on-chain challenge budget
    double p_ata = 0.05;              // per-'1' audit-the-auditor probability
    double S_a = 0.001;               // slash per failed on-chain storage audit
    double S_ata = 0.0111607142857;   // slash per failed audit-the-auditor check
    double r_slash = 0.5;             // reporter's share of slashed funds
    double c_s = 7.7e-7;              // cost to store a chunk per epoch
    double c_r = 1e-4;                // cost to retrieve (repair) a chunk
    double epsilon = 0.01;            // auditor certainty threshold
    double n_a = 10752.0;             // audits per GB per month (derived)
    std::uint32_t epochs_per_month = 30;
    std::uint32_t auditors_per_audit = 7;
    double chunks_per_gb = 1024.0;
    double audit_verify_cost = 1e-9;  // operational cost of verifying one proof

    // Parses/serializes the JSON parameter file used by `econ-check`.
    static EconomicParams from_json(const std::string& text);
    [[nodiscard]] std::string to_json() const;
};

struct IncentiveEntry {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
    double margin = 0.0;  // lhs - rhs
    double ratio = 0.0;   // lhs / rhs; +inf when rhs == 0
    std::string detail;
};

struct IncentiveReport {
    std::vector<IncentiveEntry> entries;
    [[nodiscard]] bool all_satisfied() const;
    // True when every entry holds with lhs >= factor * rhs.
    [[nodiscard]] bool all_with_ratio(double factor) const;
    [[nodiscard]] std::string to_json() const;
    [[nodiscard]] std::string to_table() const;
};

struct NormalizedRewards {
    double rwd_st_per_chunk_epoch = 0.0;
    double rwd_st_per_gb_month = 0.0;
    double rwd_au = 0.0;
    double n_a = 0.0;
};

// Splits the user fee W between storage and auditor rewards so that
// rwd_st_per_gb_month + n_a * rwd_au = W holds exactly, with
// n_a = (p_a * chunks_per_gb) * auditors_per_audit * epochs_per_month.
NormalizedRewards normalize_rewards(double W, double p_a, double chunks_per_gb,
                                    std::uint32_t auditors_per_audit,
                                    std::uint32_t epochs_per_month, double split);

// Inequality 1: rwd_st >= c_s.
IncentiveEntry check_participation(const EconomicParams& p);

// Inequality 2: p_a * c_r >= c_s; detail carries the minimum viable p_a.
IncentiveEntry check_store_vs_retrieve(const EconomicParams& p);

double min_audit_probability(double c_s, double c_r);

// Detection-probability lower bound for an SP faking a prct_fake share of
// its committed chunks, sampled on-chain without replacement.
double fake_storage_catch_bound(double prct_fake, std::uint32_t C);

// Inequality 3: P_Sa * S_a > (1 - p_a) * rwd_st * prct_fake * total_committed.
IncentiveEntry check_fake_storage(const EconomicParams& p, double prct_fake,
                                  double total_committed_chunks);

// Inequality 4: S_ata * p_ata * epsilon >= rwd_au.
IncentiveEntry check_ata_calibration(const EconomicParams& p);

IncentiveReport full_report(const EconomicParams& p, double prct_fake = 0.1,
                            double total_committed_chunks = 1024.0);

// AWS-style cost model: storage price in $/GB/month and read price in $/GB
// (decimal GB), with repair touching k_factor chunks. Returns per-chunk,
// per-epoch(day) storage cost and the per-chunk retrieval cost.
struct ChunkCosts {
    double c_s = 0.0;
    double c_r = 0.0;
};
ChunkCosts aws_chunk_costs(double storage_usd_gb_month, double read_usd_gb, double k_factor,
                           double chunk_mb = 1.0, double epoch_days = 1.0);

// Monte Carlo of the on-chain sampling process behind inequality 3: an SP
// fakes prct_fake of `total_chunks`, the contract samples
// round((1-(1-prct_fake)^2) * C) holdings without replacement. Returns the
// empirical catch rate.
double mc_fake_storage_catch(double prct_fake, std::uint32_t C, std::uint32_t total_chunks,
                             std::uint32_t trials, std::uint64_t seed);

} // namespace shelby
