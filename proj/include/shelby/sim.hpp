#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shelby/audit.hpp"
#include "shelby/coordination.hpp"
#include "shelby/data_prep.hpp"
#include "shelby/economics.hpp"

namespace shelby {

// Behavioral policy of one SP, evaluated at each decision point of an epoch.
// Strategy::honest() is exactly the honest strategy: store everything,
// answer challenges with real proofs, verify and retain peers' proofs,
// submit slashing evidence, publish the truthful scoreboard.
enum class ChallengeResponse : std::uint8_t {
    Honest,             // valid proof iff the chunk is held, silence otherwise
    Ignore,             // never respond
    RetrieveExternally, // fetch missing chunks at cost c_r, then answer validly
    Forge,              // fabricate a structurally valid, non-verifying proof
};

enum class AuditorPolicy : std::uint8_t {
    VerifyAndRetain, // verify, record truthfully, retain proofs, queue evidence
    RubberStamp,     // report 1 for everything, verify nothing, retain nothing
    ReportAllZero,   // report 0 for everything
    DropProofs,      // verify and record truthfully but discard the proofs
    TrustCoalition,  // skip verification for coalition peers (still retains)
    ZeroOutsiders,   // honest toward coalition peers, report 0 for the rest
};

enum class EvidencePolicy : std::uint8_t { Submit, Withhold };
enum class ScoreboardPolicy : std::uint8_t { Truthful, AllOnes, Withhold };

struct Strategy {
    double storage_policy = 1.0; // fraction of assigned chunks actually stored
    ChallengeResponse challenge_response = ChallengeResponse::Honest;
    AuditorPolicy auditor_policy = AuditorPolicy::VerifyAndRetain;
    EvidencePolicy evidence_policy = EvidencePolicy::Submit;
    ScoreboardPolicy scoreboard_policy = ScoreboardPolicy::Truthful;

    static Strategy honest() { return Strategy{}; }
    static Strategy mutual_dishonesty(); // store nothing, rubber-stamp, all-ones

    bool operator==(const Strategy&) const = default;
};

// Per-SP utility components accumulated across epochs. Components are
// non-negative; net subtracts losses and operational costs from income.
struct UtilityBreakdown {
    Tokens storage_rewards = 0;
    Tokens auditor_rewards = 0;
    Tokens slash_losses = 0;
    Tokens storage_costs = 0;
    Tokens retrieval_costs = 0;
    Tokens proof_overhead_costs = 0;
    Tokens evidence_rewards = 0;

    [[nodiscard]] Tokens net() const {
        return storage_rewards + auditor_rewards + evidence_rewards - slash_losses -
               storage_costs - retrieval_costs - proof_overhead_costs;
    }
};

struct EpochStats {
    std::uint64_t challenges = 0;
    std::uint64_t responses_valid = 0;
    std::uint64_t responses_absent = 0;
    std::uint64_t responses_invalid = 0;
    std::uint64_t published_ones = 0;
    std::uint64_t ata_selected = 0;
    std::uint64_t ata_failed = 0;
    std::uint64_t onchain_challenges = 0;
    std::uint64_t onchain_failed = 0;
    std::uint64_t evidence_slashes = 0;
    std::uint64_t slash_events = 0;
    std::map<SpId, double> scores;
};

struct WorldConfig {
    std::uint32_t sp_count = 10;
    double sp_stake = 10.0;
    double sp_balance = 1.0;
    std::uint64_t sp_capacity = 1ull << 30;

    std::uint32_t blob_count = 3;
    std::uint32_t chunksets_per_blob = 10;
    CodingParams coding = CodingParams::reed_solomon(4, 2, 512);
    std::uint32_t sample_size = 128;
    std::uint64_t duration_epochs = 100000;

    EconomicParams econ;
    Tokens onchain_action_fee = 0;
    std::set<SpId> coalition; // members recognized by coalition policies

    [[nodiscard]] std::uint32_t f_trim() const { return (sp_count - 1) / 3; }
};

// Blob contents and commitments are scenario-constant; worlds share them.
struct Workload {
    std::vector<PreparedBlob> blobs;
    static std::shared_ptr<const Workload> build(const WorldConfig& cfg);
};

// One simulated universe: the coordination ledger plus every SP's physical
// storage and auditor state. Deterministic in (config, workload, trial_seed).
class World {
public:
    World(const WorldConfig& cfg, std::shared_ptr<const Workload> workload,
          const std::map<SpId, Strategy>& strategies, std::uint64_t trial_seed);

    // Full epoch pipeline: derive challenges, responses, recording, score
    // computation, disbursement, on-chain auditee challenges,
    // audit-the-auditor, evidence slashing, retention pruning.
    EpochStats run_epoch();

    [[nodiscard]] const std::map<SpId, UtilityBreakdown>& utilities() const {
        return utilities_;
    }
    [[nodiscard]] Ledger& ledger() { return ledger_; }
    [[nodiscard]] const Ledger& ledger() const { return ledger_; }
    [[nodiscard]] bool has_retained_proof(SpId auditor, std::uint64_t epoch,
                                          std::uint64_t challenge_id) const;
    [[nodiscard]] std::uint64_t stored_chunks(SpId sp) const;
    [[nodiscard]] std::uint64_t assigned_chunks(SpId sp) const;

private:
    struct RetainedEpoch {
        std::map<std::uint64_t, AuditProof> proofs; // challenge_id -> proof
    };

    const Strategy& strategy_of(SpId sp) const;
    bool holds(SpId sp, const ChunkRef& ref) const;
    const Bytes& payload(const ChunkRef& ref) const;
    Hash32 chunk_root(const ChunkRef& ref) const;
    bool in_coalition(SpId sp) const { return cfg_.coalition.count(sp) > 0; }

    WorldConfig cfg_;
    std::shared_ptr<const Workload> workload_;
    std::map<SpId, Strategy> strategies_;
    Ledger ledger_;
    std::map<ChunkRef, const Bytes*> payloads_;
    std::map<ChunkRef, Hash32> roots_;
    std::map<SpId, std::set<ChunkRef>> held_;
    std::map<SpId, std::uint64_t> assigned_count_;
    std::map<SpId, std::map<std::uint64_t, RetainedEpoch>> retained_;
    std::map<SpId, UtilityBreakdown> utilities_;
    Tokens c_s_units_ = 0;
    Tokens c_r_units_ = 0;
    Tokens verify_cost_units_ = 0;
};

struct ExperimentResult {
    std::string scenario_id;
    double mean_utility = 0.0;  // tokens
    double std_error = 0.0;
    std::uint32_t trials = 0;
    std::uint64_t seed = 0;
};

// Monte Carlo net utility of a focal SP playing `focal` against a `background`
// population, over independent seeded trials.
ExperimentResult estimate_utility(const WorldConfig& cfg, const Strategy& focal,
                                  const Strategy& background, SpId focal_sp,
                                  std::uint32_t epochs, std::uint32_t trials,
                                  std::uint64_t seed);

struct NashRow {
    std::string deviation;
    double honest_mean = 0.0;
    double deviant_mean = 0.0;
    double diff_mean = 0.0;   // honest - deviant, paired by trial seed
    double diff_stderr = 0.0;
    double z = 0.0;
    bool pass = false; // diff > 0 at 95% one-sided confidence
};

std::vector<NashRow> nash_test(const WorldConfig& cfg,
                               const std::vector<std::pair<std::string, Strategy>>& deviations,
                               std::uint32_t epochs, std::uint32_t trials, std::uint64_t seed);

struct MutualDishonestyResult {
    double measured_per_one = 0.0;  // tokens per reported '1'
    double closed_form = 0.0;       // rwd_au - p_ata * S_ata
    double sigma = 0.0;             // Monte Carlo std error of the estimate
    std::uint64_t total_ones = 0;
    bool negative = false;
    bool within_3_sigma = false;
    double defector_mean_net = 0.0; // a truthful-zero defector among colluders
    double colluder_mean_net = 0.0;
    bool defection_improves = false;
};

MutualDishonestyResult mutual_dishonesty_test(const WorldConfig& cfg, std::uint32_t epochs,
                                              std::uint32_t trials, std::uint64_t seed);

struct CoalitionRow {
    std::string deviation;
    std::uint32_t coalition_size = 0;
    double coalition_gain = 0.0;   // aggregate, deviated minus all-honest (paired)
    double gain_stderr = 0.0;
    double epsilon_budget = 0.0;   // coalition per-run proof-verification spend
    bool pass = false;             // gain <= budget (within noise)
};

std::vector<CoalitionRow>
coalition_test(const WorldConfig& cfg, const std::vector<std::uint32_t>& sizes,
               const std::vector<std::pair<std::string, Strategy>>& joint_deviations,
               std::uint32_t epochs, std::uint32_t trials, std::uint64_t seed);

} // namespace shelby
