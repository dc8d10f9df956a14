#include "shelby/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shelby/errors.hpp"
#include "shelby/rng.hpp"
#include "shelby/sha256.hpp"

namespace shelby {

namespace {

std::uint64_t fold_hash(const Hash32& h) {
    std::uint64_t v = 0;
    for (int i = 0; i < 4; ++i) v ^= get_u64_be(h.data() + 8 * i);
    return v;
}

Hash32 trial_genesis(std::uint64_t trial_seed) {
    Bytes b;
    put_u64_be(b, trial_seed);
    Sha256 h;
    h.update("world-genesis", 13);
    h.update(b.data(), b.size());
    return h.finish();
}

// Structurally well-formed proof that cannot verify: right leaf index and
// path shape, fabricated bytes. Honest verifiers detect it with certainty.
AuditProof forge_proof(const AuditChallenge& ch, std::uint32_t sample_size,
                       std::uint32_t samples_per_chunk, std::uint64_t noise_seed) {
    DetRng rng(splitmix64(noise_seed));
    AuditProof proof;
    proof.challenge_id = ch.challenge_id;
    proof.chunk_ref = ch.chunk_ref;
    proof.sample_index = ch.sample_index;
    proof.inclusion.leaf_index = ch.sample_index;
    proof.inclusion.leaf_bytes.resize(sample_size);
    for (auto& b : proof.inclusion.leaf_bytes) b = static_cast<std::uint8_t>(rng.next_u64());

    std::uint32_t height = 0;
    while ((1u << height) < samples_per_chunk) ++height;
    std::uint64_t pos = ch.sample_index;
    for (std::uint32_t level = 0; level < height; ++level) {
        ProofStep step;
        step.sibling_on_right = (pos % 2 == 0) ? 1 : 0;
        for (auto& b : step.sibling) b = static_cast<std::uint8_t>(rng.next_u64());
        proof.inclusion.path.push_back(step);
        pos /= 2;
    }
    return proof;
}

} // namespace

Strategy Strategy::mutual_dishonesty() {
    Strategy s;
    s.storage_policy = 0.0;
    s.challenge_response = ChallengeResponse::Ignore;
    s.auditor_policy = AuditorPolicy::RubberStamp;
    s.evidence_policy = EvidencePolicy::Withhold;
    s.scoreboard_policy = ScoreboardPolicy::AllOnes;
    return s;
}

std::shared_ptr<const Workload> Workload::build(const WorldConfig& cfg) {
    auto w = std::make_shared<Workload>();
    DetRng rng(0xb10b);
    for (std::uint32_t b = 0; b < cfg.blob_count; ++b) {
        Blob blob;
        blob.id = "blob-" + std::to_string(b);
        blob.bytes.resize(cfg.chunksets_per_blob * cfg.coding.chunkset_size());
        for (auto& v : blob.bytes) v = static_cast<std::uint8_t>(rng.next_u64());
        blob.paid_duration_epochs = cfg.duration_epochs;
        w->blobs.push_back(
            prepare(blob, cfg.coding, cfg.coding.chunkset_size(), cfg.sample_size));
    }
    return w;
}

World::World(const WorldConfig& cfg, std::shared_ptr<const Workload> workload,
             const std::map<SpId, Strategy>& strategies, std::uint64_t trial_seed)
    : cfg_(cfg),
      workload_(std::move(workload)),
      strategies_(strategies),
      ledger_(LedgerConfig{trial_genesis(trial_seed), cfg.econ, cfg.onchain_action_fee}) {
    c_s_units_ = to_units(cfg_.econ.c_s);
    c_r_units_ = to_units(cfg_.econ.c_r);
    verify_cost_units_ = to_units(cfg_.econ.audit_verify_cost);

    ledger_.mint("client", to_units(1e6));
    for (std::uint32_t i = 0; i < cfg_.sp_count; ++i) {
        const SpId sp = ledger_.add_sp(to_units(cfg_.sp_stake), to_units(cfg_.sp_balance),
                                       cfg_.sp_capacity);
        utilities_[sp] = UtilityBreakdown{};
        assigned_count_[sp] = 0;
    }

    for (const auto& prepared : workload_->blobs) {
        std::vector<std::vector<Hash32>> roots;
        for (const auto& cs : prepared.chunksets) {
            std::vector<Hash32> row;
            for (const auto& r : cs.chunk_roots) row.push_back(r.root);
            roots.push_back(std::move(row));
        }
        const std::uint32_t samples_per_chunk =
            static_cast<std::uint32_t>(prepared.params.chunk_size / cfg_.sample_size);
        const std::uint64_t coded_bytes =
            prepared.chunksets.size() * std::uint64_t(prepared.params.n()) *
            prepared.params.chunk_size;
        const Tokens payment = ledger_.required_payment(coded_bytes, cfg_.duration_epochs);
        const auto& meta = ledger_.register_blob(prepared.blob_id, prepared.blob_root.root,
                                                 roots, prepared.params.chunk_size,
                                                 samples_per_chunk, "client",
                                                 std::max<Tokens>(payment, 1),
                                                 cfg_.duration_epochs);
        ledger_.mark_ready(prepared.blob_id, meta.assigned_sps());

        for (std::uint32_t cs = 0; cs < meta.assignment.size(); ++cs) {
            for (std::uint32_t ci = 0; ci < meta.assignment[cs].size(); ++ci) {
                const ChunkRef ref{prepared.blob_id, cs, ci};
                payloads_[ref] = &prepared.chunksets[cs].chunks[ci].payload;
                roots_[ref] = prepared.chunksets[cs].chunk_roots[ci].root;
                assigned_count_[meta.assignment[cs][ci]] += 1;
            }
        }
    }

    // Storage decisions: an SP holding a fraction of its assignment decides
    // chunk by chunk from its own deterministic stream.
    std::map<SpId, DetRng> storage_rng;
    for (SpId sp = 0; sp < cfg_.sp_count; ++sp) {
        std::uint64_t state = trial_seed ^ (0x5707a6eULL * (sp + 1));
        storage_rng.emplace(sp, DetRng(splitmix64(state)));
    }
    for (const auto& [blob_id, meta] : ledger_.blobs()) {
        for (std::uint32_t cs = 0; cs < meta.assignment.size(); ++cs) {
            for (std::uint32_t ci = 0; ci < meta.assignment[cs].size(); ++ci) {
                const SpId sp = meta.assignment[cs][ci];
                const double policy = strategy_of(sp).storage_policy;
                bool store;
                if (policy >= 1.0) {
                    store = true;
                } else if (policy <= 0.0) {
                    store = false;
                } else {
                    store = storage_rng.at(sp).bernoulli(policy);
                }
                if (store) held_[sp].insert(ChunkRef{blob_id, cs, ci});
            }
        }
    }
}

const Strategy& World::strategy_of(SpId sp) const {
    static const Strategy honest = Strategy::honest();
    auto it = strategies_.find(sp);
    return it == strategies_.end() ? honest : it->second;
}

bool World::holds(SpId sp, const ChunkRef& ref) const {
    auto it = held_.find(sp);
    return it != held_.end() && it->second.count(ref) > 0;
}

const Bytes& World::payload(const ChunkRef& ref) const {
    return *payloads_.at(ref);
}

Hash32 World::chunk_root(const ChunkRef& ref) const {
    return roots_.at(ref);
}

bool World::has_retained_proof(SpId auditor, std::uint64_t epoch,
                               std::uint64_t challenge_id) const {
    auto it = retained_.find(auditor);
    if (it == retained_.end()) return false;
    auto eit = it->second.find(epoch);
    return eit != it->second.end() && eit->second.proofs.count(challenge_id) > 0;
}

std::uint64_t World::stored_chunks(SpId sp) const {
    auto it = held_.find(sp);
    return it == held_.end() ? 0 : it->second.size();
}

std::uint64_t World::assigned_chunks(SpId sp) const {
    auto it = assigned_count_.find(sp);
    return it == assigned_count_.end() ? 0 : it->second;
}

EpochStats World::run_epoch() {
    const auto& econ = cfg_.econ;
    const Tokens s_a_units = to_units(econ.S_a);
    const Tokens s_ata_units = to_units(econ.S_ata);
    const Tokens rwd_st_units = to_units(econ.rwd_st);
    const Tokens rwd_au_units = to_units(econ.rwd_au);

    ledger_.advance_epoch();
    const std::uint64_t e = ledger_.epoch();
    EpochStats stats;

    auto apply_slash = [&](SpId sp, Tokens amount, std::optional<SpId> reporter,
                           const std::string& reason) {
        const Tokens stake_before = ledger_.sp(sp).stake;
        const Tokens reporter_before = reporter ? ledger_.sp(*reporter).balance : 0;
        ledger_.slash(sp, amount, reporter, reason);
        utilities_[sp].slash_losses += stake_before - ledger_.sp(sp).stake;
        if (reporter) {
            utilities_[*reporter].evidence_rewards +=
                ledger_.sp(*reporter).balance - reporter_before;
        }
        ++stats.slash_events;
    };

    // 1. Internal challenges.
    const auto challenges =
        derive_challenges(e, ledger_, econ.p_a, econ.auditors_per_audit);
    stats.challenges = challenges.size();

    // 2. Auditee responses.
    const std::uint32_t samples_per_chunk =
        static_cast<std::uint32_t>(cfg_.coding.chunk_size / cfg_.sample_size);
    std::vector<std::optional<AuditProof>> responses(challenges.size());
    for (std::size_t i = 0; i < challenges.size(); ++i) {
        const auto& ch = challenges[i];
        const Strategy& s = strategy_of(ch.auditee);
        const bool held = holds(ch.auditee, ch.chunk_ref);
        switch (s.challenge_response) {
        case ChallengeResponse::Honest:
            if (held) {
                const auto& bytes = payload(ch.chunk_ref);
                responses[i] = make_proof(ch, ByteSpan(bytes.data(), bytes.size()),
                                          cfg_.sample_size);
            }
            break;
        case ChallengeResponse::Ignore:
            break;
        case ChallengeResponse::RetrieveExternally: {
            if (!held) utilities_[ch.auditee].retrieval_costs += c_r_units_;
            const auto& bytes = payload(ch.chunk_ref);
            responses[i] =
                make_proof(ch, ByteSpan(bytes.data(), bytes.size()), cfg_.sample_size);
            break;
        }
        case ChallengeResponse::Forge:
            if (held) {
                const auto& bytes = payload(ch.chunk_ref);
                responses[i] = make_proof(ch, ByteSpan(bytes.data(), bytes.size()),
                                          cfg_.sample_size);
            } else {
                responses[i] = forge_proof(ch, cfg_.sample_size, samples_per_chunk,
                                           fold_hash(ledger_.beacon(e, "forge")) ^
                                               ch.challenge_id);
            }
            break;
        }
        if (!responses[i]) {
            ++stats.responses_absent;
        } else if (verify_proof(*responses[i], chunk_root(ch.chunk_ref), ch)) {
            ++stats.responses_valid;
        } else {
            ++stats.responses_invalid;
        }
    }

    // 3. Auditor recording.
    std::map<SpId, Scoreboard> boards;
    std::vector<std::pair<std::uint64_t, SpId>> evidence; // (challenge, reporter)
    for (std::size_t i = 0; i < challenges.size(); ++i) {
        const auto& ch = challenges[i];
        const auto root = chunk_root(ch.chunk_ref);
        for (const SpId auditor : ch.auditors) {
            const Strategy& as = strategy_of(auditor);
            std::uint8_t bit = 0;
            bool retain = false;
            bool verified = false;

            auto honest_record = [&](bool keep_proof) {
                const auto out = record(responses[i], root, ch, econ.epsilon);
                bit = out.bit;
                verified = responses[i].has_value();
                retain = keep_proof && out.bit == 1;
                if (out.slashing_evidence && as.evidence_policy == EvidencePolicy::Submit) {
                    evidence.emplace_back(ch.challenge_id, auditor);
                }
            };

            switch (as.auditor_policy) {
            case AuditorPolicy::VerifyAndRetain:
                honest_record(true);
                break;
            case AuditorPolicy::DropProofs:
                honest_record(false);
                break;
            case AuditorPolicy::RubberStamp:
                bit = 1;
                break;
            case AuditorPolicy::ReportAllZero:
                bit = 0;
                break;
            case AuditorPolicy::TrustCoalition:
                if (in_coalition(auditor) && in_coalition(ch.auditee)) {
                    bit = 1;
                    retain = responses[i].has_value();
                } else {
                    honest_record(true);
                }
                break;
            case AuditorPolicy::ZeroOutsiders:
                if (in_coalition(ch.auditee)) {
                    honest_record(true);
                } else {
                    bit = 0;
                }
                break;
            }

            if (verified) utilities_[auditor].proof_overhead_costs += verify_cost_units_;
            if (retain && responses[i]) {
                retained_[auditor][e].proofs.emplace(ch.challenge_id, *responses[i]);
            }
            auto& board = boards[auditor];
            board.auditor = auditor;
            board.epoch = e;
            board.entries[ch.auditee].push_back(bit);
        }
    }

    // 4. Scoreboard publication.
    std::map<SpId, Scoreboard> published;
    for (auto& [auditor, board] : boards) {
        const Strategy& s = strategy_of(auditor);
        switch (s.scoreboard_policy) {
        case ScoreboardPolicy::Truthful:
            published.emplace(auditor, board);
            break;
        case ScoreboardPolicy::AllOnes: {
            Scoreboard ones = board;
            for (auto& [auditee, bits] : ones.entries) {
                std::fill(bits.begin(), bits.end(), 1);
            }
            published.emplace(auditor, std::move(ones));
            break;
        }
        case ScoreboardPolicy::Withhold:
            break;
        }
    }
    // The boards go on-chain in the compressed wire format; scoring and the
    // auditor audits below consume what the contract actually saw.
    for (auto& [auditor, board] : published) {
        const Bytes wire = compress_scoreboard(board.entries);
        board.entries = decompress_scoreboard(ByteSpan(wire.data(), wire.size()));
        ledger_.publish_scoreboard(auditor, ByteSpan(wire.data(), wire.size()));
    }
    for (const auto& [auditor, board] : published) {
        for (const auto& [auditee, bits] : board.entries) {
            stats.published_ones +=
                static_cast<std::uint64_t>(std::count(bits.begin(), bits.end(), 1));
        }
    }

    // 5. Trimmed scores. A withheld board counts as all-zero evaluations; an
    // SP nobody audited this epoch keeps the benefit of the doubt at 1.0.
    std::map<std::pair<SpId, SpId>, std::uint64_t> assigned_total; // (auditor, auditee)
    for (const auto& ch : challenges) {
        for (const SpId a : ch.auditors) ++assigned_total[{a, ch.auditee}];
    }
    const std::uint32_t f_cfg = cfg_.f_trim();
    for (const auto& [sp_id, unused] : utilities_) {
        std::map<SpId, std::pair<std::uint64_t, std::uint64_t>> evals;
        for (const auto& [key, total] : assigned_total) {
            if (key.second != sp_id) continue;
            const SpId auditor = key.first;
            std::uint64_t successes = 0;
            auto pit = published.find(auditor);
            if (pit != published.end()) {
                const auto& bits = pit->second.entries.at(sp_id);
                successes = static_cast<std::uint64_t>(
                    std::count(bits.begin(), bits.end(), 1));
            }
            evals[auditor] = {successes, total};
        }
        if (evals.empty()) {
            stats.scores[sp_id] = 1.0;
            continue;
        }
        // Sparse epochs can leave fewer than 2f+1 evaluators; degrade the trim
        // rather than refuse to score.
        const auto evaluators = static_cast<std::uint32_t>(evals.size());
        const std::uint32_t f_eff = std::min(f_cfg, (evaluators - 1) / 2);
        stats.scores[sp_id] = compute_score(sp_id, e, evals, f_eff).score;
    }

    // 6. Disbursement (rewards here; punitive actions follow on-chain).
    EpochOutcome outcome;
    for (const auto& [sp_id, score] : stats.scores) {
        EpochOutcome::PerSp per;
        per.score = score;
        per.assigned_chunks = assigned_chunks(sp_id);
        auto pit = published.find(sp_id);
        if (pit != published.end()) {
            for (const auto& [auditee, bits] : pit->second.entries) {
                per.published_ones += static_cast<std::uint64_t>(
                    std::count(bits.begin(), bits.end(), 1));
            }
        }
        outcome.per_sp[sp_id] = per;
    }
    (void)ledger_.disburse_epoch(outcome);
    for (const auto& [sp_id, per] : outcome.per_sp) {
        utilities_[sp_id].storage_rewards += static_cast<Tokens>(std::llround(
            static_cast<double>(rwd_st_units) * per.assigned_chunks * per.score));
        utilities_[sp_id].auditor_rewards +=
            rwd_au_units * static_cast<Tokens>(per.published_ones);
        utilities_[sp_id].storage_costs +=
            c_s_units_ * static_cast<Tokens>(stored_chunks(sp_id));
    }

    // 7. On-chain auditee challenges, quadratic in the score.
    std::map<SpId, std::vector<ChunkRef>> assigned_refs;
    for (const auto& [blob_id, meta] : ledger_.blobs()) {
        for (std::uint32_t cs = 0; cs < meta.assignment.size(); ++cs) {
            for (std::uint32_t ci = 0; ci < meta.assignment[cs].size(); ++ci) {
                assigned_refs[meta.assignment[cs][ci]].push_back(ChunkRef{blob_id, cs, ci});
            }
        }
    }
    const std::uint64_t onchain_seed = fold_hash(ledger_.beacon(e, "onchain-audit"));
    for (const auto& [sp_id, score] : stats.scores) {
        const auto count = onchain_auditee_count(score, econ.C);
        if (count == 0) continue;
        auto it = assigned_refs.find(sp_id);
        if (it == assigned_refs.end()) continue;
        const auto& refs = it->second;
        std::uint64_t state = onchain_seed ^ (0x0c4a11ULL * (sp_id + 1));
        DetRng rng(splitmix64(state));
        const auto picks = rng.sample_indices(
            static_cast<std::uint32_t>(refs.size()),
            std::min<std::uint32_t>(count, static_cast<std::uint32_t>(refs.size())));
        const Strategy& s = strategy_of(sp_id);
        for (const auto pick : picks) {
            ++stats.onchain_challenges;
            const ChunkRef& ref = refs[pick];
            const bool held = holds(sp_id, ref);
            bool pass = false;
            switch (s.challenge_response) {
            case ChallengeResponse::Honest:
                pass = held;
                break;
            case ChallengeResponse::Ignore:
                pass = false;
                break;
            case ChallengeResponse::RetrieveExternally:
                if (!held) utilities_[sp_id].retrieval_costs += c_r_units_;
                pass = true;
                break;
            case ChallengeResponse::Forge:
                pass = held; // a fabricated proof never verifies on-chain
                break;
            }
            if (!pass) {
                ++stats.onchain_failed;
                apply_slash(sp_id, s_a_units, std::nullopt, "onchain-storage-audit");
            }
        }
    }

    // 8. Audit-the-auditor over published boards.
    const Hash32 ata_seed = ledger_.beacon(e, "ata");
    for (const auto& [auditor, board] : published) {
        const auto selections = audit_the_auditor(board, challenges, econ.p_ata, ata_seed);
        stats.ata_selected += selections.size();
        for (const auto& sel : selections) {
            bool ok = false;
            if (sel.challenge_id != std::uint64_t(-1)) {
                auto rit = retained_.find(auditor);
                if (rit != retained_.end()) {
                    auto eit = rit->second.find(e);
                    if (eit != rit->second.end()) {
                        auto pit = eit->second.proofs.find(sel.challenge_id);
                        if (pit != eit->second.proofs.end()) {
                            const auto& ch = challenges[sel.challenge_id];
                            ok = verify_proof(pit->second, chunk_root(ch.chunk_ref), ch);
                        }
                    }
                }
            }
            if (!ok) {
                ++stats.ata_failed;
                apply_slash(auditor, s_ata_units, std::nullopt, "ata-failure");
            }
        }
    }

    // 9. Peer slashing evidence, deduplicated per challenge.
    std::sort(evidence.begin(), evidence.end());
    std::uint64_t last_challenge = std::uint64_t(-1);
    for (const auto& [challenge_id, reporter] : evidence) {
        if (challenge_id == last_challenge) continue; // already slashed
        last_challenge = challenge_id;
        const auto& ch = challenges[challenge_id];
        const auto& proof = responses[challenge_id];
        if (!proof) continue; // nothing to post; absence is not evidence

        const Tokens stake_before = ledger_.sp(ch.auditee).stake;
        const Tokens reporter_before = ledger_.sp(reporter).balance;
        if (submit_evidence(ledger_, *proof, ch, chunk_root(ch.chunk_ref), reporter,
                            s_a_units)) {
            ++stats.evidence_slashes;
            ++stats.slash_events;
            utilities_[ch.auditee].slash_losses +=
                stake_before - ledger_.sp(ch.auditee).stake;
            utilities_[reporter].evidence_rewards +=
                ledger_.sp(reporter).balance - reporter_before;
        }
    }

    // 10. Retention pruning: proofs survive two epoch closes.
    for (auto& [auditor, by_epoch] : retained_) {
        while (!by_epoch.empty() && by_epoch.begin()->first + 1 < e) {
            by_epoch.erase(by_epoch.begin());
        }
    }

    return stats;
}

namespace {

struct RunningStat {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint32_t n = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    [[nodiscard]] double mean() const { return n ? sum / n : 0.0; }
    [[nodiscard]] double stderr_of_mean() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
        return std::sqrt(var / n);
    }
};

std::map<SpId, Strategy> uniform_strategies(std::uint32_t sp_count, const Strategy& s) {
    std::map<SpId, Strategy> out;
    for (SpId i = 0; i < sp_count; ++i) out[i] = s;
    return out;
}

double run_trial_net(const WorldConfig& cfg, const std::shared_ptr<const Workload>& workload,
                     const std::map<SpId, Strategy>& strategies, SpId focal,
                     std::uint32_t epochs, std::uint64_t trial_seed) {
    World world(cfg, workload, strategies, trial_seed);
    for (std::uint32_t e = 0; e < epochs; ++e) world.run_epoch();
    return to_value(world.utilities().at(focal).net());
}

} // namespace

ExperimentResult estimate_utility(const WorldConfig& cfg, const Strategy& focal,
                                  const Strategy& background, SpId focal_sp,
                                  std::uint32_t epochs, std::uint32_t trials,
                                  std::uint64_t seed) {
    if (trials < 1) throw_error(Errc::param, "estimate_utility: need at least one trial");
    const auto workload = Workload::build(cfg);
    auto strategies = uniform_strategies(cfg.sp_count, background);
    strategies[focal_sp] = focal;

    RunningStat stat;
    for (std::uint32_t t = 0; t < trials; ++t) {
        stat.add(run_trial_net(cfg, workload, strategies, focal_sp, epochs, seed + t));
    }
    ExperimentResult r;
    r.mean_utility = stat.mean();
    r.std_error = stat.stderr_of_mean();
    r.trials = trials;
    r.seed = seed;
    return r;
}

std::vector<NashRow> nash_test(const WorldConfig& cfg,
                               const std::vector<std::pair<std::string, Strategy>>& deviations,
                               std::uint32_t epochs, std::uint32_t trials, std::uint64_t seed) {
    const auto workload = Workload::build(cfg);
    const SpId focal = 0;
    const auto honest_strategies = uniform_strategies(cfg.sp_count, Strategy::honest());

    std::vector<double> honest_net(trials);
    for (std::uint32_t t = 0; t < trials; ++t) {
        honest_net[t] = run_trial_net(cfg, workload, honest_strategies, focal, epochs, seed + t);
    }
    const double honest_mean =
        std::accumulate(honest_net.begin(), honest_net.end(), 0.0) / trials;

    std::vector<NashRow> rows;
    for (const auto& [name, deviation] : deviations) {
        auto strategies = honest_strategies;
        strategies[focal] = deviation;
        RunningStat diff, dev;
        for (std::uint32_t t = 0; t < trials; ++t) {
            const double d = run_trial_net(cfg, workload, strategies, focal, epochs, seed + t);
            dev.add(d);
            diff.add(honest_net[t] - d);
        }
        NashRow row;
        row.deviation = name;
        row.honest_mean = honest_mean;
        row.deviant_mean = dev.mean();
        row.diff_mean = diff.mean();
        row.diff_stderr = diff.stderr_of_mean();
        row.z = row.diff_stderr > 0 ? row.diff_mean / row.diff_stderr
                                    : (row.diff_mean > 0 ? 1e9 : 0.0);
        row.pass = row.diff_stderr > 0 ? row.z > 1.645 : row.diff_mean > 0;
        rows.push_back(row);
    }
    return rows;
}

MutualDishonestyResult mutual_dishonesty_test(const WorldConfig& cfg, std::uint32_t epochs,
                                              std::uint32_t trials, std::uint64_t seed) {
    const auto workload = Workload::build(cfg);
    const auto colluders = uniform_strategies(cfg.sp_count, Strategy::mutual_dishonesty());

    // Phase 1: all-colluder runs; count the '1's and the ata hits.
    std::uint64_t total_ones = 0;
    std::uint64_t total_failed = 0;
    std::vector<double> sp0_colluder_net(trials);
    for (std::uint32_t t = 0; t < trials; ++t) {
        World world(cfg, workload, colluders, seed + t);
        for (std::uint32_t e = 0; e < epochs; ++e) {
            const auto stats = world.run_epoch();
            total_ones += stats.published_ones;
            total_failed += stats.ata_failed;
        }
        sp0_colluder_net[t] = to_value(world.utilities().at(0).net());
    }

    MutualDishonestyResult r;
    r.total_ones = total_ones;
    r.closed_form = cfg.econ.rwd_au - cfg.econ.p_ata * cfg.econ.S_ata;
    if (total_ones > 0) {
        const double p_hat = static_cast<double>(total_failed) / total_ones;
        r.measured_per_one = cfg.econ.rwd_au - p_hat * cfg.econ.S_ata;
        r.sigma = cfg.econ.S_ata *
                  std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-12) / total_ones);
        r.negative = r.measured_per_one < 0.0;
        r.within_3_sigma = std::abs(r.measured_per_one - r.closed_form) <= 3.0 * r.sigma;
    }

    // Phase 2: one defector switches to truthful zero-reporting.
    auto with_defector = colluders;
    Strategy defector = Strategy::mutual_dishonesty();
    defector.auditor_policy = AuditorPolicy::VerifyAndRetain;
    defector.scoreboard_policy = ScoreboardPolicy::Truthful;
    defector.evidence_policy = EvidencePolicy::Submit;
    with_defector[0] = defector;

    RunningStat defector_net, colluder_net;
    for (std::uint32_t t = 0; t < trials; ++t) {
        defector_net.add(run_trial_net(cfg, workload, with_defector, 0, epochs, seed + t));
        colluder_net.add(sp0_colluder_net[t]);
    }
    r.defector_mean_net = defector_net.mean();
    r.colluder_mean_net = colluder_net.mean();
    r.defection_improves = r.defector_mean_net > r.colluder_mean_net;
    return r;
}

std::vector<CoalitionRow>
coalition_test(const WorldConfig& cfg, const std::vector<std::uint32_t>& sizes,
               const std::vector<std::pair<std::string, Strategy>>& joint_deviations,
               std::uint32_t epochs, std::uint32_t trials, std::uint64_t seed) {
    std::vector<CoalitionRow> rows;
    for (const auto size : sizes) {
        if (size > cfg.f_trim()) {
            throw_error(Errc::param, "coalition_test: coalition larger than f");
        }
        WorldConfig coalition_cfg = cfg;
        coalition_cfg.coalition.clear();
        for (SpId i = 0; i < size; ++i) coalition_cfg.coalition.insert(i);
        const auto workload = Workload::build(coalition_cfg);

        // Honest baseline: aggregate coalition net and its verification spend.
        std::vector<double> honest_agg(trials, 0.0);
        RunningStat budget;
        const auto honest = uniform_strategies(cfg.sp_count, Strategy::honest());
        for (std::uint32_t t = 0; t < trials; ++t) {
            World world(coalition_cfg, workload, honest, seed + t);
            for (std::uint32_t e = 0; e < epochs; ++e) world.run_epoch();
            double agg = 0.0, spend = 0.0;
            for (SpId i = 0; i < size; ++i) {
                agg += to_value(world.utilities().at(i).net());
                spend += to_value(world.utilities().at(i).proof_overhead_costs);
            }
            honest_agg[t] = agg;
            budget.add(spend);
        }

        for (const auto& [name, deviation] : joint_deviations) {
            auto strategies = honest;
            for (SpId i = 0; i < size; ++i) strategies[i] = deviation;
            RunningStat gain;
            for (std::uint32_t t = 0; t < trials; ++t) {
                World world(coalition_cfg, workload, strategies, seed + t);
                for (std::uint32_t e = 0; e < epochs; ++e) world.run_epoch();
                double agg = 0.0;
                for (SpId i = 0; i < size; ++i) {
                    agg += to_value(world.utilities().at(i).net());
                }
                gain.add(agg - honest_agg[t]);
            }
            CoalitionRow row;
            row.deviation = name;
            row.coalition_size = size;
            row.coalition_gain = gain.mean();
            row.gain_stderr = gain.stderr_of_mean();
            row.epsilon_budget = budget.mean();
            row.pass = row.coalition_gain <= row.epsilon_budget + 3.0 * row.gain_stderr;
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace shelby
