#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "shelby/bytes.hpp"
#include "shelby/coordination.hpp"
#include "shelby/merkle.hpp"

namespace shelby {

struct ChunkRef {
    std::string blob_id;
    std::uint32_t chunkset_index = 0;
    std::uint32_t chunk_index = 0;

    auto operator<=>(const ChunkRef&) const = default;
};

struct AuditChallenge {
    std::uint64_t challenge_id = 0; // position in the epoch's challenge list
    std::uint64_t epoch = 0;
    ChunkRef chunk_ref;
    std::uint32_t sample_index = 0;
    SpId auditee = 0;
    std::vector<SpId> auditors;
};

struct AuditProof {
    std::uint64_t challenge_id = 0;
    ChunkRef chunk_ref;
    std::uint32_t sample_index = 0;
    InclusionProof inclusion; // sample bytes live in inclusion.leaf_bytes
};

// Bit vectors per auditee, one bit per challenge this auditor was assigned,
// in epoch challenge order; 1 = verified success.
struct Scoreboard {
    SpId auditor = 0;
    std::uint64_t epoch = 0;
    std::map<SpId, std::vector<std::uint8_t>> entries;
};

struct AuditScore {
    SpId sp_id = 0;
    std::uint64_t epoch = 0;
    double score = 1.0;
};

// Every stored chunk of a Ready, paid-up blob is independently selected with
// probability p_a; sample index and the auditor set are drawn from the same
// per-chunk stream, itself derived from beacon(epoch, "internal-audit"), so
// any replica derives the identical list.
std::vector<AuditChallenge> derive_challenges(std::uint64_t epoch, const Ledger& ledger,
                                              double p_a, std::uint32_t auditors_per_audit);

// Proof construction against the chunk payload (honest auditee path).
AuditProof make_proof(const AuditChallenge& challenge, ByteSpan chunk_payload,
                      std::uint32_t sample_size);

// Contract-grade check: inclusion verifies against the committed chunk root
// and the proof answers this exact challenge.
bool verify_proof(const AuditProof& proof, const Hash32& chunk_root,
                  const AuditChallenge& challenge);

struct RecordOutcome {
    std::uint8_t bit = 0;
    bool slashing_evidence = false; // invalid proof worth posting on-chain
};

// Def-1 auditor rule: record 1 iff a proof arrived and fully verifies
// (honest verification drives p_inv to zero, under any epsilon); an invalid
// proof is queued as slashing evidence.
RecordOutcome record(const std::optional<AuditProof>& proof, const Hash32& chunk_root,
                     const AuditChallenge& challenge, double epsilon);

// Trimmed aggregation: per-peer success fractions, highest f and lowest f
// dropped, arithmetic mean of the rest. Peers with zero assigned audits are
// excluded first; fewer than 2f+1 remaining evaluators is an error.
AuditScore compute_score(SpId auditee, std::uint64_t epoch,
                         const std::map<SpId, std::pair<std::uint64_t, std::uint64_t>>&
                             peer_evaluations /* auditor -> (successes, total) */,
                         std::uint32_t f);

// round((1 - score^2) * C), half away from zero.
std::uint32_t onchain_auditee_count(double score, std::uint32_t C);

struct AtaSelection {
    SpId auditor = 0;
    SpId auditee = 0;
    std::uint32_t bit_position = 0;
    std::uint64_t challenge_id = 0;
};

// Per-auditor view: which epoch challenges feed which scoreboard bits.
std::map<SpId, std::vector<std::uint64_t>>
scoreboard_challenge_ids(const std::vector<AuditChallenge>& challenges, SpId auditor);

// Each '1' entry of a published scoreboard is independently selected with
// probability p_ata; the auditor must reproduce the retained proof for every
// selected entry.
std::vector<AtaSelection> audit_the_auditor(const Scoreboard& board,
                                            const std::vector<AuditChallenge>& challenges,
                                            double p_ata, const Hash32& beacon_seed);

// Contract-side peer-slashing entry point: evidence is accepted only when
// the challenge is authentic and the submitted proof fails verification, in
// which case the auditee is slashed and the reporter credited. Evidence that
// actually verifies is rejected and the reporter pays the flat action fee.
// Returns true when a slash happened.
bool submit_evidence(Ledger& ledger, const AuditProof& proof, const AuditChallenge& challenge,
                     const Hash32& chunk_root, SpId reporter, Tokens slash_amount);

// On-chain scoreboard encoding: varint entry count, then per auditee
// varint(sp) varint(bit_length) and, when non-empty, one first-bit byte
// followed by varint run lengths that alternate bit value and sum to the
// length. All-ones vectors need O(log L) bytes.
Bytes compress_scoreboard(const std::map<SpId, std::vector<std::uint8_t>>& entries);
std::map<SpId, std::vector<std::uint8_t>> decompress_scoreboard(ByteSpan data);

} // namespace shelby
