#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "shelby/bytes.hpp"
#include "shelby/economics.hpp"
#include "shelby/payments.hpp"
#include "shelby/tokens.hpp"

namespace shelby {

using SpId = std::uint32_t;

std::string sp_account(SpId sp);

struct SpAccount {
    SpId sp_id = 0;
    Tokens stake = 0;
    Tokens balance = 0;
    std::uint64_t declared_capacity = 0; // bytes
    std::uint64_t used_capacity = 0;
    bool active = true;
};

enum class BlobState : std::uint8_t { Registered, Ready };

struct BlobMetadata {
    std::string blob_id;
    Hash32 blob_root{};
    std::vector<std::vector<Hash32>> chunk_roots; // [chunkset][chunk]
    std::vector<std::vector<SpId>> assignment;    // [chunkset][chunk] -> holder
    BlobState state = BlobState::Registered;
    std::uint64_t paid_until_epoch = 0;
    Tokens payment_escrow = 0;
    std::uint64_t chunk_size = 0;
    std::uint32_t samples_per_chunk = 0;

    [[nodiscard]] std::set<SpId> assigned_sps() const;
};

// Epoch-close summary handed to the ledger: audit scores scale storage
// rewards, published '1' counts pay auditor rewards, and on-chain outcomes
// slash stake.
struct EpochOutcome {
    struct PerSp {
        double score = 1.0;
        std::uint64_t assigned_chunks = 0;
        std::uint64_t published_ones = 0;
    };
    std::map<SpId, PerSp> per_sp;

    struct SlashEvent {
        SpId offender = 0;
        Tokens amount = 0;
        std::optional<SpId> reporter;
        std::string reason;
    };
    std::vector<SlashEvent> slashes;
};

struct LedgerConfig {
    Hash32 genesis_seed{};
    EconomicParams econ;
    Tokens onchain_action_fee = 0; // flat fee per on-chain action
};

// In-process stand-in for the on-chain coordination contract: blob registry,
// seeded chunk placement, the randomness beacon, epoch accounting, channels,
// reward disbursement and slashing. Single-writer by construction; every
// mutation appends to an NDJSON event log so runs can be diffed byte-for-byte.
class Ledger {
public:
    explicit Ledger(LedgerConfig config);

    // Genesis-time setup.
    void mint(const std::string& account, Tokens amount);
    SpId add_sp(Tokens stake, Tokens balance, std::uint64_t declared_capacity);

    [[nodiscard]] std::uint64_t epoch() const { return epoch_; }
    void advance_epoch();

    // Deterministic, everyone-agrees randomness: H(genesis || epoch || tag).
    [[nodiscard]] Hash32 beacon(std::uint64_t epoch, std::string_view purpose_tag) const;

    const BlobMetadata& register_blob(const std::string& blob_id, const Hash32& blob_root,
                                      const std::vector<std::vector<Hash32>>& chunk_roots,
                                      std::uint64_t chunk_size, std::uint32_t samples_per_chunk,
                                      const std::string& payer_account, Tokens payment,
                                      std::uint64_t duration_epochs);
    void mark_ready(const std::string& blob_id, const std::set<SpId>& acks);

    [[nodiscard]] Tokens required_payment(std::uint64_t data_bytes,
                                          std::uint64_t duration_epochs) const;

    std::map<SpId, Tokens> disburse_epoch(const EpochOutcome& outcome);
    void slash(SpId sp, Tokens amount, std::optional<SpId> reporter, const std::string& reason);
    void charge_action_fee(const std::string& account);

    // Records a compressed scoreboard publication (an on-chain action).
    void publish_scoreboard(SpId auditor, ByteSpan compressed);

    // Channels (open/settle are on-chain; pays are not).
    std::uint64_t open_channel(const std::string& payer, const std::string& payee,
                               Tokens deposit, std::int64_t settle_after);
    void present_claim(std::uint64_t channel_id, std::uint64_t seq, Tokens refund_amount,
                       std::int64_t settle_after);
    SettlementSplit settle_channel(std::uint64_t channel_id, std::int64_t now);

    // Accessors.
    [[nodiscard]] const std::map<std::string, BlobMetadata>& blobs() const { return blobs_; }
    [[nodiscard]] const std::map<SpId, SpAccount>& sps() const { return sps_; }
    [[nodiscard]] const SpAccount& sp(SpId id) const;
    [[nodiscard]] std::vector<SpId> active_sp_ids() const;
    [[nodiscard]] Tokens balance_of(const std::string& account) const;
    [[nodiscard]] Tokens escrow_pool() const { return escrow_pool_; }
    [[nodiscard]] Tokens burned() const { return burned_; }
    [[nodiscard]] const EconomicParams& econ() const { return config_.econ; }

    // balances + stakes + escrows + channel deposits + burned; constant
    // after genesis.
    [[nodiscard]] Tokens total_supply() const;

    [[nodiscard]] const std::vector<std::string>& events() const { return events_; }

private:
    struct ChannelRecord {
        ChannelState opened;
        std::optional<ChannelState> best_claim;
    };

    void credit(const std::string& account, Tokens amount);
    void debit(const std::string& account, Tokens amount);
    void log_event(std::string_view type, const std::string& payload_json);

    LedgerConfig config_;
    std::uint64_t epoch_ = 0;
    std::map<std::string, Tokens> accounts_;
    std::map<SpId, SpAccount> sps_;
    std::map<std::string, BlobMetadata> blobs_;
    std::map<std::uint64_t, ChannelRecord> channels_;
    SpId next_sp_ = 0;
    std::uint64_t next_channel_ = 1;
    Tokens escrow_pool_ = 0;
    Tokens burned_ = 0;
    std::vector<std::string> events_;
};

} // namespace shelby
