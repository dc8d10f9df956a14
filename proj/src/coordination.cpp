#include "shelby/coordination.hpp"

#include <algorithm>

#include "json.hpp"

#include "shelby/errors.hpp"
#include "shelby/merkle.hpp"
#include "shelby/rng.hpp"
#include "shelby/sha256.hpp"

namespace shelby {

std::string sp_account(SpId sp) {
    return "sp:" + std::to_string(sp);
}

std::set<SpId> BlobMetadata::assigned_sps() const {
    std::set<SpId> out;
    for (const auto& cs : assignment) {
        for (auto sp : cs) out.insert(sp);
    }
    return out;
}

Ledger::Ledger(LedgerConfig config) : config_(std::move(config)) {}

void Ledger::mint(const std::string& account, Tokens amount) {
    if (amount < 0) throw_error(Errc::param, "mint: negative amount");
    accounts_[account] += amount;
    log_event("mint", nlohmann::ordered_json{{"account", account}, {"amount", amount}}.dump());
}

SpId Ledger::add_sp(Tokens stake, Tokens balance, std::uint64_t declared_capacity) {
    const SpId id = next_sp_++;
    SpAccount sp;
    sp.sp_id = id;
    sp.stake = stake;
    sp.balance = balance;
    sp.declared_capacity = declared_capacity;
    sps_[id] = sp;
    log_event("sp_admitted", nlohmann::ordered_json{{"sp", id},
                                                    {"stake", stake},
                                                    {"balance", balance},
                                                    {"capacity", declared_capacity}}
                                 .dump());
    return id;
}

void Ledger::advance_epoch() {
    ++epoch_;
    log_event("epoch_advanced", nlohmann::ordered_json{{"epoch", epoch_}}.dump());
}

Hash32 Ledger::beacon(std::uint64_t epoch, std::string_view purpose_tag) const {
    Sha256 h;
    h.update(config_.genesis_seed.data(), config_.genesis_seed.size());
    Bytes be;
    put_u64_be(be, epoch);
    h.update(be.data(), be.size());
    h.update(purpose_tag.data(), purpose_tag.size());
    return h.finish();
}

Tokens Ledger::required_payment(std::uint64_t data_bytes, std::uint64_t duration_epochs) const {
    const double gb = static_cast<double>(data_bytes) / 1e9;
    const double months =
        static_cast<double>(duration_epochs) / config_.econ.epochs_per_month;
    return to_units(config_.econ.W * gb * months);
}

const BlobMetadata& Ledger::register_blob(const std::string& blob_id, const Hash32& blob_root,
                                          const std::vector<std::vector<Hash32>>& chunk_roots,
                                          std::uint64_t chunk_size,
                                          std::uint32_t samples_per_chunk,
                                          const std::string& payer_account, Tokens payment,
                                          std::uint64_t duration_epochs) {
    if (blobs_.count(blob_id)) {
        throw_error(Errc::conflict, "register_blob: blob id already registered (blobs are immutable)");
    }
    if (chunk_roots.empty() || chunk_roots[0].empty()) {
        throw_error(Errc::param, "register_blob: no chunk roots");
    }
    const std::uint32_t n = static_cast<std::uint32_t>(chunk_roots[0].size());
    for (const auto& cs : chunk_roots) {
        if (cs.size() != n) throw_error(Errc::param, "register_blob: ragged chunk root list");
    }

    // The blob root must commit the ordered chunk roots.
    std::vector<Bytes> leaves;
    for (const auto& cs : chunk_roots) {
        for (const auto& r : cs) leaves.emplace_back(r.begin(), r.end());
    }
    if (commit(leaves, 32).root != blob_root) {
        throw_error(Errc::param, "register_blob: blob root does not commit the chunk roots");
    }

    const std::uint64_t data_bytes =
        chunk_roots.size() * std::uint64_t(n) * chunk_size; // coded bytes stored
    const Tokens required = required_payment(data_bytes, duration_epochs);
    if (payment < required) {
        throw_error(Errc::payment, "register_blob: payment below W * size * duration");
    }
    debit(payer_account, payment);
    escrow_pool_ += payment;

    BlobMetadata meta;
    meta.blob_id = blob_id;
    meta.blob_root = blob_root;
    meta.chunk_roots = chunk_roots;
    meta.state = BlobState::Registered;
    meta.paid_until_epoch = epoch_ + duration_epochs;
    meta.payment_escrow = payment;
    meta.chunk_size = chunk_size;
    meta.samples_per_chunk = samples_per_chunk;

    // Seeded placement: an independent shuffle of the eligible SPs per
    // chunkset, so no SP holds two chunks of one chunkset.
    Hash32 seed = beacon(epoch_, "assignment");
    {
        Sha256 h;
        h.update(seed.data(), seed.size());
        h.update(blob_id.data(), blob_id.size());
        seed = h.finish();
    }
    DetRng rng = DetRng::from_seed_bytes(seed);
    meta.assignment.resize(chunk_roots.size());
    for (std::size_t cs = 0; cs < chunk_roots.size(); ++cs) {
        std::vector<SpId> eligible;
        for (const auto& [id, sp] : sps_) {
            if (sp.active && sp.used_capacity + chunk_size <= sp.declared_capacity) {
                eligible.push_back(id);
            }
        }
        if (eligible.size() < n) {
            throw_error(Errc::param, "register_blob: not enough eligible SPs for placement");
        }
        rng.shuffle(eligible);
        meta.assignment[cs].assign(eligible.begin(), eligible.begin() + n);
        for (std::uint32_t ci = 0; ci < n; ++ci) {
            sps_[meta.assignment[cs][ci]].used_capacity += chunk_size;
        }
    }

    auto [it, inserted] = blobs_.emplace(blob_id, std::move(meta));
    log_event("blob_registered",
              nlohmann::ordered_json{{"blob", blob_id},
                                     {"chunksets", chunk_roots.size()},
                                     {"n", n},
                                     {"payment", payment},
                                     {"paid_until", it->second.paid_until_epoch}}
                  .dump());
    return it->second;
}

void Ledger::mark_ready(const std::string& blob_id, const std::set<SpId>& acks) {
    auto it = blobs_.find(blob_id);
    if (it == blobs_.end()) throw_error(Errc::not_found, "mark_ready: unknown blob");
    for (auto sp : it->second.assigned_sps()) {
        if (!acks.count(sp)) {
            throw_error(Errc::protocol, "mark_ready: incomplete write, missing SP ack");
        }
    }
    it->second.state = BlobState::Ready;
    log_event("blob_ready", nlohmann::ordered_json{{"blob", blob_id}}.dump());
}

std::map<SpId, Tokens> Ledger::disburse_epoch(const EpochOutcome& outcome) {
    const auto& econ = config_.econ;
    const Tokens rwd_st = to_units(econ.rwd_st);
    const Tokens rwd_au = to_units(econ.rwd_au);

    std::map<SpId, Tokens> paid;
    for (const auto& [sp_id, per] : outcome.per_sp) {
        auto it = sps_.find(sp_id);
        if (it == sps_.end()) throw_error(Errc::not_found, "disburse: unknown SP");
        const Tokens storage = static_cast<Tokens>(
            std::llround(static_cast<double>(rwd_st) * per.assigned_chunks * per.score));
        const Tokens auditor = rwd_au * static_cast<Tokens>(per.published_ones);
        const Tokens total = storage + auditor;
        it->second.balance += total;
        escrow_pool_ -= total;
        paid[sp_id] = total;
    }
    for (const auto& s : outcome.slashes) {
        slash(s.offender, s.amount, s.reporter, s.reason);
    }
    log_event("epoch_disbursed",
              nlohmann::ordered_json{{"epoch", epoch_},
                                     {"sps_paid", paid.size()},
                                     {"slashes", outcome.slashes.size()}}
                  .dump());
    return paid;
}

void Ledger::slash(SpId sp, Tokens amount, std::optional<SpId> reporter,
                   const std::string& reason) {
    auto it = sps_.find(sp);
    if (it == sps_.end()) throw_error(Errc::not_found, "slash: unknown SP");
    if (amount <= 0) throw_error(Errc::param, "slash: amount must be positive");

    const Tokens taken = std::min(amount, it->second.stake);
    it->second.stake -= taken;
    if (it->second.stake == 0) it->second.active = false; // floored out

    Tokens to_reporter = 0;
    if (reporter && taken > 0) {
        to_reporter = static_cast<Tokens>(
            std::llround(static_cast<double>(taken) * config_.econ.r_slash));
        credit(sp_account(*reporter), to_reporter);
    }
    burned_ += taken - to_reporter;
    log_event("slash", nlohmann::ordered_json{
                           {"sp", sp},
                           {"amount", taken},
                           {"reporter", reporter ? nlohmann::json(*reporter) : nlohmann::json()},
                           {"reason", reason}}
                           .dump());
}

void Ledger::charge_action_fee(const std::string& account) {
    if (config_.onchain_action_fee <= 0) return;
    debit(account, config_.onchain_action_fee);
    burned_ += config_.onchain_action_fee;
    log_event("action_fee", nlohmann::ordered_json{{"account", account},
                                                   {"fee", config_.onchain_action_fee}}
                                .dump());
}

void Ledger::publish_scoreboard(SpId auditor, ByteSpan compressed) {
    charge_action_fee(sp_account(auditor));
    log_event("scoreboard_published",
              nlohmann::ordered_json{{"auditor", auditor}, {"bytes", compressed.size()}}.dump());
}

std::uint64_t Ledger::open_channel(const std::string& payer, const std::string& payee,
                                   Tokens deposit, std::int64_t settle_after) {
    debit(payer, deposit); // throws Errc::payment if the balance is short
    const std::uint64_t id = next_channel_++;
    ChannelRecord rec;
    rec.opened = open_channel_state(id, payer, payee, deposit, settle_after);
    channels_[id] = std::move(rec);
    log_event("channel_open", nlohmann::ordered_json{{"channel", id},
                                                     {"payer", payer},
                                                     {"payee", payee},
                                                     {"deposit", deposit},
                                                     {"settle_after", settle_after}}
                                  .dump());
    return id;
}

void Ledger::present_claim(std::uint64_t channel_id, std::uint64_t seq, Tokens refund_amount,
                           std::int64_t settle_after) {
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) throw_error(Errc::not_found, "present_claim: unknown channel");
    auto& rec = it->second;
    if (rec.opened.status != ChannelStatus::Open) {
        throw_error(Errc::protocol, "present_claim: channel closed");
    }
    if (refund_amount < 0 || refund_amount > rec.opened.deposit) {
        throw_error(Errc::protocol, "present_claim: refund outside deposit");
    }
    // Highest presented seq wins at settlement time.
    if (!rec.best_claim || seq > rec.best_claim->seq) {
        ChannelState claim = rec.opened;
        claim.seq = seq;
        claim.refund_amount = refund_amount;
        claim.settle_after = settle_after;
        rec.best_claim = claim;
    }
}

SettlementSplit Ledger::settle_channel(std::uint64_t channel_id, std::int64_t now) {
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) throw_error(Errc::not_found, "settle: unknown channel");
    auto& rec = it->second;
    if (rec.opened.status != ChannelStatus::Open) {
        throw_error(Errc::protocol, "settle: channel already settled");
    }
    const ChannelState& state = rec.best_claim ? *rec.best_claim : rec.opened;
    if (now < state.settle_after) {
        throw_error(Errc::too_early, "settle: before settle_after of the presented state");
    }
    const SettlementSplit split = settlement_split(state);
    credit(state.payee, split.payee_amount);
    credit(state.payer, split.payer_amount);
    rec.opened.status = ChannelStatus::Settled;
    log_event("channel_settle", nlohmann::ordered_json{{"channel", channel_id},
                                                       {"seq", state.seq},
                                                       {"payee_amount", split.payee_amount},
                                                       {"payer_amount", split.payer_amount}}
                                    .dump());
    return split;
}

const SpAccount& Ledger::sp(SpId id) const {
    auto it = sps_.find(id);
    if (it == sps_.end()) throw_error(Errc::not_found, "unknown SP");
    return it->second;
}

std::vector<SpId> Ledger::active_sp_ids() const {
    std::vector<SpId> out;
    for (const auto& [id, sp] : sps_) {
        if (sp.active) out.push_back(id);
    }
    return out;
}

Tokens Ledger::balance_of(const std::string& account) const {
    if (account.rfind("sp:", 0) == 0) {
        const auto id = static_cast<SpId>(std::stoul(account.substr(3)));
        return sp(id).balance;
    }
    auto it = accounts_.find(account);
    return it == accounts_.end() ? 0 : it->second;
}

Tokens Ledger::total_supply() const {
    Tokens total = escrow_pool_ + burned_;
    for (const auto& [name, bal] : accounts_) total += bal;
    for (const auto& [id, sp] : sps_) total += sp.balance + sp.stake;
    for (const auto& [id, rec] : channels_) {
        if (rec.opened.status == ChannelStatus::Open) total += rec.opened.deposit;
    }
    return total;
}

void Ledger::credit(const std::string& account, Tokens amount) {
    if (amount < 0) throw_error(Errc::internal, "credit: negative amount");
    if (account.rfind("sp:", 0) == 0) {
        const auto id = static_cast<SpId>(std::stoul(account.substr(3)));
        auto it = sps_.find(id);
        if (it == sps_.end()) throw_error(Errc::not_found, "credit: unknown SP account");
        it->second.balance += amount;
        return;
    }
    accounts_[account] += amount;
}

void Ledger::debit(const std::string& account, Tokens amount) {
    if (amount < 0) throw_error(Errc::internal, "debit: negative amount");
    if (account.rfind("sp:", 0) == 0) {
        const auto id = static_cast<SpId>(std::stoul(account.substr(3)));
        auto it = sps_.find(id);
        if (it == sps_.end()) throw_error(Errc::not_found, "debit: unknown SP account");
        if (it->second.balance < amount) throw_error(Errc::payment, "debit: insufficient balance");
        it->second.balance -= amount;
        return;
    }
    auto it = accounts_.find(account);
    if (it == accounts_.end() || it->second < amount) {
        throw_error(Errc::payment, "debit: insufficient balance");
    }
    it->second -= amount;
}

void Ledger::log_event(std::string_view type, const std::string& payload_json) {
    nlohmann::ordered_json j;
    j["epoch"] = epoch_;
    j["event"] = std::string(type);
    j["payload"] = nlohmann::ordered_json::parse(payload_json);
    events_.push_back(j.dump());
}

} // namespace shelby
