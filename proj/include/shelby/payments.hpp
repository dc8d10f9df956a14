#pragma once

#include <cstdint>
#include <string>

#include "shelby/tokens.hpp"

namespace shelby {

// Unidirectional micropayment channel. The payer streams value by signing
// successively smaller refunds with non-increasing settlement times; only
// open and settle touch the ledger. Updates are modeled as signed by actor
// identity; the state machine itself is pure.
enum class ChannelStatus : std::uint8_t { Open, Settled, Expired };

struct ChannelState {
    std::uint64_t channel_id = 0;
    std::string payer;
    std::string payee;
    Tokens deposit = 0;
    Tokens refund_amount = 0;      // current amount returnable to the payer
    std::int64_t settle_after = 0; // earliest time this refund may settle
    std::uint64_t seq = 0;
    ChannelStatus status = ChannelStatus::Open;

    [[nodiscard]] Tokens paid_total() const { return deposit - refund_amount; }
};

ChannelState open_channel_state(std::uint64_t channel_id, std::string payer, std::string payee,
                                Tokens deposit, std::int64_t initial_settle_after);

// Off-ledger payment: refund shrinks by `amount`, settle time may only move
// earlier, seq increments. Throws Errc::payment on overdraw and
// Errc::protocol on a settle-time increase or non-positive amount.
ChannelState pay(const ChannelState& channel, Tokens amount, std::int64_t new_settle_after);

struct SettlementSplit {
    Tokens payee_amount = 0;
    Tokens payer_amount = 0;
};

// The split the given state settles to: payee gets deposit - refund, payer
// gets the refund. Always conserves the deposit.
SettlementSplit settlement_split(const ChannelState& channel);

} // namespace shelby
