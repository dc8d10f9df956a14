#include "shelby/payments.hpp"

#include "shelby/errors.hpp"

namespace shelby {

ChannelState open_channel_state(std::uint64_t channel_id, std::string payer, std::string payee,
                                Tokens deposit, std::int64_t initial_settle_after) {
    if (deposit <= 0) throw_error(Errc::param, "channel: deposit must be positive");
    ChannelState c;
    c.channel_id = channel_id;
    c.payer = std::move(payer);
    c.payee = std::move(payee);
    c.deposit = deposit;
    c.refund_amount = deposit;
    c.settle_after = initial_settle_after;
    c.seq = 0;
    c.status = ChannelStatus::Open;
    return c;
}

ChannelState pay(const ChannelState& channel, Tokens amount, std::int64_t new_settle_after) {
    if (channel.status != ChannelStatus::Open) {
        throw_error(Errc::protocol, "channel: not open");
    }
    if (amount <= 0) throw_error(Errc::protocol, "channel: payment must be positive");
    if (amount > channel.refund_amount) {
        throw_error(Errc::payment, "channel: payment exceeds remaining refund");
    }
    if (new_settle_after > channel.settle_after) {
        throw_error(Errc::protocol, "channel: settle_after may not increase");
    }
    ChannelState next = channel;
    next.refund_amount -= amount;
    next.settle_after = new_settle_after;
    next.seq += 1;
    return next;
}

SettlementSplit settlement_split(const ChannelState& channel) {
    return SettlementSplit{channel.deposit - channel.refund_amount, channel.refund_amount};
}

} // namespace shelby
