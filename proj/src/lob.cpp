#include "advtrade/lob.hpp"

#include <algorithm>

namespace advtrade::lob {

namespace {

bool crosses(Side incoming, Price limit, Price resting) {
    return incoming == Side::Bid ? resting <= limit : resting >= limit;
}

template <typename Ladder>
void append_levels(const Ladder& ladder, std::vector<Level>& out, std::size_t max_depth) {
    for (const auto& [price, queue] : ladder) {
        if (out.size() >= max_depth) break;
        Quantity total = 0;
        for (const auto& o : queue) total += o.quantity;
        out.push_back({price, total});
    }
}

} // namespace

template <typename Ladder>
void OrderBook::match_against(Ladder& ladder, Order& incoming, std::vector<Trade>& trades) {
    while (incoming.quantity > 0 && !ladder.empty()) {
        auto level = ladder.begin();
        if (!crosses(incoming.side, incoming.price, level->first)) break;
        Queue& queue = level->second;
        while (incoming.quantity > 0 && !queue.empty()) {
            Order& resting = queue.front();
            const Quantity fill = std::min(incoming.quantity, resting.quantity);
            Trade t;
            t.price = resting.price;
            t.quantity = fill;
            t.round = incoming.round_placed;
            if (incoming.side == Side::Bid) {
                t.buy_order_id = incoming.order_id;
                t.buyer = incoming.agent_id;
                t.sell_order_id = resting.order_id;
                t.seller = resting.agent_id;
            } else {
                t.buy_order_id = resting.order_id;
                t.buyer = resting.agent_id;
                t.sell_order_id = incoming.order_id;
                t.seller = incoming.agent_id;
            }
            trades.push_back(t);
            counters_.traded += fill;
            incoming.quantity -= fill;
            resting.quantity -= fill;
            if (resting.quantity == 0) {
                index_.erase(resting.order_id);
                queue.pop_front();
            }
        }
        if (queue.empty()) ladder.erase(level);
    }
}

SubmitResult OrderBook::submit(const Order& order) {
    SubmitResult result;
    counters_.submitted += std::max<Quantity>(order.quantity, 0);
    if (order.quantity <= 0) {
        result.status = SubmitStatus::NonPositiveQuantity;
    } else if (!order.price.positive()) {
        result.status = SubmitStatus::NonPositivePrice;
    } else if (seen_.contains(order.order_id)) {
        result.status = SubmitStatus::DuplicateId;
    }
    if (!result.accepted()) {
        counters_.rejected += std::max<Quantity>(order.quantity, 0);
        return result;
    }
    seen_.insert(order.order_id);

    Order incoming = order;
    if (incoming.side == Side::Bid) {
        match_against(offers_, incoming, result.trades);
    } else {
        match_against(bids_, incoming, result.trades);
    }

    if (incoming.quantity > 0) {
        result.resting = incoming.quantity;
        auto rest = [&](auto& ladder) {
            Queue& q = ladder[incoming.price];
            q.push_back(incoming);
            index_.emplace(incoming.order_id, Locator{incoming.side, incoming.price, std::prev(q.end())});
        };
        if (incoming.side == Side::Bid) {
            rest(bids_);
        } else {
            rest(offers_);
        }
    }
    return result;
}

Quantity OrderBook::cancel(OrderId order_id) {
    auto found = index_.find(order_id);
    if (found == index_.end()) return 0;
    const Locator loc = found->second;
    const Quantity lots = loc.it->quantity;
    auto erase_from = [&](auto& ladder) {
        auto level = ladder.find(loc.price);
        level->second.erase(loc.it);
        if (level->second.empty()) ladder.erase(level);
    };
    if (loc.side == Side::Bid) {
        erase_from(bids_);
    } else {
        erase_from(offers_);
    }
    index_.erase(found);
    counters_.cancelled += lots;
    return lots;
}

DepthSnapshot OrderBook::snapshot(std::size_t max_depth) const {
    DepthSnapshot snap;
    append_levels(bids_, snap.bids, max_depth);
    append_levels(offers_, snap.offers, max_depth);
    return snap;
}

std::optional<Price> OrderBook::best_bid() const {
    return bids_.empty() ? std::nullopt : std::optional(bids_.begin()->first);
}

std::optional<Price> OrderBook::best_offer() const {
    return offers_.empty() ? std::nullopt : std::optional(offers_.begin()->first);
}

std::optional<Quantity> OrderBook::residual(OrderId order_id) const {
    auto found = index_.find(order_id);
    if (found == index_.end()) return std::nullopt;
    return found->second.it->quantity;
}

Quantity OrderBook::resting_lots() const {
    Quantity total = 0;
    for (const auto& [id, loc] : index_) total += loc.it->quantity;
    return total;
}

std::vector<Order> OrderBook::queue_at(Side side, Price price) const {
    auto copy = [&](const auto& ladder) {
        auto level = ladder.find(price);
        return level == ladder.end() ? std::vector<Order>{} : std::vector<Order>(level->second.begin(), level->second.end());
    };
    return side == Side::Bid ? copy(bids_) : copy(offers_);
}

Imbalance imbalance(const DepthSnapshot& snapshot) {
    Imbalance out;
    for (const auto& l : snapshot.bids) out.lots += l.quantity;
    for (const auto& l : snapshot.offers) out.lots -= l.quantity;
    out.sign = (out.lots > 0) - (out.lots < 0);
    return out;
}

} // namespace advtrade::lob
