#pragma once

// Reference matcher for oracle tests. Every operation is replayed from an
// empty state with linear scans, so it shares no data structure with
// lob::OrderBook.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <variant>
#include <vector>

#include "advtrade/lob.hpp"

namespace advtrade::check {

struct SubmitOp {
    lob::Order order;
};
struct CancelOp {
    OrderId order_id = 0;
};
using BookOp = std::variant<SubmitOp, CancelOp>;

class NaiveBook {
public:
    std::vector<lob::Trade> submit(lob::Order o) {
        std::vector<lob::Trade> trades;
        if (o.quantity <= 0 || o.price.ticks() <= 0 || !seen_.insert(o.order_id).second) return trades;
        while (o.quantity > 0) {
            int best = -1;
            for (int i = 0; i < static_cast<int>(resting_.size()); ++i) {
                const auto& r = resting_[static_cast<std::size_t>(i)];
                if (r.side == o.side) continue;
                const bool crosses = o.side == Side::Bid ? r.price <= o.price : r.price >= o.price;
                if (!crosses) continue;
                if (best < 0) {
                    best = i;
                    continue;
                }
                const auto& b = resting_[static_cast<std::size_t>(best)];
                const bool better = o.side == Side::Bid ? r.price < b.price : r.price > b.price;
                // resting_ is in arrival order, so the first hit at a price is the oldest
                if (better) best = i;
            }
            if (best < 0) break;
            auto& r = resting_[static_cast<std::size_t>(best)];
            const Quantity q = std::min(o.quantity, r.quantity);
            lob::Trade t;
            t.price = r.price;
            t.quantity = q;
            t.round = o.round_placed;
            if (o.side == Side::Bid) {
                t.buy_order_id = o.order_id;
                t.buyer = o.agent_id;
                t.sell_order_id = r.order_id;
                t.seller = r.agent_id;
            } else {
                t.buy_order_id = r.order_id;
                t.buyer = r.agent_id;
                t.sell_order_id = o.order_id;
                t.seller = o.agent_id;
            }
            trades.push_back(t);
            o.quantity -= q;
            r.quantity -= q;
            if (r.quantity == 0) resting_.erase(resting_.begin() + best);
        }
        if (o.quantity > 0) resting_.push_back(o);
        return trades;
    }

    Quantity cancel(OrderId id) {
        for (auto it = resting_.begin(); it != resting_.end(); ++it) {
            if (it->order_id == id) {
                const Quantity q = it->quantity;
                resting_.erase(it);
                return q;
            }
        }
        return 0;
    }

    lob::DepthSnapshot snapshot() const {
        std::map<Price, Quantity, std::greater<>> bids;
        std::map<Price, Quantity> offers;
        for (const auto& r : resting_) (r.side == Side::Bid ? bids[r.price] : offers[r.price]) += r.quantity;
        lob::DepthSnapshot s;
        for (const auto& [p, q] : bids) s.bids.push_back({p, q});
        for (const auto& [p, q] : offers) s.offers.push_back({p, q});
        return s;
    }

    const std::vector<lob::Order>& resting() const { return resting_; }

private:
    std::vector<lob::Order> resting_;
    std::set<OrderId> seen_;
};

struct ReplayResult {
    std::vector<lob::Trade> trades;
    std::vector<Quantity> cancelled; ///< one entry per cancel op
    lob::DepthSnapshot snapshot;
};

/// Rebuilds the whole history from scratch.
inline ReplayResult naive_replay(const std::vector<BookOp>& ops) {
    NaiveBook book;
    ReplayResult out;
    for (const auto& op : ops) {
        if (const auto* s = std::get_if<SubmitOp>(&op)) {
            auto t = book.submit(s->order);
            out.trades.insert(out.trades.end(), t.begin(), t.end());
        } else {
            out.cancelled.push_back(book.cancel(std::get<CancelOp>(op).order_id));
        }
    }
    out.snapshot = book.snapshot();
    return out;
}

} // namespace advtrade::check
