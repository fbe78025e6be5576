#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "advtrade/types.hpp"

namespace advtrade::lob {

struct Order {
    OrderId order_id = 0;
    AgentId agent_id = 0;
    Side side = Side::Bid;
    Price price;
    Quantity quantity = 0;
    RoundIndex round_placed = 0;
};

struct Trade {
    OrderId buy_order_id = 0;
    OrderId sell_order_id = 0;
    AgentId buyer = 0;
    AgentId seller = 0;
    Price price;
    Quantity quantity = 0;
    RoundIndex round = 0;

    bool operator==(const Trade&) const = default;
};

struct Level {
    Price price;
    Quantity quantity = 0;

    bool operator==(const Level&) const = default;
};

/// Anonymous aggregated view: bids best (highest) first, offers best (lowest) first.
struct DepthSnapshot {
    std::vector<Level> bids;
    std::vector<Level> offers;

    std::optional<Price> best_bid() const { return bids.empty() ? std::nullopt : std::optional(bids.front().price); }
    std::optional<Price> best_offer() const {
        return offers.empty() ? std::nullopt : std::optional(offers.front().price);
    }
    bool two_sided() const { return !bids.empty() && !offers.empty(); }

    bool operator==(const DepthSnapshot&) const = default;
};

enum class SubmitStatus { Accepted, DuplicateId, NonPositivePrice, NonPositiveQuantity };

struct SubmitResult {
    SubmitStatus status = SubmitStatus::Accepted;
    std::vector<Trade> trades;
    Quantity resting = 0;

    bool accepted() const { return status == SubmitStatus::Accepted; }
};

/// Lot accounting kept by the book. Every traded lot leaves two orders, so
/// submitted == resting + 2 * traded + cancelled + rejected at all times.
struct LotCounters {
    Quantity submitted = 0;
    Quantity traded = 0;
    Quantity cancelled = 0;
    Quantity rejected = 0;
};

/// Price-time priority limit order book. Trades execute at the resting price.
class OrderBook {
public:
    SubmitResult submit(const Order& order);

    /// Removes the unfilled remainder of an order. Returns the cancelled lots,
    /// or 0 when the id is unknown (already filled or never rested).
    Quantity cancel(OrderId order_id);

    DepthSnapshot snapshot(std::size_t max_depth = SIZE_MAX) const;

    std::optional<Price> best_bid() const;
    std::optional<Price> best_offer() const;
    bool contains(OrderId order_id) const { return index_.contains(order_id); }
    std::optional<Quantity> residual(OrderId order_id) const;
    Quantity resting_lots() const;
    std::size_t order_count() const { return index_.size(); }
    const LotCounters& counters() const { return counters_; }

    /// Resting orders of one price level in queue order.
    std::vector<Order> queue_at(Side side, Price price) const;

private:
    using Queue = std::list<Order>;
    using BidLadder = std::map<Price, Queue, std::greater<>>;
    using OfferLadder = std::map<Price, Queue, std::less<>>;

    struct Locator {
        Side side;
        Price price;
        Queue::iterator it;
    };

    template <typename Ladder>
    void match_against(Ladder& ladder, Order& incoming, std::vector<Trade>& trades);

    BidLadder bids_;
    OfferLadder offers_;
    std::unordered_map<OrderId, Locator> index_;
    std::unordered_set<OrderId> seen_; // ids are never reused, even after a fill
    LotCounters counters_;
};

struct Imbalance {
    Quantity lots = 0; ///< total bid lots minus total offer lots
    int sign = 0;      ///< +1, 0 or -1
};

Imbalance imbalance(const DepthSnapshot& snapshot);

} // namespace advtrade::lob
