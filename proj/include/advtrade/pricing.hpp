#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "advtrade/types.hpp"

namespace advtrade::pricing {

struct ReferencePriceParams {
    int window = 10;     ///< n: rounds averaged by the jump filter
    double alpha = 0.10; ///< maximum relative step per round
    double initial = 100.0;
};

/// Jump-restricted reference price m_t.
///
/// Each update takes the book midpoint bm_t, rejects it in favour of m_{t-1}
/// when it is at least alpha away (relative) from the mean of the last n
/// reference prices, and finally clamps the step m_t / m_{t-1} to
/// [1 - alpha, 1 + alpha]. A one-sided or empty book carries m_{t-1}.
class ReferencePrice {
public:
    explicit ReferencePrice(const ReferencePriceParams& params = {});
    /// Starts from an explicit history, oldest first; the last entry is m_{t-1}.
    ReferencePrice(const ReferencePriceParams& params, std::vector<double> history);

    double update(std::optional<Price> best_bid, std::optional<Price> best_offer);

    double current() const { return history_.back(); }
    double history_mean() const;
    const std::deque<double>& history() const { return history_; }
    const ReferencePriceParams& params() const { return params_; }

private:
    ReferencePriceParams params_;
    std::deque<double> history_;
};

} // namespace advtrade::pricing
