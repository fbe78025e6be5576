#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "advtrade/adversarial.hpp"
#include "advtrade/agents.hpp"
#include "advtrade/lob.hpp"
#include "advtrade/pricing.hpp"
#include "advtrade/rng.hpp"
#include "advtrade/surrogate.hpp"

namespace advtrade::sim {

enum class ExtraAgent { None, Noisy, Adversarial };

/// Where the adversarial agent gets its sign vector from.
enum class AdversarySource { Estimator, Gradient };

struct SimConfig {
    int investors = 40;
    bool market_maker = true;
    ExtraAgent extra = ExtraAgent::None;
    int rounds = 200;
    pricing::ReferencePriceParams pricing{};
    std::optional<double> mm_alpha; ///< defaults to pricing.alpha
    // Calibrated defaults; see README "Calibration".
    agents::SizeRange investor_size{1, 26};
    bool fixed_investor_size = true; ///< draw each investor's size once per simulation
    Quantity mm_size = 33;
    /// 31-point grid on [-0.95%, +0.95%] weighted toward the touch. The
    /// center offset puts the innermost bull and bear quotes symmetric around m.
    agents::PlacementNoise placement{0.0095, 31, 0.91, 0.000095};
    double investor_stop_loss = -50000.0;
    double mm_stop_loss = -50000.0;
    double extra_stop_loss = -50000.0;
    std::optional<int> warmup_rounds; ///< defaults to the pricing window
    AdversarySource adversary_source = AdversarySource::Estimator;

    double market_maker_alpha() const { return mm_alpha.value_or(pricing.alpha); }
    int warmup() const { return warmup_rounds.value_or(pricing.window); }
};

/// Trained models the adversarial agent needs. Shared read-only across worlds.
struct Artifacts {
    std::shared_ptr<const surrogate::LogisticSurrogate> model;
    std::shared_ptr<const adversarial::SignEstimator> estimator;
};

/// Throws ConfigError / MissingArtifact.
void validate(const SimConfig& config, const Artifacts& artifacts);

struct Account {
    std::int64_t cash_ticks = 0; ///< cash in 1e-4 price units
    Quantity inventory = 0;
};

/// Cash and inventory per agent. Cash is integer so transfers are exact.
class Ledger {
public:
    explicit Ledger(std::size_t agents = 0) : accounts_(agents) {}

    void settle(const lob::Trade& trade);

    const Account& account(AgentId id) const { return accounts_.at(static_cast<std::size_t>(id)); }
    double cash(AgentId id) const;
    /// cash + inventory * reference price, relative to zero initial wealth.
    double mark_pnl(AgentId id, double reference_price) const;
    std::int64_t total_cash_ticks() const;
    Quantity total_inventory() const;
    std::size_t size() const { return accounts_.size(); }

private:
    std::vector<Account> accounts_;
};

struct RoundRecord {
    RoundIndex round = 0;
    lob::DepthSnapshot snapshot; ///< book as seen before anyone acts
    double reference_price = 0.0;
    std::vector<lob::Trade> trades;
    std::vector<double> mark_pnl; ///< per agent, at the round's reference price
};

/// One simulated market: book, price state, agents, ledger and RNG streams.
/// Investors draw from per-agent streams so adding an extra agent leaves
/// their draws unchanged for the same seed.
class World {
public:
    World(const SimConfig& config, std::uint64_t seed, Artifacts artifacts = {});

    /// Step 1: snapshot, reference price, intents. Step 2: each agent in the
    /// round's shuffled order cancels then submits; trades settle immediately.
    /// Stop losses are checked on the round's marks afterwards.
    RoundRecord run_round();

    const std::vector<agents::AgentState>& agents() const { return agents_; }
    const Ledger& ledger() const { return ledger_; }
    const lob::OrderBook& book() const { return book_; }
    double reference_price() const { return pricing_.current(); }
    RoundIndex next_round() const { return round_; }
    std::optional<AgentId> market_maker_id() const { return mm_id_; }
    std::optional<AgentId> extra_id() const { return extra_id_; }
    std::vector<AgentId> investor_ids() const;

private:
    agents::QuoteIntent decide(agents::AgentState& agent, const lob::DepthSnapshot& snapshot, double reference,
                               bool active_round);
    void execute(agents::AgentState& agent, const agents::QuoteIntent& intent, std::vector<lob::Trade>& trades);

    SimConfig config_;
    Artifacts artifacts_;
    lob::OrderBook book_;
    pricing::ReferencePrice pricing_;
    std::vector<agents::AgentState> agents_;
    std::vector<Rng> agent_rng_;
    std::vector<Quantity> fixed_size_;
    Rng order_rng_;
    Ledger ledger_;
    std::optional<AgentId> mm_id_;
    std::optional<AgentId> extra_id_;
    OrderId next_order_id_ = 1;
    RoundIndex round_ = 0;
};

struct SimulationResult {
    std::vector<RoundRecord> records;
    Ledger ledger;
    std::vector<agents::AgentState> agents;
    std::optional<AgentId> market_maker_id;
    std::optional<AgentId> extra_id;
    std::vector<AgentId> investor_ids;

    double final_pnl(AgentId id) const;
    std::optional<double> mm_pnl() const;
    std::optional<double> extra_pnl() const;
    std::optional<double> investor_mean_pnl() const;
};

SimulationResult run_simulation(const SimConfig& config, std::uint64_t seed, const Artifacts& artifacts = {});

/// round,best_bid,best_offer,m_t,trades,mm_pnl,adv_pnl,inv_pnl_mean
void write_round_log(std::ostream& os, const SimulationResult& result);

/// One JSON object per line: {"round":r,"bids":[[price,qty],...],"offers":[...]}.
void write_book_log(std::ostream& os, const SimulationResult& result);

/// Labeled rows (featurized snapshot, next-move label) of one simulation;
/// rounds before `skip_rounds` and ties are dropped.
surrogate::Dataset build_dataset(const SimulationResult& result, std::int32_t group, int skip_rounds);

} // namespace advtrade::sim
