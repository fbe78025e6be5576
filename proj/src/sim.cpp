#include "advtrade/sim.hpp"

#include <algorithm>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "advtrade/csv.hpp"
#include "advtrade/errors.hpp"

namespace advtrade::sim {

namespace {

constexpr std::uint64_t kOrderStream = 0;
constexpr std::uint64_t kAgentStreamBase = 1000;

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("ledger cash overflow");
    return out;
}

} // namespace

void validate(const SimConfig& c, const Artifacts& artifacts) {
    if (c.investors < 0) throw ConfigError("investors must be >= 0");
    if (c.market_maker && c.investors == 0) throw ConfigError("a market maker needs investors to quote against");
    if (c.rounds < 1) throw ConfigError("rounds must be >= 1");
    if (c.pricing.window < 1) throw ConfigError("pricing window must be >= 1");
    if (!(c.pricing.alpha > 0.0 && c.pricing.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(c.pricing.initial > 0.0)) throw ConfigError("initial reference price must be positive");
    if (!(c.market_maker_alpha() >= 0.0 && c.market_maker_alpha() < 1.0)) throw ConfigError("mm alpha must lie in [0, 1)");
    if (c.investor_size.min < 1 || c.investor_size.max < c.investor_size.min) throw ConfigError("bad investor size range");
    if (c.mm_size < 1) throw ConfigError("market maker size must be >= 1");
    if (!(c.placement.half_width >= 0.0 && c.placement.half_width < 0.5)) throw ConfigError("bad placement half width");
    if (c.placement.levels < 0 || !(c.placement.decay > 0.0)) throw ConfigError("bad placement levels/decay");
    if (c.warmup() < 0) throw ConfigError("warmup must be >= 0");
    if (c.extra == ExtraAgent::Adversarial) {
        if (!artifacts.model) throw MissingArtifact("adversarial agent needs a surrogate model");
        if (c.adversary_source == AdversarySource::Estimator && !artifacts.estimator) {
            throw MissingArtifact("adversarial agent needs a sign estimator");
        }
    }
}

void Ledger::settle(const lob::Trade& trade) {
    std::int64_t notional;
    if (__builtin_mul_overflow(trade.price.ticks(), trade.quantity, &notional)) {
        throw std::overflow_error("trade notional overflow");
    }
    auto& buyer = accounts_.at(static_cast<std::size_t>(trade.buyer));
    buyer.cash_ticks = checked_add(buyer.cash_ticks, -notional);
    buyer.inventory += trade.quantity;
    auto& seller = accounts_.at(static_cast<std::size_t>(trade.seller));
    seller.cash_ticks = checked_add(seller.cash_ticks, notional);
    seller.inventory -= trade.quantity;
}

double Ledger::cash(AgentId id) const {
    return static_cast<double>(account(id).cash_ticks) / static_cast<double>(Price::kScale);
}

double Ledger::mark_pnl(AgentId id, double reference_price) const {
    return cash(id) + static_cast<double>(account(id).inventory) * reference_price;
}

std::int64_t Ledger::total_cash_ticks() const {
    std::int64_t total = 0;
    for (const auto& a : accounts_) total = checked_add(total, a.cash_ticks);
    return total;
}

Quantity Ledger::total_inventory() const {
    Quantity total = 0;
    for (const auto& a : accounts_) total += a.inventory;
    return total;
}

World::World(const SimConfig& config, std::uint64_t seed, Artifacts artifacts)
    : config_(config),
      artifacts_(std::move(artifacts)),
      pricing_(config.pricing),
      order_rng_(derive_seed(seed, kOrderStream)) {
    validate(config_, artifacts_);
    const auto biases = agents::balanced_biases(config_.investors);
    for (int i = 0; i < config_.investors; ++i) {
        agents_.push_back(agents::make_investor(i, biases[static_cast<std::size_t>(i)], config_.investor_stop_loss));
    }
    if (config_.market_maker) {
        mm_id_ = static_cast<AgentId>(agents_.size());
        agents_.push_back(agents::make_agent(*mm_id_, agents::Kind::MarketMaker, config_.mm_stop_loss));
    }
    if (config_.extra != ExtraAgent::None) {
        extra_id_ = static_cast<AgentId>(agents_.size());
        const auto kind = config_.extra == ExtraAgent::Noisy ? agents::Kind::Noisy : agents::Kind::Adversarial;
        agents_.push_back(agents::make_agent(*extra_id_, kind, config_.extra_stop_loss));
    }
    for (const auto& a : agents_) {
        agent_rng_.emplace_back(derive_seed(seed, kAgentStreamBase + static_cast<std::uint64_t>(a.agent_id)));
    }
    for (int i = 0; i < config_.investors; ++i) {
        fixed_size_.push_back(config_.investor_size.sample(agent_rng_[static_cast<std::size_t>(i)]));
    }
    ledger_ = Ledger(agents_.size());
}

std::vector<AgentId> World::investor_ids() const {
    std::vector<AgentId> ids;
    for (const auto& a : agents_)
        if (a.kind == agents::Kind::Investor) ids.push_back(a.agent_id);
    return ids;
}

agents::QuoteIntent World::decide(agents::AgentState& agent, const lob::DepthSnapshot& snapshot, double reference,
                                  bool active_round) {
    Rng& rng = agent_rng_[static_cast<std::size_t>(agent.agent_id)];
    switch (agent.kind) {
    case agents::Kind::Investor: {
        // Drawn even when stopped so the stream stays aligned across setups.
        const double u = config_.placement.sample(agent.bias, rng);
        Quantity q = config_.investor_size.sample(rng);
        if (config_.fixed_investor_size) q = fixed_size_[static_cast<std::size_t>(agent.agent_id)];
        if (agent.stopped) return {};
        return agents::investor_quotes(agent, reference, u, q);
    }
    case agents::Kind::MarketMaker:
        if (agent.stopped || !active_round) return {};
        return agents::market_maker_quotes(agent, snapshot, config_.market_maker_alpha(), config_.mm_size);
    case agents::Kind::Noisy: {
        const SignVector eta = agents::noisy_sign_vector(rng);
        if (agent.stopped || !active_round) return {};
        return adversarial::signs_to_orders(eta, snapshot, agent);
    }
    case agents::Kind::Adversarial: {
        if (agent.stopped || !active_round) return {};
        const FeatureVector x = surrogate::featurize(snapshot);
        const SignVector eta = config_.adversary_source == AdversarySource::Gradient
                                   ? adversarial::gradient_signs(*artifacts_.model, x)
                                   : adversarial::estimate_signs(*artifacts_.estimator, x);
        return adversarial::signs_to_orders(eta, snapshot, agent);
    }
    }
    return {};
}

void World::execute(agents::AgentState& agent, const agents::QuoteIntent& intent, std::vector<lob::Trade>& trades) {
    for (OrderId id : intent.cancels) book_.cancel(id);
    std::vector<OrderId> placed;
    placed.reserve(intent.quotes.size());
    for (const auto& q : intent.quotes) {
        lob::Order order{next_order_id_++, agent.agent_id, q.side, q.price, q.quantity, round_};
        auto result = book_.submit(order);
        if (!result.accepted()) continue;
        for (const auto& t : result.trades) {
            ledger_.settle(t);
            trades.push_back(t);
        }
        if (result.resting > 0) placed.push_back(order.order_id);
    }
    // Orders filled by later arrivals simply become no-op cancels next round.
    agent.live_order_ids = std::move(placed);
}

RoundRecord World::run_round() {
    RoundRecord record;
    record.round = round_;
    record.snapshot = book_.snapshot();
    record.reference_price = pricing_.update(record.snapshot.best_bid(), record.snapshot.best_offer());
    const bool active = round_ >= config_.warmup();

    std::vector<agents::QuoteIntent> intents(agents_.size());
    for (auto& agent : agents_) {
        intents[static_cast<std::size_t>(agent.agent_id)] = decide(agent, record.snapshot, record.reference_price, active);
    }

    // Investors and market maker are shuffled by the order stream; the extra
    // agent is slotted in from its own stream, so base ordering is paired.
    std::vector<AgentId> order;
    for (const auto& a : agents_)
        if (!extra_id_ || a.agent_id != *extra_id_) order.push_back(a.agent_id);
    order_rng_.shuffle(std::span(order));
    if (extra_id_) {
        Rng& rng = agent_rng_[static_cast<std::size_t>(*extra_id_)];
        const auto slot = rng.uniform_int(0, static_cast<std::int64_t>(order.size()));
        order.insert(order.begin() + slot, *extra_id_);
    }

    for (AgentId id : order) {
        auto& agent = agents_[static_cast<std::size_t>(id)];
        if (agent.stopped) continue;
        execute(agent, intents[static_cast<std::size_t>(id)], record.trades);
    }

    record.mark_pnl.resize(agents_.size());
    for (auto& agent : agents_) {
        const double pnl = ledger_.mark_pnl(agent.agent_id, record.reference_price);
        record.mark_pnl[static_cast<std::size_t>(agent.agent_id)] = pnl;
        if (auto cancel_all = agents::apply_stop_loss(agent, pnl)) {
            for (OrderId oid : cancel_all->cancels) book_.cancel(oid);
        }
    }
    ++round_;
    return record;
}

double SimulationResult::final_pnl(AgentId id) const {
    if (records.empty()) return 0.0;
    return records.back().mark_pnl.at(static_cast<std::size_t>(id));
}

std::optional<double> SimulationResult::mm_pnl() const {
    return market_maker_id ? std::optional(final_pnl(*market_maker_id)) : std::nullopt;
}

std::optional<double> SimulationResult::extra_pnl() const {
    return extra_id ? std::optional(final_pnl(*extra_id)) : std::nullopt;
}

std::optional<double> SimulationResult::investor_mean_pnl() const {
    if (investor_ids.empty()) return std::nullopt;
    double sum = 0.0;
    for (AgentId id : investor_ids) sum += final_pnl(id);
    return sum / static_cast<double>(investor_ids.size());
}

SimulationResult run_simulation(const SimConfig& config, std::uint64_t seed, const Artifacts& artifacts) {
    World world(config, seed, artifacts);
    SimulationResult result;
    result.records.reserve(static_cast<std::size_t>(config.rounds));
    for (int r = 0; r < config.rounds; ++r) result.records.push_back(world.run_round());
    result.ledger = world.ledger();
    result.agents = world.agents();
    result.market_maker_id = world.market_maker_id();
    result.extra_id = world.extra_id();
    result.investor_ids = world.investor_ids();
    return result;
}

void write_round_log(std::ostream& os, const SimulationResult& result) {
    os << "round,best_bid,best_offer,m_t,trades,mm_pnl,adv_pnl,inv_pnl_mean\n";
    for (const auto& r : result.records) {
        os << r.round << ',';
        if (auto b = r.snapshot.best_bid()) os << b->str();
        os << ',';
        if (auto o = r.snapshot.best_offer()) os << o->str();
        os << ',' << format_double(r.reference_price) << ',' << r.trades.size() << ',';
        if (result.market_maker_id) os << format_double(r.mark_pnl[static_cast<std::size_t>(*result.market_maker_id)]);
        os << ',';
        if (result.extra_id) os << format_double(r.mark_pnl[static_cast<std::size_t>(*result.extra_id)]);
        os << ',';
        if (!result.investor_ids.empty()) {
            double sum = 0.0;
            for (AgentId id : result.investor_ids) sum += r.mark_pnl[static_cast<std::size_t>(id)];
            os << format_double(sum / static_cast<double>(result.investor_ids.size()));
        }
        os << '\n';
    }
}

void write_book_log(std::ostream& os, const SimulationResult& result) {
    for (const auto& r : result.records) {
        nlohmann::json j;
        j["round"] = r.round;
        auto ladder = [](const std::vector<lob::Level>& levels) {
            auto arr = nlohmann::json::array();
            for (const auto& l : levels) arr.push_back({l.price.to_double(), l.quantity});
            return arr;
        };
        j["bids"] = ladder(r.snapshot.bids);
        j["offers"] = ladder(r.snapshot.offers);
        os << j.dump() << '\n';
    }
}

surrogate::Dataset build_dataset(const SimulationResult& result, std::int32_t group, int skip_rounds) {
    surrogate::Dataset data;
    for (std::size_t t = 0; t + 1 < result.records.size(); ++t) {
        const auto& now = result.records[t];
        if (now.round < skip_rounds) continue;
        const auto y = surrogate::label(now.reference_price, result.records[t + 1].reference_price);
        if (!y) continue;
        data.add(surrogate::featurize(now.snapshot), *y, group);
    }
    return data;
}

} // namespace advtrade::sim
