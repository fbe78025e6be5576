#include <gtest/gtest.h>

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "advtrade/errors.hpp"
#include "advtrade/sim.hpp"

using namespace advtrade;
using namespace advtrade::sim;

namespace {

Price px(double v) { return Price::from_double(v); }

lob::Trade trade(AgentId buyer, AgentId seller, double price, Quantity q) {
    lob::Trade t;
    t.buyer = buyer;
    t.seller = seller;
    t.price = px(price);
    t.quantity = q;
    return t;
}

std::string logs(const SimulationResult& r) {
    std::ostringstream os;
    write_round_log(os, r);
    write_book_log(os, r);
    return os.str();
}

SimConfig short_config(int rounds = 60) {
    SimConfig c;
    c.rounds = rounds;
    return c;
}

} // namespace

TEST(Ledger, SettleExample) {
    Ledger l(2);
    l.settle(trade(0, 1, 100, 5));
    EXPECT_DOUBLE_EQ(l.cash(0), -500);
    EXPECT_EQ(l.account(0).inventory, 5);
    EXPECT_DOUBLE_EQ(l.cash(1), 500);
    EXPECT_EQ(l.account(1).inventory, -5);
    EXPECT_DOUBLE_EQ(l.mark_pnl(0, 101), 5);
}

TEST(Ledger, SelfTradeIsNetZero) {
    Ledger l(1);
    l.settle(trade(0, 0, 100, 3));
    EXPECT_EQ(l.account(0).cash_ticks, 0);
    EXPECT_EQ(l.account(0).inventory, 0);
}

TEST(Ledger, Additive) {
    Ledger a(2), b(2), c(2);
    a.settle(trade(0, 1, 100, 2));
    a.settle(trade(1, 0, 101.5, 1));
    b.settle(trade(0, 1, 100, 2));
    c.settle(trade(1, 0, 101.5, 1));
    EXPECT_EQ(a.account(0).cash_ticks, b.account(0).cash_ticks + c.account(0).cash_ticks);
    EXPECT_EQ(a.account(1).inventory, b.account(1).inventory + c.account(1).inventory);
}

TEST(World, NoAgentsKeepsPrice) {
    SimConfig c;
    c.investors = 0;
    c.market_maker = false;
    c.rounds = 5;
    const auto r = run_simulation(c, 1);
    ASSERT_EQ(r.records.size(), 5u);
    for (const auto& rec : r.records) {
        EXPECT_TRUE(rec.trades.empty());
        EXPECT_DOUBLE_EQ(rec.reference_price, 100.0);
    }
}

TEST(World, TwoInvestorsFirstRound) {
    SimConfig c;
    c.investors = 2;
    c.market_maker = false;
    c.rounds = 2;
    c.placement = {0.0, 0, 1.0, 0.0};
    c.fixed_investor_size = false;
    c.investor_size = {3, 3};
    const auto r = run_simulation(c, 1);
    const auto& snap = r.records[1].snapshot;
    ASSERT_EQ(snap.bids.size(), 1u);
    ASSERT_EQ(snap.offers.size(), 1u);
    EXPECT_EQ(snap.bids[0], (lob::Level{px(99), 3}));
    EXPECT_EQ(snap.offers[0], (lob::Level{px(101), 3}));
}

TEST(World, RunsConfiguredRounds) {
    const auto r = run_simulation(SimConfig{}, 3);
    ASSERT_EQ(r.records.size(), 200u);
    for (std::size_t i = 0; i < r.records.size(); ++i) EXPECT_EQ(r.records[i].round, static_cast<RoundIndex>(i));
    EXPECT_TRUE(r.mm_pnl().has_value());
    EXPECT_FALSE(r.extra_pnl().has_value());
    EXPECT_EQ(r.investor_ids.size(), 40u);
}

TEST(World, DeterministicForSeed) {
    SimConfig c;
    c.extra = ExtraAgent::Noisy;
    EXPECT_EQ(logs(run_simulation(c, 11)), logs(run_simulation(c, 11)));
    EXPECT_NE(logs(run_simulation(c, 11)), logs(run_simulation(c, 12)));
}

TEST(World, ConservesCashAndLots) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SimConfig c;
        c.extra = ExtraAgent::Noisy;
        const auto r = run_simulation(c, seed);
        EXPECT_EQ(r.ledger.total_cash_ticks(), 0);
        EXPECT_EQ(r.ledger.total_inventory(), 0);

        // Replaying every trade into a fresh ledger gives the final ledger.
        Ledger replay(r.ledger.size());
        std::size_t trades = 0;
        for (const auto& rec : r.records) {
            double sum = 0.0;
            for (double p : rec.mark_pnl) sum += p;
            EXPECT_NEAR(sum, 0.0, 1e-6);
            for (const auto& t : rec.trades) {
                EXPECT_GT(t.quantity, 0);
                replay.settle(t);
                ++trades;
            }
        }
        EXPECT_GT(trades, 0u);
        for (std::size_t a = 0; a < r.ledger.size(); ++a) {
            EXPECT_EQ(replay.account(static_cast<AgentId>(a)).cash_ticks, r.ledger.account(static_cast<AgentId>(a)).cash_ticks);
            EXPECT_EQ(replay.account(static_cast<AgentId>(a)).inventory, r.ledger.account(static_cast<AgentId>(a)).inventory);
        }
    }
}

TEST(World, ReferenceStepBounded) {
    const auto r = run_simulation(SimConfig{}, 4);
    double prev = 100.0;
    for (const auto& rec : r.records) {
        EXPECT_LE(std::abs(rec.reference_price / prev - 1.0), 0.1 + 1e-12);
        prev = rec.reference_price;
    }
}

TEST(World, SnapshotsNeverCrossed) {
    const auto r = run_simulation(SimConfig{}, 5);
    for (const auto& rec : r.records)
        if (rec.snapshot.two_sided()) { EXPECT_LT(*rec.snapshot.best_bid(), *rec.snapshot.best_offer()); }
}

TEST(World, StoppedAgentsStopTrading) {
    SimConfig c;
    c.investor_stop_loss = -20.0;
    int stops = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto r = run_simulation(c, seed);
        for (const auto& a : r.agents) {
            if (!a.stopped) continue;
            ++stops;
            std::size_t tripped = r.records.size();
            for (std::size_t t = 0; t < r.records.size(); ++t) {
                if (r.records[t].mark_pnl[static_cast<std::size_t>(a.agent_id)] <= a.stop_loss_level) {
                    tripped = t;
                    break;
                }
            }
            ASSERT_LT(tripped, r.records.size());
            for (std::size_t t = tripped + 1; t < r.records.size(); ++t)
                for (const auto& tr : r.records[t].trades) {
                    EXPECT_NE(tr.buyer, a.agent_id);
                    EXPECT_NE(tr.seller, a.agent_id);
                }
        }
    }
    EXPECT_GT(stops, 0);
}

TEST(World, SetupsSharePathThroughWarmup) {
    SimConfig base = short_config();
    SimConfig noisy = base;
    noisy.extra = ExtraAgent::Noisy;
    const auto a = run_simulation(base, 21), b = run_simulation(noisy, 21);
    for (int t = 0; t <= base.warmup(); ++t) {
        const auto i = static_cast<std::size_t>(t);
        EXPECT_EQ(a.records[i].snapshot, b.records[i].snapshot) << t;
        if (t < base.warmup()) { EXPECT_EQ(a.records[i].trades, b.records[i].trades) << t; }
    }
}

TEST(World, MarketMakerWaitsForWarmup) {
    const auto r = run_simulation(short_config(), 6);
    const AgentId mm = *r.market_maker_id;
    for (int t = 0; t < 10; ++t)
        for (const auto& tr : r.records[static_cast<std::size_t>(t)].trades) {
            EXPECT_NE(tr.buyer, mm);
            EXPECT_NE(tr.seller, mm);
        }
}

TEST(Validate, RejectsBadConfigs) {
    SimConfig c;
    c.investors = 0;
    EXPECT_THROW(validate(c, {}), ConfigError);
    c = {};
    c.rounds = 0;
    EXPECT_THROW(validate(c, {}), ConfigError);
    c = {};
    c.investor_size = {5, 2};
    EXPECT_THROW(validate(c, {}), ConfigError);
    c = {};
    c.extra = ExtraAgent::Adversarial;
    EXPECT_THROW(validate(c, {}), MissingArtifact);
    c.adversary_source = AdversarySource::Gradient;
    Artifacts a;
    a.model = std::make_shared<surrogate::LogisticSurrogate>();
    EXPECT_NO_THROW(validate(c, a));
}

TEST(Adversary, RunsWithGradientSource) {
    SimConfig c = short_config();
    c.extra = ExtraAgent::Adversarial;
    c.adversary_source = AdversarySource::Gradient;
    Artifacts a;
    auto m = std::make_shared<surrogate::LogisticSurrogate>();
    m->standardizer.mean.fill(50.0);
    m->weights[20] = 1.0;
    m->weights[60] = -1.0;
    a.model = m;
    const auto r = run_simulation(c, 7, a);
    const AgentId adv = *r.extra_id;
    bool traded = false;
    for (const auto& rec : r.records)
        for (const auto& t : rec.trades) {
            if (t.buyer == adv || t.seller == adv) {
                traded = true;
                EXPECT_EQ(t.quantity, 1);
            }
        }
    EXPECT_TRUE(traded);
}

TEST(Logs, RoundLogHasOneRowPerRound) {
    const auto r = run_simulation(short_config(30), 8);
    std::ostringstream os;
    write_round_log(os, r);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "round,best_bid,best_offer,m_t,trades,mm_pnl,adv_pnl,inv_pnl_mean");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 30);
}

TEST(Logs, BookLogIsJsonLines) {
    const auto r = run_simulation(short_config(20), 9);
    std::ostringstream os;
    write_book_log(os, r);
    std::istringstream is(os.str());
    std::string line;
    int round = 0;
    while (std::getline(is, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j.at("round").get<int>(), round);
        EXPECT_EQ(j.at("bids").size(), r.records[static_cast<std::size_t>(round)].snapshot.bids.size());
        ++round;
    }
    EXPECT_EQ(round, 20);
}

TEST(Dataset, SkipsWarmupAndTies) {
    const auto r = run_simulation(SimConfig{}, 10);
    const auto d = build_dataset(r, 3, 10);
    EXPECT_GT(d.size(), 50u);
    EXPECT_LE(d.size(), 189u);
    std::size_t expected = 0;
    for (std::size_t t = 10; t + 1 < r.records.size(); ++t)
        expected += r.records[t].reference_price != r.records[t + 1].reference_price;
    EXPECT_EQ(d.size(), expected);
    for (auto g : d.groups) EXPECT_EQ(g, 3);
}
