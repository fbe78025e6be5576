#include <gtest/gtest.h>

#include <cmath>

#include "advtrade/pricing.hpp"
#include "advtrade/rng.hpp"

using namespace advtrade;
using pricing::ReferencePrice;
using pricing::ReferencePriceParams;

namespace {
Price px(double v) { return Price::from_double(v); }
} // namespace

TEST(ReferencePrice, FixedPoint) {
    ReferencePrice m;
    EXPECT_DOUBLE_EQ(m.update(px(99), px(101)), 100.0);
}

TEST(ReferencePrice, JumpFilterRejects) {
    ReferencePrice m;
    EXPECT_DOUBLE_EQ(m.update(px(114), px(116)), 100.0);
}

TEST(ReferencePrice, ClampBinds) {
    std::vector<double> h(9, 970.0 / 9.0);
    h.push_back(100.0);
    ReferencePrice m({}, h);
    EXPECT_NEAR(m.history_mean(), 107.0, 1e-12);
    EXPECT_NEAR(m.update(px(114), px(116)), 110.0, 1e-12);
}

TEST(ReferencePrice, OneSidedBookCarriesPrice) {
    ReferencePrice m;
    EXPECT_DOUBLE_EQ(m.update(px(99), std::nullopt), 100.0);
    EXPECT_DOUBLE_EQ(m.update(std::nullopt, px(101)), 100.0);
    EXPECT_DOUBLE_EQ(m.update(std::nullopt, std::nullopt), 100.0);
}

TEST(ReferencePrice, FilterBoundaryIsStrict) {
    // |bm / mean - 1| == alpha exactly is rejected.
    ReferencePriceParams p;
    p.alpha = 0.25;
    ReferencePrice m(p);
    EXPECT_DOUBLE_EQ(m.update(px(125), px(125)), 100.0);
    EXPECT_DOUBLE_EQ(m.update(px(124), px(124)), 124.0);
}

TEST(ReferencePrice, HistoryRollsOncePerUpdate) {
    ReferencePriceParams p;
    p.window = 3;
    ReferencePrice m(p);
    m.update(px(101), px(101));
    m.update(px(102), px(102));
    ASSERT_EQ(m.history().size(), 3u);
    EXPECT_DOUBLE_EQ(m.history().front(), 100.0);
    m.update(px(102), px(102));
    EXPECT_DOUBLE_EQ(m.history().front(), 101.0);
}

TEST(ReferencePrice, RejectsBadParams) {
    ReferencePriceParams p;
    p.alpha = 1.0;
    EXPECT_THROW(ReferencePrice{p}, std::invalid_argument);
    p.alpha = 0.1;
    p.window = 0;
    EXPECT_THROW(ReferencePrice{p}, std::invalid_argument);
    EXPECT_THROW(ReferencePrice({}, {}), std::invalid_argument);
    EXPECT_THROW(ReferencePrice({}, {100.0, -1.0}), std::invalid_argument);
}

TEST(ReferencePriceProperty, BoundedStepAndPositive) {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        ReferencePrice m;
        for (int t = 0; t < 200; ++t) {
            const double prev = m.current();
            std::optional<Price> b, o;
            if (rng.uniform01() < 0.9) b = px(prev * rng.uniform(0.5, 1.6));
            if (rng.uniform01() < 0.9) o = px(prev * rng.uniform(0.5, 1.6));
            const double next = m.update(b, o);
            ASSERT_GT(next, 0.0);
            ASSERT_LE(std::abs(next / prev - 1.0), 0.1 + 1e-12);
        }
    }
}

TEST(ReferencePriceProperty, IdempotentAtEquilibrium) {
    for (double level : {50.0, 100.0, 123.4567}) {
        ReferencePrice m({}, std::vector<double>(10, level));
        const Price p = px(level);
        EXPECT_DOUBLE_EQ(m.update(p, p), p.to_double());
    }
}
