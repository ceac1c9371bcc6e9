#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "marsft/sweep.hpp"

using namespace marsft;
using topology::ChainTopology;

namespace {

sweep::SweepSpec small_spec() {
    sweep::SweepSpec s;
    s.totals_km = {100.0, 200.0, 300.0};
    s.ratios = {0.3, 0.5, 0.7, 0.9};
    s.grid.per_decade = 100;
    return s;
}

}  // namespace

TEST(RatioGrid, RowsSortedAndComplete) {
    const auto rows = sweep::ratio_length_grid(small_spec());
    ASSERT_EQ(rows.size(), 12u);
    for (const auto& r : rows) {
        EXPECT_FALSE(r.error.has_value());
        ASSERT_EQ(r.adev.size(), 2u);
        EXPECT_GT(r.adev[0], 0.0);
    }
    EXPECT_EQ(rows.front().total_km, 100.0);
    EXPECT_EQ(rows.front().ratio, 0.3);
    EXPECT_EQ(rows.back().total_km, 300.0);
    EXPECT_EQ(rows.back().ratio, 0.9);
}

TEST(RatioGrid, PermutationInvariant) {
    auto spec = small_spec();
    const auto ref = sweep::ratio_length_grid(spec);
    std::mt19937 rng(5);
    std::shuffle(spec.totals_km.begin(), spec.totals_km.end(), rng);
    std::shuffle(spec.ratios.begin(), spec.ratios.end(), rng);
    const auto again = sweep::ratio_length_grid(spec);
    ASSERT_EQ(ref.size(), again.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        EXPECT_EQ(ref[i].total_km, again[i].total_km);
        EXPECT_EQ(ref[i].ratio, again[i].ratio);
        EXPECT_EQ(ref[i].adev, again[i].adev);
    }
}

namespace {

// default total-length axis, ratios of the deterioration claim
std::vector<sweep::GridRow> trend_rows() {
    sweep::SweepSpec s;
    s.ratios = {0.5, 0.7, 0.9};
    s.taus = {1.0};
    s.grid.per_decade = 100;
    return sweep::ratio_length_grid(s);
}

double cell(const std::vector<sweep::GridRow>& rows, double t, double r) {
    for (const auto& row : rows)
        if (row.total_km == t && row.ratio == r) return row.adev[0];
    return -1.0;
}

}  // namespace

TEST(RatioGrid, DeterioratesTowardsUnevenSplit) {
    const auto rows = trend_rows();
    for (double t : {50.0, 100.0, 150.0, 200.0, 250.0, 300.0}) {
        EXPECT_LT(cell(rows, t, 0.5), cell(rows, t, 0.7)) << t << " km";
        EXPECT_LT(cell(rows, t, 0.7), cell(rows, t, 0.9)) << t << " km";
    }
}

TEST(RatioGrid, NonDecreasingInTotalLength) {
    const auto rows = trend_rows();
    const std::vector<double> totals{50.0, 100.0, 150.0, 200.0, 250.0, 300.0};
    for (double r : {0.5, 0.7, 0.9})
        for (std::size_t i = 1; i < totals.size(); ++i)
            EXPECT_LE(cell(rows, totals[i - 1], r), cell(rows, totals[i], r)) << "ratio " << r << ", " << totals[i] << " km";
}

TEST(RatioGrid, FailedCellRecordedSweepContinues) {
    auto spec = small_spec();
    spec.totals_km = {200.0};
    spec.ratios = {0.5};
    spec.grid.fmin = 1e-2;  // too high for tau = 1e4
    const auto rows = sweep::ratio_length_grid(spec);
    ASSERT_EQ(rows.size(), 1u);
    ASSERT_TRUE(rows[0].error.has_value());
    EXPECT_NE(rows[0].error->find("conversion needs"), std::string::npos);
    EXPECT_TRUE(std::isnan(rows[0].adev[0]));
}

TEST(RatioGrid, SpecValidation) {
    auto spec = small_spec();
    spec.ratios = {0.0};
    EXPECT_THROW(sweep::ratio_length_grid(spec), ModelError);
    spec = small_spec();
    spec.ratios = {1.0};
    EXPECT_THROW(sweep::ratio_length_grid(spec), ModelError);
    spec = small_spec();
    spec.totals_km.clear();
    EXPECT_THROW(sweep::ratio_length_grid(spec), ModelError);
    spec = small_spec();
    spec.base = ChainTopology::equal_spacing(300.0, 2);
    EXPECT_THROW(sweep::ratio_length_grid(spec), ModelError);
}

TEST(RatioGrid, Deterministic) {
    EXPECT_EQ(sweep::ratio_length_grid(small_spec())[5].adev, sweep::ratio_length_grid(small_spec())[5].adev);
}

TEST(ChainVsCascade, SingleStageEqualsSingleSpan) {
    const std::vector<double> taus{0.1, 1.0, 100.0};
    GridSpec g;
    g.per_decade = 100;
    const auto cmp = sweep::chain_vs_cascade(ChainTopology{}, 100.0, 1, 1, taus, g);
    ChainTopology span;
    span.sublink_lengths = {100.0};
    const auto direct = sweep::rs_adev(span, taus, g);
    EXPECT_EQ(cmp.cascade.sigmas, direct.sigmas);
}

TEST(ChainVsCascade, ChainBeatsCascadeOverThousandsOfKm) {
    const std::vector<double> taus{1.0, 1e4};
    GridSpec g;
    g.per_decade = 100;
    const auto cmp = sweep::chain_vs_cascade(ChainTopology{}, 3000.0, 29, 30, taus, g);
    EXPECT_TRUE(cmp.chain_not_worse_at_1s);
    EXPECT_LT(cmp.chain.sigmas[0], cmp.cascade.sigmas[0]);
}

TEST(ChainVsCascade, Errors) {
    const std::vector<double> taus{1.0};
    EXPECT_THROW(sweep::chain_vs_cascade(ChainTopology{}, 300.0, 0, 3, taus), ModelError);
    EXPECT_THROW(sweep::chain_vs_cascade(ChainTopology{}, 300.0, 2, 0, taus), ModelError);
}
