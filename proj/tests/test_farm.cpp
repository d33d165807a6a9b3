#include <gtest/gtest.h>

#include "windfleet/farm.hpp"

using namespace windfleet;

TEST(TurbineId, PrintsRowPaddedToTwoDigits) {
    EXPECT_EQ((TurbineId{10, 4}).str(), "10/4");
    EXPECT_EQ((TurbineId{3, 2}).str(), "03/2");
}

TEST(TurbineId, ParsesWithOrWithoutPadding) {
    EXPECT_EQ(TurbineId::parse("03/2"), (TurbineId{3, 2}));
    EXPECT_EQ(TurbineId::parse("3/2"), (TurbineId{3, 2}));
    EXPECT_FALSE(TurbineId::parse("3-2"));
    EXPECT_FALSE(TurbineId::parse("0/2"));
    EXPECT_FALSE(TurbineId::parse("3/x"));
    EXPECT_FALSE(TurbineId::parse("/2"));
}

TEST(TurbineId, OrdersRowMajor) {
    EXPECT_LT((TurbineId{1, 5}), (TurbineId{2, 1}));
    EXPECT_LT((TurbineId{2, 1}), (TurbineId{2, 3}));
}

TEST(FarmLayout, StormCaseHas51ActiveTurbines) {
    FarmLayout l;
    EXPECT_EQ(l.active_count(), 55);
    l.missing = {{5, 5}, {6, 5}, {7, 5}, {8, 5}};
    EXPECT_EQ(l.active_count(), 51);
    EXPECT_EQ(l.active_turbines().size(), 51u);
    EXPECT_EQ(l.active_in_row(5), 4);
    EXPECT_EQ(l.active_in_row(4), 5);
    EXPECT_FALSE(l.is_active({6, 5}));
    EXPECT_TRUE(l.is_active({6, 4}));
}

TEST(FarmLayout, RejectsMissingTurbineOutsideGrid) {
    FarmLayout l;
    l.missing = {{12, 1}};
    EXPECT_THROW(l.validate(), ConfigError);
    FarmLayout bad;
    bad.spacing_m = 0;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Grid, BoundsChecked) {
    Grid<int> g(2, 3);
    g.at({2, 3}) = 7;
    EXPECT_EQ(*g.at({2, 3}), 7);
    EXPECT_FALSE(g.at({1, 1}).has_value());
    EXPECT_THROW(g.at({3, 1}), DomainError);
    EXPECT_THROW(g.at({1, 4}), DomainError);
}
