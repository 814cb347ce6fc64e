#include "oracles.hpp"
#include "radseg/parallel.hpp"
#include "radseg/stage1.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace radseg;

namespace
{

Detection at(double x, double y, double vr = 2.0, double t = 0.0, double range = 50.0)
{
    Detection d;
    d.x = x;
    d.y = y;
    d.radial_velocity = vr;
    d.time = t;
    d.range = range;
    return d;
}

bool are_neighbors(const Detection& a, const Detection& b, const NeighborhoodCriterion& c)
{
    const std::vector<Detection> w{a, b};
    GridIndex idx(w, c.spatial_reach());
    return neighbors(0, w, idx, c).size() == 1;
}

} // namespace

TEST(NMinAt, Formula)
{
    const auto r = CorePointRule::adaptive(3.0, 1.0, 0.4);
    EXPECT_DOUBLE_EQ(n_min_at(50, CorePointRule::adaptive(3.87, 0.7, 0.4)), 3.87);
    EXPECT_DOUBLE_EQ(n_min_at(25, r), 1.5);
    EXPECT_DOUBLE_EQ(n_min_at(200, r), 7.5);
    EXPECT_DOUBLE_EQ(n_min_at(5, r), 1.5);
    EXPECT_THROW(n_min_at(50, CorePointRule::fixed(3, 0.4)), std::invalid_argument);
}

TEST(NMinAt, ReciprocalShape)
{
    const auto r = CorePointRule::adaptive(3.0, 1.0, 0.4, CorePointRule::Shape::RECIPROCAL);
    EXPECT_DOUBLE_EQ(n_min_at(25, r), 6.0);
    EXPECT_DOUBLE_EQ(n_min_at(125, r), 3.0 * 0.4);
}

TEST(Neighbors, CoincidentUnderEveryVariant)
{
    for (const auto& c : {NeighborhoodCriterion::box(1, 1), NeighborhoodCriterion::euclid_xy(1, 1),
                          NeighborhoodCriterion::euclid_xyvr(1, 1)})
        EXPECT_TRUE(are_neighbors(at(0, 0), at(0, 0), c));
}

TEST(Neighbors, BoxVersusEuclid)
{
    EXPECT_TRUE(are_neighbors(at(0, 0), at(0.9, 0.9), NeighborhoodCriterion::box(1, 5)));
    EXPECT_FALSE(are_neighbors(at(0, 0), at(0.9, 0.9), NeighborhoodCriterion::euclid_xy(1, 5)));
}

TEST(Neighbors, ScaledVelocityAxis)
{
    const auto c = NeighborhoodCriterion::euclid_xyvr(1, 2);
    EXPECT_TRUE(are_neighbors(at(0, 0, 0.0), at(0, 0, 1.9), c));
    EXPECT_FALSE(are_neighbors(at(0, 0, 0.0), at(0, 0, 2.1), c));
}

TEST(Neighbors, StrictTimeGate)
{
    const auto c = NeighborhoodCriterion::box(1, 5, 0.25);
    EXPECT_TRUE(are_neighbors(at(0, 0, 2, 0.0), at(0, 0, 2, 0.2), c));
    EXPECT_FALSE(are_neighbors(at(0, 0, 2, 0.0), at(0, 0, 2, 0.25), c));
}

TEST(Neighbors, StrictSpatialEdge)
{
    EXPECT_FALSE(are_neighbors(at(0, 0), at(1.0, 0), NeighborhoodCriterion::box(1, 5)));
}

TEST(ClusterWindow, IsolatedPointsAreNoise)
{
    const std::vector<Detection> w{at(0, 0), at(10, 0), at(20, 0)};
    const auto a = cluster_window(w, NeighborhoodCriterion::box(1, 5), CorePointRule::fixed(1, 0.4));
    EXPECT_EQ(a.labels, (std::vector<Label>{kNoise, kNoise, kNoise}));
}

TEST(ClusterWindow, FourCoincidentPoints)
{
    const std::vector<Detection> w(4, at(1, 1));
    const auto a = cluster_window(w, NeighborhoodCriterion::box(1, 5), CorePointRule::fixed(3, 0.4));
    EXPECT_EQ(a.labels, (std::vector<Label>{0, 0, 0, 0}));
}

TEST(ClusterWindow, VelocityGateBlocksCores)
{
    const std::vector<Detection> w(4, at(1, 1, 0.3));
    const auto a = cluster_window(w, NeighborhoodCriterion::box(1, 5), CorePointRule::fixed(3, 0.4));
    EXPECT_EQ(a.num_clusters(), 0);
}

TEST(ClusterWindow, CoreBorderNoiseFixture)
{
    // eps circles of radius 1, N_min = 2: A..C form a chain of cores, D touches
    // only C (border), E is far away (noise)
    const std::vector<Detection> w{at(0, 0), at(0.8, 0), at(1.6, 0), at(2.5, 0), at(5, 5)};
    const auto r = cluster_window_detailed(w, NeighborhoodCriterion::euclid_xy(1.0, 5), CorePointRule::fixed(2, 0.4));
    EXPECT_EQ(r.classes, (std::vector<PointClass>{PointClass::BORDER, PointClass::CORE, PointClass::CORE,
                                                  PointClass::BORDER, PointClass::NOISE}));
    EXPECT_EQ(r.labels, (std::vector<Label>{0, 0, 0, 0, kNoise}));
}

TEST(ClusterWindow, BorderJoinsLowestIndexCore)
{
    // two dense groups left and right of a shared slow (hence border) point
    std::vector<Detection> w{at(0.75, 0, 0.1)};
    for (int i = 0; i < 3; ++i)
        w.push_back(at(0.0, 0.01 * i));
    for (int i = 0; i < 3; ++i)
        w.push_back(at(1.5, 0.01 * i));
    const auto r = cluster_window_detailed(w, NeighborhoodCriterion::euclid_xy(0.8, 5), CorePointRule::fixed(3, 0.4));
    EXPECT_EQ(r.classes[0], PointClass::BORDER);
    EXPECT_EQ(r.labels[0], r.labels[1]);
    EXPECT_NE(r.labels[1], r.labels[4]);
}

TEST(ClusterWindow, MatchesBruteForce)
{
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> n(1, 250);
    int checked = 0;
    for (int k = 0; k < 30; ++k)
    {
        const auto w = oracle::random_window(rng, static_cast<std::size_t>(n(rng)));
        const std::vector<NeighborhoodCriterion> crits{NeighborhoodCriterion::box(0.9, 1.5),
                                                       NeighborhoodCriterion::euclid_xy(1.1, 1.0),
                                                       NeighborhoodCriterion::euclid_xyvr(1.0, 1.3)};
        const std::vector<CorePointRule> rules{CorePointRule::fixed(3, 0.4), CorePointRule::adaptive(3.2, 0.8, 0.3)};
        for (const auto& c : crits)
            for (const auto& r : rules)
            {
                EXPECT_TRUE(oracle::same_partition(cluster_window(w, c, r).labels, oracle::dbscan(w, c, r)));
                ++checked;
            }
    }
    EXPECT_EQ(checked, 180);
}

TEST(ClusterWindow, GateHoldsInEveryCluster)
{
    std::mt19937_64 rng(21);
    const auto w = oracle::random_window(rng, 300);
    const auto c = NeighborhoodCriterion::euclid_xy(1.0, 1.5);
    const auto rule = CorePointRule::adaptive(3.0, 0.5, 0.6);
    const auto r = cluster_window_detailed(w, c, rule);
    std::map<Label, bool> has_core;
    for (std::size_t i = 0; i < w.size(); ++i)
    {
        if (r.labels[i] == kNoise)
            continue;
        if (r.classes[i] == PointClass::CORE)
        {
            EXPECT_GT(std::abs(w[i].radial_velocity), 0.6);
            has_core[r.labels[i]] = true;
        }
        else
        {
            has_core.emplace(r.labels[i], false);
        }
    }
    for (const auto& [l, ok] : has_core)
        EXPECT_TRUE(ok) << l;
}

TEST(ClusterWindow, RotationInvarianceOfEuclideanVariants)
{
    std::mt19937_64 rng(5);
    const auto w = oracle::random_window(rng, 200);
    for (const auto& c : {NeighborhoodCriterion::euclid_xy(1.0, 1.2), NeighborhoodCriterion::euclid_xyvr(1.0, 1.3)})
    {
        for (double a : {0.3, 1.7, 4.0})
        {
            auto r = w;
            for (auto& d : r)
            {
                const double x = d.x, y = d.y;
                d.x = std::cos(a) * x - std::sin(a) * y;
                d.y = std::sin(a) * x + std::cos(a) * y;
            }
            const auto rule = CorePointRule::fixed(3, 0.4);
            EXPECT_TRUE(oracle::same_partition(cluster_window(w, c, rule).labels, cluster_window(r, c, rule).labels));
        }
    }
}

TEST(ClusterWindow, AddingPointKeepsCores)
{
    std::mt19937_64 rng(8);
    auto w = oracle::random_window(rng, 150);
    const auto c = NeighborhoodCriterion::box(1.0, 1.5);
    const auto rule = CorePointRule::fixed(3, 0.4);
    const auto before = cluster_window_detailed(w, c, rule);
    w.push_back(at(4, 4, 1.0, 0.1));
    const auto after = cluster_window_detailed(w, c, rule);
    for (std::size_t i = 0; i < before.classes.size(); ++i)
    {
        if (before.classes[i] == PointClass::CORE)
        {
            EXPECT_EQ(after.classes[i], PointClass::CORE);
        }
    }
}

TEST(MakeWindows, UniformLogWindowCount)
{
    std::vector<Detection> log;
    for (int i = 0; i <= 10; ++i)
        log.push_back(at(0, 0, 2, 0.1 * i));
    EXPECT_EQ(make_windows(log, 0.25, 0.05).size(), 16u);
}

TEST(MakeWindows, ShortLogSingleWindow)
{
    std::vector<Detection> log{at(0, 0, 2, 0.0), at(0, 0, 2, 0.1)};
    const auto w = make_windows(log, 0.25, 0.05);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].first, 0u);
    EXPECT_EQ(w[0].last, 2u);
}

TEST(MakeWindows, RejectsUnsortedAndBadHop)
{
    std::vector<Detection> log{at(0, 0, 2, 0.1), at(0, 0, 2, 0.0)};
    EXPECT_THROW(make_windows(log, 0.25, 0.05), std::invalid_argument);
    EXPECT_THROW(make_windows(std::vector<Detection>{at(0, 0)}, 0.25, 0.0), std::invalid_argument);
}

TEST(ClusterStream, BurstsNeverShareCluster)
{
    std::vector<Detection> log;
    for (int i = 0; i < 5; ++i)
        log.push_back(at(0, 0, 2, 0.0));
    for (int i = 0; i < 5; ++i)
        log.push_back(at(0, 0, 2, 0.4));
    const auto windows = cluster_stream(log, NeighborhoodCriterion::box(1, 5), CorePointRule::fixed(2, 0.4), 0.05);
    for (const auto& w : windows)
    {
        std::map<Label, std::set<bool>> bursts;
        for (std::size_t k = 0; k < w.size(); ++k)
            if (w.labels[k] != kNoise)
                bursts[w.labels[k]].insert(w.indices[k] >= 5);
        for (const auto& [l, s] : bursts)
            EXPECT_EQ(s.size(), 1u);
    }
}

TEST(ClusterStream, ThreadCountDoesNotChangeOutput)
{
    std::mt19937_64 rng(2);
    std::vector<Detection> log;
    for (int b = 0; b < 20; ++b)
    {
        auto w = oracle::random_window(rng, 40);
        for (auto& d : w)
            d.time += 0.1 * b;
        log.insert(log.end(), w.begin(), w.end());
    }
    std::sort(log.begin(), log.end(), [](const Detection& a, const Detection& b) { return a.time < b.time; });
    const auto c = NeighborhoodCriterion::box(1, 1.5);
    const auto r = CorePointRule::fixed(3, 0.4);
    set_max_threads(1);
    const auto one = cluster_stream(log, c, r, 0.05);
    set_max_threads(4);
    const auto four = cluster_stream(log, c, r, 0.05);
    set_max_threads(1);
    ASSERT_EQ(one.size(), four.size());
    for (std::size_t i = 0; i < one.size(); ++i)
    {
        EXPECT_EQ(one[i].indices, four[i].indices);
        EXPECT_EQ(one[i].labels, four[i].labels);
    }
}
