#include "radseg/spline.hpp"
#include "radseg/stage2.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace radseg;
using std::numbers::pi;

namespace
{

std::vector<VelocitySample> project(double vx, double vy, const std::vector<double>& bearings)
{
    std::vector<VelocitySample> s;
    for (double b : bearings)
        s.push_back({b, vx * std::cos(b) + vy * std::sin(b)});
    return s;
}

/// A walker moving at (vx, vy) observed by a sensor at the origin:
/// `per_step` detections per 0.05 s around its center.
struct Track
{
    std::vector<Detection> log;
    std::vector<double> bearings;
};

Track walker(double x0, double y0, double vx, double vy, double t0, double t1, int label)
{
    Track tr;
    for (double t = t0; t < t1 - 1e-9; t += 0.05)
    {
        for (int k = 0; k < 3; ++k)
        {
            Detection d;
            d.time = t;
            d.x = x0 + vx * t + 0.2 * (k - 1);
            d.y = y0 + vy * t;
            const double b = std::atan2(d.y, d.x);
            d.radial_velocity = vx * std::cos(b) + vy * std::sin(b);
            d.gt_label = label;
            tr.log.push_back(d);
            tr.bearings.push_back(b);
        }
    }
    return tr;
}

ClusterAssignment all_one_cluster(std::size_t first, std::size_t n, double t0, double t1, Label l)
{
    ClusterAssignment a{t0, t1, {}, {}};
    for (std::size_t i = 0; i < n; ++i)
    {
        a.indices.push_back(first + i);
        a.labels.push_back(l);
    }
    return a;
}

} // namespace

TEST(EstimateVelocity, ExactThreeBearings)
{
    const auto v = estimate_velocity(project(5, 0, {0, pi / 4, pi / 2}));
    ASSERT_TRUE(v.valid);
    EXPECT_NEAR(v.vx, 5, 1e-9);
    EXPECT_NEAR(v.vy, 0, 1e-9);
    EXPECT_EQ(v.inliers, 3u);
}

TEST(EstimateVelocity, ParallelRaysAreInvalid)
{
    EXPECT_FALSE(estimate_velocity(project(1, 2, {0.3, 0.3, 0.3})).valid);
}

TEST(EstimateVelocity, TooFewSamplesAreInvalid)
{
    EXPECT_FALSE(estimate_velocity(project(1, 2, {0.3})).valid);
}

TEST(EstimateVelocity, OutliersDropped)
{
    std::vector<double> b;
    for (int i = 0; i < 10; ++i)
        b.push_back(-0.6 + 0.12 * i);
    auto s = project(-3, 1.5, b);
    s.push_back({0.1, -3 * std::cos(0.1) + 1.5 * std::sin(0.1) + 3.0});
    s.push_back({0.5, -3 * std::cos(0.5) + 1.5 * std::sin(0.5) + 3.0});
    const auto v = estimate_velocity(s, {2, 0.5, 50});
    ASSERT_TRUE(v.valid);
    EXPECT_NEAR(v.vx, -3, 1e-9);
    EXPECT_NEAR(v.vy, 1.5, 1e-9);
    EXPECT_EQ(v.inliers, 10u);
}

TEST(Spline, InterpolatesAndDegeneratesToLine)
{
    CubicSpline s({0, 1, 2, 3}, {0, 1, 8, 27});
    EXPECT_DOUBLE_EQ(s(2), 8);
    CubicSpline line({0, 2}, {1, 5});
    EXPECT_NEAR(line(1), 3, 1e-12);
    EXPECT_NEAR(line.derivative(0.5), 2, 1e-12);
    LinearInterpolant li({0, 1, 3}, {0, 2, 2});
    EXPECT_DOUBLE_EQ(li(0.5), 1);
    EXPECT_DOUBLE_EQ(li.derivative(2), 0);
    EXPECT_DOUBLE_EQ(li(4), 2);
}

TEST(Spline, ReproducesLinearData)
{
    CubicSpline s({0, 0.5, 1.1, 2, 2.4}, {1, 2, 3.2, 5, 5.8});
    for (double t = -0.5; t < 3.0; t += 0.1)
    {
        EXPECT_NEAR(s(t), 1 + 2 * t, 1e-12);
        EXPECT_NEAR(s.derivative(t), 2, 1e-12);
    }
}

TEST(PredictCenters, SingleStepIsStatic)
{
    const auto p = predict_centers({{1.0, 3, 4}}, {1.1, 1.2, 1.3});
    EXPECT_EQ(p.speed, 0);
    for (const auto& q : p.positions)
    {
        EXPECT_EQ(q[0], 3);
        EXPECT_EQ(q[1], 4);
    }
}

TEST(PredictCenters, ConstantVelocityIsExact)
{
    for (int n : {2, 3, 4, 8})
    {
        std::vector<TimedCenter> c;
        for (int i = 0; i < n; ++i)
            c.push_back({0.05 * i, 1 + 2 * 0.05 * i, -1.0});
        const double tl = c.back().t;
        const auto p = predict_centers(c, {tl + 0.1, tl + 0.2, tl + 0.35});
        EXPECT_NEAR(p.speed, 2, 1e-6);
        EXPECT_NEAR(p.positions[2][0], 1 + 2 * (tl + 0.35), 1e-6) << n;
        EXPECT_NEAR(p.positions[2][1], -1.0, 1e-6);
    }
}

TEST(PredictCenters, CircleTangentDirection)
{
    std::vector<TimedCenter> c;
    const double w = 0.5, r = 10.0;
    for (int i = 0; i < 12; ++i)
    {
        const double t = 0.05 * i;
        c.push_back({t, r * std::cos(w * t), r * std::sin(w * t)});
    }
    const CenterMotion m = fit_center_motion(c);
    const double t = c.back().t;
    const double tangent = std::atan2(r * w * std::cos(w * t), -r * w * std::sin(w * t));
    const double got = std::atan2(m.vy, m.vx);
    EXPECT_LT(std::abs(std::remainder(got - tangent, 2 * pi)), 5.0 * pi / 180.0);
}

TEST(FlattenWindows, RejectsOverlapAndOffsetsIds)
{
    ClusterAssignment a{0, 0.25, {0, 1, 2}, {0, 0, kNoise}};
    ClusterAssignment b{0.25, 0.5, {3, 4}, {0, 1}};
    const auto f = flatten_windows({a, b});
    EXPECT_EQ(f.num_clusters(), 3);
    EXPECT_EQ(f.labels[2], kNoise);
    EXPECT_NE(f.labels[0], f.labels[3]);
    ClusterAssignment c{0.2, 0.4, {1}, {0}};
    EXPECT_THROW(flatten_windows({a, c}), std::invalid_argument);
}

TEST(JunctionFrame, CenteredOnGap)
{
    ClusterSummary a, b;
    a.t_first = 0.0;
    a.t_last = 1.0;
    b.t_first = 1.2;
    b.t_last = 2.0;
    const auto f = junction_frame(a, b, 0.35);
    EXPECT_NEAR(f[0], 1.1 - 0.175, 1e-12);
    EXPECT_NEAR(f[1], 1.1 + 0.175, 1e-12);
    EXPECT_NEAR(span_gap(a, b), 0.2, 1e-12);
}

TEST(MergeClusters, SingleClusterUnchanged)
{
    const Track t = walker(10, 0, 1.5, 0, 0, 0.5, 1);
    const auto a = all_one_cluster(0, t.log.size(), 0, 0.5, 0);
    for (auto method : {MergeConfig::Method::VELOCITY, MergeConfig::Method::CONTINUATION})
    {
        MergeConfig cfg;
        cfg.method = method;
        EXPECT_EQ(merge_clusters(t.log, a, t.bearings, cfg).labels, a.labels);
    }
}

TEST(MergeClusters, SplitTrackIsJoinedByBothMethods)
{
    Track t = walker(8, 2, 1.2, 0.8, 0, 1.0, 1);
    const std::size_t half = t.log.size() / 2;
    ClusterAssignment a{0, 1.0, {}, {}};
    for (std::size_t i = 0; i < t.log.size(); ++i)
    {
        a.indices.push_back(i);
        a.labels.push_back(i < half ? 0 : 1);
    }
    MergeConfig vel;
    vel.method = MergeConfig::Method::VELOCITY;
    vel.eps_d = 1.0;
    vel.eps_v = 1.0;
    MergeConfig cont;
    cont.eps_d = 1.0;
    for (const auto& cfg : {vel, cont})
    {
        const auto m = merge_clusters(t.log, a, t.bearings, cfg);
        EXPECT_EQ(m.num_clusters(), 1);
    }
}

TEST(MergeClusters, AntiparallelVelocitiesStaySeparate)
{
    Track a = walker(10, 0, 0, 1.5, 0, 0.5, 1);
    Track b = walker(10, 0, 0, -1.5, 0, 0.5, 2);
    Track all = a;
    all.log.insert(all.log.end(), b.log.begin(), b.log.end());
    all.bearings.insert(all.bearings.end(), b.bearings.begin(), b.bearings.end());
    ClusterAssignment s{0, 0.5, {}, {}};
    for (std::size_t i = 0; i < all.log.size(); ++i)
    {
        s.indices.push_back(i);
        s.labels.push_back(i < a.log.size() ? 0 : 1);
    }
    MergeConfig cfg;
    cfg.method = MergeConfig::Method::VELOCITY;
    EXPECT_EQ(merge_clusters(all.log, s, all.bearings, cfg).num_clusters(), 2);
}

TEST(MergeClusters, CoarsensAndKeepsNoise)
{
    Track t = walker(8, 2, 1.2, 0.8, 0, 1.0, 1);
    ClusterAssignment a{0, 1.0, {}, {}};
    for (std::size_t i = 0; i < t.log.size(); ++i)
    {
        a.indices.push_back(i);
        a.labels.push_back(i % 7 == 0 ? kNoise : static_cast<Label>(i / 12));
    }
    a.labels = densify(a.labels);
    MergeConfig cfg;
    const auto m = merge_clusters(t.log, a, t.bearings, cfg);
    std::map<Label, Label> to;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        EXPECT_EQ(a.labels[i] == kNoise, m.labels[i] == kNoise);
        if (a.labels[i] == kNoise)
            continue;
        auto [it, fresh] = to.emplace(a.labels[i], m.labels[i]);
        EXPECT_EQ(it->second, m.labels[i]);
    }
    EXPECT_TRUE(m.is_dense());
}

TEST(MergeClusters, IndependentOfClusterNumbering)
{
    Track t = walker(8, 2, 1.2, 0.8, 0, 1.0, 1);
    Track u = walker(20, -5, -1.0, 0.3, 0, 1.0, 2);
    Track all = t;
    all.log.insert(all.log.end(), u.log.begin(), u.log.end());
    all.bearings.insert(all.bearings.end(), u.bearings.begin(), u.bearings.end());
    ClusterAssignment a{0, 1.0, {}, {}}, b = a;
    for (std::size_t i = 0; i < all.log.size(); ++i)
    {
        const Label l = static_cast<Label>((i % t.log.size()) / 15 + (i >= t.log.size() ? 10 : 0));
        a.indices.push_back(i);
        b.indices.push_back(i);
        a.labels.push_back(l);
        b.labels.push_back(100 - l);
    }
    a.labels = densify(a.labels);
    b.labels = densify(b.labels);
    MergeConfig cfg;
    EXPECT_EQ(merge_clusters(all.log, a, all.bearings, cfg).labels, merge_clusters(all.log, b, all.bearings, cfg).labels);
}

TEST(MergeClusters, NoMergeAcrossLongGap)
{
    Track a = walker(8, 0, 1.0, 0, 0, 0.5, 1);
    Track b = walker(8, 0, 1.0, 0, 1.5, 2.0, 1);
    Track all = a;
    all.log.insert(all.log.end(), b.log.begin(), b.log.end());
    all.bearings.insert(all.bearings.end(), b.bearings.begin(), b.bearings.end());
    ClusterAssignment s{0, 2.0, {}, {}};
    for (std::size_t i = 0; i < all.log.size(); ++i)
    {
        s.indices.push_back(i);
        s.labels.push_back(i < a.log.size() ? 0 : 1);
    }
    EXPECT_EQ(merge_clusters(all.log, s, all.bearings, MergeConfig{}).num_clusters(), 2);
}

TEST(MergeConfig, Validate)
{
    MergeConfig cfg;
    cfg.eps_d = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.solver.min_inliers = 1;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
