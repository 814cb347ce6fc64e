#include "radseg/optimize.hpp"
#include "radseg/surrogate.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace radseg;

namespace
{

ParamSpace unit2()
{
    ParamSpace s;
    s.add("x", 0, 1).add("y", 0, 1);
    return s;
}

} // namespace

TEST(Halton, StaysInUnitCubeAndIsShifted)
{
    const auto p = halton_point(0, 2, {0.0, 0.0});
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
    const auto q = halton_point(0, 2, {0.75, 0.0});
    EXPECT_DOUBLE_EQ(q[0], 0.25);
    for (std::size_t i = 0; i < 200; ++i)
        for (double v : halton_point(i, 5, {0.3, 0.1, 0.9, 0.2, 0.5}))
        {
            EXPECT_GE(v, 0.0);
            EXPECT_LT(v, 1.0);
        }
}

TEST(Budget, Validation)
{
    OptimizeBudget b;
    EXPECT_NO_THROW(b.validate());
    b.total = 1;
    b.explore = 1;
    b.exploit = 0;
    EXPECT_THROW(b.validate(), std::invalid_argument);
    b = {};
    b.exploit = 60;
    EXPECT_THROW(b.validate(), std::invalid_argument);
}

TEST(Objective, CachesRepeatedParameters)
{
    int calls = 0;
    Objective f([&](const ParamSet& p) {
        ++calls;
        return p.at("x");
    });
    EXPECT_EQ(f({{"x", 0.5}}), 0.5);
    EXPECT_EQ(f({{"x", 0.5}}), 0.5);
    EXPECT_EQ(calls, 1);
    EXPECT_EQ(f.evaluations(), 1u);
}

TEST(Optimize, OneDimensionalQuadratic)
{
    ParamSpace s;
    s.add("x", 0, 1);
    Objective f([](const ParamSet& p) { return -std::pow(p.at("x") - 0.7, 2); });
    const auto r = optimize(s, f, {});
    EXPECT_NEAR(r.best.at("x"), 0.7, 0.02);
}

TEST(Optimize, ConstantObjective)
{
    Objective f([](const ParamSet&) { return 0.25; });
    const auto r = optimize(unit2(), f, {});
    EXPECT_EQ(r.best_score, 0.25);
    EXPECT_EQ(r.trace.size(), 100u);
}

TEST(Optimize, TraceContract)
{
    ParamSpace s = unit2();
    s.add("n", 1, 6, true);
    Objective f([](const ParamSet& p) { return -std::abs(p.at("x") - 0.2) - std::abs(p.at("n") - 4); });
    const auto r = optimize(s, f, {100, 30, 70, 9});
    ASSERT_EQ(r.trace.size(), 100u);
    double best = -1e300;
    for (std::size_t i = 0; i < r.trace.size(); ++i)
    {
        EXPECT_EQ(r.trace[i].phase, i < 30 ? OptimizePhase::EXPLORE : OptimizePhase::EXPLOIT);
        EXPECT_TRUE(s.contains(r.trace[i].params));
        EXPECT_EQ(r.trace[i].params.at("n"), std::round(r.trace[i].params.at("n")));
        best = std::max(best, r.trace[i].score);
    }
    EXPECT_EQ(r.best_score, best);
    EXPECT_EQ(f(r.best), r.best_score);
}

TEST(Optimize, DeterministicGivenSeed)
{
    Objective f([](const ParamSet& p) { return std::sin(5 * p.at("x")) * std::cos(3 * p.at("y")); });
    const auto a = optimize(unit2(), f, {40, 10, 30, 3});
    Objective g([](const ParamSet& p) { return std::sin(5 * p.at("x")) * std::cos(3 * p.at("y")); });
    const auto b = optimize(unit2(), g, {40, 10, 30, 3});
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i)
    {
        EXPECT_EQ(a.trace[i].params, b.trace[i].params);
        EXPECT_EQ(a.trace[i].score, b.trace[i].score);
    }
}

TEST(Optimize, InitialPointsComeFirst)
{
    OptimizeOptions o;
    o.initial_points = {{{"x", 0.123}, {"y", 0.456}}};
    Objective f([](const ParamSet& p) { return p.at("x"); });
    const auto r = optimize(unit2(), f, {20, 5, 15, 1}, o);
    EXPECT_EQ(r.trace[0].params.at("x"), 0.123);
}

TEST(Optimize, RandomStrategyFillsBudget)
{
    OptimizeOptions o;
    o.strategy = OptimizeOptions::Strategy::RANDOM;
    Objective f([](const ParamSet& p) { return p.at("x"); });
    EXPECT_EQ(optimize(unit2(), f, {}, o).trace.size(), 100u);
}

TEST(Optimize, Errors)
{
    ParamSpace flat;
    flat.add("x", 1, 1);
    Objective f([](const ParamSet&) { return 0.0; });
    EXPECT_THROW(optimize(flat, f, {}), std::invalid_argument);
    EXPECT_THROW(optimize(unit2(), f, {1, 1, 0, 1}), std::invalid_argument);
}

TEST(Optimize, ExploitationImprovesOnSeparableConcave)
{
    int improved = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
    {
        const double cx = 0.2 + 0.6 * ((seed * 37) % 100) / 100.0;
        const double cy = 0.2 + 0.6 * ((seed * 61) % 100) / 100.0;
        Objective f([&](const ParamSet& p) {
            return -std::pow(p.at("x") - cx, 2) - 2.0 * std::pow(p.at("y") - cy, 2);
        });
        const auto r = optimize(unit2(), f, {100, 30, 70, seed});
        double explore = -1e300, exploit = -1e300;
        for (const auto& e : r.trace)
            (e.phase == OptimizePhase::EXPLORE ? explore : exploit) =
                std::max(e.phase == OptimizePhase::EXPLORE ? explore : exploit, e.score);
        improved += exploit > explore;
    }
    EXPECT_GE(improved, 45);
}

TEST(GaussianProcess, InterpolatesTrainingData)
{
    Eigen::MatrixXd x(6, 1);
    Eigen::VectorXd y(6);
    for (int i = 0; i < 6; ++i)
    {
        x(i, 0) = i / 5.0;
        y(i) = std::sin(3 * x(i, 0));
    }
    GaussianProcess gp;
    gp.fit(x, y);
    for (int i = 0; i < 6; ++i)
    {
        const auto p = gp.predict(x.row(i).transpose());
        EXPECT_NEAR(p.mean, y(i), 1e-3);
        EXPECT_LT(p.stddev, 1e-2);
    }
    Eigen::VectorXd far(1);
    far << 0.5;
    EXPECT_GT(gp.predict(far).stddev, 0.0);
}

TEST(ExpectedImprovement, Properties)
{
    EXPECT_DOUBLE_EQ(expected_improvement(1.0, 0.0, 0.5, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(expected_improvement(0.0, 0.0, 0.5, 0.0), 0.0);
    EXPECT_GT(expected_improvement(0.0, 1.0, 0.5, 0.0), 0.0);
    EXPECT_GT(expected_improvement(0.0, 2.0, 0.5), expected_improvement(0.0, 1.0, 0.5));
}
