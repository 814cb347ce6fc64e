#include "radseg/experiments.hpp"

#include <gtest/gtest.h>

using namespace radseg;

TEST(Experiments, TableHasThirteenRows)
{
    EXPECT_EQ(experiment_table().size(), 13u);
    EXPECT_THROW(experiment_def(0), std::invalid_argument);
    EXPECT_THROW(experiment_def(14), std::invalid_argument);
    EXPECT_TRUE(experiment_def(12).stage2);
    EXPECT_TRUE(experiment_def(13).stage2);
    EXPECT_FALSE(experiment_def(8).stage2);
}

TEST(Experiments, ExpertRowIsVerbatim)
{
    const auto& d = experiment_def(1);
    EXPECT_FALSE(d.optimized);
    EXPECT_EQ(d.frame, FrameMode::CCS);
    const ParamSet p = published_parameters(1);
    EXPECT_EQ(p.at("eps_xy"), 1.00);
    EXPECT_EQ(p.at("eps_vr"), 5.00);
    EXPECT_EQ(p.at("n_min"), 3);
    EXPECT_EQ(p.at("v_r_min"), 0.40);
}

TEST(Experiments, CombinedRowStructure)
{
    const auto& d = experiment_def(8);
    EXPECT_EQ(d.variant, NeighborhoodCriterion::Variant::EUCLID_XYVR);
    EXPECT_EQ(d.core, CorePointRule::Mode::ADAPTIVE);
    EXPECT_TRUE(d.filter);
    EXPECT_EQ(d.frame, FrameMode::FCS);
    const PipelineConfig c = experiment_config(d, published_parameters(8));
    EXPECT_DOUBLE_EQ(c.criterion.eps_xyvr, 1.04);
    EXPECT_DOUBLE_EQ(c.rule.n_min_50, 3.87);
    EXPECT_FALSE(c.merge_enabled);
}

TEST(Experiments, DefaultSpacesContainPublishedValues)
{
    for (const auto& d : experiment_table())
    {
        if (!d.optimized)
            continue;
        const ParamSpace s = default_space(d);
        EXPECT_TRUE(s.contains(s.snap(published_parameters(d.id)))) << d.id;
        for (const auto& [name, v] : published_parameters(d.id))
        {
            if (s.bounds().count(name))
            {
                EXPECT_TRUE(v >= s.bounds().at(name).lower && v <= s.bounds().at(name).upper) << d.id << name;
            }
        }
    }
}

TEST(Experiments, IdenticalDatasetsGiveIdenticalTraces)
{
    ExperimentOptions o;
    o.budget = {12, 4, 8, 5};
    const auto data = std::vector<Dataset>{make_dataset(suite_scene("a", 1))};
    ExperimentRunner a(data, o), b(data, o);
    const auto ra = a.run(2), rb = b.run(2);
    ASSERT_EQ(ra.trace.size(), 12u);
    for (std::size_t i = 0; i < ra.trace.size(); ++i)
    {
        EXPECT_EQ(ra.trace[i].params, rb.trace[i].params);
        EXPECT_EQ(ra.trace[i].score, rb.trace[i].score);
    }
}

TEST(Experiments, FixedRowReportsScore)
{
    ExperimentRunner r({make_dataset(suite_scene("a", 1))}, {});
    const auto rep = r.run(1);
    EXPECT_TRUE(rep.trace.empty());
    EXPECT_GT(rep.scores.count, 0u);
    EXPECT_EQ(rep.params, published_parameters(1));
    EXPECT_THROW(r.run(99), std::invalid_argument);
}

TEST(Experiments, BenchCsvShape)
{
    ExperimentOptions o;
    o.budget = {4, 2, 2, 1};
    const auto reports = run_bench({make_dataset(suite_scene("a", 1))}, o, {1, 13});
    const std::string s1 = bench_table_csv(reports, false);
    const std::string s2 = bench_table_csv(reports, true);
    EXPECT_EQ(s1.rfind("id,method,frame,equations,v1,homogeneity,completeness,params", 0), 0u);
    EXPECT_EQ(s2.rfind("id,method,v1,baseline_v1,params", 0), 0u);
    EXPECT_NE(s2.find("\n13,"), std::string::npos);
}
