#include "radseg/parallel.hpp"
#include "radseg/pipeline.hpp"
#include "radseg/simgen.hpp"
#include "radseg/stage2.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace radseg;
namespace fs = std::filesystem;

namespace
{

const Scene& scene_b()
{
    static const Scene s = generate(suite_scene("b", 1));
    return s;
}

PipelineResult run(const PipelineConfig& cfg)
{
    const Scene& s = scene_b();
    return run_pipeline(cfg, s.detections, s.poses, s.mounts);
}

std::size_t line_count(const fs::path& p)
{
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line))
        ++n;
    return n;
}

} // namespace

TEST(Pipeline, MergeDisabledEqualsStageOne)
{
    PipelineConfig cfg;
    cfg.merge_enabled = false;
    const auto r = run(cfg);
    EXPECT_FALSE(r.merged.has_value());
    const auto tiles = run_stage1_tiles(r.prepared, cfg.criterion, cfg.rule);
    EXPECT_EQ(r.stage1_sequence.labels, flatten_windows(tiles).labels);
}

TEST(Pipeline, OneTimingPerEnabledStage)
{
    PipelineConfig cfg;
    EXPECT_EQ(run(cfg).timings.size(), 3u);
    cfg.filter_enabled = false;
    cfg.merge_enabled = false;
    const auto r = run(cfg);
    ASSERT_EQ(r.timings.size(), 1u);
    EXPECT_EQ(r.timings[0].stage, "stage1");
    EXPECT_NE(timings_json(r.timings).find("stage1"), std::string::npos);
}

TEST(Pipeline, FilterDecisionsBecomeNoise)
{
    const auto r = run(PipelineConfig{});
    for (const auto& w : r.windows)
    {
        for (std::size_t k = 0; k < w.size(); ++k)
        {
            if (r.prepared.removed[w.indices[k]])
            {
                EXPECT_EQ(w.labels[k], kNoise);
            }
        }
    }
}

TEST(Pipeline, StageTwoCoarsensStageOne)
{
    const auto r = run(PipelineConfig{});
    ASSERT_TRUE(r.merged.has_value());
    ASSERT_EQ(r.merged->indices, r.stage1_sequence.indices);
    std::map<Label, Label> to;
    for (std::size_t i = 0; i < r.merged->size(); ++i)
    {
        const Label a = r.stage1_sequence.labels[i];
        EXPECT_EQ(a == kNoise, r.merged->labels[i] == kNoise);
        if (a != kNoise)
        {
            EXPECT_EQ(to.emplace(a, r.merged->labels[i]).first->second, r.merged->labels[i]);
        }
    }
    EXPECT_LE(r.merged->num_clusters(), r.stage1_sequence.num_clusters());
}

TEST(Pipeline, ReportIsDeterministicAcrossThreads)
{
    set_max_threads(1);
    const std::string a = pipeline_report_json(PipelineConfig{}, run(PipelineConfig{}));
    set_max_threads(4);
    const std::string b = pipeline_report_json(PipelineConfig{}, run(PipelineConfig{}));
    set_max_threads(1);
    EXPECT_EQ(a, b);
}

TEST(Pipeline, CcsNeedsNoPoses)
{
    PipelineConfig cfg;
    cfg.frame = FrameMode::CCS;
    const Scene& s = scene_b();
    EXPECT_NO_THROW(run_pipeline(cfg, s.detections, {}, s.mounts));
    cfg.frame = FrameMode::FCS;
    EXPECT_THROW(run_pipeline(cfg, s.detections, {}, s.mounts), std::exception);
}

TEST(Pipeline, EmptyLog)
{
    const auto r = run_pipeline(PipelineConfig{}, {}, {}, {});
    EXPECT_TRUE(r.windows.empty());
    EXPECT_EQ(r.stage1_sequence.size(), 0u);
}

TEST(Pipeline, PlotDataFiles)
{
    const fs::path dir = fs::temp_directory_path() / "radseg_plot_test";
    fs::remove_all(dir);
    const auto r = run(PipelineConfig{});
    const auto files = emit_plotdata(r, dir.string());
    ASSERT_EQ(files.size(), 4u);
    for (const auto& f : files)
        EXPECT_EQ(line_count(f), r.prepared.log.size() + 1) << f;

    // labels in the stage-2 file follow the assignment one to one
    std::ifstream in(dir / "stage2.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,y,t,label");
    std::map<Label, Label> file_to_assignment;
    std::map<std::size_t, Label> by_index;
    for (std::size_t k = 0; k < r.merged->size(); ++k)
        by_index[r.merged->indices[k]] = r.merged->labels[k];
    for (std::size_t i = 0; std::getline(in, line); ++i)
    {
        const Label l = std::stoi(line.substr(line.rfind(',') + 1));
        const Label want = by_index.count(i) ? by_index[i] : kNoise;
        EXPECT_EQ(file_to_assignment.emplace(l, want).first->second, want);
    }

    const fs::path empty_dir = dir / "empty";
    const auto e = run_pipeline(PipelineConfig{}, {}, {}, {});
    for (const auto& f : emit_plotdata(e, empty_dir.string()))
        EXPECT_EQ(line_count(f), 1u);
    fs::remove_all(dir);
}

TEST(Pipeline, FilterReducesClustersOnClutterScene)
{
    // the walker is slower than the default core gate, so use the box rule
    const Scene s = generate(suite_scene("c", 1));
    PipelineConfig on, off;
    on.criterion = off.criterion = NeighborhoodCriterion::box(0.60, 12.3);
    on.rule = off.rule = CorePointRule::fixed(3, 0.25);
    on.merge_enabled = off.merge_enabled = false;
    off.filter_enabled = false;
    const auto a = run_pipeline(on, s.detections, s.poses, s.mounts);
    const auto b = run_pipeline(off, s.detections, s.poses, s.mounts);
    EXPECT_LT(a.timings.back().clusters, b.timings.back().clusters);
}
