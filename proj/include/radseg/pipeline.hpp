#pragma once

#include "radseg/config.hpp"
#include "radseg/score.hpp"
#include "radseg/stage1.hpp"
#include "radseg/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace radseg
{

/// One sliding window with everything that does not depend on the stage-1
/// parameters: the detections in the window's frame, which of them survive
/// the filter and the ground-truth target.
struct PreparedWindow
{
    WindowBounds bounds;
    std::vector<Detection> local;    // all detections of the window, window frame
    std::vector<std::size_t> kept;   // positions in `local` that pass the filter
    std::vector<Detection> kept_local;
    std::vector<Label> target;       // empty for unlabeled logs
};

/// A log made ready for repeated stage-1 / stage-2 evaluation.
struct PreparedLog
{
    std::vector<Detection> log;      // input (CCS), v_r optionally compensated
    std::vector<Detection> frame;    // whole log in the sequence frame
    std::vector<bool> removed;       // filter decision per detection
    std::vector<double> bearings;    // line of sight per detection, sequence frame
    bool labeled{false};
    std::vector<Label> sequence_target;
    std::vector<PreparedWindow> windows;
    std::vector<WindowBounds> tiles; // non-overlapping eps_t tiles for stage 2
};

/// Builds the sequence frame (FCS anchored at the last detection, or CCS),
/// applies the filter and cuts windows of length eps_t every cfg.hop.
/// FCS needs a pose log covering the detections.
PreparedLog prepare_log(const PipelineConfig& cfg, std::vector<Detection> log, std::span<const EgoPose> poses,
                        std::span<const SensorMount> mounts);

/// Stage-1 labels for every prepared window. Filtered detections are noise.
/// Indices refer to the log.
std::vector<ClusterAssignment> run_stage1_windows(const PreparedLog& prepared, const NeighborhoodCriterion& crit,
                                                  const CorePointRule& rule);

/// Stage 1 on the non-overlapping tiles, in the sequence frame.
std::vector<ClusterAssignment> run_stage1_tiles(const PreparedLog& prepared, const NeighborhoodCriterion& crit,
                                                const CorePointRule& rule);

/// Count-weighted aggregate of the per-window scores (labeled logs only).
Scores score_windows(const PreparedLog& prepared, const std::vector<ClusterAssignment>& windows);

/// Score of one sequence-level assignment against the sequence target.
Scores score_sequence(const PreparedLog& prepared, const ClusterAssignment& assignment);

struct StageTiming
{
    std::string stage;
    double seconds{0.0};
    std::size_t detections_in{0};
    std::size_t detections_out{0};
    std::size_t clusters{0};
};

struct PipelineResult
{
    PreparedLog prepared;
    std::vector<ClusterAssignment> windows;  // sliding stage-1 output
    ClusterAssignment stage1_sequence;       // flattened tiles
    std::optional<ClusterAssignment> merged; // stage 2, when enabled
    std::optional<Scores> window_scores;
    std::optional<Scores> stage1_sequence_scores;
    std::optional<Scores> merged_scores;
    std::vector<StageTiming> timings;        // one entry per enabled stage
};

PipelineResult run_pipeline(const PipelineConfig& cfg, std::vector<Detection> log, std::span<const EgoPose> poses,
                            std::span<const SensorMount> mounts);

/// Writes raw.csv, target.csv (labeled logs), stage1.csv and stage2.csv
/// (when merging ran) with columns x,y,t,label in the sequence frame.
/// Returns the written paths.
std::vector<std::string> emit_plotdata(const PipelineResult& result, const std::string& dir);

/// Machine-readable run summary without timings (deterministic).
std::string pipeline_report_json(const PipelineConfig& cfg, const PipelineResult& result);

std::string timings_json(const std::vector<StageTiming>& timings);

/// Per-cluster centers, velocities and spans of a sequence assignment.
std::string cluster_summary_json(const PreparedLog& prepared, const ClusterAssignment& assignment,
                                 const MergeConfig& cfg);

} // namespace radseg
