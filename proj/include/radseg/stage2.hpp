#pragma once

#include "radseg/types.hpp"

#include <array>
#include <numbers>
#include <span>
#include <vector>

namespace radseg
{

struct VelocitySolverConfig
{
    int min_inliers{2};
    double inlier_threshold{0.5};  // m/s
    int max_rounds{50};
};

/// One radial measurement: line-of-sight bearing (active frame) and v_r.
struct VelocitySample
{
    double bearing{0.0};
    double radial_velocity{0.0};
};

struct VelocityEstimate
{
    double vx{0.0};
    double vy{0.0};
    std::size_t inliers{0};
    bool valid{false};

    double speed() const;
    double heading() const;
};

/// Least-squares fit of v_r = vx cos(b) + vy sin(b) with iterative trimming:
/// while the worst residual exceeds the inlier threshold, that sample is
/// dropped and the fit repeated (at most max_rounds times). Invalid when fewer
/// than min_inliers samples remain or all remaining bearings are parallel
/// within 1e-6 rad.
VelocityEstimate estimate_velocity(std::span<const VelocitySample> samples, const VelocitySolverConfig& cfg = {});

/// Mean position of one cluster at one time step.
struct TimedCenter
{
    double t{0.0};
    double x{0.0};
    double y{0.0};
};

struct CenterMotion
{
    TimedCenter last;
    double vx{0.0};
    double vy{0.0};

    double speed() const;
    /// Constant-velocity continuation from the last center.
    std::array<double, 2> position_at(double t) const;
};

/// Smooths the centers with a centered 3-step moving average (the window
/// shrinks symmetrically at the ends), fits a natural cubic spline (>= 4
/// centers) or a linear interpolant (2-3 centers), resamples it every
/// `resample_step` seconds and takes the gradient at the last sample.
/// A single center gives zero velocity.
CenterMotion fit_center_motion(std::vector<TimedCenter> centers, double resample_step = 0.01);

struct CenterPrediction
{
    std::array<std::array<double, 2>, 3> positions{};
    double speed{0.0};
};

CenterPrediction predict_centers(const std::vector<TimedCenter>& centers, const std::array<double, 3>& at_times,
                                 double resample_step = 0.01);

struct ClusterSummary
{
    Label cluster_id{0};
    std::vector<std::size_t> members;  // indices into the detection log
    std::vector<TimedCenter> centers;  // one per distinct time step, time ordered
    double t_first{0.0};
    double t_last{0.0};
    VelocityEstimate velocity;
    CenterMotion motion;
};

struct MergeConfig
{
    enum class Method
    {
        VELOCITY,
        CONTINUATION
    };

    Method method{Method::CONTINUATION};
    double eps_d{0.94};     // m
    double eps_phi{23.11 * std::numbers::pi / 180.0}; // rad, velocity method only
    double eps_v{2.72};     // m/s
    double eps_t2{0.35};    // s
    int n_min{1};           // cluster level, counting the summary itself
    VelocitySolverConfig solver;
    double resample_step{0.01};

    void validate() const;
};

/// Joins non-overlapping window assignments into one assignment over their
/// span with globally unique cluster ids. Throws if a detection index shows
/// up in more than one window.
ClusterAssignment flatten_windows(const std::vector<ClusterAssignment>& windows);

/// Per-cluster summaries of a flattened assignment. `bearings[i]` is the
/// line-of-sight bearing of log detection i in the active frame.
std::vector<ClusterSummary> summarize_clusters(std::span<const Detection> log, const ClusterAssignment& assignment,
                                               std::span<const double> bearings, const MergeConfig& cfg);

/// Gap between two clusters' time spans (0 when they overlap).
double span_gap(const ClusterSummary& a, const ClusterSummary& b);

/// The eps_t2-long frame in which two clusters are compared: centered between
/// the later first time and the earlier last time, i.e. on the gap between
/// consecutive clusters or inside their overlap.
std::array<double, 2> junction_frame(const ClusterSummary& a, const ClusterSummary& b, double eps_t2);

/// Smallest member-to-member distance among detections inside junction_frame.
double min_member_distance(std::span<const Detection> log, const ClusterSummary& a, const ClusterSummary& b,
                           double eps_t2);

/// Neighborhood test between two summaries for the configured method.
bool summaries_are_neighbors(std::span<const Detection> log, const ClusterSummary& a, const ClusterSummary& b,
                             const MergeConfig& cfg);

/// Second-stage DBSCAN over cluster summaries. Every detection keeps its
/// stage-1 noise status; clusters that end up connected share one id.
/// Merged ids are dense and ordered by the lowest member index.
ClusterAssignment merge_clusters(std::span<const Detection> log, const ClusterAssignment& stage1,
                                 std::span<const double> bearings, const MergeConfig& cfg);

ClusterAssignment merge_clusters(std::span<const Detection> log, const std::vector<ClusterAssignment>& stage1_windows,
                                 std::span<const double> bearings, const MergeConfig& cfg);

} // namespace radseg
