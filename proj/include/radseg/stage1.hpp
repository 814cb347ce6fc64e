#pragma once

#include "radseg/grid_index.hpp"
#include "radseg/types.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace radseg
{

/// Neighborhood test between two detections of one window. All epsilon
/// comparisons are strict; time is always an independent gate |dt| < eps_t.
///   BOX:          |dx| < eps_xy, |dy| < eps_xy, |dv_r| < eps_vr
///   EUCLID_XY:    hypot(dx, dy) < eps_xy, |dv_r| < eps_vr
///   EUCLID_XYVR:  sqrt(dx^2 + dy^2 + (dv_r / vr_scale)^2) < eps_xyvr
struct NeighborhoodCriterion
{
    enum class Variant
    {
        BOX,
        EUCLID_XY,
        EUCLID_XYVR
    };

    Variant variant{Variant::BOX};
    double eps_xy{1.0};
    double eps_vr{5.0};
    double eps_xyvr{1.0};
    double vr_scale{1.0};
    double eps_t{0.25};

    static NeighborhoodCriterion box(double eps_xy, double eps_vr, double eps_t = 0.25);
    static NeighborhoodCriterion euclid_xy(double eps_xy, double eps_vr, double eps_t = 0.25);
    static NeighborhoodCriterion euclid_xyvr(double eps_xyvr, double vr_scale, double eps_t = 0.25);

    void validate() const;
    /// Largest spatial offset that can still pass (grid cell size).
    double spatial_reach() const;

    bool is_neighbor(const Detection& a, const Detection& b) const
    {
        const double dt = a.time - b.time;
        if (!(std::abs(dt) < eps_t))
            return false;
        const double dx = a.x - b.x;
        const double dy = a.y - b.y;
        const double dv = a.radial_velocity - b.radial_velocity;
        switch (variant)
        {
        case Variant::BOX:
            return std::abs(dx) < eps_xy && std::abs(dy) < eps_xy && std::abs(dv) < eps_vr;
        case Variant::EUCLID_XY:
            return dx * dx + dy * dy < eps_xy * eps_xy && std::abs(dv) < eps_vr;
        case Variant::EUCLID_XYVR:
        {
            const double sv = dv / vr_scale;
            return dx * dx + dy * dy + sv * sv < eps_xyvr * eps_xyvr;
        }
        }
        return false;
    }
};

/// Which detections may seed a cluster: |v_r| > v_r_min and at least
/// n_min neighbors, where n_min is either fixed or range dependent.
struct CorePointRule
{
    enum class Mode
    {
        FIXED,
        ADAPTIVE
    };
    /// LITERAL:    n50 * (1 + alpha * (clip(r) / 50 - 1))
    /// RECIPROCAL: n50 * (1 + alpha * (50 / clip(r) - 1))
    enum class Shape
    {
        LITERAL,
        RECIPROCAL
    };

    double v_r_min{0.4};
    Mode mode{Mode::FIXED};
    double n_min{3.0};
    double n_min_50{3.0};
    double alpha_r{0.0};
    Shape shape{Shape::LITERAL};

    static CorePointRule fixed(double n_min, double v_r_min);
    static CorePointRule adaptive(double n_min_50, double alpha_r, double v_r_min, Shape shape = Shape::LITERAL);

    void validate() const;
    /// Neighbor count a detection at sensor range r needs to be core.
    double required_neighbors(double range) const;
};

inline constexpr double kAdaptiveRangeMin = 25.0;
inline constexpr double kAdaptiveRangeMax = 125.0;
inline constexpr double kAdaptiveRangeRef = 50.0;

/// Range-adaptive minimum neighbor count. Throws for a FIXED rule.
double n_min_at(double range, const CorePointRule& rule);

/// Indices of all detections in `window` that are neighbors of window[self].
std::vector<std::size_t> neighbors(std::size_t self, std::span<const Detection> window, const GridIndex& index,
                                   const NeighborhoodCriterion& crit);

enum class PointClass
{
    CORE,
    BORDER,
    NOISE
};

struct WindowClustering
{
    std::vector<Label> labels;
    std::vector<PointClass> classes;
};

/// DBSCAN over one window with the core-point gate.
///
/// Cluster ids follow the order in which their first core point appears in
/// the input. A border point reachable from several clusters joins the
/// cluster of its lowest-index core neighbor, so the result does not depend
/// on traversal order.
WindowClustering cluster_window_detailed(std::span<const Detection> window, const NeighborhoodCriterion& crit,
                                         const CorePointRule& rule);

/// Same as cluster_window_detailed; indices are positions within `window`.
ClusterAssignment cluster_window(std::span<const Detection> window, const NeighborhoodCriterion& crit,
                                 const CorePointRule& rule);

struct WindowBounds
{
    double start{0.0};
    double end{0.0};
    std::size_t first{0};  // index range [first, last) into the log
    std::size_t last{0};
};

/// Windows of length `length` advanced by `hop`. Windows are half-open
/// [start, start + length) except the final one, which also holds its end
/// time. Windows continue until one reaches the last detection; a log
/// shorter than `length` yields one window. Throws on an
/// unsorted log or non-positive hop.
std::vector<WindowBounds> make_windows(std::span<const Detection> log, double length, double hop);

/// Maps the detections of one window into the frame they are clustered in.
using WindowTransform = std::function<std::vector<Detection>(std::span<const Detection>, const WindowBounds&)>;

/// Clusters every window independently. Assignment indices refer to `log`.
/// Output order equals window time order regardless of thread count.
std::vector<ClusterAssignment> cluster_stream(std::span<const Detection> log, const NeighborhoodCriterion& crit,
                                              const CorePointRule& rule, double hop,
                                              const WindowTransform& transform = {});

} // namespace radseg
