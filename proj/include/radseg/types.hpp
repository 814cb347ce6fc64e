#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace radseg
{

/// Cluster / target label. Negative values are reserved.
using Label = int;

/// Predicted label for points that belong to no cluster.
inline constexpr Label kNoise = -1;
/// Ground-truth label for detections that belong to no road user.
inline constexpr Label kBackground = -1;

/// One radar reflection point.
///
/// Radial velocity sign convention: positive values mean the reflector moves
/// away from the sensor. Thresholds compare |radial_velocity|.
/// (x, y) are expressed in whichever frame is active (CCS after import,
/// FCS inside a window when ego-motion compensation is on).
struct Detection
{
    double time{0.0};
    int sensor_id{0};
    double range{0.0};
    double azimuth{0.0};
    double radial_velocity{0.0};
    double amplitude{0.0};
    double x{0.0};
    double y{0.0};
    std::optional<int> gt_label;

    bool is_object() const { return gt_label.has_value(); }
};

struct EgoPose
{
    double time{0.0};
    double x{0.0};
    double y{0.0};
    double heading{0.0};
    double speed{0.0};
    double yaw_rate{0.0};
};

struct SensorMount
{
    int sensor_id{0};
    double x{0.0};
    double y{0.0};
    double yaw{0.0};
};

/// Labels for the detections of one window (or one merged span).
///
/// indices[k] refers into the log the assignment was computed from, labels[k]
/// is its cluster id or kNoise. Cluster ids are dense: 0..num_clusters()-1.
struct ClusterAssignment
{
    double t_start{0.0};
    double t_end{0.0};
    std::vector<std::size_t> indices;
    std::vector<Label> labels;

    std::size_t size() const { return labels.size(); }
    int num_clusters() const;
    /// True when every id in 0..max appears at least once.
    bool is_dense() const;
};

/// Relabel cluster ids to 0..k-1 in order of first appearance; kNoise kept.
std::vector<Label> densify(const std::vector<Label>& labels);

using ParamSet = std::map<std::string, double>;

struct ParamBounds
{
    double lower{0.0};
    double upper{0.0};
    bool integral{false};
};

class ParamSpace
{
public:
    ParamSpace() = default;

    ParamSpace& add(const std::string& name, double lower, double upper, bool integral = false);

    const std::map<std::string, ParamBounds>& bounds() const { return bounds_; }
    std::size_t dimension() const { return bounds_.size(); }
    std::vector<std::string> names() const;

    bool contains(const ParamSet& p) const;
    /// Maps a unit-cube point (ordered like names()) into the box; integral
    /// parameters are rounded and clamped.
    ParamSet from_unit(const std::vector<double>& u) const;
    std::vector<double> to_unit(const ParamSet& p) const;
    /// Rounds integral entries and clamps every entry into its bounds.
    ParamSet snap(const ParamSet& p) const;

private:
    std::map<std::string, ParamBounds> bounds_;
};

struct LogViolation
{
    std::size_t index{0};
    std::string kind;
    std::string message;
};

struct ValidationReport
{
    std::vector<LogViolation> violations;
    bool empty() const { return violations.empty(); }
};

ValidationReport validate_log(const std::vector<Detection>& detections);

/// Thrown by readers on malformed input; what() carries file and line.
class ParseError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace radseg
