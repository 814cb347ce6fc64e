#pragma once

#include "radseg/types.hpp"

#include <map>
#include <span>
#include <vector>

namespace radseg
{

/// Car coordinate system (vehicle fixed) or frame coordinate system
/// (ego-motion compensated, anchored at the ego pose of reference_time).
enum class FrameMode
{
    CCS,
    FCS
};

struct FrameSpec
{
    FrameMode mode{FrameMode::FCS};
    double reference_time{0.0};
};

/// Thrown when a time lies outside the span of the ego-pose log.
class OutOfSpan : public std::out_of_range
{
public:
    using std::out_of_range::out_of_range;
};

double wrap_angle(double a);

/// Linear position / speed / yaw rate, shortest-arc heading.
EgoPose interpolate_pose(std::span<const EgoPose> poses, double t);

/// Polar sensor measurement -> CCS position. Throws on sensor id mismatch.
Detection sensor_to_ccs(const Detection& d, const SensorMount& mount);

/// Moves a CCS detection taken at d.time into the CCS of the pose at
/// spec.reference_time. Radial velocity is left untouched. For CCS mode the
/// detection is returned as is.
Detection ccs_to_fcs(const Detection& d, std::span<const EgoPose> poses, const FrameSpec& spec);

/// Batch version of ccs_to_fcs.
std::vector<Detection> to_frame(std::span<const Detection> dets, std::span<const EgoPose> poses, const FrameSpec& spec);

using MountTable = std::map<int, SensorMount>;

MountTable make_mount_table(std::span<const SensorMount> mounts);

/// Adds the ego velocity at the sensor, projected onto the line of sight,
/// so the result is the reflector's over-ground radial velocity.
double compensated_radial_velocity(const Detection& d, const SensorMount& mount, std::span<const EgoPose> poses);

/// Direction of the sensor-to-detection ray in the given frame.
/// Without a mount for d.sensor_id the sensor is assumed at the origin.
double ray_bearing(const Detection& d, const MountTable& mounts, std::span<const EgoPose> poses, const FrameSpec& spec);

} // namespace radseg
