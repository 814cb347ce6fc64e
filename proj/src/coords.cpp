#include "radseg/coords.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace radseg
{

double wrap_angle(double a)
{
    a = std::remainder(a, 2.0 * std::numbers::pi);
    return a;
}

EgoPose interpolate_pose(std::span<const EgoPose> poses, double t)
{
    if (poses.empty())
        throw OutOfSpan("empty ego-pose log");
    if (t < poses.front().time || t > poses.back().time)
        throw OutOfSpan("time " + std::to_string(t) + " outside ego-pose span [" + std::to_string(poses.front().time) +
                        ", " + std::to_string(poses.back().time) + "]");

    const auto it = std::lower_bound(poses.begin(), poses.end(), t,
                                     [](const EgoPose& p, double v) { return p.time < v; });
    if (it->time == t)
        return *it;
    const EgoPose& b = *it;
    const EgoPose& a = *(it - 1);
    const double s = (t - a.time) / (b.time - a.time);
    const auto lerp = [s](double u, double v) { return u + s * (v - u); };

    EgoPose p;
    p.time = t;
    p.x = lerp(a.x, b.x);
    p.y = lerp(a.y, b.y);
    p.heading = wrap_angle(a.heading + s * wrap_angle(b.heading - a.heading));
    p.speed = lerp(a.speed, b.speed);
    p.yaw_rate = lerp(a.yaw_rate, b.yaw_rate);
    return p;
}

Detection sensor_to_ccs(const Detection& d, const SensorMount& mount)
{
    if (d.sensor_id != mount.sensor_id)
        throw std::invalid_argument("sensor id mismatch: detection " + std::to_string(d.sensor_id) + " vs mount " +
                                    std::to_string(mount.sensor_id));
    Detection out = d;
    const double phi = d.azimuth + mount.yaw;
    out.x = mount.x + d.range * std::cos(phi);
    out.y = mount.y + d.range * std::sin(phi);
    return out;
}

namespace
{

struct Rigid2
{
    double c{1.0};
    double s{0.0};
    double tx{0.0};
    double ty{0.0};
};

// Maps CCS(at pose `from`) into CCS(at pose `to`).
Rigid2 relative_transform(const EgoPose& from, const EgoPose& to)
{
    const double dh = from.heading - to.heading;
    const double ct = std::cos(to.heading);
    const double st = std::sin(to.heading);
    const double dx = from.x - to.x;
    const double dy = from.y - to.y;
    return Rigid2{std::cos(dh), std::sin(dh), ct * dx + st * dy, -st * dx + ct * dy};
}

} // namespace

Detection ccs_to_fcs(const Detection& d, std::span<const EgoPose> poses, const FrameSpec& spec)
{
    if (spec.mode == FrameMode::CCS)
        return d;
    const EgoPose from = interpolate_pose(poses, d.time);
    const EgoPose to = interpolate_pose(poses, spec.reference_time);
    const Rigid2 T = relative_transform(from, to);
    Detection out = d;
    out.x = T.c * d.x - T.s * d.y + T.tx;
    out.y = T.s * d.x + T.c * d.y + T.ty;
    return out;
}

std::vector<Detection> to_frame(std::span<const Detection> dets, std::span<const EgoPose> poses, const FrameSpec& spec)
{
    std::vector<Detection> out(dets.begin(), dets.end());
    if (spec.mode == FrameMode::CCS)
        return out;
    const EgoPose to = interpolate_pose(poses, spec.reference_time);
    // detections arrive in bursts sharing one timestamp; reuse the transform
    double cached_time = std::nan("");
    Rigid2 T;
    for (Detection& d : out)
    {
        if (!(d.time == cached_time))
        {
            T = relative_transform(interpolate_pose(poses, d.time), to);
            cached_time = d.time;
        }
        const double x = d.x;
        const double y = d.y;
        d.x = T.c * x - T.s * y + T.tx;
        d.y = T.s * x + T.c * y + T.ty;
    }
    return out;
}

MountTable make_mount_table(std::span<const SensorMount> mounts)
{
    MountTable table;
    for (const SensorMount& m : mounts)
    {
        if (!table.emplace(m.sensor_id, m).second)
            throw std::invalid_argument("duplicate sensor id " + std::to_string(m.sensor_id));
    }
    return table;
}

double compensated_radial_velocity(const Detection& d, const SensorMount& mount, std::span<const EgoPose> poses)
{
    const EgoPose p = interpolate_pose(poses, d.time);
    // sensor velocity in CCS: forward ego speed plus rotation about the CCS origin
    const double vx = p.speed - p.yaw_rate * mount.y;
    const double vy = p.yaw_rate * mount.x;
    const double phi = mount.yaw + d.azimuth;
    return d.radial_velocity + vx * std::cos(phi) + vy * std::sin(phi);
}

double ray_bearing(const Detection& d, const MountTable& mounts, std::span<const EgoPose> poses, const FrameSpec& spec)
{
    double bearing = 0.0;
    const auto it = mounts.find(d.sensor_id);
    if (it != mounts.end())
        bearing = it->second.yaw + d.azimuth;
    else
        bearing = std::atan2(d.y, d.x);
    if (spec.mode == FrameMode::FCS && it != mounts.end() && !poses.empty())
        bearing += interpolate_pose(poses, d.time).heading - interpolate_pose(poses, spec.reference_time).heading;
    return wrap_angle(bearing);
}

} // namespace radseg
