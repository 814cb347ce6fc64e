#pragma once

#include "radseg/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace radseg
{

struct SensorSpec
{
    SensorMount mount;
    double fov{1.0471975511965976};  // half opening angle, rad
    double max_range{150.0};          // m
};

struct EgoSpec
{
    enum class Mode
    {
        STATIONARY,
        CONSTANT_VELOCITY,
        TURN
    };
    Mode mode{Mode::STATIONARY};
    double speed{0.0};     // m/s
    double yaw_rate{0.0};  // rad/s, TURN only
};

/// Object position at a time; the object moves linearly between waypoints.
struct Waypoint
{
    double t{0.0};
    double x{0.0};
    double y{0.0};
};

struct ObjectSpec
{
    enum class Class
    {
        CAR,
        PEDESTRIAN,
        TRUCK
    };
    int id{0};
    Class cls{Class::CAR};
    double length{4.5};
    double width{1.8};
    /// World frame; the world frame equals the CCS at t = 0.
    std::vector<Waypoint> track;
    /// Orientation used while the object stands still.
    double heading{0.0};
    /// Expected detections per cycle at 50 m.
    double reflectivity{2.0};
    /// Intervals [from, to) without any detection of this object.
    std::vector<std::pair<double, double>> gaps;
    /// When > 0, exactly this many evenly spaced detections per cycle
    /// replace the random draw.
    int fixed_count{0};
};

struct SceneSpec
{
    std::string name;
    double duration{10.0};  // s
    double cycle{0.05};     // s, per sensor; sensors fire staggered
    std::vector<SensorSpec> sensors;
    EgoSpec ego;
    std::vector<ObjectSpec> objects;
    double clutter_density{1.0};  // detections per second per 100 m^2
    double clutter_range{60.0};   // m, clutter is drawn in the sector up to here
    double clutter_sigma_vr{0.15};
    double sigma_xy{0.05};
    double sigma_vr{0.05};
    double amplitude{10.0};
    std::uint64_t seed{1};

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

struct Scene
{
    std::vector<Detection> detections;  // CCS, time sorted
    std::vector<EgoPose> poses;
    std::vector<SensorMount> mounts;
};

/// Ego pose at t for the spec's motion model (starts at the world origin).
EgoPose ego_pose_at(const EgoSpec& ego, double t);

/// Object center, velocity and heading at t. Returns false when the object
/// is outside its track span.
struct ObjectState
{
    double x{0.0};
    double y{0.0};
    double vx{0.0};
    double vy{0.0};
    double heading{0.0};
};
bool object_state_at(const ObjectSpec& obj, double t, ObjectState& out);

/// Deterministic scene synthesis. Every (cycle, sensor) pair draws from its
/// own random stream derived from (seed, cycle, sensor).
Scene generate(const SceneSpec& spec);

/// Canned scenes a..f:
///   crossing_pedestrian, car_and_pedestrian, clutter_walker, remote_car,
///   occluded_pedestrian, tuner_probe.
std::vector<SceneSpec> standard_suite(std::uint64_t seed = 1);

/// One suite scene by name or by letter ("a".."f"). Throws on unknown names.
SceneSpec suite_scene(const std::string& name, std::uint64_t seed = 1);

SceneSpec scene_from_json(const std::string& text);
std::string scene_to_json(const SceneSpec& spec);

} // namespace radseg
