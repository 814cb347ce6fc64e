#include "radseg/simgen.hpp"

#include "radseg/coords.hpp"
#include "radseg/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

namespace radseg
{
namespace
{

constexpr double kPoseStep = 0.01;

double deg(double d) { return d * std::numbers::pi / 180.0; }

struct Edge
{
    std::array<double, 2> a;
    std::array<double, 2> b;
    double length;
};

/// Rectangle edges whose outward normal points towards the sensor.
std::vector<Edge> facing_edges(const ObjectSpec& obj, const ObjectState& s, double sx, double sy)
{
    const double c = std::cos(s.heading);
    const double n = std::sin(s.heading);
    const double hl = obj.length / 2.0;
    const double hw = obj.width / 2.0;
    const auto corner = [&](double u, double v) {
        return std::array<double, 2>{s.x + c * u - n * v, s.y + n * u + c * v};
    };
    // (corner a, corner b, outward normal in object coordinates)
    const std::array<std::array<double, 6>, 4> sides{{
        {hl, -hw, hl, hw, 1.0, 0.0},
        {-hl, hw, -hl, -hw, -1.0, 0.0},
        {hl, hw, -hl, hw, 0.0, 1.0},
        {-hl, -hw, hl, -hw, 0.0, -1.0},
    }};
    std::vector<Edge> out;
    for (const auto& e : sides)
    {
        const auto a = corner(e[0], e[1]);
        const auto b = corner(e[2], e[3]);
        const double nx = c * e[4] - n * e[5];
        const double ny = n * e[4] + c * e[5];
        const double mx = 0.5 * (a[0] + b[0]);
        const double my = 0.5 * (a[1] + b[1]);
        if (nx * (sx - mx) + ny * (sy - my) > 0.0)
            out.push_back({a, b, std::hypot(b[0] - a[0], b[1] - a[1])});
    }
    return out;
}

std::array<double, 2> point_on_boundary(const std::vector<Edge>& edges, double s)
{
    for (const Edge& e : edges)
    {
        if (s <= e.length || &e == &edges.back())
        {
            const double f = e.length > 0.0 ? std::clamp(s / e.length, 0.0, 1.0) : 0.0;
            return {e.a[0] + f * (e.b[0] - e.a[0]), e.a[1] + f * (e.b[1] - e.a[1])};
        }
        s -= e.length;
    }
    return {0.0, 0.0};
}

struct SensorWorld
{
    double x, y, yaw;  // world pose of the sensor
    double vx, vy;     // world velocity of the sensor
};

SensorWorld sensor_world(const SensorMount& m, const EgoPose& ego)
{
    const double c = std::cos(ego.heading);
    const double s = std::sin(ego.heading);
    const double ox = c * m.x - s * m.y;
    const double oy = s * m.x + c * m.y;
    return {ego.x + ox,
            ego.y + oy,
            ego.heading + m.yaw,
            ego.speed * c - ego.yaw_rate * oy,
            ego.speed * s + ego.yaw_rate * ox};
}

std::vector<Detection> simulate_cycle(const SceneSpec& spec, std::size_t cycle, std::size_t sensor_index, double t)
{
    const SensorSpec& sensor = spec.sensors[sensor_index];
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(cycle), static_cast<std::uint32_t>(sensor_index)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const EgoPose ego = ego_pose_at(spec.ego, t);
    const SensorWorld sw = sensor_world(sensor.mount, ego);

    std::vector<Detection> out;
    const auto emit = [&](double wx, double wy, double vr, std::optional<int> label) {
        const double dx = wx - sw.x;
        const double dy = wy - sw.y;
        const double r = std::hypot(dx, dy);
        const double az = wrap_angle(std::atan2(dy, dx) - sw.yaw);
        if (r > sensor.max_range || std::abs(az) > sensor.fov)
            return;
        Detection d;
        d.time = t;
        d.sensor_id = sensor.mount.sensor_id;
        d.range = r;
        d.azimuth = az;
        d.radial_velocity = vr;
        d.amplitude = spec.amplitude;
        d.gt_label = label;
        out.push_back(sensor_to_ccs(d, sensor.mount));
    };

    for (const ObjectSpec& obj : spec.objects)
    {
        ObjectState s;
        if (!object_state_at(obj, t, s))
            continue;
        const bool hidden = std::any_of(obj.gaps.begin(), obj.gaps.end(),
                                        [&](const auto& g) { return t >= g.first && t < g.second; });
        if (hidden)
            continue;
        const std::vector<Edge> edges = facing_edges(obj, s, sw.x, sw.y);
        double total = 0.0;
        for (const Edge& e : edges)
            total += e.length;
        if (edges.empty() || total <= 0.0)
            continue;

        std::size_t count = 0;
        if (obj.fixed_count > 0)
        {
            count = static_cast<std::size_t>(obj.fixed_count);
        }
        else
        {
            const double range = std::hypot(s.x - sw.x, s.y - sw.y);
            const double mean = obj.reflectivity * std::max(50.0 / std::max(range, 1e-6), 0.2);
            count = static_cast<std::size_t>(std::poisson_distribution<long>(mean)(rng));
        }
        for (std::size_t k = 0; k < count; ++k)
        {
            const double along = obj.fixed_count > 0 ? (static_cast<double>(k) + 0.5) / static_cast<double>(count) * total
                                                     : unit(rng) * total;
            const auto p = point_on_boundary(edges, along);
            const double ux = p[0] - sw.x;
            const double uy = p[1] - sw.y;
            const double norm = std::hypot(ux, uy);
            double vr = 0.0;
            if (norm > 0.0)
                vr = ((s.vx - sw.vx) * ux + (s.vy - sw.vy) * uy) / norm;
            vr += spec.sigma_vr * gauss(rng);
            const double wx = p[0] + spec.sigma_xy * gauss(rng);
            const double wy = p[1] + spec.sigma_xy * gauss(rng);
            emit(wx, wy, vr, obj.id);
        }
    }

    if (spec.clutter_density > 0.0)
    {
        const double r_max = std::min(spec.clutter_range, sensor.max_range);
        const double r_min = std::min(1.0, r_max);
        const double area = sensor.fov * (r_max * r_max - r_min * r_min);
        const double mean = spec.clutter_density * area / 100.0 * spec.cycle;
        const auto count = std::poisson_distribution<long>(mean)(rng);
        for (long k = 0; k < count; ++k)
        {
            const double r = std::sqrt(r_min * r_min + unit(rng) * (r_max * r_max - r_min * r_min));
            const double az = (2.0 * unit(rng) - 1.0) * sensor.fov;
            const double vr = spec.clutter_sigma_vr * gauss(rng);
            emit(sw.x + r * std::cos(sw.yaw + az), sw.y + r * std::sin(sw.yaw + az), vr, std::nullopt);
        }
    }

    return out;
}

} // namespace

void SceneSpec::validate() const
{
    if (!(duration > 0.0) || !(cycle > 0.0))
        throw std::invalid_argument("scene duration and cycle must be > 0");
    if (sensors.empty())
        throw std::invalid_argument("scene needs at least one sensor");
    for (std::size_t i = 0; i < sensors.size(); ++i)
    {
        if (!(sensors[i].fov > 0.0) || !(sensors[i].max_range > 0.0))
            throw std::invalid_argument("sensor fov and max_range must be > 0");
        for (std::size_t j = 0; j < i; ++j)
        {
            if (sensors[i].mount.sensor_id == sensors[j].mount.sensor_id)
                throw std::invalid_argument("duplicate sensor id " + std::to_string(sensors[i].mount.sensor_id));
        }
    }
    for (const ObjectSpec& o : objects)
    {
        if (!(o.length > 0.0) || !(o.width > 0.0))
            throw std::invalid_argument("object extents must be > 0");
        if (o.track.empty())
            throw std::invalid_argument("object " + std::to_string(o.id) + " has no track");
        for (std::size_t k = 1; k < o.track.size(); ++k)
        {
            if (!(o.track[k].t > o.track[k - 1].t))
                throw std::invalid_argument("object track times must increase");
        }
        if (o.reflectivity < 0.0 || o.fixed_count < 0)
            throw std::invalid_argument("object reflectivity and fixed_count must be >= 0");
    }
    if (clutter_density < 0.0 || sigma_xy < 0.0 || sigma_vr < 0.0 || clutter_sigma_vr < 0.0)
        throw std::invalid_argument("densities and noise levels must be >= 0");
}

EgoPose ego_pose_at(const EgoSpec& ego, double t)
{
    EgoPose p;
    p.time = t;
    switch (ego.mode)
    {
    case EgoSpec::Mode::STATIONARY:
        break;
    case EgoSpec::Mode::CONSTANT_VELOCITY:
        p.x = ego.speed * t;
        p.speed = ego.speed;
        break;
    case EgoSpec::Mode::TURN:
        p.speed = ego.speed;
        p.yaw_rate = ego.yaw_rate;
        p.heading = ego.yaw_rate * t;
        if (std::abs(ego.yaw_rate) < 1e-12)
        {
            p.x = ego.speed * t;
        }
        else
        {
            p.x = ego.speed / ego.yaw_rate * std::sin(p.heading);
            p.y = ego.speed / ego.yaw_rate * (1.0 - std::cos(p.heading));
        }
        break;
    }
    return p;
}

bool object_state_at(const ObjectSpec& obj, double t, ObjectState& out)
{
    const auto& tr = obj.track;
    if (tr.empty() || t < tr.front().t || t > tr.back().t)
        return false;
    out.heading = obj.heading;
    if (tr.size() == 1)
    {
        out = {tr[0].x, tr[0].y, 0.0, 0.0, obj.heading};
        return true;
    }
    std::size_t k = 0;
    while (k + 2 < tr.size() && t >= tr[k + 1].t)
        ++k;
    const Waypoint& a = tr[k];
    const Waypoint& b = tr[k + 1];
    const double f = (t - a.t) / (b.t - a.t);
    out.x = a.x + f * (b.x - a.x);
    out.y = a.y + f * (b.y - a.y);
    out.vx = (b.x - a.x) / (b.t - a.t);
    out.vy = (b.y - a.y) / (b.t - a.t);
    out.heading = std::hypot(out.vx, out.vy) > 1e-9 ? std::atan2(out.vy, out.vx) : obj.heading;
    return true;
}

Scene generate(const SceneSpec& spec)
{
    spec.validate();
    Scene scene;
    for (const SensorSpec& s : spec.sensors)
        scene.mounts.push_back(s.mount);

    const auto pose_steps = static_cast<std::size_t>(std::ceil(spec.duration / kPoseStep - 1e-9));
    for (std::size_t i = 0; i <= pose_steps; ++i)
    {
        const double t = i == pose_steps ? spec.duration : static_cast<double>(i) * kPoseStep;
        scene.poses.push_back(ego_pose_at(spec.ego, t));
    }

    // (cycle, sensor) slots; sensor k fires k / n of a cycle late
    const std::size_t n_sensors = spec.sensors.size();
    struct Slot
    {
        std::size_t cycle;
        std::size_t sensor;
        double t;
    };
    std::vector<Slot> slots;
    for (std::size_t c = 0;; ++c)
    {
        bool any = false;
        for (std::size_t k = 0; k < n_sensors; ++k)
        {
            const double t = (static_cast<double>(c) + static_cast<double>(k) / static_cast<double>(n_sensors)) *
                             spec.cycle;
            if (t > spec.duration)
                break;
            slots.push_back({c, k, t});
            any = true;
        }
        if (!any)
            break;
    }

    std::vector<std::vector<Detection>> parts(slots.size());
    parallel_for(slots.size(), [&](std::size_t i) {
        parts[i] = simulate_cycle(spec, slots[i].cycle, slots[i].sensor, slots[i].t);
    });
    for (auto& p : parts)
        scene.detections.insert(scene.detections.end(), p.begin(), p.end());
    return scene;
}

namespace
{

SensorSpec front_sensor()
{
    return {{0, 3.8, 0.0, 0.0}, deg(60.0), 150.0};
}

ObjectSpec pedestrian(int id, std::vector<Waypoint> track)
{
    ObjectSpec o;
    o.id = id;
    o.cls = ObjectSpec::Class::PEDESTRIAN;
    o.length = 0.6;
    o.width = 0.6;
    o.reflectivity = 1.5;
    o.track = std::move(track);
    return o;
}

ObjectSpec car(int id, std::vector<Waypoint> track)
{
    ObjectSpec o;
    o.id = id;
    o.cls = ObjectSpec::Class::CAR;
    o.length = 4.5;
    o.width = 1.8;
    o.reflectivity = 3.0;
    o.track = std::move(track);
    return o;
}

} // namespace

std::vector<SceneSpec> standard_suite(std::uint64_t seed)
{
    std::vector<SceneSpec> suite;

    {
        SceneSpec s;
        s.name = "crossing_pedestrian";
        s.duration = 10.0;
        s.sensors = {front_sensor()};
        s.objects = {pedestrian(1, {{0.0, 20.0, -7.0}, {10.0, 20.0, 7.0}})};
        s.clutter_density = 1.0;
        s.clutter_range = 50.0;
        suite.push_back(s);
    }
    {
        SceneSpec s;
        s.name = "car_and_pedestrian";
        s.duration = 8.0;
        s.sensors = {{{0, 3.6, 0.8, deg(20.0)}, deg(60.0), 150.0}, {{1, 3.6, -0.8, deg(-20.0)}, deg(60.0), 150.0}};
        s.ego = {EgoSpec::Mode::CONSTANT_VELOCITY, 4.0, 0.0};
        s.objects = {car(1, {{0.0, 70.0, 3.5}, {8.0, 6.0, 3.5}}), pedestrian(2, {{0.0, 35.0, -5.0}, {8.0, 43.0, -5.0}})};
        s.clutter_density = 1.0;
        s.clutter_range = 60.0;
        suite.push_back(s);
    }
    {
        SceneSpec s;
        s.name = "clutter_walker";
        s.duration = 8.0;
        s.sensors = {front_sensor()};
        s.objects = {pedestrian(1, {{0.0, 14.0, 1.0}, {8.0, 18.0, 1.0}})};
        s.clutter_density = 250.0;
        s.clutter_range = 25.0;
        suite.push_back(s);
    }
    {
        SceneSpec s;
        s.name = "remote_car";
        s.duration = 6.0;
        s.sensors = {front_sensor()};
        s.objects = {car(1, {{0.0, 125.0, 2.0}, {6.0, 101.0, 2.0}})};
        s.clutter_density = 1.0;
        s.clutter_range = 130.0;
        suite.push_back(s);
    }
    {
        SceneSpec s;
        s.name = "occluded_pedestrian";
        s.duration = 10.0;
        s.sensors = {front_sensor()};
        // walks mostly along the line of sight so |v_r| stays above the core gate
        ObjectSpec p = pedestrian(1, {{0.0, 12.0, -2.0}, {10.0, 25.0, 1.0}});
        p.gaps = {{4.0, 5.2}};
        s.objects = {p};
        s.clutter_density = 1.0;
        s.clutter_range = 50.0;
        suite.push_back(s);
    }
    {
        // one object, three evenly spaced reflections 0.45 m apart per cycle,
        // receding at 0.32 m/s; cycles longer than the filter's time gate
        SceneSpec s;
        s.name = "tuner_probe";
        s.duration = 10.0;
        s.cycle = 0.3;
        s.sensors = {front_sensor()};
        ObjectSpec o;
        o.id = 1;
        o.cls = ObjectSpec::Class::CAR;
        o.length = 2.0;
        o.width = 1.35;
        o.fixed_count = 3;
        o.track = {{0.0, 30.0, 0.0}, {10.0, 33.2, 0.0}};
        s.objects = {o};
        s.sigma_xy = 0.01;
        s.sigma_vr = 0.002;
        s.clutter_density = 1.0;
        s.clutter_range = 60.0;
        suite.push_back(s);
    }

    for (SceneSpec& s : suite)
        s.seed = seed;
    return suite;
}

SceneSpec suite_scene(const std::string& name, std::uint64_t seed)
{
    const std::vector<SceneSpec> suite = standard_suite(seed);
    for (std::size_t i = 0; i < suite.size(); ++i)
    {
        if (suite[i].name == name || (name.size() == 1 && name[0] == static_cast<char>('a' + i)))
            return suite[i];
    }
    throw std::invalid_argument("unknown suite scene '" + name + "'");
}

namespace
{

using nlohmann::json;

const char* class_name(ObjectSpec::Class c)
{
    switch (c)
    {
    case ObjectSpec::Class::CAR:
        return "car";
    case ObjectSpec::Class::PEDESTRIAN:
        return "pedestrian";
    case ObjectSpec::Class::TRUCK:
        return "truck";
    }
    return "car";
}

ObjectSpec::Class parse_class(const std::string& s)
{
    if (s == "car")
        return ObjectSpec::Class::CAR;
    if (s == "pedestrian")
        return ObjectSpec::Class::PEDESTRIAN;
    if (s == "truck")
        return ObjectSpec::Class::TRUCK;
    throw std::invalid_argument("unknown object class '" + s + "'");
}

const char* ego_mode_name(EgoSpec::Mode m)
{
    switch (m)
    {
    case EgoSpec::Mode::STATIONARY:
        return "stationary";
    case EgoSpec::Mode::CONSTANT_VELOCITY:
        return "constant_velocity";
    case EgoSpec::Mode::TURN:
        return "turn";
    }
    return "stationary";
}

EgoSpec::Mode parse_ego_mode(const std::string& s)
{
    if (s == "stationary")
        return EgoSpec::Mode::STATIONARY;
    if (s == "constant_velocity")
        return EgoSpec::Mode::CONSTANT_VELOCITY;
    if (s == "turn")
        return EgoSpec::Mode::TURN;
    throw std::invalid_argument("unknown ego mode '" + s + "'");
}

} // namespace

SceneSpec scene_from_json(const std::string& text)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw ParseError(std::string("scene JSON: ") + e.what());
    }
    try
    {
        SceneSpec s;
        s.name = j.value("name", std::string("custom"));
        s.duration = j.value("duration", s.duration);
        s.cycle = j.value("cycle", s.cycle);
        s.clutter_density = j.value("clutter_density", s.clutter_density);
        s.clutter_range = j.value("clutter_range", s.clutter_range);
        s.clutter_sigma_vr = j.value("clutter_sigma_vr", s.clutter_sigma_vr);
        s.sigma_xy = j.value("sigma_xy", s.sigma_xy);
        s.sigma_vr = j.value("sigma_vr", s.sigma_vr);
        s.amplitude = j.value("amplitude", s.amplitude);
        s.seed = j.value("seed", s.seed);
        if (j.contains("ego"))
        {
            const json& e = j.at("ego");
            s.ego.mode = parse_ego_mode(e.value("mode", std::string("stationary")));
            s.ego.speed = e.value("speed", 0.0);
            s.ego.yaw_rate = e.value("yaw_rate", 0.0);
        }
        for (const json& js : j.at("sensors"))
        {
            SensorSpec ss;
            ss.mount.sensor_id = js.at("sensor_id").get<int>();
            ss.mount.x = js.value("x", 0.0);
            ss.mount.y = js.value("y", 0.0);
            ss.mount.yaw = js.value("yaw", 0.0);
            ss.fov = js.value("fov", ss.fov);
            ss.max_range = js.value("max_range", ss.max_range);
            s.sensors.push_back(ss);
        }
        for (const json& jo : j.value("objects", json::array()))
        {
            ObjectSpec o;
            o.id = jo.at("id").get<int>();
            o.cls = parse_class(jo.value("class", std::string("car")));
            o.length = jo.value("length", o.length);
            o.width = jo.value("width", o.width);
            o.heading = jo.value("heading", 0.0);
            o.reflectivity = jo.value("reflectivity", o.reflectivity);
            o.fixed_count = jo.value("fixed_count", 0);
            for (const json& w : jo.at("track"))
                o.track.push_back({w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>()});
            for (const json& g : jo.value("gaps", json::array()))
                o.gaps.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
            s.objects.push_back(o);
        }
        s.validate();
        return s;
    }
    catch (const json::exception& e)
    {
        throw ParseError(std::string("scene JSON: ") + e.what());
    }
}

std::string scene_to_json(const SceneSpec& s)
{
    json j;
    j["name"] = s.name;
    j["duration"] = s.duration;
    j["cycle"] = s.cycle;
    j["clutter_density"] = s.clutter_density;
    j["clutter_range"] = s.clutter_range;
    j["clutter_sigma_vr"] = s.clutter_sigma_vr;
    j["sigma_xy"] = s.sigma_xy;
    j["sigma_vr"] = s.sigma_vr;
    j["amplitude"] = s.amplitude;
    j["seed"] = s.seed;
    j["ego"] = {{"mode", ego_mode_name(s.ego.mode)}, {"speed", s.ego.speed}, {"yaw_rate", s.ego.yaw_rate}};
    j["sensors"] = json::array();
    for (const SensorSpec& ss : s.sensors)
    {
        j["sensors"].push_back({{"sensor_id", ss.mount.sensor_id},
                                {"x", ss.mount.x},
                                {"y", ss.mount.y},
                                {"yaw", ss.mount.yaw},
                                {"fov", ss.fov},
                                {"max_range", ss.max_range}});
    }
    j["objects"] = json::array();
    for (const ObjectSpec& o : s.objects)
    {
        json jo{{"id", o.id},
                {"class", class_name(o.cls)},
                {"length", o.length},
                {"width", o.width},
                {"heading", o.heading},
                {"reflectivity", o.reflectivity},
                {"fixed_count", o.fixed_count}};
        jo["track"] = json::array();
        for (const Waypoint& w : o.track)
            jo["track"].push_back({w.t, w.x, w.y});
        jo["gaps"] = json::array();
        for (const auto& g : o.gaps)
            jo["gaps"].push_back({g.first, g.second});
        j["objects"].push_back(jo);
    }
    return j.dump(2);
}

} // namespace radseg
