#include "radseg/log_io.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace radseg::io
{
namespace
{

std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true)
    {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos)
        {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    return s;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what)
{
    throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

double parse_real(std::string_view s, const std::string& source, std::size_t line, const char* field)
{
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
    {
        // from_chars rejects "inf"/"nan" spellings some writers emit
        if (s == "nan" || s == "NaN")
            return std::nan("");
        if (s == "inf" || s == "-inf")
            return s.front() == '-' ? -INFINITY : INFINITY;
        fail(source, line, std::string("bad number in field '") + field + "': '" + std::string(s) + "'");
    }
    return v;
}

long long parse_int(std::string_view s, const std::string& source, std::size_t line, const char* field)
{
    s = trim(s);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail(source, line, std::string("bad integer in field '") + field + "': '" + std::string(s) + "'");
    return v;
}

/// Reads lines, checks the header and hands each data row to `row`.
template <typename RowFn>
void read_csv(std::istream& is, const std::string& source, std::string_view header, std::size_t columns, RowFn row)
{
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(is, line))
    {
        ++line_no;
        const std::string_view l = trim(line);
        if (l.empty())
            continue;
        if (!have_header)
        {
            if (l != header)
                fail(source, line_no, "expected header '" + std::string(header) + "'");
            have_header = true;
            continue;
        }
        const auto fields = split_csv(l);
        if (fields.size() != columns)
            fail(source, line_no,
                 "expected " + std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
        row(fields, line_no);
    }
    if (!have_header)
        fail(source, line_no, "missing header");
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

bool has_suffix(const std::string& s, std::string_view suffix)
{
    return s.size() >= suffix.size() && std::string_view(s).substr(s.size() - suffix.size()) == suffix;
}

} // namespace

std::string format_real(double v)
{
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void write_detections_csv(std::ostream& os, const std::vector<Detection>& dets)
{
    os << kDetectionHeader << '\n';
    for (const Detection& d : dets)
    {
        os << format_real(d.time) << ',' << d.sensor_id << ',' << format_real(d.range) << ','
           << format_real(d.azimuth) << ',' << format_real(d.radial_velocity) << ',' << format_real(d.amplitude)
           << ',' << format_real(d.x) << ',' << format_real(d.y) << ',';
        if (d.gt_label)
            os << *d.gt_label;
        os << '\n';
    }
}

std::vector<Detection> read_detections_csv(std::istream& is, const std::string& source)
{
    std::vector<Detection> out;
    read_csv(is, source, kDetectionHeader, 9, [&](const auto& f, std::size_t line) {
        Detection d;
        d.time = parse_real(f[0], source, line, "time");
        d.sensor_id = static_cast<int>(parse_int(f[1], source, line, "sensor_id"));
        d.range = parse_real(f[2], source, line, "range");
        d.azimuth = parse_real(f[3], source, line, "azimuth");
        d.radial_velocity = parse_real(f[4], source, line, "radial_velocity");
        d.amplitude = parse_real(f[5], source, line, "amplitude");
        d.x = parse_real(f[6], source, line, "x");
        d.y = parse_real(f[7], source, line, "y");
        if (!trim(f[8]).empty())
            d.gt_label = static_cast<int>(parse_int(f[8], source, line, "gt_label"));
        out.push_back(d);
    });
    return out;
}

void write_detections_jsonl(std::ostream& os, const std::vector<Detection>& dets)
{
    for (const Detection& d : dets)
    {
        nlohmann::ordered_json j;
        j["time"] = d.time;
        j["sensor_id"] = d.sensor_id;
        j["range"] = d.range;
        j["azimuth"] = d.azimuth;
        j["radial_velocity"] = d.radial_velocity;
        j["amplitude"] = d.amplitude;
        j["x"] = d.x;
        j["y"] = d.y;
        j["gt_label"] = d.gt_label ? nlohmann::ordered_json(*d.gt_label) : nlohmann::ordered_json(nullptr);
        os << j.dump() << '\n';
    }
}

std::vector<Detection> read_detections_jsonl(std::istream& is, const std::string& source)
{
    std::vector<Detection> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line))
    {
        ++line_no;
        if (trim(line).empty())
            continue;
        try
        {
            const auto j = nlohmann::json::parse(line);
            Detection d;
            d.time = j.at("time").get<double>();
            d.sensor_id = j.at("sensor_id").get<int>();
            d.range = j.at("range").get<double>();
            d.azimuth = j.at("azimuth").get<double>();
            d.radial_velocity = j.at("radial_velocity").get<double>();
            d.amplitude = j.value("amplitude", 0.0);
            d.x = j.at("x").get<double>();
            d.y = j.at("y").get<double>();
            if (j.contains("gt_label") && !j["gt_label"].is_null())
                d.gt_label = j["gt_label"].get<int>();
            out.push_back(d);
        }
        catch (const nlohmann::json::exception& e)
        {
            fail(source, line_no, e.what());
        }
    }
    return out;
}

std::vector<Detection> load_detections(const std::string& path)
{
    auto in = open_in(path);
    if (has_suffix(path, ".jsonl") || has_suffix(path, ".json"))
        return read_detections_jsonl(in, path);
    return read_detections_csv(in, path);
}

void save_detections(const std::string& path, const std::vector<Detection>& dets)
{
    auto out = open_out(path);
    if (has_suffix(path, ".jsonl") || has_suffix(path, ".json"))
        write_detections_jsonl(out, dets);
    else
        write_detections_csv(out, dets);
}

void write_poses_csv(std::ostream& os, const std::vector<EgoPose>& poses)
{
    os << kPoseHeader << '\n';
    for (const EgoPose& p : poses)
        os << format_real(p.time) << ',' << format_real(p.x) << ',' << format_real(p.y) << ','
           << format_real(p.heading) << ',' << format_real(p.speed) << ',' << format_real(p.yaw_rate) << '\n';
}

std::vector<EgoPose> read_poses_csv(std::istream& is, const std::string& source)
{
    std::vector<EgoPose> out;
    read_csv(is, source, kPoseHeader, 6, [&](const auto& f, std::size_t line) {
        EgoPose p;
        p.time = parse_real(f[0], source, line, "time");
        p.x = parse_real(f[1], source, line, "x");
        p.y = parse_real(f[2], source, line, "y");
        p.heading = parse_real(f[3], source, line, "heading");
        p.speed = parse_real(f[4], source, line, "speed");
        p.yaw_rate = parse_real(f[5], source, line, "yaw_rate");
        if (!out.empty() && !(p.time > out.back().time))
            fail(source, line, "pose times must be strictly increasing");
        out.push_back(p);
    });
    return out;
}

std::vector<EgoPose> load_poses(const std::string& path)
{
    auto in = open_in(path);
    return read_poses_csv(in, path);
}

void save_poses(const std::string& path, const std::vector<EgoPose>& poses)
{
    auto out = open_out(path);
    write_poses_csv(out, poses);
}

void write_mounts_csv(std::ostream& os, const std::vector<SensorMount>& mounts)
{
    os << kMountHeader << '\n';
    for (const SensorMount& m : mounts)
        os << m.sensor_id << ',' << format_real(m.x) << ',' << format_real(m.y) << ',' << format_real(m.yaw) << '\n';
}

std::vector<SensorMount> read_mounts_csv(std::istream& is, const std::string& source)
{
    std::vector<SensorMount> out;
    read_csv(is, source, kMountHeader, 4, [&](const auto& f, std::size_t line) {
        SensorMount m;
        m.sensor_id = static_cast<int>(parse_int(f[0], source, line, "sensor_id"));
        m.x = parse_real(f[1], source, line, "x");
        m.y = parse_real(f[2], source, line, "y");
        m.yaw = parse_real(f[3], source, line, "yaw");
        for (const SensorMount& other : out)
        {
            if (other.sensor_id == m.sensor_id)
                fail(source, line, "duplicate sensor_id " + std::to_string(m.sensor_id));
        }
        out.push_back(m);
    });
    return out;
}

std::vector<SensorMount> load_mounts(const std::string& path)
{
    auto in = open_in(path);
    return read_mounts_csv(in, path);
}

void save_mounts(const std::string& path, const std::vector<SensorMount>& mounts)
{
    auto out = open_out(path);
    write_mounts_csv(out, mounts);
}

void write_assignments_csv(std::ostream& os, const std::vector<ClusterAssignment>& windows)
{
    os << kAssignmentHeader << '\n';
    for (const ClusterAssignment& w : windows)
    {
        const std::string start = format_real(w.t_start);
        const std::string end = format_real(w.t_end);
        for (std::size_t k = 0; k < w.size(); ++k)
            os << start << ',' << end << ',' << w.indices[k] << ',' << w.labels[k] << '\n';
    }
}

std::vector<ClusterAssignment> read_assignments_csv(std::istream& is, const std::string& source)
{
    std::vector<ClusterAssignment> out;
    read_csv(is, source, kAssignmentHeader, 4, [&](const auto& f, std::size_t line) {
        const double start = parse_real(f[0], source, line, "window_start");
        const double end = parse_real(f[1], source, line, "window_end");
        const long long index = parse_int(f[2], source, line, "detection_index");
        const long long label = parse_int(f[3], source, line, "label");
        if (index < 0)
            fail(source, line, "negative detection_index");
        if (label < kNoise)
            fail(source, line, "label below -1");
        // rows of one window are contiguous
        if (out.empty() || out.back().t_start != start || out.back().t_end != end)
            out.push_back(ClusterAssignment{start, end, {}, {}});
        out.back().indices.push_back(static_cast<std::size_t>(index));
        out.back().labels.push_back(static_cast<Label>(label));
    });
    return out;
}

std::vector<ClusterAssignment> load_assignments(const std::string& path)
{
    auto in = open_in(path);
    return read_assignments_csv(in, path);
}

void save_assignments(const std::string& path, const std::vector<ClusterAssignment>& windows)
{
    auto out = open_out(path);
    write_assignments_csv(out, windows);
}

} // namespace radseg::io
