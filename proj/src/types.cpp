#include "radseg/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace radseg
{

int ClusterAssignment::num_clusters() const
{
    Label max_label = kNoise;
    for (const Label l : labels)
        max_label = std::max(max_label, l);
    return max_label + 1;
}

bool ClusterAssignment::is_dense() const
{
    const int k = num_clusters();
    std::vector<bool> seen(static_cast<std::size_t>(k), false);
    for (const Label l : labels)
    {
        if (l >= 0)
            seen[static_cast<std::size_t>(l)] = true;
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

std::vector<Label> densify(const std::vector<Label>& labels)
{
    std::unordered_map<Label, Label> remap;
    std::vector<Label> out;
    out.reserve(labels.size());
    for (const Label l : labels)
    {
        if (l < 0)
        {
            out.push_back(kNoise);
            continue;
        }
        auto [it, inserted] = remap.try_emplace(l, static_cast<Label>(remap.size()));
        out.push_back(it->second);
    }
    return out;
}

ParamSpace& ParamSpace::add(const std::string& name, double lower, double upper, bool integral)
{
    if (!(lower <= upper) || !std::isfinite(lower) || !std::isfinite(upper))
        throw std::invalid_argument("parameter '" + name + "': invalid bounds");
    bounds_[name] = ParamBounds{lower, upper, integral};
    return *this;
}

std::vector<std::string> ParamSpace::names() const
{
    std::vector<std::string> out;
    out.reserve(bounds_.size());
    for (const auto& [name, b] : bounds_)
        out.push_back(name);
    return out;
}

bool ParamSpace::contains(const ParamSet& p) const
{
    for (const auto& [name, b] : bounds_)
    {
        const auto it = p.find(name);
        if (it == p.end())
            return false;
        const double v = it->second;
        if (v < b.lower || v > b.upper)
            return false;
        if (b.integral && v != std::round(v))
            return false;
    }
    return true;
}

ParamSet ParamSpace::from_unit(const std::vector<double>& u) const
{
    if (u.size() != bounds_.size())
        throw std::invalid_argument("unit point dimension mismatch");
    ParamSet p;
    std::size_t k = 0;
    for (const auto& [name, b] : bounds_)
    {
        const double t = std::clamp(u[k++], 0.0, 1.0);
        p[name] = b.lower + t * (b.upper - b.lower);
    }
    return snap(p);
}

std::vector<double> ParamSpace::to_unit(const ParamSet& p) const
{
    std::vector<double> u;
    u.reserve(bounds_.size());
    for (const auto& [name, b] : bounds_)
    {
        const double v = p.at(name);
        const double width = b.upper - b.lower;
        u.push_back(width > 0.0 ? (v - b.lower) / width : 0.0);
    }
    return u;
}

ParamSet ParamSpace::snap(const ParamSet& p) const
{
    ParamSet out = p;
    for (const auto& [name, b] : bounds_)
    {
        double v = p.at(name);
        if (b.integral)
        {
            v = std::round(v);
            // keep integral values inside non-integral bounds
            if (v < b.lower)
                v = std::ceil(b.lower);
            if (v > b.upper)
                v = std::floor(b.upper);
        }
        out[name] = std::clamp(v, b.lower, b.upper);
    }
    return out;
}

ValidationReport validate_log(const std::vector<Detection>& detections)
{
    ValidationReport report;
    std::unordered_map<int, double> last_time;
    for (std::size_t i = 0; i < detections.size(); ++i)
    {
        const Detection& d = detections[i];
        const auto add = [&](const char* kind, std::string msg) {
            report.violations.push_back({i, kind, std::move(msg)});
        };
        const bool finite = std::isfinite(d.time) && std::isfinite(d.range) && std::isfinite(d.azimuth) &&
                            std::isfinite(d.radial_velocity) && std::isfinite(d.amplitude) &&
                            std::isfinite(d.x) && std::isfinite(d.y);
        if (!finite)
            add("non-finite", "detection " + std::to_string(i) + " has a non-finite field");
        if (d.range < 0.0)
            add("negative range", "detection " + std::to_string(i) + " has negative range");
        const auto it = last_time.find(d.sensor_id);
        if (it != last_time.end() && d.time < it->second)
            add("time regression", "detection " + std::to_string(i) + " goes back in time on sensor " +
                                       std::to_string(d.sensor_id));
        if (std::isfinite(d.time))
            last_time[d.sensor_id] = it != last_time.end() ? std::max(it->second, d.time) : d.time;
    }
    return report;
}

} // namespace radseg
