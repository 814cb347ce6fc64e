#include "radseg/stage1.hpp"

#include "radseg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace radseg
{

NeighborhoodCriterion NeighborhoodCriterion::box(double eps_xy, double eps_vr, double eps_t)
{
    NeighborhoodCriterion c;
    c.variant = Variant::BOX;
    c.eps_xy = eps_xy;
    c.eps_vr = eps_vr;
    c.eps_t = eps_t;
    return c;
}

NeighborhoodCriterion NeighborhoodCriterion::euclid_xy(double eps_xy, double eps_vr, double eps_t)
{
    NeighborhoodCriterion c = box(eps_xy, eps_vr, eps_t);
    c.variant = Variant::EUCLID_XY;
    return c;
}

NeighborhoodCriterion NeighborhoodCriterion::euclid_xyvr(double eps_xyvr, double vr_scale, double eps_t)
{
    NeighborhoodCriterion c;
    c.variant = Variant::EUCLID_XYVR;
    c.eps_xyvr = eps_xyvr;
    c.vr_scale = vr_scale;
    c.eps_t = eps_t;
    return c;
}

void NeighborhoodCriterion::validate() const
{
    if (!(eps_t > 0.0))
        throw std::invalid_argument("eps_t must be > 0");
    if (variant == Variant::EUCLID_XYVR)
    {
        if (!(eps_xyvr > 0.0) || !(vr_scale > 0.0))
            throw std::invalid_argument("eps_xyvr and the v_r scale must be > 0");
    }
    else if (!(eps_xy > 0.0) || !(eps_vr > 0.0))
    {
        throw std::invalid_argument("eps_xy and eps_vr must be > 0");
    }
}

double NeighborhoodCriterion::spatial_reach() const
{
    return variant == Variant::EUCLID_XYVR ? eps_xyvr : eps_xy;
}

CorePointRule CorePointRule::fixed(double n_min, double v_r_min)
{
    CorePointRule r;
    r.mode = Mode::FIXED;
    r.n_min = n_min;
    r.v_r_min = v_r_min;
    return r;
}

CorePointRule CorePointRule::adaptive(double n_min_50, double alpha_r, double v_r_min, Shape shape)
{
    CorePointRule r;
    r.mode = Mode::ADAPTIVE;
    r.n_min_50 = n_min_50;
    r.alpha_r = alpha_r;
    r.v_r_min = v_r_min;
    r.shape = shape;
    return r;
}

void CorePointRule::validate() const
{
    if (!(v_r_min >= 0.0))
        throw std::invalid_argument("v_r_min must be >= 0");
    if (mode == Mode::ADAPTIVE && !(n_min_50 > 0.0))
        throw std::invalid_argument("n_min_50 must be > 0");
}

double CorePointRule::required_neighbors(double range) const
{
    return mode == Mode::FIXED ? n_min : n_min_at(range, *this);
}

double n_min_at(double range, const CorePointRule& rule)
{
    if (rule.mode != CorePointRule::Mode::ADAPTIVE)
        throw std::invalid_argument("n_min_at needs an adaptive core-point rule");
    const double r = std::clamp(range, kAdaptiveRangeMin, kAdaptiveRangeMax);
    const double ratio = rule.shape == CorePointRule::Shape::LITERAL ? r / kAdaptiveRangeRef : kAdaptiveRangeRef / r;
    return rule.n_min_50 * (1.0 + rule.alpha_r * (ratio - 1.0));
}

std::vector<std::size_t> neighbors(std::size_t self, std::span<const Detection> window, const GridIndex& index,
                                   const NeighborhoodCriterion& crit)
{
    std::vector<std::size_t> out;
    const Detection& d = window[self];
    index.for_each_candidate(d, [&](std::size_t j) {
        if (j != self && crit.is_neighbor(d, window[j]))
            out.push_back(j);
    });
    std::sort(out.begin(), out.end());
    return out;
}

WindowClustering cluster_window_detailed(std::span<const Detection> window, const NeighborhoodCriterion& crit,
                                         const CorePointRule& rule)
{
    crit.validate();
    rule.validate();
    const std::size_t n = window.size();
    WindowClustering out;
    out.labels.assign(n, kNoise);
    out.classes.assign(n, PointClass::NOISE);
    if (n == 0)
        return out;

    const GridIndex index(window, crit.spatial_reach());
    std::vector<std::vector<std::size_t>> adj(n);
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i)
    {
        adj[i] = neighbors(i, window, index, crit);
        core[i] = std::abs(window[i].radial_velocity) > rule.v_r_min &&
                  static_cast<double>(adj[i].size()) >= rule.required_neighbors(window[i].range);
    }

    // connected components of the core graph, numbered by their lowest core index
    Label next = 0;
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!core[i] || out.labels[i] != kNoise)
            continue;
        const Label id = next++;
        out.labels[i] = id;
        queue.push_back(i);
        while (!queue.empty())
        {
            const std::size_t p = queue.front();
            queue.pop_front();
            for (const std::size_t q : adj[p])
            {
                if (core[q] && out.labels[q] == kNoise)
                {
                    out.labels[q] = id;
                    queue.push_back(q);
                }
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i)
    {
        if (core[i])
        {
            out.classes[i] = PointClass::CORE;
            continue;
        }
        // adj is sorted, so the first core neighbor has the lowest index
        for (const std::size_t q : adj[i])
        {
            if (core[q])
            {
                out.labels[i] = out.labels[q];
                out.classes[i] = PointClass::BORDER;
                break;
            }
        }
    }
    return out;
}

ClusterAssignment cluster_window(std::span<const Detection> window, const NeighborhoodCriterion& crit,
                                 const CorePointRule& rule)
{
    WindowClustering c = cluster_window_detailed(window, crit, rule);
    ClusterAssignment a;
    if (!window.empty())
    {
        a.t_start = window.front().time;
        a.t_end = window.front().time;
        for (const Detection& d : window)
        {
            a.t_start = std::min(a.t_start, d.time);
            a.t_end = std::max(a.t_end, d.time);
        }
    }
    a.indices.resize(window.size());
    for (std::size_t i = 0; i < window.size(); ++i)
        a.indices[i] = i;
    a.labels = std::move(c.labels);
    return a;
}

std::vector<WindowBounds> make_windows(std::span<const Detection> log, double length, double hop)
{
    if (!(hop > 0.0) || !(length > 0.0))
        throw std::invalid_argument("window length and hop must be > 0");
    for (std::size_t i = 1; i < log.size(); ++i)
    {
        if (log[i].time < log[i - 1].time)
            throw std::invalid_argument("detection log is not sorted by time (index " + std::to_string(i) + ")");
    }
    if (log.empty())
        return {};

    const double t0 = log.front().time;
    const double span = log.back().time - t0;
    std::size_t count = 1;
    if (span > length)
        count = static_cast<std::size_t>(std::ceil((span - length) / hop - 1e-9)) + 1;

    const auto lower = [&](double t) {
        return static_cast<std::size_t>(
            std::lower_bound(log.begin(), log.end(), t, [](const Detection& d, double v) { return d.time < v; }) -
            log.begin());
    };

    std::vector<WindowBounds> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
    {
        WindowBounds w;
        w.start = t0 + static_cast<double>(k) * hop;
        w.end = w.start + length;
        w.first = lower(w.start);
        w.last = (k + 1 == count) ? static_cast<std::size_t>(
                                        std::upper_bound(log.begin(), log.end(), w.end,
                                                         [](double v, const Detection& d) { return v < d.time; }) -
                                        log.begin())
                                  : lower(w.end);
        out.push_back(w);
    }
    return out;
}

std::vector<ClusterAssignment> cluster_stream(std::span<const Detection> log, const NeighborhoodCriterion& crit,
                                              const CorePointRule& rule, double hop, const WindowTransform& transform)
{
    crit.validate();
    rule.validate();
    const std::vector<WindowBounds> windows = make_windows(log, crit.eps_t, hop);
    std::vector<ClusterAssignment> out(windows.size());
    parallel_for(windows.size(), [&](std::size_t k) {
        const WindowBounds& w = windows[k];
        const std::span<const Detection> slice = log.subspan(w.first, w.last - w.first);
        ClusterAssignment a;
        if (transform)
        {
            const std::vector<Detection> local = transform(slice, w);
            a = cluster_window(local, crit, rule);
        }
        else
        {
            a = cluster_window(slice, crit, rule);
        }
        a.t_start = w.start;
        a.t_end = w.end;
        for (std::size_t& idx : a.indices)
            idx += w.first;
        out[k] = std::move(a);
    });
    return out;
}

} // namespace radseg
