#include "radseg/stage2.hpp"

#include "radseg/spline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <stdexcept>

namespace radseg
{

double VelocityEstimate::speed() const { return std::hypot(vx, vy); }
double VelocityEstimate::heading() const { return std::atan2(vy, vx); }

namespace
{

constexpr double kParallelTolerance = 1e-6;

bool rays_parallel(std::span<const VelocitySample> samples, const std::vector<bool>& active)
{
    std::size_t ref = samples.size();
    for (std::size_t j = 0; j < samples.size(); ++j)
    {
        if (!active[j])
            continue;
        if (ref == samples.size())
        {
            ref = j;
            continue;
        }
        // parallel or antiparallel rays span the same line
        if (std::abs(std::sin(samples[j].bearing - samples[ref].bearing)) > kParallelTolerance)
            return false;
    }
    return true;
}

} // namespace

VelocityEstimate estimate_velocity(std::span<const VelocitySample> samples, const VelocitySolverConfig& cfg)
{
    VelocityEstimate est;
    std::vector<bool> active(samples.size(), true);
    std::size_t n_active = samples.size();
    const std::size_t min_inliers = static_cast<std::size_t>(std::max(2, cfg.min_inliers));

    for (int round = 0;; ++round)
    {
        if (n_active < min_inliers || rays_parallel(samples, active))
            return VelocityEstimate{};

        double scc = 0.0, scs = 0.0, sss = 0.0, sc = 0.0, ss = 0.0;
        for (std::size_t j = 0; j < samples.size(); ++j)
        {
            if (!active[j])
                continue;
            const double c = std::cos(samples[j].bearing);
            const double s = std::sin(samples[j].bearing);
            scc += c * c;
            scs += c * s;
            sss += s * s;
            sc += c * samples[j].radial_velocity;
            ss += s * samples[j].radial_velocity;
        }
        const double det = scc * sss - scs * scs;
        if (!(std::abs(det) > 0.0))
            return VelocityEstimate{};
        est.vx = (sss * sc - scs * ss) / det;
        est.vy = (scc * ss - scs * sc) / det;

        std::size_t worst = samples.size();
        double worst_residual = 0.0;
        for (std::size_t j = 0; j < samples.size(); ++j)
        {
            if (!active[j])
                continue;
            const double r = std::abs(samples[j].radial_velocity - est.vx * std::cos(samples[j].bearing) -
                                      est.vy * std::sin(samples[j].bearing));
            if (r > worst_residual)
            {
                worst_residual = r;
                worst = j;
            }
        }
        if (worst_residual <= cfg.inlier_threshold || round >= cfg.max_rounds)
            break;
        active[worst] = false;
        --n_active;
    }

    est.inliers = n_active;
    est.valid = true;
    return est;
}

double CenterMotion::speed() const { return std::hypot(vx, vy); }

std::array<double, 2> CenterMotion::position_at(double t) const
{
    const double dt = t - last.t;
    return {last.x + vx * dt, last.y + vy * dt};
}

CenterMotion fit_center_motion(std::vector<TimedCenter> centers, double resample_step)
{
    if (centers.empty())
        throw std::invalid_argument("center motion needs at least one center");
    std::sort(centers.begin(), centers.end(), [](const TimedCenter& a, const TimedCenter& b) { return a.t < b.t; });

    CenterMotion motion;
    motion.last = centers.back();
    const std::size_t n = centers.size();
    if (n == 1)
        return motion;

    // centered moving average over (t, x, y); averaging time as well keeps
    // constant-velocity tracks exactly on their line
    std::vector<double> ts(n), xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const std::size_t half = std::min<std::size_t>({1, i, n - 1 - i});
        double st = 0.0, sx = 0.0, sy = 0.0;
        for (std::size_t k = i - half; k <= i + half; ++k)
        {
            st += centers[k].t;
            sx += centers[k].x;
            sy += centers[k].y;
        }
        const double w = static_cast<double>(2 * half + 1);
        ts[i] = st / w;
        xs[i] = sx / w;
        ys[i] = sy / w;
    }

    const double t_first = ts.front();
    const double t_last = ts.back();
    const double step = resample_step > 0.0 ? resample_step : 0.01;
    // last two samples of the fine resampling grid
    const auto k_last = static_cast<long long>(std::floor((t_last - t_first) / step));
    double t_prev = t_first + static_cast<double>(k_last) * step;
    // round-off can put a grid sample right on top of t_last
    if (!(t_last - t_prev > 0.5 * step))
        t_prev = t_first + static_cast<double>(k_last - 1) * step;
    if (t_prev < t_first)
        t_prev = t_first;

    const auto gradient = [&](const auto& fx, const auto& fy) {
        const double h = t_last - t_prev;
        motion.vx = (fx(t_last) - fx(t_prev)) / h;
        motion.vy = (fy(t_last) - fy(t_prev)) / h;
    };
    if (n >= 4)
        gradient(CubicSpline(ts, xs), CubicSpline(ts, ys));
    else
        gradient(LinearInterpolant(ts, xs), LinearInterpolant(ts, ys));
    return motion;
}

CenterPrediction predict_centers(const std::vector<TimedCenter>& centers, const std::array<double, 3>& at_times,
                                 double resample_step)
{
    const CenterMotion motion = fit_center_motion(centers, resample_step);
    CenterPrediction p;
    for (std::size_t k = 0; k < 3; ++k)
        p.positions[k] = motion.position_at(at_times[k]);
    p.speed = motion.speed();
    return p;
}

void MergeConfig::validate() const
{
    if (!(eps_d > 0.0) || !(eps_v > 0.0) || !(eps_t2 > 0.0) || !(eps_phi > 0.0))
        throw std::invalid_argument("merge thresholds must be > 0");
    if (n_min < 1)
        throw std::invalid_argument("merge n_min must be >= 1");
    if (solver.min_inliers < 2)
        throw std::invalid_argument("velocity solver needs min_inliers >= 2");
    if (!(solver.inlier_threshold > 0.0) || solver.max_rounds < 0 || !(resample_step > 0.0))
        throw std::invalid_argument("velocity solver threshold and resample step must be > 0");
}

ClusterAssignment flatten_windows(const std::vector<ClusterAssignment>& windows)
{
    ClusterAssignment out;
    if (windows.empty())
        return out;
    out.t_start = windows.front().t_start;
    out.t_end = windows.front().t_end;
    std::map<std::size_t, Label> by_index;
    Label offset = 0;
    for (const ClusterAssignment& w : windows)
    {
        out.t_start = std::min(out.t_start, w.t_start);
        out.t_end = std::max(out.t_end, w.t_end);
        for (std::size_t k = 0; k < w.size(); ++k)
        {
            const Label l = w.labels[k] < 0 ? kNoise : w.labels[k] + offset;
            if (!by_index.emplace(w.indices[k], l).second)
                throw std::invalid_argument("detection " + std::to_string(w.indices[k]) +
                                            " appears in more than one window");
        }
        offset += w.num_clusters();
    }
    std::vector<Label> labels;
    for (const auto& [idx, l] : by_index)
    {
        out.indices.push_back(idx);
        labels.push_back(l);
    }
    // windows can have empty ids after filtering; keep ids dense
    std::map<Label, Label> remap;
    for (const auto& [idx, l] : by_index)
    {
        (void)idx;
        if (l >= 0)
            remap.emplace(l, 0);
    }
    Label next = 0;
    for (auto& [from, to] : remap)
        to = next++;
    for (Label& l : labels)
    {
        if (l >= 0)
            l = remap.at(l);
    }
    out.labels = std::move(labels);
    return out;
}

std::vector<ClusterSummary> summarize_clusters(std::span<const Detection> log, const ClusterAssignment& assignment,
                                               std::span<const double> bearings, const MergeConfig& cfg)
{
    if (bearings.size() != log.size())
        throw std::invalid_argument("need one bearing per log detection");
    std::map<Label, ClusterSummary> by_id;
    for (std::size_t k = 0; k < assignment.size(); ++k)
    {
        const Label l = assignment.labels[k];
        if (l < 0)
            continue;
        ClusterSummary& s = by_id[l];
        s.cluster_id = l;
        s.members.push_back(assignment.indices[k]);
    }

    std::vector<ClusterSummary> out;
    out.reserve(by_id.size());
    for (auto& [id, s] : by_id)
    {
        std::sort(s.members.begin(), s.members.end());
        std::map<double, std::array<double, 3>> steps;  // time -> (sum x, sum y, count)
        std::vector<VelocitySample> samples;
        samples.reserve(s.members.size());
        for (const std::size_t m : s.members)
        {
            const Detection& d = log[m];
            auto& acc = steps[d.time];
            acc[0] += d.x;
            acc[1] += d.y;
            acc[2] += 1.0;
            samples.push_back({bearings[m], d.radial_velocity});
        }
        for (const auto& [t, acc] : steps)
            s.centers.push_back({t, acc[0] / acc[2], acc[1] / acc[2]});
        s.t_first = s.centers.front().t;
        s.t_last = s.centers.back().t;
        s.velocity = estimate_velocity(samples, cfg.solver);
        s.motion = fit_center_motion(s.centers, cfg.resample_step);
        out.push_back(std::move(s));
    }
    return out;
}

double span_gap(const ClusterSummary& a, const ClusterSummary& b)
{
    return std::max(0.0, std::max(a.t_first, b.t_first) - std::min(a.t_last, b.t_last));
}

std::array<double, 2> junction_frame(const ClusterSummary& a, const ClusterSummary& b, double eps_t2)
{
    const double mid = 0.5 * (std::max(a.t_first, b.t_first) + std::min(a.t_last, b.t_last));
    return {mid - 0.5 * eps_t2, mid + 0.5 * eps_t2};
}

double min_member_distance(std::span<const Detection> log, const ClusterSummary& a, const ClusterSummary& b,
                           double eps_t2)
{
    const auto [t_lo, t_hi] = junction_frame(a, b, eps_t2);
    const auto in_frame = [&](const Detection& d) { return d.time >= t_lo && d.time <= t_hi; };
    double best2 = INFINITY;
    for (const std::size_t i : a.members)
    {
        const Detection& p = log[i];
        if (!in_frame(p))
            continue;
        for (const std::size_t j : b.members)
        {
            const Detection& q = log[j];
            if (!in_frame(q))
                continue;
            const double dx = p.x - q.x;
            const double dy = p.y - q.y;
            best2 = std::min(best2, dx * dx + dy * dy);
        }
    }
    return std::sqrt(best2);
}

bool summaries_are_neighbors(std::span<const Detection> log, const ClusterSummary& a, const ClusterSummary& b,
                             const MergeConfig& cfg)
{
    if (!(span_gap(a, b) < cfg.eps_t2))
        return false;

    if (cfg.method == MergeConfig::Method::VELOCITY)
    {
        if (!a.velocity.valid || !b.velocity.valid)
            return false;
        const double dphi = std::abs(std::remainder(a.velocity.heading() - b.velocity.heading(), 2.0 * std::numbers::pi));
        const double dv = std::abs(a.velocity.speed() - b.velocity.speed());
        if (!(dphi < cfg.eps_phi) || !(dv < cfg.eps_v))
            return false;
        return min_member_distance(log, a, b, cfg.eps_t2) < cfg.eps_d;
    }

    const double dv = std::abs(a.motion.speed() - b.motion.speed());
    if (!(dv < cfg.eps_v))
        return false;
    const auto [t_lo, t_hi] = junction_frame(a, b, cfg.eps_t2);
    const std::array<double, 3> times{t_lo, 0.5 * (t_lo + t_hi), t_hi};
    double d_pred = INFINITY;
    for (const double t : times)
    {
        const auto pa = a.motion.position_at(t);
        const auto pb = b.motion.position_at(t);
        d_pred = std::min(d_pred, std::hypot(pa[0] - pb[0], pa[1] - pb[1]));
    }
    return d_pred < cfg.eps_d;
}

ClusterAssignment merge_clusters(std::span<const Detection> log, const ClusterAssignment& stage1,
                                 std::span<const double> bearings, const MergeConfig& cfg)
{
    cfg.validate();
    std::vector<ClusterSummary> summaries = summarize_clusters(log, stage1, bearings, cfg);
    // canonical order: lowest member index
    std::sort(summaries.begin(), summaries.end(),
              [](const ClusterSummary& a, const ClusterSummary& b) { return a.members.front() < b.members.front(); });
    const std::size_t k = summaries.size();

    std::vector<std::vector<std::size_t>> adj(k);
    for (std::size_t i = 0; i < k; ++i)
    {
        for (std::size_t j = i + 1; j < k; ++j)
        {
            if (summaries_are_neighbors(log, summaries[i], summaries[j], cfg))
            {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
        }
    }
    for (auto& a : adj)
        std::sort(a.begin(), a.end());

    std::vector<bool> core(k);
    for (std::size_t i = 0; i < k; ++i)
        core[i] = static_cast<int>(adj[i].size()) + 1 >= cfg.n_min;

    std::vector<Label> group(k, kNoise);
    Label next = 0;
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < k; ++i)
    {
        if (!core[i] || group[i] != kNoise)
            continue;
        group[i] = next;
        queue.push_back(i);
        while (!queue.empty())
        {
            const std::size_t p = queue.front();
            queue.pop_front();
            for (const std::size_t q : adj[p])
            {
                if (core[q] && group[q] == kNoise)
                {
                    group[q] = next;
                    queue.push_back(q);
                }
            }
        }
        ++next;
    }
    for (std::size_t i = 0; i < k; ++i)
    {
        if (core[i])
            continue;
        for (const std::size_t q : adj[i])
        {
            if (core[q])
            {
                group[i] = group[q];
                break;
            }
        }
    }
    // clusters never become noise at this level
    for (std::size_t i = 0; i < k; ++i)
    {
        if (group[i] == kNoise)
            group[i] = next++;
    }

    std::map<Label, Label> member_group;
    for (std::size_t i = 0; i < k; ++i)
        member_group[summaries[i].cluster_id] = group[i];

    ClusterAssignment out;
    out.t_start = stage1.t_start;
    out.t_end = stage1.t_end;
    out.indices = stage1.indices;
    out.labels.reserve(stage1.size());
    for (const Label l : stage1.labels)
        out.labels.push_back(l < 0 ? kNoise : member_group.at(l));
    // ids by lowest member index, independent of the stage-1 numbering
    std::vector<std::size_t> order(out.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out.indices[a] < out.indices[b]; });
    std::map<Label, Label> canonical;
    for (const std::size_t pos : order)
    {
        const Label l = out.labels[pos];
        if (l >= 0)
            canonical.emplace(l, static_cast<Label>(canonical.size()));
    }
    for (Label& l : out.labels)
    {
        if (l >= 0)
            l = canonical.at(l);
    }
    return out;
}

ClusterAssignment merge_clusters(std::span<const Detection> log, const std::vector<ClusterAssignment>& stage1_windows,
                                 std::span<const double> bearings, const MergeConfig& cfg)
{
    return merge_clusters(log, flatten_windows(stage1_windows), bearings, cfg);
}

} // namespace radseg
