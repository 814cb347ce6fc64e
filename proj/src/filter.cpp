#include "radseg/filter.hpp"

#include "radseg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace radseg
{

void FilterConfig::validate() const
{
    if (!(eta1 > 0.0))
        throw std::invalid_argument("filter eta1 must be > 0");
    if (!(d_xy > 0.0))
        throw std::invalid_argument("filter d_xy must be > 0");
    if (!(dt > 0.0))
        throw std::invalid_argument("filter dt must be > 0");
}

bool should_remove(double radial_velocity, int neighbor_count, const FilterConfig& cfg)
{
    if (neighbor_count < 1)
        return true;
    const double speed = std::abs(radial_velocity);
    if (cfg.quantifier == CascadeQuantifier::ALL)
    {
        for (std::size_t i = 0; i < 4; ++i)
        {
            if (!(speed < cfg.eta(i) && neighbor_count < FilterConfig::kNeighborThresholds[i]))
                return false;
        }
        return true;
    }
    for (std::size_t i = 0; i < 4; ++i)
    {
        if (speed < cfg.eta(i) && neighbor_count < FilterConfig::kNeighborThresholds[i])
            return true;
    }
    return false;
}

int count_neighbors(const Detection& d, std::size_t self, std::span<const Detection> all, const GridIndex& index,
                    double d_xy, double dt)
{
    const double r2 = d_xy * d_xy;
    int count = 0;
    index.for_each_candidate(d, [&](std::size_t j) {
        if (j == self)
            return;
        const Detection& o = all[j];
        const double dx = o.x - d.x;
        const double dy = o.y - d.y;
        if (dx * dx + dy * dy <= r2 && std::abs(o.time - d.time) <= dt)
            ++count;
    });
    return count;
}

std::vector<int> neighbor_counts(std::span<const Detection> dets, double d_xy, double dt)
{
    const GridIndex index(dets, d_xy, dt);
    std::vector<int> counts(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i)
        counts[i] = count_neighbors(dets[i], i, dets, index, d_xy, dt);
    return counts;
}

std::vector<bool> removal_mask(std::span<const Detection> dets, const FilterConfig& cfg)
{
    cfg.validate();
    const std::vector<int> counts = neighbor_counts(dets, cfg.d_xy, cfg.dt);
    std::vector<bool> removed(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i)
        removed[i] = should_remove(dets[i].radial_velocity, counts[i], cfg);
    return removed;
}

FilterResult filter_detections(std::span<const Detection> dets, const FilterConfig& cfg)
{
    const std::vector<bool> removed = removal_mask(dets, cfg);
    FilterResult out;
    for (std::size_t i = 0; i < dets.size(); ++i)
    {
        if (removed[i])
        {
            out.removed.push_back(dets[i]);
            out.removed_indices.push_back(i);
        }
        else
        {
            out.kept.push_back(dets[i]);
            out.kept_indices.push_back(i);
        }
    }
    return out;
}

namespace
{

std::vector<double> grid_values(double lo, double hi, double step)
{
    if (!(step > 0.0) || hi < lo)
        throw std::invalid_argument("invalid filter grid range");
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k)
        out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e9) / 1e9);
    return out;
}

} // namespace

std::vector<double> FilterGrid::eta_values() const { return grid_values(eta_min, eta_max, eta_step); }
std::vector<double> FilterGrid::dxy_values() const { return grid_values(dxy_min, dxy_max, dxy_step); }

int count_retention_violations(std::span<const Detection> dets, const std::vector<bool>& removed,
                               const FilterTunerCriterion& crit)
{
    if (dets.empty())
        return 0;
    double t0 = dets.front().time;
    for (const Detection& d : dets)
        t0 = std::min(t0, d.time);

    struct Span
    {
        double first{INFINITY};
        double last{-INFINITY};
    };
    std::map<int, Span> spans;
    // (object, frame) -> (kept, total)
    std::map<std::pair<int, long long>, std::pair<int, int>> frames;
    for (std::size_t i = 0; i < dets.size(); ++i)
    {
        const Detection& d = dets[i];
        if (!d.gt_label)
            continue;
        Span& s = spans[*d.gt_label];
        s.first = std::min(s.first, d.time);
        s.last = std::max(s.last, d.time);
        const auto frame = static_cast<long long>(std::floor((d.time - t0) / crit.frame_length));
        auto& [kept, total] = frames[{*d.gt_label, frame}];
        ++total;
        if (!removed[i])
            ++kept;
    }

    int violations = 0;
    for (const auto& [key, counts] : frames)
    {
        const Span& s = spans.at(key.first);
        if (s.last - s.first < crit.frame_length)
            continue;
        if (static_cast<double>(counts.first) < crit.retention_fraction * static_cast<double>(counts.second))
            ++violations;
    }
    return violations;
}

double background_removal_rate(std::span<const Detection> dets, const std::vector<bool>& removed)
{
    std::size_t background = 0;
    std::size_t gone = 0;
    for (std::size_t i = 0; i < dets.size(); ++i)
    {
        if (dets[i].gt_label)
            continue;
        ++background;
        if (removed[i])
            ++gone;
    }
    return background == 0 ? 0.0 : static_cast<double>(gone) / static_cast<double>(background);
}

FilterTuneResult tune_filter(std::span<const Detection> train, const FilterGrid& grid,
                             const FilterTunerCriterion& crit, std::optional<std::pair<double, double>> prefer,
                             const FilterConfig& base)
{
    if (train.empty())
        throw std::invalid_argument("filter tuning needs training detections");
    if (std::none_of(train.begin(), train.end(), [](const Detection& d) { return d.is_object(); }))
        throw std::invalid_argument("filter tuning needs labeled objects");
    if (!(crit.retention_fraction > 0.0 && crit.retention_fraction <= 1.0))
        throw std::invalid_argument("retention fraction must lie in (0, 1]");

    FilterTuneResult res;
    res.eta_values = grid.eta_values();
    res.dxy_values = grid.dxy_values();
    const std::size_t n_eta = res.eta_values.size();
    const std::size_t n_dxy = res.dxy_values.size();
    res.violations.assign(n_eta, std::vector<int>(n_dxy, 0));
    res.removal_rate.assign(n_eta, std::vector<double>(n_dxy, 0.0));

    // neighbor counts depend on d_xy only
    std::vector<std::vector<int>> counts(n_dxy);
    parallel_for(n_dxy, [&](std::size_t j) { counts[j] = neighbor_counts(train, res.dxy_values[j], base.dt); });

    parallel_for(n_eta * n_dxy, [&](std::size_t cell) {
        const std::size_t i = cell / n_dxy;
        const std::size_t j = cell % n_dxy;
        FilterConfig cfg = base;
        cfg.eta1 = res.eta_values[i];
        cfg.d_xy = res.dxy_values[j];
        std::vector<bool> removed(train.size());
        for (std::size_t k = 0; k < train.size(); ++k)
            removed[k] = should_remove(train[k].radial_velocity, counts[j][k], cfg);
        res.violations[i][j] = count_retention_violations(train, removed, crit);
        res.removal_rate[i][j] = background_removal_rate(train, removed);
    });

    const auto admissible = [&](std::size_t i, std::size_t j) { return res.violations[i][j] <= crit.max_violations; };

    std::optional<std::pair<std::size_t, std::size_t>> best;
    for (std::size_t i = 0; i < n_eta; ++i)
    {
        for (std::size_t j = 0; j < n_dxy; ++j)
        {
            if (!admissible(i, j))
                continue;
            if (!best)
            {
                best = {i, j};
                continue;
            }
            const auto [bi, bj] = *best;
            const double r = res.removal_rate[i][j];
            const double br = res.removal_rate[bi][bj];
            const bool better = r > br || (r == br && (j > bj || (j == bj && i < bi)));
            if (better)
                best = {i, j};
        }
    }

    if (prefer)
    {
        for (std::size_t i = 0; i < n_eta; ++i)
        {
            for (std::size_t j = 0; j < n_dxy; ++j)
            {
                if (std::abs(res.eta_values[i] - prefer->first) < 1e-9 &&
                    std::abs(res.dxy_values[j] - prefer->second) < 1e-9 && admissible(i, j))
                    best = {i, j};
            }
        }
    }

    res.selected = best;
    res.config = base;
    if (best)
    {
        res.config.eta1 = res.eta_values[best->first];
        res.config.d_xy = res.dxy_values[best->second];
    }
    return res;
}

} // namespace radseg
