#include "radseg/optimize.hpp"

#include "radseg/parallel.hpp"
#include "radseg/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace radseg
{

void OptimizeBudget::validate() const
{
    if (total < 2)
        throw std::invalid_argument("optimizer budget must be >= 2");
    if (explore < 1 || exploit < 0 || explore + exploit != total)
        throw std::invalid_argument("explore + exploit must equal the total budget");
}

double Objective::operator()(const ParamSet& p) const
{
    {
        std::lock_guard lock(mutex_);
        const auto it = cache_.find(p);
        if (it != cache_.end())
            return it->second;
    }
    const double v = fn_(p);
    std::lock_guard lock(mutex_);
    ++evaluations_;
    cache_.emplace(p, v);
    return v;
}

std::size_t Objective::evaluations() const
{
    std::lock_guard lock(mutex_);
    return evaluations_;
}

namespace
{

constexpr std::size_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

double radical_inverse(std::size_t n, std::size_t base)
{
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (n > 0)
    {
        r += f * static_cast<double>(n % base);
        n /= base;
        f *= inv;
    }
    return r;
}

Eigen::VectorXd as_vector(const std::vector<double>& u)
{
    return Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
}

} // namespace

std::vector<double> halton_point(std::size_t index, std::size_t dim, const std::vector<double>& shift)
{
    if (dim > std::size(kPrimes))
        throw std::invalid_argument("Halton sequence supports at most 20 dimensions");
    std::vector<double> u(dim);
    for (std::size_t k = 0; k < dim; ++k)
    {
        const double v = radical_inverse(index + 1, kPrimes[k]) + (k < shift.size() ? shift[k] : 0.0);
        u[k] = v - std::floor(v);
    }
    return u;
}

OptimizeResult optimize(const ParamSpace& space, const Objective& objective, const OptimizeBudget& budget,
                        const OptimizeOptions& options)
{
    budget.validate();
    const std::size_t dim = space.dimension();
    bool has_volume = false;
    for (const auto& [name, b] : space.bounds())
        has_volume = has_volume || b.lower < b.upper;
    if (dim == 0 || !has_volume)
        throw std::invalid_argument("parameter space has zero volume");

    std::mt19937_64 rng(budget.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::vector<double>> xs;  // continuous unit-cube points
    std::vector<double> ys;
    OptimizeResult result;

    // exploration: warm-start points, then a randomly shifted Halton sequence
    std::vector<double> shift(dim);
    for (double& s : shift)
        s = unit(rng);
    std::vector<std::vector<double>> explore_points;
    for (const ParamSet& p : options.initial_points)
    {
        if (explore_points.size() >= static_cast<std::size_t>(budget.explore))
            break;
        explore_points.push_back(space.to_unit(space.snap(p)));
    }
    for (std::size_t k = 0; explore_points.size() < static_cast<std::size_t>(budget.explore); ++k)
    {
        if (options.strategy == OptimizeOptions::Strategy::RANDOM)
        {
            std::vector<double> u(dim);
            for (double& v : u)
                v = unit(rng);
            explore_points.push_back(std::move(u));
        }
        else
        {
            explore_points.push_back(halton_point(k, dim, shift));
        }
    }

    std::vector<ParamSet> explore_params;
    for (const auto& u : explore_points)
        explore_params.push_back(space.from_unit(u));
    std::vector<double> explore_scores(explore_points.size());
    parallel_for(explore_points.size(), [&](std::size_t i) { explore_scores[i] = objective(explore_params[i]); });
    for (std::size_t i = 0; i < explore_points.size(); ++i)
    {
        xs.push_back(explore_points[i]);
        ys.push_back(explore_scores[i]);
        result.trace.push_back({explore_params[i], explore_scores[i], OptimizePhase::EXPLORE});
    }

    for (int it = 0; it < budget.exploit; ++it)
    {
        std::vector<double> next(dim);
        if (options.strategy == OptimizeOptions::Strategy::RANDOM)
        {
            for (double& v : next)
                v = unit(rng);
        }
        else
        {
            const auto m = static_cast<Eigen::Index>(xs.size());
            Eigen::MatrixXd x(m, static_cast<Eigen::Index>(dim));
            Eigen::VectorXd y(m);
            for (Eigen::Index i = 0; i < m; ++i)
            {
                x.row(i) = as_vector(xs[static_cast<std::size_t>(i)]).transpose();
                y[i] = ys[static_cast<std::size_t>(i)];
            }
            GaussianProcess gp;
            gp.fit(x, y);
            const double best = *std::max_element(ys.begin(), ys.end());
            const double spread = std::sqrt((y.array() - y.mean()).square().mean());
            const double xi = 0.01 * (spread > 0.0 ? spread : 1.0);
            const auto acquisition = [&](const std::vector<double>& u) {
                const auto pred = gp.predict(as_vector(u));
                return expected_improvement(pred.mean, pred.stddev, best, xi);
            };

            // multi-start: best random candidates plus the best observed points
            std::vector<std::pair<double, std::vector<double>>> starts;
            for (int c = 0; c < options.acquisition_candidates; ++c)
            {
                std::vector<double> u(dim);
                for (double& v : u)
                    v = unit(rng);
                starts.emplace_back(acquisition(u), std::move(u));
            }
            std::vector<std::size_t> order(ys.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ys[a] > ys[b]; });
            for (std::size_t k = 0; k < std::min<std::size_t>(3, order.size()); ++k)
                starts.emplace_back(acquisition(xs[order[k]]), xs[order[k]]);
            std::stable_sort(starts.begin(), starts.end(),
                             [](const auto& a, const auto& b) { return a.first > b.first; });
            starts.resize(std::min<std::size_t>(starts.size(), 5));

            double best_acq = -1.0;
            for (auto& [acq, u] : starts)
            {
                // compass search with a shrinking step
                for (double step = 0.1; step > 1e-3; step *= 0.5)
                {
                    bool improved = true;
                    while (improved)
                    {
                        improved = false;
                        for (std::size_t k = 0; k < dim; ++k)
                        {
                            for (const double sign : {1.0, -1.0})
                            {
                                std::vector<double> trial = u;
                                trial[k] = std::clamp(trial[k] + sign * step, 0.0, 1.0);
                                const double a = acquisition(trial);
                                if (a > acq)
                                {
                                    acq = a;
                                    u = std::move(trial);
                                    improved = true;
                                }
                            }
                        }
                    }
                }
                if (acq > best_acq)
                {
                    best_acq = acq;
                    next = u;
                }
            }
        }

        const ParamSet p = space.from_unit(next);
        const double s = objective(p);
        xs.push_back(next);
        ys.push_back(s);
        result.trace.push_back({p, s, OptimizePhase::EXPLOIT});
    }

    const auto best_it = std::max_element(result.trace.begin(), result.trace.end(),
                                          [](const TraceEntry& a, const TraceEntry& b) { return a.score < b.score; });
    result.best = best_it->params;
    result.best_score = best_it->score;
    return result;
}

} // namespace radseg
