#pragma once

#include "radseg/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

namespace radseg
{

struct OptimizeBudget
{
    int total{100};
    int explore{30};
    int exploit{70};
    std::uint64_t seed{1};

    void validate() const;
};

/// Deterministic score function with a result cache keyed by the (snapped)
/// parameter set. Thread safe as long as the wrapped function is.
class Objective
{
public:
    using Fn = std::function<double(const ParamSet&)>;

    explicit Objective(Fn fn) : fn_(std::move(fn)) {}

    double operator()(const ParamSet& p) const;
    std::size_t evaluations() const;

private:
    Fn fn_;
    mutable std::mutex mutex_;
    mutable std::map<ParamSet, double> cache_;
    mutable std::size_t evaluations_{0};
};

enum class OptimizePhase
{
    EXPLORE,
    EXPLOIT
};

struct TraceEntry
{
    ParamSet params;
    double score{0.0};
    OptimizePhase phase{OptimizePhase::EXPLORE};
};

struct OptimizeResult
{
    ParamSet best;
    double best_score{0.0};
    std::vector<TraceEntry> trace;
};

struct OptimizeOptions
{
    enum class Strategy
    {
        /// Gaussian-process surrogate with expected-improvement acquisition.
        BAYESIAN,
        /// Uniform random sampling in both phases (differential testing).
        RANDOM
    };
    Strategy strategy{Strategy::BAYESIAN};
    /// Evaluated first, taking slots of the exploration phase.
    std::vector<ParamSet> initial_points;
    /// Candidate count for the acquisition search.
    int acquisition_candidates{512};
};

/// Halton point `index` (0-based, skipping the origin) in `dim` dimensions,
/// shifted by `shift` modulo 1.
std::vector<double> halton_point(std::size_t index, std::size_t dim, const std::vector<double>& shift);

/// Maximizes `objective` over `space`: `explore` space-filling samples, then
/// `exploit` surrogate-guided samples. Integral parameters are rounded for
/// evaluation and stay continuous inside the surrogate.
/// Throws std::invalid_argument for a zero-volume space or an invalid budget.
OptimizeResult optimize(const ParamSpace& space, const Objective& objective, const OptimizeBudget& budget,
                        const OptimizeOptions& options = {});

} // namespace radseg
