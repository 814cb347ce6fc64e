#pragma once

#include "radseg/grid_index.hpp"
#include "radseg/types.hpp"

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace radseg
{

/// How the four Doppler/density stages combine.
///  ANY: removed if some stage i has |v_r| < eta_i and N < N_i (default).
///  ALL: removed only if every stage holds, which reduces to |v_r| < eta_4 and N < 2.
enum class CascadeQuantifier
{
    ANY,
    ALL
};

struct FilterConfig
{
    double eta1{0.10};  // m/s
    double d_xy{1.4};   // m
    double dt{0.25};    // s
    CascadeQuantifier quantifier{CascadeQuantifier::ANY};

    static constexpr std::array<double, 4> kEtaDivisors{1.0, 5.0, 10.0, 50.0};
    static constexpr std::array<int, 4> kNeighborThresholds{2, 3, 4, 10};

    double eta(std::size_t stage) const { return eta1 / kEtaDivisors.at(stage); }
    /// Throws std::invalid_argument when a threshold is not positive.
    void validate() const;
};

/// Removal decision for one detection given its neighbor count.
bool should_remove(double radial_velocity, int neighbor_count, const FilterConfig& cfg);

/// Number of other detections within d_xy (Euclidean, inclusive) and |dt| <= dt.
/// `index` must have been built over `all` with cell sizes (d_xy, dt).
int count_neighbors(const Detection& d, std::size_t self, std::span<const Detection> all, const GridIndex& index,
                    double d_xy, double dt);

/// Neighbor counts for every detection.
std::vector<int> neighbor_counts(std::span<const Detection> dets, double d_xy, double dt);

struct FilterResult
{
    std::vector<Detection> kept;
    std::vector<Detection> removed;
    std::vector<std::size_t> kept_indices;
    std::vector<std::size_t> removed_indices;
};

/// removed[i] == true when detection i is filtered out.
std::vector<bool> removal_mask(std::span<const Detection> dets, const FilterConfig& cfg);

FilterResult filter_detections(std::span<const Detection> dets, const FilterConfig& cfg);

struct FilterTunerCriterion
{
    double retention_fraction{0.75};
    double frame_length{0.150};
    int max_violations{0};
};

struct FilterGrid
{
    double eta_min{0.05};
    double eta_max{0.35};
    double eta_step{0.05};
    double dxy_min{0.8};
    double dxy_max{2.0};
    double dxy_step{0.2};

    std::vector<double> eta_values() const;
    std::vector<double> dxy_values() const;
};

struct FilterTuneResult
{
    std::vector<double> eta_values;
    std::vector<double> dxy_values;
    /// [eta index][d_xy index]
    std::vector<std::vector<int>> violations;
    std::vector<std::vector<double>> removal_rate;
    std::optional<std::pair<std::size_t, std::size_t>> selected;
    FilterConfig config;
};

/// Retention violations of one removal mask: (object, frame) pairs whose kept
/// share falls below the retention fraction. Objects observed for less than one
/// frame length are ignored.
int count_retention_violations(std::span<const Detection> dets, const std::vector<bool>& removed,
                               const FilterTunerCriterion& crit);

/// Share of background detections that the mask removes (0 without background).
double background_removal_rate(std::span<const Detection> dets, const std::vector<bool>& removed);

/// Exhaustive grid enumeration over (eta1, d_xy).
///
/// Among cells with at most crit.max_violations violations the one with the
/// highest background removal rate wins; ties prefer larger d_xy, then
/// smaller eta1. `prefer` overrides the choice when that cell is admissible.
/// Throws std::invalid_argument on empty input or when no detection carries
/// a ground-truth label. When no cell is admissible `selected` stays empty.
FilterTuneResult tune_filter(std::span<const Detection> train, const FilterGrid& grid = {},
                             const FilterTunerCriterion& crit = {},
                             std::optional<std::pair<double, double>> prefer = std::nullopt,
                             const FilterConfig& base = {});

} // namespace radseg
