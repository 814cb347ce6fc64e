#pragma once

#include "radseg/types.hpp"

#include <span>
#include <vector>

namespace radseg
{

/// Ground truth (kBackground or target id) and prediction (kNoise or cluster
/// id) per detection. Noise counts as one more predicted class; background as
/// one more ground-truth class.
struct LabeledPartition
{
    std::vector<Label> ground_truth;
    std::vector<Label> predicted;

    std::size_t size() const { return ground_truth.size(); }
};

struct Scores
{
    double homogeneity{1.0};
    double completeness{1.0};
    double v_measure{1.0};
    std::size_t count{0};
};

/// 1 - H(C|K) / H(C); 1 when there is a single ground-truth class.
double homogeneity(const LabeledPartition& p);

/// Plain 1 - H(K|C) / H(K) over all rows.
double completeness(const LabeledPartition& p);

/// Completeness over the rows whose ground truth is a labeled object, so
/// background clusters cost nothing here. 1 when that subset is empty or has
/// a single predicted class.
double completeness_modified(const LabeledPartition& p);

/// Harmonic mean of homogeneity and modified completeness (0 when both are 0).
double v_measure(const LabeledPartition& p);

double harmonic_mean(double h, double c);

Scores score(const LabeledPartition& p);

/// Count-weighted mean of per-window scores.
Scores aggregate(std::span<const Scores> windows);

/// Liberal per-object pre-clustering (BOX criterion, eps_xy 2 m, eps_vr 25 m/s,
/// eps_t 0.25 s, v_r_min 0.01 m/s, N_min 2), run separately for every
/// ground-truth object. Returns one target label per detection: a fresh id
/// per (object, sub-cluster), kBackground for clutter and for object
/// detections the liberal pass leaves as noise.
std::vector<Label> preclusters_from_ground_truth(std::span<const Detection> dets);

} // namespace radseg
