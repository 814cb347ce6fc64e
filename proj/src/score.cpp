#include "radseg/score.hpp"

#include "radseg/stage1.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace radseg
{
namespace
{

struct Contingency
{
    std::map<std::pair<Label, Label>, double> joint;  // (a, b) -> n_ab
    std::map<Label, double> a_counts;
    std::map<Label, double> b_counts;
    double n{0.0};
};

Contingency tabulate(const std::vector<Label>& a, const std::vector<Label>& b, const std::vector<bool>* keep = nullptr)
{
    if (a.size() != b.size())
        throw std::invalid_argument("label vectors differ in length");
    Contingency t;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        if (keep && !(*keep)[i])
            continue;
        t.joint[{a[i], b[i]}] += 1.0;
        t.a_counts[a[i]] += 1.0;
        t.b_counts[b[i]] += 1.0;
        t.n += 1.0;
    }
    return t;
}

double entropy(const std::map<Label, double>& counts, double n)
{
    double h = 0.0;
    for (const auto& [label, c] : counts)
        h -= c / n * std::log(c / n);
    return h;
}

// H(A|B) = -sum n_ab/n log(n_ab/n_b)
double conditional_entropy(const Contingency& t)
{
    double h = 0.0;
    for (const auto& [key, c] : t.joint)
        h -= c / t.n * std::log(c / t.b_counts.at(key.second));
    return h;
}

double one_minus_ratio(const Contingency& t)
{
    if (t.n == 0.0)
        return 1.0;
    const double h = entropy(t.a_counts, t.n);
    if (h == 0.0)
        return 1.0;
    return std::clamp(1.0 - conditional_entropy(t) / h, 0.0, 1.0);
}

} // namespace

double homogeneity(const LabeledPartition& p)
{
    return one_minus_ratio(tabulate(p.ground_truth, p.predicted));
}

double completeness(const LabeledPartition& p)
{
    return one_minus_ratio(tabulate(p.predicted, p.ground_truth));
}

double completeness_modified(const LabeledPartition& p)
{
    std::vector<bool> keep(p.ground_truth.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
        keep[i] = p.ground_truth[i] != kBackground;
    return one_minus_ratio(tabulate(p.predicted, p.ground_truth, &keep));
}

double harmonic_mean(double h, double c)
{
    return h + c == 0.0 ? 0.0 : 2.0 * h * c / (h + c);
}

double v_measure(const LabeledPartition& p)
{
    return harmonic_mean(homogeneity(p), completeness_modified(p));
}

Scores score(const LabeledPartition& p)
{
    Scores s;
    s.homogeneity = homogeneity(p);
    s.completeness = completeness_modified(p);
    s.v_measure = harmonic_mean(s.homogeneity, s.completeness);
    s.count = p.size();
    return s;
}

Scores aggregate(std::span<const Scores> windows)
{
    Scores out;
    double total = 0.0;
    double h = 0.0, c = 0.0, v = 0.0;
    for (const Scores& s : windows)
    {
        const auto w = static_cast<double>(s.count);
        total += w;
        h += w * s.homogeneity;
        c += w * s.completeness;
        v += w * s.v_measure;
        out.count += s.count;
    }
    if (total > 0.0)
    {
        out.homogeneity = h / total;
        out.completeness = c / total;
        out.v_measure = v / total;
    }
    return out;
}

std::vector<Label> preclusters_from_ground_truth(std::span<const Detection> dets)
{
    const NeighborhoodCriterion liberal = NeighborhoodCriterion::box(2.0, 25.0, 0.25);
    const CorePointRule rule = CorePointRule::fixed(2.0, 0.01);

    std::map<int, std::vector<std::size_t>> by_object;
    for (std::size_t i = 0; i < dets.size(); ++i)
    {
        if (dets[i].gt_label)
            by_object[*dets[i].gt_label].push_back(i);
    }

    std::vector<Label> target(dets.size(), kBackground);
    Label next = 0;
    for (const auto& [object, members] : by_object)
    {
        std::vector<Detection> subset;
        subset.reserve(members.size());
        for (const std::size_t i : members)
            subset.push_back(dets[i]);
        const ClusterAssignment a = cluster_window(subset, liberal, rule);
        const Label base = next;
        for (std::size_t k = 0; k < members.size(); ++k)
        {
            if (a.labels[k] >= 0)
                target[members[k]] = base + a.labels[k];
        }
        next = base + a.num_clusters();
    }
    return target;
}

} // namespace radseg
