#include "radseg/pipeline.hpp"

#include "radseg/coords.hpp"
#include "radseg/filter.hpp"
#include "radseg/log_io.hpp"
#include "radseg/parallel.hpp"
#include "radseg/stage2.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace radseg
{
namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double clamp_to_poses(double t, std::span<const EgoPose> poses)
{
    return std::clamp(t, poses.front().time, poses.back().time);
}

void frame_stage(const PipelineConfig& cfg, PreparedLog& p, std::span<const EgoPose> poses,
                 std::span<const SensorMount> mounts)
{
    for (std::size_t i = 1; i < p.log.size(); ++i)
    {
        if (p.log[i].time < p.log[i - 1].time)
            throw std::invalid_argument("detection log is not sorted by time (index " + std::to_string(i) + ")");
    }
    const bool needs_poses = cfg.frame == FrameMode::FCS || cfg.compensate_doppler;
    if (needs_poses && !p.log.empty() && poses.empty())
        throw std::invalid_argument("FCS frame and Doppler compensation need an ego-pose log");

    const MountTable table = make_mount_table(mounts);
    if (cfg.compensate_doppler)
    {
        for (Detection& d : p.log)
        {
            const auto it = table.find(d.sensor_id);
            if (it == table.end())
                throw std::invalid_argument("no mount for sensor " + std::to_string(d.sensor_id));
            d.radial_velocity = compensated_radial_velocity(d, it->second, poses);
        }
    }

    FrameSpec spec{cfg.frame, 0.0};
    if (cfg.frame == FrameMode::FCS && !p.log.empty())
        spec.reference_time = clamp_to_poses(p.log.back().time, poses);
    p.frame = p.log.empty() ? p.log : to_frame(p.log, poses, spec);
    p.bearings.resize(p.log.size());
    for (std::size_t i = 0; i < p.log.size(); ++i)
        p.bearings[i] = ray_bearing(p.log[i], table, poses, spec);

    p.labeled = std::any_of(p.log.begin(), p.log.end(), [](const Detection& d) { return d.is_object(); });
}

void filter_stage(const PipelineConfig& cfg, PreparedLog& p)
{
    if (cfg.filter_enabled)
        p.removed = removal_mask(p.frame, cfg.filter);
    else
        p.removed.assign(p.log.size(), false);
}

void window_stage(const PipelineConfig& cfg, PreparedLog& p, std::span<const EgoPose> poses)
{
    const double eps_t = cfg.criterion.eps_t;
    const std::vector<WindowBounds> bounds = make_windows(p.log, eps_t, cfg.hop);
    p.tiles = make_windows(p.log, eps_t, eps_t);
    if (p.labeled)
        p.sequence_target = preclusters_from_ground_truth(p.frame);

    p.windows.assign(bounds.size(), {});
    parallel_for(bounds.size(), [&](std::size_t k) {
        PreparedWindow& w = p.windows[k];
        w.bounds = bounds[k];
        const std::span<const Detection> slice(p.log.data() + w.bounds.first, w.bounds.last - w.bounds.first);
        if (cfg.frame == FrameMode::FCS && !slice.empty())
            w.local = to_frame(slice, poses, {FrameMode::FCS, clamp_to_poses(w.bounds.end, poses)});
        else
            w.local.assign(slice.begin(), slice.end());
        for (std::size_t i = 0; i < w.local.size(); ++i)
        {
            if (!p.removed[w.bounds.first + i])
            {
                w.kept.push_back(i);
                w.kept_local.push_back(w.local[i]);
            }
        }
        if (p.labeled)
            w.target = preclusters_from_ground_truth(w.local);
    });
}

ClusterAssignment expand(const WindowBounds& b, const std::vector<std::size_t>& kept, const std::vector<Label>& labels)
{
    ClusterAssignment a;
    a.t_start = b.start;
    a.t_end = b.end;
    const std::size_t n = b.last - b.first;
    a.indices.resize(n);
    a.labels.assign(n, kNoise);
    for (std::size_t i = 0; i < n; ++i)
        a.indices[i] = b.first + i;
    for (std::size_t k = 0; k < kept.size(); ++k)
        a.labels[kept[k]] = labels[k];
    return a;
}

std::size_t total_clusters(const std::vector<ClusterAssignment>& windows)
{
    std::size_t n = 0;
    for (const auto& w : windows)
        n += static_cast<std::size_t>(w.num_clusters());
    return n;
}

} // namespace

PreparedLog prepare_log(const PipelineConfig& cfg, std::vector<Detection> log, std::span<const EgoPose> poses,
                        std::span<const SensorMount> mounts)
{
    cfg.validate();
    PreparedLog p;
    p.log = std::move(log);
    frame_stage(cfg, p, poses, mounts);
    filter_stage(cfg, p);
    window_stage(cfg, p, poses);
    return p;
}

std::vector<ClusterAssignment> run_stage1_windows(const PreparedLog& prepared, const NeighborhoodCriterion& crit,
                                                  const CorePointRule& rule)
{
    crit.validate();
    rule.validate();
    std::vector<ClusterAssignment> out(prepared.windows.size());
    parallel_for(prepared.windows.size(), [&](std::size_t k) {
        const PreparedWindow& w = prepared.windows[k];
        const ClusterAssignment local = cluster_window(w.kept_local, crit, rule);
        out[k] = expand(w.bounds, w.kept, local.labels);
    });
    return out;
}

std::vector<ClusterAssignment> run_stage1_tiles(const PreparedLog& prepared, const NeighborhoodCriterion& crit,
                                                const CorePointRule& rule)
{
    crit.validate();
    rule.validate();
    std::vector<ClusterAssignment> out(prepared.tiles.size());
    parallel_for(prepared.tiles.size(), [&](std::size_t k) {
        const WindowBounds& b = prepared.tiles[k];
        std::vector<std::size_t> kept;
        std::vector<Detection> dets;
        for (std::size_t i = b.first; i < b.last; ++i)
        {
            if (!prepared.removed[i])
            {
                kept.push_back(i - b.first);
                dets.push_back(prepared.frame[i]);
            }
        }
        const ClusterAssignment local = cluster_window(dets, crit, rule);
        out[k] = expand(b, kept, local.labels);
    });
    return out;
}

Scores score_windows(const PreparedLog& prepared, const std::vector<ClusterAssignment>& windows)
{
    if (!prepared.labeled)
        throw std::invalid_argument("scoring needs ground-truth labels");
    if (windows.size() != prepared.windows.size())
        throw std::invalid_argument("window count does not match the prepared log");
    std::vector<Scores> per(windows.size());
    parallel_for(windows.size(), [&](std::size_t k) {
        per[k] = score({prepared.windows[k].target, windows[k].labels});
    });
    return aggregate(per);
}

Scores score_sequence(const PreparedLog& prepared, const ClusterAssignment& assignment)
{
    if (!prepared.labeled)
        throw std::invalid_argument("scoring needs ground-truth labels");
    std::vector<Label> predicted(prepared.log.size(), kNoise);
    for (std::size_t k = 0; k < assignment.size(); ++k)
        predicted.at(assignment.indices[k]) = assignment.labels[k];
    return score({prepared.sequence_target, predicted});
}

PipelineResult run_pipeline(const PipelineConfig& cfg, std::vector<Detection> log, std::span<const EgoPose> poses,
                            std::span<const SensorMount> mounts)
{
    cfg.validate();
    PipelineResult r;
    PreparedLog& p = r.prepared;
    p.log = std::move(log);
    frame_stage(cfg, p, poses, mounts);

    auto t0 = Clock::now();
    filter_stage(cfg, p);
    const auto kept = static_cast<std::size_t>(std::count(p.removed.begin(), p.removed.end(), false));
    if (cfg.filter_enabled)
        r.timings.push_back({"filter", seconds_since(t0), p.log.size(), kept, 0});

    window_stage(cfg, p, poses);

    t0 = Clock::now();
    r.windows = run_stage1_windows(p, cfg.criterion, cfg.rule);
    const std::vector<ClusterAssignment> tiles = run_stage1_tiles(p, cfg.criterion, cfg.rule);
    r.stage1_sequence = flatten_windows(tiles);
    const auto clustered = static_cast<std::size_t>(
        std::count_if(r.stage1_sequence.labels.begin(), r.stage1_sequence.labels.end(), [](Label l) { return l >= 0; }));
    r.timings.push_back({"stage1", seconds_since(t0), kept, clustered, total_clusters(r.windows)});

    if (cfg.merge_enabled)
    {
        t0 = Clock::now();
        r.merged = merge_clusters(p.frame, r.stage1_sequence, p.bearings, cfg.merge);
        r.timings.push_back({"stage2", seconds_since(t0), clustered, clustered,
                             static_cast<std::size_t>(r.merged->num_clusters())});
    }

    if (p.labeled)
    {
        r.window_scores = score_windows(p, r.windows);
        r.stage1_sequence_scores = score_sequence(p, r.stage1_sequence);
        if (r.merged)
            r.merged_scores = score_sequence(p, *r.merged);
    }
    return r;
}

namespace
{

void write_plot_file(const std::string& path, const std::vector<Detection>& frame, const std::vector<Label>& labels)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << "x,y,t,label\n";
    for (std::size_t i = 0; i < frame.size(); ++i)
    {
        out << io::format_real(frame[i].x) << ',' << io::format_real(frame[i].y) << ','
            << io::format_real(frame[i].time) << ',' << labels[i] << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<Label> per_detection(std::size_t n, const ClusterAssignment& a)
{
    std::vector<Label> labels(n, kNoise);
    for (std::size_t k = 0; k < a.size(); ++k)
        labels.at(a.indices[k]) = a.labels[k];
    return labels;
}

nlohmann::json scores_json(const Scores& s)
{
    return {{"homogeneity", s.homogeneity},
            {"completeness", s.completeness},
            {"v_measure", s.v_measure},
            {"count", s.count}};
}

} // namespace

std::vector<std::string> emit_plotdata(const PipelineResult& result, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    const PreparedLog& p = result.prepared;
    const std::size_t n = p.log.size();
    std::vector<std::string> written;
    const auto emit = [&](const std::string& name, const std::vector<Label>& labels) {
        const std::string path = (std::filesystem::path(dir) / name).string();
        write_plot_file(path, p.frame, labels);
        written.push_back(path);
    };
    emit("raw.csv", std::vector<Label>(n, kNoise));
    if (p.labeled)
        emit("target.csv", p.sequence_target);
    emit("stage1.csv", per_detection(n, result.stage1_sequence));
    if (result.merged)
        emit("stage2.csv", per_detection(n, *result.merged));
    return written;
}

std::string pipeline_report_json(const PipelineConfig& cfg, const PipelineResult& r)
{
    nlohmann::json j;
    j["frame"] = frame_name(cfg.frame);
    j["detections"] = r.prepared.log.size();
    j["filtered_out"] = std::count(r.prepared.removed.begin(), r.prepared.removed.end(), true);
    j["windows"] = r.windows.size();
    j["window_clusters"] = total_clusters(r.windows);
    j["stage1_sequence_clusters"] = r.stage1_sequence.num_clusters();
    if (r.merged)
        j["stage2_clusters"] = r.merged->num_clusters();
    nlohmann::json stages = nlohmann::json::array();
    for (const StageTiming& t : r.timings)
        stages.push_back({{"stage", t.stage},
                          {"detections_in", t.detections_in},
                          {"detections_out", t.detections_out},
                          {"clusters", t.clusters}});
    j["stages"] = stages;
    if (r.window_scores)
        j["scores"]["stage1_windows"] = scores_json(*r.window_scores);
    if (r.stage1_sequence_scores)
        j["scores"]["stage1_sequence"] = scores_json(*r.stage1_sequence_scores);
    if (r.merged_scores)
        j["scores"]["stage2_sequence"] = scores_json(*r.merged_scores);
    return j.dump(2) + "\n";
}

std::string timings_json(const std::vector<StageTiming>& timings)
{
    nlohmann::json j = nlohmann::json::array();
    for (const StageTiming& t : timings)
        j.push_back({{"stage", t.stage},
                     {"seconds", t.seconds},
                     {"detections_in", t.detections_in},
                     {"detections_out", t.detections_out},
                     {"clusters", t.clusters}});
    return j.dump(2) + "\n";
}

std::string cluster_summary_json(const PreparedLog& prepared, const ClusterAssignment& assignment,
                                 const MergeConfig& cfg)
{
    const std::vector<ClusterSummary> summaries =
        summarize_clusters(prepared.frame, assignment, prepared.bearings, cfg);
    nlohmann::json j = nlohmann::json::array();
    for (const ClusterSummary& s : summaries)
    {
        nlohmann::json centers = nlohmann::json::array();
        for (const TimedCenter& c : s.centers)
            centers.push_back({c.t, c.x, c.y});
        j.push_back({{"cluster_id", s.cluster_id},
                     {"members", s.members.size()},
                     {"t_first", s.t_first},
                     {"t_last", s.t_last},
                     {"centers", centers},
                     {"velocity",
                      {{"vx", s.velocity.vx},
                       {"vy", s.velocity.vy},
                       {"valid", s.velocity.valid},
                       {"inliers", s.velocity.inliers}}},
                     {"motion", {{"vx", s.motion.vx}, {"vy", s.motion.vy}}}});
    }
    return j.dump(2) + "\n";
}

} // namespace radseg
