#include "radseg/config.hpp"
#include "radseg/experiments.hpp"
#include "radseg/filter.hpp"
#include "radseg/log_io.hpp"
#include "radseg/optimize.hpp"
#include "radseg/parallel.hpp"
#include "radseg/pipeline.hpp"
#include "radseg/simgen.hpp"
#include "radseg/stage2.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace radseg;

namespace
{

struct Common
{
    std::string config;
    std::uint64_t seed{1};
    unsigned threads{1};
    std::string frame;
    std::string out;
};

struct Inputs
{
    std::string log;
    std::string poses;
    std::string mounts;
    std::string scene;
};

void add_inputs(CLI::App* cmd, Inputs& in)
{
    cmd->add_option("--log", in.log, "Detection log (.csv or .jsonl)");
    cmd->add_option("--poses", in.poses, "Ego-pose CSV");
    cmd->add_option("--mounts", in.mounts, "Sensor mount CSV");
    cmd->add_option("--scene", in.scene, "Simulate a suite scene (name or a..f) instead of reading a log");
}

PipelineConfig make_config(const Common& c)
{
    PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : load_config(c.config);
    if (!c.frame.empty())
        cfg.frame = parse_frame(c.frame);
    cfg.seed = c.seed;
    return cfg;
}

Dataset load_inputs(const Inputs& in, const PipelineConfig& cfg, std::uint64_t seed)
{
    if (!in.scene.empty())
        return make_dataset(suite_scene(in.scene, seed));
    Dataset d;
    const std::string log = in.log.empty() ? cfg.log_path : in.log;
    if (log.empty())
        throw std::invalid_argument("no detection log given (--log, --scene or [paths] log)");
    d.name = fs::path(log).stem().string();
    d.log = io::load_detections(log);
    const std::string poses = in.poses.empty() ? cfg.poses_path : in.poses;
    if (!poses.empty())
        d.poses = io::load_poses(poses);
    const std::string mounts = in.mounts.empty() ? cfg.mounts_path : in.mounts;
    if (!mounts.empty())
        d.mounts = io::load_mounts(mounts);
    return d;
}

fs::path out_dir(const Common& c, const PipelineConfig& cfg)
{
    const std::string dir = !c.out.empty() ? c.out : (!cfg.out_dir.empty() ? cfg.out_dir : std::string("."));
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json scores_json(const Scores& s)
{
    return {{"homogeneity", s.homogeneity}, {"completeness", s.completeness}, {"v_measure", s.v_measure},
            {"count", s.count}};
}

json params_json(const ParamSet& p)
{
    json j = json::object();
    for (const auto& [k, v] : p)
        j[k] = v;
    return j;
}

ParamSpace load_space(const std::string& path)
{
    const json j = json::parse(read_text(path));
    ParamSpace s;
    for (const auto& [name, b] : j.items())
    {
        const bool integral = b.size() > 2 && b.at(2).get<bool>();
        s.add(name, b.at(0).get<double>(), b.at(1).get<double>(), integral);
    }
    return s;
}

std::string trace_csv(const std::vector<TraceEntry>& trace)
{
    std::ostringstream os;
    os << "iteration,phase,score,params\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
    {
        os << i << ',' << (trace[i].phase == OptimizePhase::EXPLORE ? "explore" : "exploit") << ','
           << io::format_real(trace[i].score) << ',' << format_params(trace[i].params) << '\n';
    }
    return os.str();
}

std::string grid_csv(const FilterTuneResult& r, bool rates)
{
    std::ostringstream os;
    os << "eta1";
    for (double d : r.dxy_values)
        os << ",d_xy=" << io::format_real(d);
    os << '\n';
    for (std::size_t i = 0; i < r.eta_values.size(); ++i)
    {
        os << io::format_real(r.eta_values[i]);
        for (std::size_t j = 0; j < r.dxy_values.size(); ++j)
        {
            os << ',';
            if (rates)
                os << io::format_real(r.removal_rate[i][j]);
            else
                os << r.violations[i][j];
        }
        os << '\n';
    }
    return os.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Streaming radar detection segmentation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    app.add_option("--config", common.config, "INI configuration file");
    app.add_option("--seed", common.seed, "Random seed");
    app.add_option("--threads", common.threads, "Worker thread cap")->check(CLI::PositiveNumber);
    app.add_option("--frame", common.frame, "Coordinate frame")->check(CLI::IsMember({"ccs", "fcs"}));
    app.add_option("--out", common.out, "Output directory");

    Inputs inputs;

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scene");
    std::string spec_path;
    simulate->add_option("--scene", inputs.scene, "Suite scene name or letter");
    simulate->add_option("--spec", spec_path, "Scene spec JSON");

    auto* tune = app.add_subcommand("filter-tune", "Enumerate filter thresholds on labeled data");
    add_inputs(tune, inputs);
    std::vector<double> prefer;
    FilterGrid grid;
    FilterTunerCriterion crit;
    tune->add_option("--prefer", prefer, "Preferred cell: eta1 d_xy")->expected(2);
    tune->add_option("--eta-step", grid.eta_step, "eta1 grid step");
    tune->add_option("--dxy-step", grid.dxy_step, "d_xy grid step");
    tune->add_option("--retention", crit.retention_fraction, "Retention fraction");
    tune->add_option("--frame-length", crit.frame_length, "Frame length in seconds");
    tune->add_option("--max-violations", crit.max_violations, "Admissible violations per cell");

    auto* filter = app.add_subcommand("filter", "Apply the detection filter");
    add_inputs(filter, inputs);

    auto* cluster = app.add_subcommand("cluster", "Stage-1 clustering per sliding window");
    add_inputs(cluster, inputs);
    bool tiles = false;
    cluster->add_flag("--tiles", tiles, "Non-overlapping windows (input for merge)");

    auto* merge = app.add_subcommand("merge", "Stage-2 merging of non-overlapping stage-1 windows");
    add_inputs(merge, inputs);
    std::string assignments_path;
    merge->add_option("--assignments", assignments_path, "Stage-1 assignment CSV")->required();

    auto* score_cmd = app.add_subcommand("score", "Score assignments against ground truth");
    add_inputs(score_cmd, inputs);
    score_cmd->add_option("--assignments", assignments_path, "Assignment CSV")->required();

    auto* optimize_cmd = app.add_subcommand("optimize", "Optimize stage-1 or stage-2 parameters");
    add_inputs(optimize_cmd, inputs);
    int stage = 1;
    int experiment = 0;
    std::string space_path;
    OptimizeBudget budget;
    optimize_cmd->add_option("--stage", stage, "1 or 2")->check(CLI::IsMember({1, 2}));
    optimize_cmd->add_option("--experiment", experiment, "Experiment row defining the method (default 8 / 13)");
    optimize_cmd->add_option("--space", space_path, "JSON bounds {name: [lower, upper, integral?]}");
    optimize_cmd->add_option("--budget", budget.total, "Total evaluations");
    optimize_cmd->add_option("--explore", budget.explore, "Exploration evaluations");

    auto* bench = app.add_subcommand("bench", "Run the experiment matrix on the synthetic suite");
    std::vector<int> ids;
    bench->add_option("--experiments", ids, "Experiment ids (default all)");
    bench->add_option("--budget", budget.total, "Total evaluations per optimized row");
    bench->add_option("--explore", budget.explore, "Exploration evaluations");

    auto* pipeline = app.add_subcommand("pipeline", "Filter, cluster, merge and score");
    add_inputs(pipeline, inputs);
    std::string timings_path;
    bool plot = false;
    pipeline->add_option("--timings", timings_path, "Write per-stage wall-clock timings here");
    pipeline->add_flag("--plot", plot, "Also write plot data");

    auto* plot_data = app.add_subcommand("plot-data", "Per-stage x,y,t,label files");
    add_inputs(plot_data, inputs);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        std::cerr << json{{"error", e.what()}, {"kind", "usage"}}.dump() << '\n';
        return 2;
    }

    try
    {
        set_max_threads(common.threads);
        const PipelineConfig cfg = make_config(common);

        if (*simulate)
        {
            SceneSpec spec = !spec_path.empty() ? scene_from_json(read_text(spec_path))
                                                : suite_scene(inputs.scene.empty() ? "a" : inputs.scene, common.seed);
            if (!spec_path.empty())
                spec.seed = common.seed;
            const Scene scene = generate(spec);
            const fs::path dir = out_dir(common, cfg);
            io::save_detections((dir / "detections.csv").string(), scene.detections);
            io::save_poses((dir / "poses.csv").string(), scene.poses);
            io::save_mounts((dir / "mounts.csv").string(), scene.mounts);
            write_text(dir / "scene.json", scene_to_json(spec) + "\n");
            std::cout << json{{"scene", spec.name}, {"detections", scene.detections.size()}, {"out", dir.string()}}.dump()
                      << '\n';
        }
        else if (*tune)
        {
            const Dataset d = load_inputs(inputs, cfg, common.seed);
            const PreparedLog p = prepare_log([&] {
                PipelineConfig c = cfg;
                c.filter_enabled = false;
                return c;
            }(), d.log, d.poses, d.mounts);
            std::optional<std::pair<double, double>> pref;
            if (prefer.size() == 2)
                pref = std::make_pair(prefer[0], prefer[1]);
            const FilterTuneResult r = tune_filter(p.frame, grid, crit, pref, cfg.filter);
            const fs::path dir = out_dir(common, cfg);
            write_text(dir / "violations.csv", grid_csv(r, false));
            write_text(dir / "removal_rates.csv", grid_csv(r, true));
            json j{{"violations", (dir / "violations.csv").string()}, {"removal_rates", (dir / "removal_rates.csv").string()}};
            if (r.selected)
            {
                const auto [i, k] = *r.selected;
                j["selected"] = {{"eta1", r.eta_values[i]},
                                 {"d_xy", r.dxy_values[k]},
                                 {"removal_rate", r.removal_rate[i][k]},
                                 {"violations", r.violations[i][k]}};
            }
            else
            {
                j["selected"] = nullptr;
            }
            std::cout << j.dump() << '\n';
        }
        else if (*filter)
        {
            const Dataset d = load_inputs(inputs, cfg, common.seed);
            const PreparedLog p = prepare_log(cfg, d.log, d.poses, d.mounts);
            std::vector<Detection> kept, removed;
            for (std::size_t i = 0; i < p.log.size(); ++i)
                (p.removed[i] ? removed : kept).push_back(p.log[i]);
            const fs::path dir = out_dir(common, cfg);
            io::save_detections((dir / "kept.csv").string(), kept);
            io::save_detections((dir / "removed.csv").string(), removed);
            std::cout << json{{"kept", kept.size()}, {"removed", removed.size()}}.dump() << '\n';
        }
        else if (*cluster)
        {
            const Dataset d = load_inputs(inputs, cfg, common.seed);
            const PreparedLog p = prepare_log(cfg, d.log, d.poses, d.mounts);
            const auto windows = tiles ? run_stage1_tiles(p, cfg.criterion, cfg.rule)
                                       : run_stage1_windows(p, cfg.criterion, cfg.rule);
            const fs::path dir = out_dir(common, cfg);
            io::save_assignments((dir / "assignments.csv").string(), windows);
            std::cout << json{{"windows", windows.size()}, {"out", (dir / "assignments.csv").string()}}.dump() << '\n';
        }
        else if (*merge)
        {
            const Dataset d = load_inputs(inputs, cfg, common.seed);
            const PreparedLog p = prepare_log(cfg, d.log, d.poses, d.mounts);
            const auto windows = io::load_assignments(assignments_path);
            const ClusterAssignment merged = merge_clusters(p.frame, windows, p.bearings, cfg.merge);
            const fs::path dir = out_dir(common, cfg);
            io::save_assignments((dir / "merged.csv").string(), {merged});
            write_text(dir / "clusters.json", cluster_summary_json(p, merged, cfg.merge));
            std::cout << json{{"clusters", merged.num_clusters()}, {"out", (dir / "merged.csv").string()}}.dump() << '\n';
        }
        else if (*score_cmd)
        {
            const Dataset d = load_inputs(inputs, cfg, common.seed);
            PipelineConfig c = cfg;
            c.filter_enabled = false;
            const PreparedLog p = prepare_log(c, d.log, d.poses, d.mounts);
            if (!p.labeled)
                throw std::invalid_argument("the log carries no ground-truth labels");
            const auto windows = io::load_assignments(assignments_path);
            std::vector<Scores> per;
            std::ostringstream os;
            os << "window_start,window_end,homogeneity,completeness,v_measure,count\n";
            for (const ClusterAssignment& w : windows)
            {
                std::vector<Detection> local;
                for (std::size_t idx : w.indices)
                    local.push_back(p.log.at(idx));
                if (c.frame == FrameMode::FCS && !local.empty())
                {
                    const double ref = std::clamp(w.t_end, d.poses.front().time, d.poses.back().time);
                    local = to_frame(local, d.poses, {FrameMode::FCS, ref});
                }
                const Scores s = score({preclusters_from_ground_truth(local), w.labels});
                per.push_back(s);
                os << io::format_real(w.t_start) << ',' << io::format_real(w.t_end) << ','
                   << io::format_real(s.homogeneity) << ',' << io::format_real(s.completeness) << ','
                   << io::format_real(s.v_measure) << ',' << s.count << '\n';
            }
            const fs::path dir = out_dir(common, cfg);
            write_text(dir / "scores.csv", os.str());
            std::cout << json{{"aggregate", scores_json(aggregate(per))}, {"windows", windows.size()}}.dump() << '\n';
        }
        else if (*optimize_cmd)
        {
            const Dataset d = load_inputs(inputs, cfg, common.seed);
            const int id = experiment != 0 ? experiment : (stage == 1 ? 8 : 13);
            if (experiment_def(id).stage2 != (stage == 2))
                throw std::invalid_argument("experiment " + std::to_string(id) + " does not optimize stage " +
                                            std::to_string(stage));
            budget.exploit = budget.total - budget.explore;
            budget.seed = common.seed;
            ExperimentOptions opts;
            opts.budget = budget;
            opts.base = cfg;
            if (!space_path.empty())
                opts.spaces[id] = load_space(space_path);
            ExperimentRunner runner({d}, opts);
            const ExperimentReport r = runner.run(id);
            const fs::path dir = out_dir(common, cfg);
            write_text(dir / "trace.csv", trace_csv(r.trace));
            const json best{{"experiment", id}, {"params", params_json(r.params)}, {"scores", scores_json(r.scores)}};
            write_text(dir / "best.json", best.dump(2) + "\n");
            std::cout << best.dump() << '\n';
        }
        else if (*bench)
        {
            if (ids.empty())
                for (int i = 1; i <= 13; ++i)
                    ids.push_back(i);
            budget.exploit = budget.total - budget.explore;
            budget.seed = common.seed;
            ExperimentOptions opts;
            opts.budget = budget;
            opts.base = cfg;
            const auto reports = run_bench(suite_datasets(common.seed), opts, ids);
            const fs::path dir = out_dir(common, cfg);
            write_text(dir / "table_stage1.csv", bench_table_csv(reports, false));
            write_text(dir / "table_stage2.csv", bench_table_csv(reports, true));
            std::cout << bench_table_csv(reports, false) << bench_table_csv(reports, true);
        }
        else if (*pipeline || *plot_data)
        {
            const Dataset d = load_inputs(inputs, cfg, common.seed);
            const PipelineResult r = run_pipeline(cfg, d.log, d.poses, d.mounts);
            const fs::path dir = out_dir(common, cfg);
            if (*pipeline)
            {
                io::save_assignments((dir / "windows.csv").string(), r.windows);
                io::save_assignments((dir / "stage1.csv").string(), {r.stage1_sequence});
                if (r.merged)
                {
                    io::save_assignments((dir / "stage2.csv").string(), {*r.merged});
                    write_text(dir / "clusters.json", cluster_summary_json(r.prepared, *r.merged, cfg.merge));
                }
                write_text(dir / "report.json", pipeline_report_json(cfg, r));
                if (!timings_path.empty())
                    write_text(timings_path, timings_json(r.timings));
            }
            if (*plot_data || plot)
                emit_plotdata(r, (*pipeline ? dir / "plot" : dir).string());
            std::cout << pipeline_report_json(cfg, r);
        }
    }
    catch (const ParseError& e)
    {
        std::cerr << json{{"error", e.what()}, {"kind", "parse"}}.dump() << '\n';
        return 1;
    }
    catch (const std::exception& e)
    {
        std::cerr << json{{"error", e.what()}, {"kind", "runtime"}}.dump() << '\n';
        return 1;
    }
    return 0;
}
