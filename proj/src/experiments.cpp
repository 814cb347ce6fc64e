#include "radseg/experiments.hpp"

#include "radseg/log_io.hpp"
#include "radseg/stage2.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace radseg
{

Dataset make_dataset(const SceneSpec& spec)
{
    Scene s = generate(spec);
    return {spec.name, std::move(s.detections), std::move(s.poses), std::move(s.mounts)};
}

std::vector<Dataset> suite_datasets(std::uint64_t seed)
{
    std::vector<Dataset> out;
    for (const SceneSpec& s : standard_suite(seed))
    {
        if (s.name != "tuner_probe")
            out.push_back(make_dataset(s));
    }
    return out;
}

namespace
{

using Variant = NeighborhoodCriterion::Variant;
using Core = CorePointRule::Mode;
using Method = MergeConfig::Method;

std::vector<ExperimentDef> build_table()
{
    const auto row = [](int id, std::string method, FrameMode frame, bool filter, Variant v, Core core, bool optimized,
                        std::string eqs) {
        ExperimentDef d;
        d.id = id;
        d.method = std::move(method);
        d.frame = frame;
        d.filter = filter;
        d.variant = v;
        d.core = core;
        d.optimized = optimized;
        d.equations = std::move(eqs);
        return d;
    };
    constexpr auto CCS = FrameMode::CCS;
    constexpr auto FCS = FrameMode::FCS;
    std::vector<ExperimentDef> t{
        row(1, "Expert setting", CCS, true, Variant::BOX, Core::FIXED, false, "filter+box"),
        row(2, "Baseline", CCS, true, Variant::BOX, Core::FIXED, true, "filter+box"),
        row(3, "Baseline", FCS, true, Variant::BOX, Core::FIXED, true, "filter+box"),
        row(4, "Baseline - unfiltered", FCS, false, Variant::BOX, Core::FIXED, true, "box"),
        row(5, "Euclidean xy-distance", FCS, true, Variant::EUCLID_XY, Core::FIXED, true, "filter+euclid_xy"),
        row(6, "Euclidean xyv_r-distance", FCS, true, Variant::EUCLID_XYVR, Core::FIXED, true, "filter+euclid_xyvr"),
        row(7, "Adaptive N_min(r)", FCS, true, Variant::BOX, Core::ADAPTIVE, true, "filter+n_min(r)+box"),
        row(8, "Combined N_min(r) & xyv_r", FCS, true, Variant::EUCLID_XYVR, Core::ADAPTIVE, true,
            "filter+n_min(r)+euclid_xyvr"),
        row(9, "Combined - unfiltered", FCS, false, Variant::EUCLID_XYVR, Core::ADAPTIVE, true,
            "n_min(r)+euclid_xyvr"),
        row(10, "Best setting - unfiltered", FCS, false, Variant::EUCLID_XYVR, Core::ADAPTIVE, false,
            "n_min(r)+euclid_xyvr"),
        row(11, "Best setting on baseline", FCS, true, Variant::BOX, Core::FIXED, false, "filter+box"),
    };
    ExperimentDef v = row(12, "Stage 2 - velocity estimate", FCS, true, Variant::EUCLID_XYVR, Core::ADAPTIVE, true,
                          "velocity merge");
    v.stage2 = true;
    v.merge_method = Method::VELOCITY;
    ExperimentDef c = row(13, "Stage 2 - cluster continuation", FCS, true, Variant::EUCLID_XYVR, Core::ADAPTIVE, true,
                          "continuation merge");
    c.stage2 = true;
    c.merge_method = Method::CONTINUATION;
    t.push_back(v);
    t.push_back(c);
    return t;
}

bool uses_xyvr(const ExperimentDef& d) { return d.variant == Variant::EUCLID_XYVR; }

} // namespace

const std::vector<ExperimentDef>& experiment_table()
{
    static const std::vector<ExperimentDef> table = build_table();
    return table;
}

const ExperimentDef& experiment_def(int id)
{
    for (const ExperimentDef& d : experiment_table())
    {
        if (d.id == id)
            return d;
    }
    throw std::invalid_argument("unknown experiment id " + std::to_string(id));
}

ParamSet published_parameters(int id)
{
    switch (id)
    {
    case 1:
        return {{"eps_xy", 1.00}, {"eps_vr", 5.00}, {"n_min", 3}, {"v_r_min", 0.40}};
    case 2:
        return {{"eps_xy", 0.62}, {"eps_vr", 11.2}, {"n_min", 3}, {"v_r_min", 0.23}};
    case 3:
    case 4:
        return {{"eps_xy", 0.60}, {"eps_vr", 12.3}, {"n_min", 3}, {"v_r_min", 0.25}};
    case 5:
        return {{"eps_xy", 0.76}, {"eps_vr", 14.1}, {"n_min", 3}, {"v_r_min", 0.31}};
    case 6:
        return {{"eps_xyvr", 0.72}, {"vr_scale", 13.5}, {"n_min", 3}, {"v_r_min", 0.48}};
    case 7:
        return {{"eps_xy", 0.76}, {"eps_vr", 8.63}, {"n_min_50", 3.02}, {"v_r_min", 0.46}, {"alpha_r", 0.99}};
    case 8:
    case 10:
        return {{"eps_xyvr", 1.04}, {"vr_scale", 1.03}, {"n_min_50", 3.87}, {"v_r_min", 1.00}, {"alpha_r", 0.99}};
    case 9:
        return {{"eps_xyvr", 1.18}, {"vr_scale", 1.01}, {"n_min_50", 3.81}, {"v_r_min", 0.98}, {"alpha_r", 0.99}};
    case 11:
        return {{"eps_xy", 1.04}, {"eps_vr", 1.03}, {"n_min", 4}, {"v_r_min", 1.00}};
    case 12:
        return {{"eps_d", 1.00}, {"eps_phi_deg", 23.11}, {"eps_v", 1.04}, {"eps_t2", 0.35}};
    case 13:
        return {{"eps_d", 0.94}, {"eps_v", 2.72}, {"eps_t2", 0.35}};
    default:
        throw std::invalid_argument("unknown experiment id " + std::to_string(id));
    }
}

ParamSpace default_space(const ExperimentDef& def)
{
    ParamSpace s;
    if (def.stage2)
    {
        // published 0.94..1.00 m, 23.11 deg, 1.04..2.72 m/s, 0.35 s, +-50 %
        s.add("eps_d", 0.47, 1.50);
        s.add("eps_v", 0.52, 4.08);
        s.add("eps_t2", 0.175, 0.525);
        if (def.merge_method == Method::VELOCITY)
            s.add("eps_phi_deg", 11.555, 34.665);
        return s;
    }
    if (uses_xyvr(def))
    {
        s.add("eps_xyvr", 0.36, 1.77);
        s.add("vr_scale", 0.505, 20.25);
    }
    else
    {
        s.add("eps_xy", 0.30, 1.56);
        s.add("eps_vr", 0.515, 21.15);
    }
    if (def.core == Core::FIXED)
    {
        s.add("n_min", 2, 6, true);
    }
    else
    {
        s.add("n_min_50", 1.51, 5.805);
        s.add("alpha_r", 0.0, 1.485);
    }
    s.add("v_r_min", 0.115, 1.5);
    return s;
}

PipelineConfig experiment_config(const ExperimentDef& def, const ParamSet& params, const PipelineConfig& base)
{
    PipelineConfig cfg = base;
    cfg.frame = def.frame;
    cfg.filter_enabled = def.filter;
    cfg.merge_enabled = def.stage2;
    const auto get = [&](const char* key) {
        const auto it = params.find(key);
        if (it == params.end())
            throw std::invalid_argument(std::string("missing parameter ") + key);
        return it->second;
    };
    if (def.stage2)
    {
        cfg.merge.method = def.merge_method;
        cfg.merge.eps_d = get("eps_d");
        cfg.merge.eps_v = get("eps_v");
        cfg.merge.eps_t2 = get("eps_t2");
        if (def.merge_method == Method::VELOCITY)
            cfg.merge.eps_phi = get("eps_phi_deg") * std::numbers::pi / 180.0;
        cfg.merge.n_min = 1;
        return cfg;
    }
    const double eps_t = cfg.criterion.eps_t;
    if (def.variant == Variant::EUCLID_XYVR)
        cfg.criterion = NeighborhoodCriterion::euclid_xyvr(get("eps_xyvr"), get("vr_scale"), eps_t);
    else if (def.variant == Variant::EUCLID_XY)
        cfg.criterion = NeighborhoodCriterion::euclid_xy(get("eps_xy"), get("eps_vr"), eps_t);
    else
        cfg.criterion = NeighborhoodCriterion::box(get("eps_xy"), get("eps_vr"), eps_t);
    if (def.core == Core::FIXED)
        cfg.rule = CorePointRule::fixed(get("n_min"), get("v_r_min"));
    else
        cfg.rule = CorePointRule::adaptive(get("n_min_50"), get("alpha_r"), get("v_r_min"), base.rule.shape);
    return cfg;
}

struct ExperimentRunner::Cache
{
    std::map<std::pair<FrameMode, bool>, std::vector<PreparedLog>> prepared;
};

ExperimentRunner::ExperimentRunner(std::vector<Dataset> datasets, ExperimentOptions options)
    : datasets_(std::move(datasets)), options_(std::move(options)), cache_(std::make_unique<Cache>())
{
    if (datasets_.empty())
        throw std::invalid_argument("experiments need at least one dataset");
}

ExperimentRunner::~ExperimentRunner() = default;

const std::vector<PreparedLog>& ExperimentRunner::prepared(FrameMode frame, bool filter)
{
    auto& slot = cache_->prepared[{frame, filter}];
    if (slot.empty())
    {
        PipelineConfig cfg = options_.base;
        cfg.frame = frame;
        cfg.filter_enabled = filter;
        for (const Dataset& d : datasets_)
            slot.push_back(prepare_log(cfg, d.log, d.poses, d.mounts));
    }
    return slot;
}

ParamSet ExperimentRunner::stage1_params_of(int id)
{
    const auto it = results_.find(id);
    return it != results_.end() ? it->second.params : published_parameters(id);
}

ParamSet ExperimentRunner::resolve_fixed(const ExperimentDef& def)
{
    switch (def.id)
    {
    case 1:
        return published_parameters(1);
    case 10:
        return stage1_params_of(8);
    case 11:
    {
        const ParamSet b = stage1_params_of(8);
        return {{"eps_xy", b.at("eps_xyvr")},
                {"eps_vr", b.at("vr_scale")},
                {"n_min", std::round(b.at("n_min_50"))},
                {"v_r_min", b.at("v_r_min")}};
    }
    default:
        return published_parameters(def.id);
    }
}

Scores ExperimentRunner::evaluate(int id, const ParamSet& params)
{
    const ExperimentDef& def = experiment_def(id);
    const std::vector<PreparedLog>& logs = prepared(def.frame, def.filter);
    std::vector<Scores> per;
    if (!def.stage2)
    {
        const PipelineConfig cfg = experiment_config(def, params, options_.base);
        for (const PreparedLog& p : logs)
            per.push_back(score_windows(p, run_stage1_windows(p, cfg.criterion, cfg.rule)));
        return aggregate(per);
    }
    const PipelineConfig s1 = experiment_config(experiment_def(8), stage1_params_of(8), options_.base);
    const PipelineConfig cfg = experiment_config(def, params, options_.base);
    for (const PreparedLog& p : logs)
    {
        const ClusterAssignment flat = flatten_windows(run_stage1_tiles(p, s1.criterion, s1.rule));
        per.push_back(score_sequence(p, merge_clusters(p.frame, flat, p.bearings, cfg.merge)));
    }
    return aggregate(per);
}

ExperimentReport ExperimentRunner::run(int id)
{
    const ExperimentDef& def = experiment_def(id);
    ExperimentReport r;
    r.id = id;
    r.method = def.method;
    r.frame = frame_name(def.frame);
    r.equations = def.equations;
    r.optimized = def.optimized;

    if (def.stage2)
    {
        const std::vector<PreparedLog>& logs = prepared(def.frame, def.filter);
        const PipelineConfig s1 = experiment_config(experiment_def(8), stage1_params_of(8), options_.base);
        // stage 1 is frozen: tile once, merge many times
        std::vector<ClusterAssignment> flats;
        std::vector<Scores> base;
        for (const PreparedLog& p : logs)
        {
            flats.push_back(flatten_windows(run_stage1_tiles(p, s1.criterion, s1.rule)));
            base.push_back(score_sequence(p, flats.back()));
        }
        r.baseline = aggregate(base);
        const auto eval = [&](const ParamSet& params) {
            const PipelineConfig cfg = experiment_config(def, params, options_.base);
            std::vector<Scores> per;
            for (std::size_t k = 0; k < logs.size(); ++k)
                per.push_back(score_sequence(logs[k], merge_clusters(logs[k].frame, flats[k], logs[k].bearings, cfg.merge)));
            return aggregate(per);
        };
        const ParamSpace space = options_.spaces.count(id) ? options_.spaces.at(id) : default_space(def);
        const Objective objective([&](const ParamSet& p) { return eval(p).v_measure; });
        OptimizeOptions opt = options_.optimizer;
        opt.initial_points.push_back(space.snap(published_parameters(id)));
        const OptimizeResult res = optimize(space, objective, options_.budget, opt);
        r.params = res.best;
        r.trace = res.trace;
        r.scores = eval(res.best);
    }
    else if (!def.optimized)
    {
        r.params = resolve_fixed(def);
        r.scores = evaluate(id, r.params);
    }
    else
    {
        const ParamSpace space = options_.spaces.count(id) ? options_.spaces.at(id) : default_space(def);
        OptimizeOptions opt = options_.optimizer;
        const auto warm = [&](int from) {
            const auto it = results_.find(from);
            if (it == results_.end())
                return;
            ParamSet p = it->second.params;
            if (p.count("n_min") && def.core == Core::ADAPTIVE)
            {
                p["n_min_50"] = p.at("n_min");
                p["alpha_r"] = 0.0;
                p.erase("n_min");
            }
            bool fits = true;
            for (const auto& name : space.names())
                fits = fits && p.count(name);
            if (fits && p.size() == space.dimension())
                opt.initial_points.push_back(space.snap(p));
        };
        if (id == 7)
            warm(3);
        if (id == 8)
            warm(6);
        if (id == 9)
            warm(8);
        const Objective objective([&](const ParamSet& p) { return evaluate(id, p).v_measure; });
        const OptimizeResult res = optimize(space, objective, options_.budget, opt);
        r.params = res.best;
        r.trace = res.trace;
        r.scores = evaluate(id, res.best);
    }
    results_[id] = r;
    return r;
}

std::vector<ExperimentReport> run_bench(std::vector<Dataset> datasets, const ExperimentOptions& options,
                                        const std::vector<int>& ids)
{
    for (int id : ids)
        experiment_def(id);
    ExperimentRunner runner(std::move(datasets), options);
    std::vector<ExperimentReport> out;
    for (int id : ids)
        out.push_back(runner.run(id));
    return out;
}

std::string format_params(const ParamSet& p)
{
    std::string s;
    for (const auto& [k, v] : p)
    {
        if (!s.empty())
            s += ';';
        s += k + "=" + io::format_real(v);
    }
    return s;
}

std::string bench_table_csv(const std::vector<ExperimentReport>& reports, bool stage2)
{
    std::ostringstream os;
    if (stage2)
        os << "id,method,v1,baseline_v1,params\n";
    else
        os << "id,method,frame,equations,v1,homogeneity,completeness,params\n";
    for (const ExperimentReport& r : reports)
    {
        if (r.baseline.has_value() != stage2)
            continue;
        if (stage2)
        {
            os << r.id << ',' << r.method << ',' << io::format_real(r.scores.v_measure) << ','
               << io::format_real(r.baseline->v_measure) << ',' << format_params(r.params) << '\n';
        }
        else
        {
            os << r.id << ',' << r.method << ',' << r.frame << ',' << r.equations << ','
               << io::format_real(r.scores.v_measure) << ',' << io::format_real(r.scores.homogeneity) << ','
               << io::format_real(r.scores.completeness) << ',' << format_params(r.params) << '\n';
        }
    }
    return os.str();
}

} // namespace radseg
