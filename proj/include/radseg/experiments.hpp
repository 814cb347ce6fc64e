#pragma once

#include "radseg/config.hpp"
#include "radseg/optimize.hpp"
#include "radseg/pipeline.hpp"
#include "radseg/simgen.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace radseg
{

struct Dataset
{
    std::string name;
    std::vector<Detection> log;
    std::vector<EgoPose> poses;
    std::vector<SensorMount> mounts;
};

Dataset make_dataset(const SceneSpec& spec);

/// Scenes a..e of the standard suite (the tuner probe is left out).
std::vector<Dataset> suite_datasets(std::uint64_t seed = 1);

/// One row of the experiment matrix.
struct ExperimentDef
{
    int id{0};
    std::string method;
    FrameMode frame{FrameMode::FCS};
    bool filter{true};
    NeighborhoodCriterion::Variant variant{NeighborhoodCriterion::Variant::BOX};
    CorePointRule::Mode core{CorePointRule::Mode::FIXED};
    /// false: parameters are fixed (expert values or taken from another row)
    bool optimized{true};
    bool stage2{false};
    MergeConfig::Method merge_method{MergeConfig::Method::CONTINUATION};
    std::string equations;
};

/// Rows 1..13. Throws std::invalid_argument for an unknown id.
const ExperimentDef& experiment_def(int id);
const std::vector<ExperimentDef>& experiment_table();

/// Published parameter set of a row (used for fixed rows and as fallback
/// when a row depends on one that has not been run).
ParamSet published_parameters(int id);

/// Default search box: the published values of all rows of the same kind
/// widened by 50 %. alpha_r starts at 0 so the fixed rule stays reachable.
ParamSpace default_space(const ExperimentDef& def);

/// Pipeline configuration of a row for one parameter set.
PipelineConfig experiment_config(const ExperimentDef& def, const ParamSet& params, const PipelineConfig& base = {});

struct ExperimentOptions
{
    OptimizeBudget budget;
    OptimizeOptions optimizer;
    /// Filter settings, hop and the like.
    PipelineConfig base;
    /// Replaces default_space() for the given rows.
    std::map<int, ParamSpace> spaces;
};

struct ExperimentReport
{
    int id{0};
    std::string method;
    std::string frame;
    std::string equations;
    bool optimized{false};
    Scores scores;
    /// Stage-2 rows: sequence score of the frozen stage-1 input.
    std::optional<Scores> baseline;
    ParamSet params;
    std::vector<TraceEntry> trace;
};

/// Runs rows against a fixed dataset list and keeps their results, so later
/// rows can build on earlier ones: #10 and #11 reuse #8's parameters, #12
/// and #13 freeze stage 1 at #8, #7 / #8 / #9 are warm-started from the
/// optima of #3 / #6 / #8 (the fixed rule equals the adaptive one at alpha 0).
class ExperimentRunner
{
public:
    ExperimentRunner(std::vector<Dataset> datasets, ExperimentOptions options);
    ~ExperimentRunner();

    ExperimentReport run(int id);
    /// Score of a row's configuration for one parameter set (no optimization).
    Scores evaluate(int id, const ParamSet& params);

    const std::map<int, ExperimentReport>& results() const { return results_; }
    const std::vector<Dataset>& datasets() const { return datasets_; }

private:
    struct Cache;

    const std::vector<PreparedLog>& prepared(FrameMode frame, bool filter);
    ParamSet stage1_params_of(int id);
    ParamSet resolve_fixed(const ExperimentDef& def);

    std::vector<Dataset> datasets_;
    ExperimentOptions options_;
    std::map<int, ExperimentReport> results_;
    std::unique_ptr<Cache> cache_;
};

/// Runs the given rows in order. Ids outside 1..13 throw.
std::vector<ExperimentReport> run_bench(std::vector<Dataset> datasets, const ExperimentOptions& options,
                                        const std::vector<int>& ids);

/// CSV with columns id,method,frame,equations,v1,homogeneity,completeness,params
/// (stage-1 rows) or id,method,v1,baseline_v1,params (stage-2 rows).
std::string bench_table_csv(const std::vector<ExperimentReport>& reports, bool stage2);

std::string format_params(const ParamSet& p);

} // namespace radseg
