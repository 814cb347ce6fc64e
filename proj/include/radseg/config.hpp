#pragma once

#include "radseg/coords.hpp"
#include "radseg/filter.hpp"
#include "radseg/stage1.hpp"
#include "radseg/stage2.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace radseg
{

/// Everything one pipeline run needs. Defaults are the chosen settings:
/// FCS, filter (0.10 m/s, 1.4 m), combined range-adaptive / xyv_r stage 1
/// and continuation merging.
struct PipelineConfig
{
    FrameMode frame{FrameMode::FCS};
    double hop{0.05};
    bool compensate_doppler{false};
    std::uint64_t seed{1};

    bool filter_enabled{true};
    FilterConfig filter;

    NeighborhoodCriterion criterion{NeighborhoodCriterion::euclid_xyvr(1.04, 1.03)};
    CorePointRule rule{CorePointRule::adaptive(3.87, 0.99, 1.00)};

    bool merge_enabled{true};
    MergeConfig merge;

    std::string log_path;
    std::string poses_path;
    std::string mounts_path;
    std::string out_dir;

    /// Throws std::invalid_argument on inconsistent values.
    void validate() const;
};

/// INI text with sections [pipeline], [filter], [stage1], [stage2], [paths].
/// Missing keys keep their defaults; unknown sections or keys are errors.
/// Throws ParseError with the source name on malformed input.
PipelineConfig parse_config(std::istream& is, const std::string& source = "<config>");
PipelineConfig load_config(const std::string& path);

/// Writes every field, so the output documents the full schema.
void write_config(std::ostream& os, const PipelineConfig& cfg);

FrameMode parse_frame(const std::string& s);
const char* frame_name(FrameMode m);

} // namespace radseg
