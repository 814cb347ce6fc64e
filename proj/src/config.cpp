#include "radseg/config.hpp"

#include "radseg/log_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <stdexcept>

namespace radseg
{
namespace
{

namespace pt = boost::property_tree;

std::string lower(std::string s)
{
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool parse_bool(const std::string& s)
{
    const std::string v = lower(s);
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw std::invalid_argument("expected a boolean, got '" + s + "'");
}

double parse_double(const std::string& s)
{
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
        throw std::invalid_argument("expected a number, got '" + s + "'");
    return v;
}

class Section
{
public:
    Section(const pt::ptree& tree, std::string name) : name_(std::move(name))
    {
        if (const auto child = tree.get_child_optional(name_))
            node_ = &*child;
    }

    template <typename Fn>
    void read(const std::string& key, Fn&& apply)
    {
        seen_.insert(key);
        if (!node_)
            return;
        const auto v = node_->get_optional<std::string>(key);
        if (!v)
            return;
        try
        {
            apply(*v);
        }
        catch (const std::exception& e)
        {
            throw std::invalid_argument("[" + name_ + "] " + key + ": " + e.what());
        }
    }

    void reject_unknown() const
    {
        if (!node_)
            return;
        for (const auto& [key, value] : *node_)
        {
            if (!seen_.count(key))
                throw std::invalid_argument("unknown key [" + name_ + "] " + key);
        }
    }

private:
    std::string name_;
    const pt::ptree* node_{nullptr};
    std::set<std::string> seen_;
};

NeighborhoodCriterion::Variant parse_variant(const std::string& s)
{
    const std::string v = lower(s);
    if (v == "box")
        return NeighborhoodCriterion::Variant::BOX;
    if (v == "euclid_xy")
        return NeighborhoodCriterion::Variant::EUCLID_XY;
    if (v == "euclid_xyvr")
        return NeighborhoodCriterion::Variant::EUCLID_XYVR;
    throw std::invalid_argument("unknown criterion '" + s + "'");
}

const char* variant_name(NeighborhoodCriterion::Variant v)
{
    switch (v)
    {
    case NeighborhoodCriterion::Variant::BOX:
        return "box";
    case NeighborhoodCriterion::Variant::EUCLID_XY:
        return "euclid_xy";
    case NeighborhoodCriterion::Variant::EUCLID_XYVR:
        return "euclid_xyvr";
    }
    return "box";
}

constexpr double kDeg = std::numbers::pi / 180.0;

} // namespace

FrameMode parse_frame(const std::string& s)
{
    const std::string v = lower(s);
    if (v == "ccs")
        return FrameMode::CCS;
    if (v == "fcs")
        return FrameMode::FCS;
    throw std::invalid_argument("unknown frame '" + s + "' (ccs or fcs)");
}

const char* frame_name(FrameMode m)
{
    return m == FrameMode::CCS ? "ccs" : "fcs";
}

void PipelineConfig::validate() const
{
    if (!(hop > 0.0))
        throw std::invalid_argument("hop must be > 0");
    filter.validate();
    criterion.validate();
    rule.validate();
    merge.validate();
}

PipelineConfig parse_config(std::istream& is, const std::string& source)
{
    pt::ptree tree;
    try
    {
        pt::ini_parser::read_ini(is, tree);
    }
    catch (const pt::ini_parser_error& e)
    {
        throw ParseError(source + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    PipelineConfig cfg;
    try
    {
        for (const auto& [name, node] : tree)
        {
            static const std::set<std::string> known{"pipeline", "filter", "stage1", "stage2", "paths"};
            if (!known.count(name))
                throw std::invalid_argument("unknown section [" + name + "]");
            if (node.empty() && !node.data().empty())
                throw std::invalid_argument("key '" + name + "' outside of a section");
        }

        Section p(tree, "pipeline");
        p.read("frame", [&](const std::string& v) { cfg.frame = parse_frame(v); });
        p.read("hop", [&](const std::string& v) { cfg.hop = parse_double(v); });
        p.read("compensate_doppler", [&](const std::string& v) { cfg.compensate_doppler = parse_bool(v); });
        p.read("seed", [&](const std::string& v) { cfg.seed = std::stoull(v); });
        p.reject_unknown();

        Section f(tree, "filter");
        f.read("enabled", [&](const std::string& v) { cfg.filter_enabled = parse_bool(v); });
        f.read("eta1", [&](const std::string& v) { cfg.filter.eta1 = parse_double(v); });
        f.read("d_xy", [&](const std::string& v) { cfg.filter.d_xy = parse_double(v); });
        f.read("dt", [&](const std::string& v) { cfg.filter.dt = parse_double(v); });
        f.read("quantifier", [&](const std::string& v) {
            const std::string q = lower(v);
            if (q == "any")
                cfg.filter.quantifier = CascadeQuantifier::ANY;
            else if (q == "all")
                cfg.filter.quantifier = CascadeQuantifier::ALL;
            else
                throw std::invalid_argument("expected any or all");
        });
        f.reject_unknown();

        Section s1(tree, "stage1");
        s1.read("criterion", [&](const std::string& v) { cfg.criterion.variant = parse_variant(v); });
        s1.read("eps_xy", [&](const std::string& v) { cfg.criterion.eps_xy = parse_double(v); });
        s1.read("eps_vr", [&](const std::string& v) { cfg.criterion.eps_vr = parse_double(v); });
        s1.read("eps_xyvr", [&](const std::string& v) { cfg.criterion.eps_xyvr = parse_double(v); });
        s1.read("vr_scale", [&](const std::string& v) { cfg.criterion.vr_scale = parse_double(v); });
        s1.read("eps_t", [&](const std::string& v) { cfg.criterion.eps_t = parse_double(v); });
        s1.read("core", [&](const std::string& v) {
            const std::string m = lower(v);
            if (m == "fixed")
                cfg.rule.mode = CorePointRule::Mode::FIXED;
            else if (m == "adaptive")
                cfg.rule.mode = CorePointRule::Mode::ADAPTIVE;
            else
                throw std::invalid_argument("expected fixed or adaptive");
        });
        s1.read("shape", [&](const std::string& v) {
            const std::string m = lower(v);
            if (m == "literal")
                cfg.rule.shape = CorePointRule::Shape::LITERAL;
            else if (m == "reciprocal")
                cfg.rule.shape = CorePointRule::Shape::RECIPROCAL;
            else
                throw std::invalid_argument("expected literal or reciprocal");
        });
        s1.read("n_min", [&](const std::string& v) { cfg.rule.n_min = parse_double(v); });
        s1.read("n_min_50", [&](const std::string& v) { cfg.rule.n_min_50 = parse_double(v); });
        s1.read("alpha_r", [&](const std::string& v) { cfg.rule.alpha_r = parse_double(v); });
        s1.read("v_r_min", [&](const std::string& v) { cfg.rule.v_r_min = parse_double(v); });
        s1.reject_unknown();

        Section s2(tree, "stage2");
        s2.read("enabled", [&](const std::string& v) { cfg.merge_enabled = parse_bool(v); });
        s2.read("method", [&](const std::string& v) {
            const std::string m = lower(v);
            if (m == "continuation")
                cfg.merge.method = MergeConfig::Method::CONTINUATION;
            else if (m == "velocity")
                cfg.merge.method = MergeConfig::Method::VELOCITY;
            else
                throw std::invalid_argument("expected continuation or velocity");
        });
        s2.read("eps_d", [&](const std::string& v) { cfg.merge.eps_d = parse_double(v); });
        s2.read("eps_phi_deg", [&](const std::string& v) { cfg.merge.eps_phi = parse_double(v) * kDeg; });
        s2.read("eps_v", [&](const std::string& v) { cfg.merge.eps_v = parse_double(v); });
        s2.read("eps_t2", [&](const std::string& v) { cfg.merge.eps_t2 = parse_double(v); });
        s2.read("n_min", [&](const std::string& v) { cfg.merge.n_min = std::stoi(v); });
        s2.read("min_inliers", [&](const std::string& v) { cfg.merge.solver.min_inliers = std::stoi(v); });
        s2.read("inlier_threshold", [&](const std::string& v) { cfg.merge.solver.inlier_threshold = parse_double(v); });
        s2.read("max_rounds", [&](const std::string& v) { cfg.merge.solver.max_rounds = std::stoi(v); });
        s2.read("resample_step", [&](const std::string& v) { cfg.merge.resample_step = parse_double(v); });
        s2.reject_unknown();

        Section paths(tree, "paths");
        paths.read("log", [&](const std::string& v) { cfg.log_path = v; });
        paths.read("poses", [&](const std::string& v) { cfg.poses_path = v; });
        paths.read("mounts", [&](const std::string& v) { cfg.mounts_path = v; });
        paths.read("out", [&](const std::string& v) { cfg.out_dir = v; });
        paths.reject_unknown();

        cfg.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw ParseError(source + ": " + e.what());
    }
    catch (const std::out_of_range& e)
    {
        throw ParseError(source + ": value out of range: " + e.what());
    }
    return cfg;
}

PipelineConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config '" + path + "'");
    return parse_config(in, path);
}

void write_config(std::ostream& os, const PipelineConfig& cfg)
{
    using io::format_real;
    os << "[pipeline]\n"
       << "frame = " << frame_name(cfg.frame) << "\n"
       << "hop = " << format_real(cfg.hop) << "\n"
       << "compensate_doppler = " << (cfg.compensate_doppler ? "true" : "false") << "\n"
       << "seed = " << cfg.seed << "\n\n";
    os << "[filter]\n"
       << "enabled = " << (cfg.filter_enabled ? "true" : "false") << "\n"
       << "eta1 = " << format_real(cfg.filter.eta1) << "\n"
       << "d_xy = " << format_real(cfg.filter.d_xy) << "\n"
       << "dt = " << format_real(cfg.filter.dt) << "\n"
       << "quantifier = " << (cfg.filter.quantifier == CascadeQuantifier::ANY ? "any" : "all") << "\n\n";
    os << "[stage1]\n"
       << "criterion = " << variant_name(cfg.criterion.variant) << "\n"
       << "eps_xy = " << format_real(cfg.criterion.eps_xy) << "\n"
       << "eps_vr = " << format_real(cfg.criterion.eps_vr) << "\n"
       << "eps_xyvr = " << format_real(cfg.criterion.eps_xyvr) << "\n"
       << "vr_scale = " << format_real(cfg.criterion.vr_scale) << "\n"
       << "eps_t = " << format_real(cfg.criterion.eps_t) << "\n"
       << "core = " << (cfg.rule.mode == CorePointRule::Mode::FIXED ? "fixed" : "adaptive") << "\n"
       << "shape = " << (cfg.rule.shape == CorePointRule::Shape::LITERAL ? "literal" : "reciprocal") << "\n"
       << "n_min = " << format_real(cfg.rule.n_min) << "\n"
       << "n_min_50 = " << format_real(cfg.rule.n_min_50) << "\n"
       << "alpha_r = " << format_real(cfg.rule.alpha_r) << "\n"
       << "v_r_min = " << format_real(cfg.rule.v_r_min) << "\n\n";
    os << "[stage2]\n"
       << "enabled = " << (cfg.merge_enabled ? "true" : "false") << "\n"
       << "method = " << (cfg.merge.method == MergeConfig::Method::CONTINUATION ? "continuation" : "velocity") << "\n"
       << "eps_d = " << format_real(cfg.merge.eps_d) << "\n"
       << "eps_phi_deg = " << format_real(cfg.merge.eps_phi / kDeg) << "\n"
       << "eps_v = " << format_real(cfg.merge.eps_v) << "\n"
       << "eps_t2 = " << format_real(cfg.merge.eps_t2) << "\n"
       << "n_min = " << cfg.merge.n_min << "\n"
       << "min_inliers = " << cfg.merge.solver.min_inliers << "\n"
       << "inlier_threshold = " << format_real(cfg.merge.solver.inlier_threshold) << "\n"
       << "max_rounds = " << cfg.merge.solver.max_rounds << "\n"
       << "resample_step = " << format_real(cfg.merge.resample_step) << "\n\n";
    os << "[paths]\n"
       << "log = " << cfg.log_path << "\n"
       << "poses = " << cfg.poses_path << "\n"
       << "mounts = " << cfg.mounts_path << "\n"
       << "out = " << cfg.out_dir << "\n";
}

} // namespace radseg
