#pragma once

// Run configuration (YAML). Every section and key is optional; omitted values
// keep the defaults below. Unknown keys are rejected with the offending line.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "mueit/admissible.hpp"
#include "mueit/errors.hpp"
#include "mueit/frequency.hpp"
#include "mueit/harness/io.hpp"
#include "mueit/harness/phantom.hpp"
#include "mueit/initguess.hpp"
#include "mueit/landweber.hpp"

namespace mueit {

struct GridConfig {
    int n = 65;
    double c0 = 0.2;
    bool operator==(const GridConfig&) const = default;
};

struct FrequencyConfig {
    double omega_lo = 1.0;
    double omega_hi = 2.0;
    int count = 9;
    bool operator==(const FrequencyConfig&) const = default;

    FrequencyGrid build() const { return FrequencyGrid::trapezoid(omega_lo, omega_hi, count); }
};

struct NoiseConfig {
    double level = 0.0;
    std::uint64_t seed = 1;
    bool operator==(const NoiseConfig&) const = default;
};

struct GradientCheckConfig {
    int directions = 5;
    double step = 1e-5;
    std::uint64_t seed = 7;
    bool operator==(const GradientCheckConfig&) const = default;
};

struct RunConfig {
    GridConfig grid;
    AdmissibleParams admissible;
    FrequencyConfig frequencies;
    std::string boundary_data = "coordinate";
    PhantomSpec phantom = PhantomSpec::default_bump();
    LandweberConfig landweber;
    NoiseConfig noise;
    int refinement = 2;
    InitGuessOptions init_guess;
    GradientCheckConfig gradient_check;
    std::string output_dir = "out";

    Grid build_grid() const { return Grid(grid.n, grid.c0); }

    void validate() const {
        build_grid();
        admissible.validate();
        frequencies.build().validate();
        landweber.validate();
        if (boundary_data != "coordinate")
            throw ValidationError("config: boundary_data must be 'coordinate'");
        if (refinement < 1 || refinement > 3)
            throw ValidationError("config: data.refinement must be 1, 2 or 3");
        if (!(noise.level >= 0.0)) throw ValidationError("config: noise.level must be nonnegative");
        if (phantom.sigma0 != admissible.sigma0 || phantom.eps0 != admissible.eps0)
            throw ValidationError("config: phantom background must equal admissible.sigma0/eps0");
        if (gradient_check.directions < 1 || !(gradient_check.step > 0.0))
            throw ValidationError("config: gradient_check needs directions >= 1 and step > 0");
        if (!(init_guess.pinv_tol > 0.0)) throw ValidationError("config: init_guess.pinv_tol must be positive");
    }
};

inline bool operator==(const AdmissibleParams& a, const AdmissibleParams& b) {
    return a.sigma0 == b.sigma0 && a.eps0 == b.eps0 && a.c1 == b.c1 && a.c2 == b.c2 && a.c4 == b.c4 &&
           a.smooth_width == b.smooth_width && a.clamp_slack == b.clamp_slack &&
           a.smoothing_passes == b.smoothing_passes && a.smoothing_weight == b.smoothing_weight;
}

inline bool operator==(const LandweberConfig& a, const LandweberConfig& b) {
    return a.mu == b.mu && a.mu_safety == b.mu_safety && a.power_iterations == b.power_iterations &&
           a.max_iters == b.max_iters && a.stop_tol == b.stop_tol && a.window == b.window &&
           a.j_floor == b.j_floor && a.tau == b.tau && a.noise_floor == b.noise_floor &&
           a.log_every == b.log_every && a.lambda_min == b.lambda_min &&
           a.skip_coverage_gate == b.skip_coverage_gate;
}

inline bool operator==(const InitGuessOptions& a, const InitGuessOptions& b) {
    return a.pinv_tol == b.pinv_tol && a.per_frequency == b.per_frequency;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.grid == b.grid && a.admissible == b.admissible && a.frequencies == b.frequencies &&
           a.boundary_data == b.boundary_data && a.phantom == b.phantom && a.landweber == b.landweber &&
           a.noise == b.noise && a.refinement == b.refinement && a.init_guess == b.init_guess &&
           a.gradient_check == b.gradient_check && a.output_dir == b.output_dir;
}

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
        throw ValidationError(source_ + ":" + std::to_string(node.Mark().line + 1) + ": " + what);
    }

    void require_map(const YAML::Node& node, const std::string& path) const {
        if (!node.IsMap()) fail(node, "'" + path + "' must be a mapping");
    }

    void check_keys(const YAML::Node& node, const std::string& path,
                    const std::set<std::string>& allowed) const {
        require_map(node, path);
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key))
                fail(kv.first, "unknown key '" + (path.empty() ? key : path + "." + key) + "'");
        }
    }

    template <typename T>
    void read(const YAML::Node& node, const char* key, const std::string& path, T& out) const {
        const auto v = node[key];
        if (!v) return;
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            fail(v, "bad value for '" + (path.empty() ? std::string(key) : path + "." + key) + "'");
        }
    }

private:
    std::string source_;
};

} // namespace detail

inline RunConfig parse_config(const YAML::Node& root, const std::string& source = "config") {
    detail::ConfigReader r(source);
    RunConfig cfg;
    if (!root || root.IsNull()) return cfg;
    r.check_keys(root, "",
                 {"grid", "admissible", "frequencies", "boundary_data", "phantom", "landweber", "noise",
                  "data", "init_guess", "gradient_check", "output_dir"});
    if (const auto n = root["grid"]) {
        r.check_keys(n, "grid", {"n", "c0"});
        r.read(n, "n", "grid", cfg.grid.n);
        r.read(n, "c0", "grid", cfg.grid.c0);
    }
    if (const auto n = root["admissible"]) {
        r.check_keys(n, "admissible", {"sigma0", "eps0", "c1", "c2", "c4", "smooth_width", "clamp_slack",
                                       "smoothing_passes", "smoothing_weight"});
        auto& a = cfg.admissible;
        r.read(n, "sigma0", "admissible", a.sigma0);
        r.read(n, "eps0", "admissible", a.eps0);
        r.read(n, "c1", "admissible", a.c1);
        r.read(n, "c2", "admissible", a.c2);
        r.read(n, "c4", "admissible", a.c4);
        r.read(n, "smooth_width", "admissible", a.smooth_width);
        r.read(n, "clamp_slack", "admissible", a.clamp_slack);
        r.read(n, "smoothing_passes", "admissible", a.smoothing_passes);
        r.read(n, "smoothing_weight", "admissible", a.smoothing_weight);
    }
    if (const auto n = root["frequencies"]) {
        r.check_keys(n, "frequencies", {"omega_lo", "omega_hi", "count"});
        r.read(n, "omega_lo", "frequencies", cfg.frequencies.omega_lo);
        r.read(n, "omega_hi", "frequencies", cfg.frequencies.omega_hi);
        r.read(n, "count", "frequencies", cfg.frequencies.count);
    }
    r.read(root, "boundary_data", "", cfg.boundary_data);
    cfg.phantom.sigma0 = cfg.admissible.sigma0;
    cfg.phantom.eps0 = cfg.admissible.eps0;
    if (const auto n = root["phantom"]) {
        r.check_keys(n, "phantom", {"id", "inclusions"});
        r.read(n, "id", "phantom", cfg.phantom.id);
        if (const auto list = n["inclusions"]) {
            if (!list.IsSequence()) r.fail(list, "'phantom.inclusions' must be a list");
            cfg.phantom.inclusions.clear();
            for (const auto& item : list) {
                r.check_keys(item, "phantom.inclusions[]", {"center", "radius", "d_sigma", "d_eps"});
                Inclusion inc;
                std::vector<double> centre{inc.cx, inc.cy};
                r.read(item, "center", "phantom.inclusions[]", centre);
                if (centre.size() != 2) r.fail(item, "'center' needs two coordinates");
                inc.cx = centre[0];
                inc.cy = centre[1];
                r.read(item, "radius", "phantom.inclusions[]", inc.radius);
                r.read(item, "d_sigma", "phantom.inclusions[]", inc.d_sigma);
                r.read(item, "d_eps", "phantom.inclusions[]", inc.d_eps);
                cfg.phantom.inclusions.push_back(inc);
            }
        }
    }
    if (const auto n = root["landweber"]) {
        r.check_keys(n, "landweber", {"mu", "mu_safety", "power_iterations", "max_iters", "stop_tol", "window",
                                      "j_floor", "tau", "noise_floor", "log_every", "lambda_min",
                                      "skip_coverage_gate"});
        auto& l = cfg.landweber;
        r.read(n, "mu", "landweber", l.mu);
        r.read(n, "mu_safety", "landweber", l.mu_safety);
        r.read(n, "power_iterations", "landweber", l.power_iterations);
        r.read(n, "max_iters", "landweber", l.max_iters);
        r.read(n, "stop_tol", "landweber", l.stop_tol);
        r.read(n, "window", "landweber", l.window);
        r.read(n, "j_floor", "landweber", l.j_floor);
        r.read(n, "tau", "landweber", l.tau);
        r.read(n, "noise_floor", "landweber", l.noise_floor);
        r.read(n, "log_every", "landweber", l.log_every);
        r.read(n, "lambda_min", "landweber", l.lambda_min);
        r.read(n, "skip_coverage_gate", "landweber", l.skip_coverage_gate);
    }
    if (const auto n = root["noise"]) {
        r.check_keys(n, "noise", {"level", "seed"});
        r.read(n, "level", "noise", cfg.noise.level);
        r.read(n, "seed", "noise", cfg.noise.seed);
    }
    if (const auto n = root["data"]) {
        r.check_keys(n, "data", {"refinement"});
        r.read(n, "refinement", "data", cfg.refinement);
    }
    if (const auto n = root["init_guess"]) {
        r.check_keys(n, "init_guess", {"pinv_tol", "per_frequency"});
        r.read(n, "pinv_tol", "init_guess", cfg.init_guess.pinv_tol);
        r.read(n, "per_frequency", "init_guess", cfg.init_guess.per_frequency);
    }
    if (const auto n = root["gradient_check"]) {
        r.check_keys(n, "gradient_check", {"directions", "step", "seed"});
        r.read(n, "directions", "gradient_check", cfg.gradient_check.directions);
        r.read(n, "step", "gradient_check", cfg.gradient_check.step);
        r.read(n, "seed", "gradient_check", cfg.gradient_check.seed);
    }
    r.read(root, "output_dir", "", cfg.output_dir);
    try {
        cfg.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(source + ": " + e.what());
    }
    return cfg;
}

inline YAML::Node load_config_tree(const std::string& text, const std::string& source) {
    try {
        return YAML::Load(text);
    } catch (const YAML::Exception& ex) {
        throw ValidationError(source + ":" + std::to_string(ex.mark.line + 1) + ": " + ex.msg);
    }
}

inline RunConfig parse_config_string(const std::string& text, const std::string& source = "config") {
    return parse_config(load_config_tree(text, source), source);
}

inline RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw ValidationError("cannot open config file " + file.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_string(ss.str(), file.string());
}

/// Applies "section.key=value" to a config tree before parsing.
inline void apply_override(YAML::Node& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError("override '" + assignment + "' is not of the form key=value");
    const std::string path = assignment.substr(0, eq);
    const YAML::Node value = load_config_tree(assignment.substr(eq + 1), "override " + path);
    if (!root || !root.IsMap()) root = YAML::Node(YAML::NodeType::Map);
    std::vector<std::string> keys;
    std::stringstream ss(path);
    for (std::string k; std::getline(ss, k, '.');) keys.push_back(k);
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        YAML::Node next = chain.back()[keys[i]];
        if (!next.IsMap()) {
            if (next.IsDefined() && !next.IsNull())
                throw ValidationError("override '" + path + "': '" + keys[i] + "' is not a section");
            chain.back()[keys[i]] = YAML::Node(YAML::NodeType::Map);
            next = chain.back()[keys[i]];
        }
        chain.push_back(next);
    }
    chain.back()[keys.back()] = value;
}

inline std::string to_yaml(const RunConfig& c) {
    using io::format_double;
    YAML::Emitter e;
    auto num = [&](const char* key, double v) { e << YAML::Key << key << YAML::Value << format_double(v); };
    e << YAML::BeginMap;
    e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "n" << YAML::Value << c.grid.n;
    num("c0", c.grid.c0);
    e << YAML::EndMap;
    e << YAML::Key << "admissible" << YAML::Value << YAML::BeginMap;
    num("sigma0", c.admissible.sigma0);
    num("eps0", c.admissible.eps0);
    num("c1", c.admissible.c1);
    num("c2", c.admissible.c2);
    num("c4", c.admissible.c4);
    num("smooth_width", c.admissible.smooth_width);
    num("clamp_slack", c.admissible.clamp_slack);
    e << YAML::Key << "smoothing_passes" << YAML::Value << c.admissible.smoothing_passes;
    num("smoothing_weight", c.admissible.smoothing_weight);
    e << YAML::EndMap;
    e << YAML::Key << "frequencies" << YAML::Value << YAML::BeginMap;
    num("omega_lo", c.frequencies.omega_lo);
    num("omega_hi", c.frequencies.omega_hi);
    e << YAML::Key << "count" << YAML::Value << c.frequencies.count;
    e << YAML::EndMap;
    e << YAML::Key << "boundary_data" << YAML::Value << c.boundary_data;
    e << YAML::Key << "phantom" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "id" << YAML::Value << c.phantom.id;
    e << YAML::Key << "inclusions" << YAML::Value << YAML::BeginSeq;
    for (const auto& inc : c.phantom.inclusions) {
        e << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "center" << YAML::Value << YAML::Flow << YAML::BeginSeq
          << format_double(inc.cx) << format_double(inc.cy) << YAML::EndSeq;
        num("radius", inc.radius);
        num("d_sigma", inc.d_sigma);
        num("d_eps", inc.d_eps);
        e << YAML::EndMap;
    }
    e << YAML::EndSeq << YAML::EndMap;
    e << YAML::Key << "landweber" << YAML::Value << YAML::BeginMap;
    num("mu", c.landweber.mu);
    num("mu_safety", c.landweber.mu_safety);
    e << YAML::Key << "power_iterations" << YAML::Value << c.landweber.power_iterations;
    e << YAML::Key << "max_iters" << YAML::Value << c.landweber.max_iters;
    num("stop_tol", c.landweber.stop_tol);
    e << YAML::Key << "window" << YAML::Value << c.landweber.window;
    num("j_floor", c.landweber.j_floor);
    num("tau", c.landweber.tau);
    num("noise_floor", c.landweber.noise_floor);
    e << YAML::Key << "log_every" << YAML::Value << c.landweber.log_every;
    num("lambda_min", c.landweber.lambda_min);
    e << YAML::Key << "skip_coverage_gate" << YAML::Value << c.landweber.skip_coverage_gate;
    e << YAML::EndMap;
    e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
    num("level", c.noise.level);
    e << YAML::Key << "seed" << YAML::Value << c.noise.seed;
    e << YAML::EndMap;
    e << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "refinement" << YAML::Value << c.refinement;
    e << YAML::EndMap;
    e << YAML::Key << "init_guess" << YAML::Value << YAML::BeginMap;
    num("pinv_tol", c.init_guess.pinv_tol);
    e << YAML::Key << "per_frequency" << YAML::Value << c.init_guess.per_frequency;
    e << YAML::EndMap;
    e << YAML::Key << "gradient_check" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "directions" << YAML::Value << c.gradient_check.directions;
    num("step", c.gradient_check.step);
    e << YAML::Key << "seed" << YAML::Value << c.gradient_check.seed;
    e << YAML::EndMap;
    e << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

} // namespace mueit
