#pragma once

// Config-driven workflows shared by the command-line tool and the acceptance runner.

#include <filesystem>
#include <optional>
#include <string>

#include "mueit/harness/config.hpp"
#include "mueit/harness/io.hpp"
#include "mueit/harness/synth.hpp"
#include "mueit/initguess.hpp"
#include "mueit/landweber.hpp"

namespace mueit {

inline Dataset simulate(const RunConfig& cfg) {
    const Grid g = cfg.build_grid();
    const Dataset clean = synthesize_data(cfg.phantom, g, cfg.frequencies.build(), cfg.admissible,
                                          {cfg.refinement});
    return add_noise(clean, cfg.noise.level, cfg.noise.seed);
}

struct Reconstruction {
    AdmittivityField x0;
    RunResult run;
    /// Relative interior errors against the phantom, when one is known.
    std::optional<double> err_x0, err_final;
};

inline Reconstruction reconstruct(const RunConfig& cfg, const Dataset& data,
                                  const AdmittivityField* truth = nullptr,
                                  const IterationCallback& on_record = {}) {
    const Grid g = cfg.build_grid();
    Reconstruction r;
    r.x0 = initial_guess(data, g, cfg.admissible, cfg.init_guess);
    r.run = run(g, r.x0, data, cfg.landweber, cfg.admissible, truth, on_record);
    if (truth) {
        r.err_x0 = relative_error(g, r.x0, *truth);
        r.err_final = relative_error(g, r.run.final_field, *truth);
    }
    return r;
}

/// field.yaml/sigma.f64/eps.f64 (+ csv), initial_guess/, trajectory.csv and summary.yaml.
inline void write_reconstruction(const std::filesystem::path& dir, const RunConfig& cfg,
                                 const Reconstruction& r) {
    using io::format_double;
    const Grid g = cfg.build_grid();
    std::filesystem::create_directories(dir / "initial_guess");
    io::write_admittivity(dir, g, r.run.final_field, {{"content", "reconstruction T[x_N]"}});
    io::write_admittivity(dir / "initial_guess", g, r.x0, {{"content", "initial guess"}});
    io::write_trajectory(dir / "trajectory.csv", r.run.trajectory);
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "iterations" << YAML::Value << r.run.trajectory.size();
    e << YAML::Key << "stop_reason" << YAML::Value << to_string(r.run.reason);
    e << YAML::Key << "mu" << YAML::Value << format_double(r.run.mu);
    e << YAML::Key << "lambda" << YAML::Value << format_double(r.run.lambda);
    if (!r.run.trajectory.empty())
        e << YAML::Key << "final_J" << YAML::Value << format_double(r.run.trajectory.back().J);
    e << YAML::Key << "nonfinite_replaced" << YAML::Value << r.run.nonfinite_replaced;
    if (r.err_x0) e << YAML::Key << "relative_error_x0" << YAML::Value << format_double(*r.err_x0);
    if (r.err_final) e << YAML::Key << "relative_error_final" << YAML::Value << format_double(*r.err_final);
    e << YAML::EndMap;
    io::write_text(dir / "summary.yaml", std::string(e.c_str()) + "\n");
    io::write_text(dir / "config.yaml", to_yaml(cfg));
}

} // namespace mueit
