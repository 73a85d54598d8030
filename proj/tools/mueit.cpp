#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mueit/harness/diagnostics.hpp"
#include "mueit/harness/pipeline.hpp"
#include "mueit/mueit.hpp"

using namespace mueit;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    std::string dataset;
};

RunConfig load(const Common& c) {
    std::string text, source = "defaults";
    if (!c.config.empty()) {
        std::ifstream is(c.config);
        if (!is) throw ValidationError("cannot open config file " + c.config);
        std::stringstream ss;
        ss << is.rdbuf();
        text = ss.str();
        source = c.config;
    }
    YAML::Node root = load_config_tree(text, source);
    for (const auto& o : c.overrides) apply_override(root, o);
    RunConfig cfg = parse_config(root, source);
    if (!c.out.empty()) cfg.output_dir = c.out;
    return cfg;
}

struct Input {
    Dataset data;
    std::optional<AdmittivityField> truth;
};

/// Reads --dataset when given, otherwise simulates from the config. The config
/// phantom serves as reference only when the dataset was generated from it.
Input input(const Common& c, const RunConfig& cfg) {
    const Grid g = cfg.build_grid();
    Input in;
    if (c.dataset.empty()) {
        in.data = simulate(cfg);
    } else {
        in.data = io::read_dataset(c.dataset);
        in.data.validate(g);
        if (in.data.meta.phantom_id != cfg.phantom.id) return in;
    }
    in.truth = make_phantom(cfg.phantom, g, cfg.admissible);
    return in;
}

void add_common(CLI::App* sub, Common& c, bool with_dataset) {
    sub->add_option("-c,--config", c.config, "YAML run configuration");
    sub->add_option("--set", c.overrides, "Override a config value, e.g. --set grid.n=33 (repeatable)");
    sub->add_option("-o,--out", c.out, "Output directory (default: output_dir from the config)");
    if (with_dataset) sub->add_option("-d,--dataset", c.dataset, "Dataset directory written by 'simulate'");
}

int cmd_simulate(const Common& c) {
    const RunConfig cfg = load(c);
    const Grid g = cfg.build_grid();
    const fs::path out(cfg.output_dir);
    const Dataset d = simulate(cfg);
    io::write_dataset(out, d);
    io::write_admittivity(out / "truth", g, make_phantom(cfg.phantom, g, cfg.admissible),
                          {{"content", "phantom " + cfg.phantom.id}});
    io::write_text(out / "config.yaml", to_yaml(cfg));
    std::printf("dataset: %s (n=%d, %zu frequencies, refinement %d, noise %s)\n", out.string().c_str(), d.n,
                d.freqs.size(), d.meta.refinement, io::format_double(d.meta.noise_level).c_str());
    return 0;
}

int cmd_init_guess(const Common& c) {
    const RunConfig cfg = load(c);
    const Grid g = cfg.build_grid();
    const Input in = input(c, cfg);
    const auto ig = initial_guess_detailed(in.data, g, cfg.admissible, cfg.init_guess);
    const fs::path out(cfg.output_dir);
    std::size_t violations = 0;
    for (const auto& gm : ig.gammas) violations += gm.branch_violations;
    std::vector<std::pair<std::string, std::string>> extra{{"content", "initial guess"},
                                                           {"branch_violations", std::to_string(violations)}};
    if (in.truth) {
        const double e = relative_error(g, ig.field, *in.truth);
        extra.emplace_back("relative_error", io::format_double(e));
        std::printf("relative error: %s\n", io::format_double(e).c_str());
    }
    io::write_admittivity(out, g, ig.field, extra);
    io::write_admittivity(out / "raw", g, ig.raw, {{"content", "initial guess before projection"}});
    std::printf("branch violations: %zu\nwritten: %s\n", violations, out.string().c_str());
    return 0;
}

int cmd_reconstruct(const Common& c) {
    const RunConfig cfg = load(c);
    const Input in = input(c, cfg);
    const int every = cfg.landweber.log_every;
    const auto log = [every](const IterationRecord& r) {
        if (every > 0 && r.n % every == 0)
            std::fprintf(stderr, "iter %4d  J %.6e  |grad| %.3e  err %.4e  dev %.3e\n", r.n, r.J, r.grad_norm,
                         r.err_to_truth, r.proj_dev);
    };
    const Reconstruction rec = reconstruct(cfg, in.data, in.truth ? &*in.truth : nullptr, log);
    write_reconstruction(cfg.output_dir, cfg, rec);
    std::printf("stop: %s after %zu iterations, mu %s, lambda %s\n", to_string(rec.run.reason),
                rec.run.trajectory.size(), io::format_double(rec.run.mu).c_str(),
                io::format_double(rec.run.lambda).c_str());
    if (rec.err_final)
        std::printf("relative error: initial %s, final %s\n", io::format_double(*rec.err_x0).c_str(),
                    io::format_double(*rec.err_final).c_str());
    std::printf("written: %s\n", cfg.output_dir.c_str());
    return 0;
}

int cmd_check_gradient(const Common& c, const std::string& at) {
    const RunConfig cfg = load(c);
    const Grid g = cfg.build_grid();
    const Input in = input(c, cfg);
    AdmittivityField a;
    if (at == "background")
        a = AdmittivityField::constant(g, cfg.admissible.sigma0, cfg.admissible.eps0);
    else
        a = initial_guess(in.data, g, cfg.admissible, cfg.init_guess);
    const auto& gc = cfg.gradient_check;
    const auto probes = check_gradient(g, a, in.data, random_directions(g, gc.directions, gc.seed), gc.step);
    std::printf("%-4s %-22s %-22s %-22s %-10s %-10s\n", "dir", "adjoint", "finite_difference", "pairing",
                "fd_rel", "pair_rel");
    double worst_fd = 0.0, worst_pair = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto& p = probes[i];
        worst_fd = std::max(worst_fd, p.fd_relative_error());
        worst_pair = std::max(worst_pair, p.pairing_relative_error());
        std::printf("%-4zu %-22.15e %-22.15e %-22.15e %-10.2e %-10.2e\n", i, p.adjoint, p.finite_difference,
                    p.pairing, p.fd_relative_error(), p.pairing_relative_error());
    }
    std::printf("max relative error: finite differences %.2e, pairing %.2e\n", worst_fd, worst_pair);
    return 0;
}

int cmd_coverage(const Common& c, const std::string& at) {
    const RunConfig cfg = load(c);
    const Grid g = cfg.build_grid();
    AdmittivityField a;
    if (at == "background") {
        a = AdmittivityField::constant(g, cfg.admissible.sigma0, cfg.admissible.eps0);
    } else if (at == "truth") {
        a = make_phantom(cfg.phantom, g, cfg.admissible);
    } else {
        const Input in = input(c, cfg);
        a = initial_guess(in.data, g, cfg.admissible, cfg.init_guess);
    }
    const auto cov = coverage_lambda(g, a, cfg.frequencies.build(), canonical_phi(g));
    std::printf("lambda: %s\n", io::format_double(cov.lambda).c_str());
    if (!c.out.empty()) {
        io::write_scalar(c.out, "coverage", g, cov.m,
                         {{"content", "frequency integral of |det grad u|"}, {"lambda", io::format_double(cov.lambda)}});
        std::printf("written: %s\n", c.out.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-frequency admittivity reconstruction from internal potentials"};
    app.require_subcommand(1);
    Common common;
    std::string at_grad = "background", at_cov = "truth";

    auto* sim = app.add_subcommand("simulate", "Synthesize a dataset from the configured phantom");
    add_common(sim, common, false);
    auto* ig = app.add_subcommand("init-guess", "Compute the closed-form initial guess");
    add_common(ig, common, true);
    auto* rec = app.add_subcommand("reconstruct", "Run the projected Landweber reconstruction");
    add_common(rec, common, true);
    auto* grad = app.add_subcommand("check-gradient", "Compare the adjoint gradient with finite differences");
    add_common(grad, common, true);
    grad->add_option("--at", at_grad, "Evaluation point")->check(CLI::IsMember({"background", "initial-guess"}));
    auto* cov = app.add_subcommand("coverage", "Evaluate the coverage constant lambda");
    add_common(cov, common, true);
    cov->add_option("--at", at_cov, "Admittivity used for the forward solves")
        ->check(CLI::IsMember({"truth", "background", "initial-guess"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        if (*sim) return cmd_simulate(common);
        if (*ig) return cmd_init_guess(common);
        if (*rec) return cmd_reconstruct(common);
        if (*grad) return cmd_check_gradient(common, at_grad);
        if (*cov) return cmd_coverage(common, at_cov);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
