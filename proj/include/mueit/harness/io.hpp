#pragma once

// Field files: flat little-endian float64 arrays in node order (row-major,
// x fastest), real and imaginary planes stored one after the other, with a
// YAML sidecar describing the grid and provenance.

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "mueit/errors.hpp"
#include "mueit/landweber.hpp"
#include "mueit/objective.hpp"
#include "mueit/properbc.hpp"

namespace mueit::io {

namespace fs = std::filesystem;

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void write_f64(std::ostream& os, const double* data, std::size_t count) {
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, data + i, sizeof bits);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        os.write(bytes, 8);
    }
}

inline void read_f64(std::istream& is, double* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        char bytes[8];
        if (!is.read(bytes, 8)) throw ValidationError("field file: unexpected end of data");
        std::uint64_t bits;
        std::memcpy(&bits, bytes, 8);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        std::memcpy(data + i, &bits, sizeof bits);
    }
}

inline void write_real(std::ostream& os, const RealField& f) {
    write_f64(os, f.data(), static_cast<std::size_t>(f.size()));
}

inline void write_complex(std::ostream& os, const ComplexField& f) {
    const RealField re = f.real(), im = f.imag();
    write_real(os, re);
    write_real(os, im);
}

inline RealField read_real(std::istream& is, std::size_t count) {
    RealField f(static_cast<Eigen::Index>(count));
    read_f64(is, f.data(), count);
    return f;
}

inline ComplexField read_complex(std::istream& is, std::size_t count) {
    const RealField re = read_real(is, count);
    const RealField im = read_real(is, count);
    ComplexField f(static_cast<Eigen::Index>(count));
    for (Eigen::Index k = 0; k < f.size(); ++k) f[k] = cplx(re[k], im[k]);
    return f;
}

inline std::ofstream open_out(const fs::path& p, bool binary) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p, binary ? std::ios::binary : std::ios::out);
    if (!os) throw ValidationError("cannot open " + p.string() + " for writing");
    return os;
}

inline void write_text(const fs::path& p, const std::string& text) {
    auto os = open_out(p, true);
    os << text;
}

inline YAML::Emitter& emit_double(YAML::Emitter& e, double v) {
    return e << YAML::Value << format_double(v);
}

inline void emit_doubles(YAML::Emitter& e, const std::vector<double>& v) {
    e << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double x : v) e << format_double(x);
    e << YAML::EndSeq;
}

inline YAML::Node load_yaml(const fs::path& p) {
    try {
        return YAML::LoadFile(p.string());
    } catch (const YAML::Exception& ex) {
        throw ValidationError(p.string() + ":" + std::to_string(ex.mark.line + 1) + ": " + ex.msg);
    }
}

template <typename T>
T get(const YAML::Node& node, const char* key, const fs::path& file) {
    const auto v = node[key];
    if (!v) throw ValidationError(file.string() + ": missing key '" + key + "'");
    try {
        return v.as<T>();
    } catch (const YAML::Exception&) {
        throw ValidationError(file.string() + ":" + std::to_string(v.Mark().line + 1) +
                              ": bad value for '" + key + "'");
    }
}

// ---------------------------------------------------------------------------
// Dataset directory: dataset.yaml + potentials.f64

inline void write_dataset(const fs::path& dir, const Dataset& d) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "format" << YAML::Value << "mueit-dataset-1";
    e << YAML::Key << "n" << YAML::Value << d.n;
    e << YAML::Key << "c0"; emit_double(e, d.c0);
    e << YAML::Key << "boundary_data" << YAML::Value << "coordinate";
    e << YAML::Key << "frequencies" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "omega_lo"; emit_double(e, d.freqs.omega_lo);
    e << YAML::Key << "omega_hi"; emit_double(e, d.freqs.omega_hi);
    e << YAML::Key << "nodes"; emit_doubles(e, d.freqs.nodes);
    e << YAML::Key << "weights"; emit_doubles(e, d.freqs.weights);
    e << YAML::EndMap;
    e << YAML::Key << "provenance" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "phantom_id" << YAML::Value << d.meta.phantom_id;
    e << YAML::Key << "noise_level"; emit_double(e, d.meta.noise_level);
    e << YAML::Key << "seed" << YAML::Value << d.meta.seed;
    e << YAML::Key << "refinement" << YAML::Value << d.meta.refinement;
    e << YAML::Key << "generation_n" << YAML::Value << d.meta.generation_n;
    e << YAML::Key << "inverse_crime" << YAML::Value << d.meta.inverse_crime;
    e << YAML::EndMap;
    e << YAML::Key << "data_file" << YAML::Value << "potentials.f64";
    e << YAML::Key << "layout" << YAML::Value
      << "for each frequency, for each potential: real plane then imaginary plane, n*n float64 LE, node index j*n+i";
    e << YAML::EndMap;
    write_text(dir / "dataset.yaml", std::string(e.c_str()) + "\n");
    auto os = open_out(dir / "potentials.f64", true);
    for (const auto& pair : d.potentials)
        for (std::size_t c = 0; c < 2; ++c) write_complex(os, pair[c]);
}

inline Dataset read_dataset(const fs::path& dir) {
    const fs::path side = dir / "dataset.yaml";
    const YAML::Node y = load_yaml(side);
    Dataset d;
    d.n = get<int>(y, "n", side);
    d.c0 = get<double>(y, "c0", side);
    if (get<std::string>(y, "boundary_data", side) != "coordinate")
        throw ValidationError(side.string() + ": only coordinate boundary data is supported");
    const auto f = y["frequencies"];
    if (!f) throw ValidationError(side.string() + ": missing 'frequencies'");
    d.freqs.omega_lo = get<double>(f, "omega_lo", side);
    d.freqs.omega_hi = get<double>(f, "omega_hi", side);
    d.freqs.nodes = get<std::vector<double>>(f, "nodes", side);
    d.freqs.weights = get<std::vector<double>>(f, "weights", side);
    if (const auto p = y["provenance"]) {
        d.meta.phantom_id = get<std::string>(p, "phantom_id", side);
        d.meta.noise_level = get<double>(p, "noise_level", side);
        d.meta.seed = get<std::uint64_t>(p, "seed", side);
        d.meta.refinement = get<int>(p, "refinement", side);
        d.meta.generation_n = get<int>(p, "generation_n", side);
        d.meta.inverse_crime = get<bool>(p, "inverse_crime", side);
    }
    const Grid g = d.grid();
    d.phi = canonical_phi(g);
    std::ifstream is(dir / get<std::string>(y, "data_file", side), std::ios::binary);
    if (!is) throw ValidationError("cannot open data file in " + dir.string());
    d.potentials.resize(d.freqs.size());
    for (auto& pair : d.potentials)
        for (std::size_t c = 0; c < 2; ++c) pair[c] = read_complex(is, g.size());
    d.validate(g);
    return d;
}

// ---------------------------------------------------------------------------
// Admittivity and scalar fields

inline std::string field_sidecar(const Grid& g, const std::vector<std::string>& files,
                                 const std::vector<std::pair<std::string, std::string>>& extra) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "format" << YAML::Value << "mueit-field-1";
    e << YAML::Key << "n" << YAML::Value << g.n();
    e << YAML::Key << "c0"; emit_double(e, g.c0());
    e << YAML::Key << "files" << YAML::Value << YAML::Flow << files;
    e << YAML::Key << "layout" << YAML::Value << "n*n float64 LE, node index j*n+i, x = i/(n-1), y = j/(n-1)";
    for (const auto& [k, v] : extra) e << YAML::Key << k << YAML::Value << v;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

/// Largest grid for which a CSV copy is written next to the binary files.
inline constexpr int csv_max_n = 65;

inline void write_admittivity(const fs::path& dir, const Grid& g, const AdmittivityField& a,
                              const std::vector<std::pair<std::string, std::string>>& extra = {}) {
    {
        auto os = open_out(dir / "sigma.f64", true);
        write_real(os, a.sigma);
    }
    {
        auto os = open_out(dir / "eps.f64", true);
        write_real(os, a.eps);
    }
    write_text(dir / "field.yaml", field_sidecar(g, {"sigma.f64", "eps.f64"}, extra));
    if (g.n() <= csv_max_n) {
        std::ostringstream csv;
        csv << "i,j,x,y,sigma,eps\n";
        for (std::size_t k = 0; k < g.size(); ++k) {
            const auto e = static_cast<Eigen::Index>(k);
            csv << g.col(k) << ',' << g.row(k) << ',' << format_double(g.x(k)) << ','
                << format_double(g.y(k)) << ',' << format_double(a.sigma[e]) << ','
                << format_double(a.eps[e]) << '\n';
        }
        write_text(dir / "field.csv", csv.str());
    }
}

inline AdmittivityField read_admittivity(const fs::path& dir, const Grid& g) {
    AdmittivityField a;
    std::ifstream s(dir / "sigma.f64", std::ios::binary), e(dir / "eps.f64", std::ios::binary);
    if (!s || !e) throw ValidationError("cannot open admittivity files in " + dir.string());
    a.sigma = read_real(s, g.size());
    a.eps = read_real(e, g.size());
    return a;
}

inline void write_scalar(const fs::path& dir, const std::string& name, const Grid& g,
                         const RealField& f,
                         const std::vector<std::pair<std::string, std::string>>& extra = {}) {
    {
        auto os = open_out(dir / (name + ".f64"), true);
        write_real(os, f);
    }
    write_text(dir / (name + ".yaml"), field_sidecar(g, {name + ".f64"}, extra));
    if (g.n() <= csv_max_n) {
        std::ostringstream csv;
        csv << "i,j,x,y," << name << '\n';
        for (std::size_t k = 0; k < g.size(); ++k)
            csv << g.col(k) << ',' << g.row(k) << ',' << format_double(g.x(k)) << ','
                << format_double(g.y(k)) << ',' << format_double(f[static_cast<Eigen::Index>(k)]) << '\n';
        write_text(dir / (name + ".csv"), csv.str());
    }
}

inline std::string trajectory_csv(const std::vector<IterationRecord>& traj) {
    std::ostringstream os;
    os << "n,J,grad_norm,err_to_truth,proj_dev\n";
    for (const auto& r : traj)
        os << r.n << ',' << format_double(r.J) << ',' << format_double(r.grad_norm) << ','
           << format_double(r.err_to_truth) << ',' << format_double(r.proj_dev) << '\n';
    return os.str();
}

inline void write_trajectory(const fs::path& file, const std::vector<IterationRecord>& traj) {
    write_text(file, trajectory_csv(traj));
}

} // namespace mueit::io
