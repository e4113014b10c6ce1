#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gpflow/gfsi.hpp"
#include "gpflow/grid.hpp"
#include "gpflow/physics.hpp"

namespace gpflow {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error("config key '" + key + "': " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class InitialData { Gaussian, VortexGaussian, FromFile };

/// Flat key=value run description; see README for the key list. Every key
/// has a default except L, h and tau.
struct RunConfig {
    // grid (required)
    double L = 0.0;
    double h = 0.0;
    // physics
    double k11 = 0.0, k12 = 0.0, k22 = 0.0;
    double beta = 0.0;
    double omega1 = 0.0, omega2 = 0.0;
    std::string potential = "harmonic";  // harmonic | custom
    double gamma = 1.0;
    bool add_abs_beta = true;
    std::string potential_file;
    // initial data
    InitialData initial_data = InitialData::Gaussian;
    std::string initial_file;
    // solver (tau required)
    double tau = 0.0;
    long max_steps = 100000;
    double stop_tol = 1e-7;
    std::string safeguard = "none";  // none | backtrack
    double backtrack_shrink = 0.5;
    long backtrack_max_halvings = 20;
    bool record_h1_increments = true;
    double krylov_rel_tol = 1e-10;
    double krylov_abs_tol = 1e-14;
    long krylov_max_iters = 0;
    std::string preconditioner = "none";  // none | diagonal
    bool allow_indefinite = false;
    // output
    std::string output_dir = ".";
    bool emit_fields = false;
    // advisory step-bound constant
    double c_user = 1.0;
};

namespace detail_io {

inline std::string trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
}

inline long parse_long(const std::string& key, const std::string& v) {
    long x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key, "expected true/false, got '" + v + "'");
}

}  // namespace detail_io

/// Parses the flat key=value format ('#' starts a comment). Unknown and
/// duplicate keys are errors; missing required keys are reported in the
/// order L, h, tau.
inline RunConfig parse_run_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string stripped = detail_io::trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(stripped, "line " + std::to_string(lineno) + " is not key = value");
        const std::string key = detail_io::trim(stripped.substr(0, eq));
        const std::string val = detail_io::trim(stripped.substr(eq + 1));
        if (key.empty()) throw ConfigError("", "empty key on line " + std::to_string(lineno));
        if (!kv.emplace(key, val).second) throw ConfigError(key, "duplicate key");
    }

    RunConfig cfg;
    auto take = [&kv](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto num = [&take](const char* key, double& dst) {
        if (auto v = take(key)) dst = detail_io::parse_double(key, *v);
    };
    auto integer = [&take](const char* key, long& dst) {
        if (auto v = take(key)) dst = detail_io::parse_long(key, *v);
    };
    auto boolean = [&take](const char* key, bool& dst) {
        if (auto v = take(key)) dst = detail_io::parse_bool(key, *v);
    };
    auto text_value = [&take](const char* key, std::string& dst) {
        if (auto v = take(key)) dst = *v;
    };

    // required keys, reported in this order
    for (const char* key : {"L", "h", "tau"})
        if (kv.find(key) == kv.end())
            throw ConfigError(key, "missing required key");
    num("L", cfg.L);
    num("h", cfg.h);
    num("tau", cfg.tau);

    num("k11", cfg.k11);
    num("k12", cfg.k12);
    num("k22", cfg.k22);
    num("beta", cfg.beta);
    num("omega1", cfg.omega1);
    num("omega2", cfg.omega2);
    text_value("potential", cfg.potential);
    num("gamma", cfg.gamma);
    boolean("add_abs_beta", cfg.add_abs_beta);
    text_value("potential_file", cfg.potential_file);

    if (auto v = take("initial_data")) {
        if (*v == "gaussian") cfg.initial_data = InitialData::Gaussian;
        else if (*v == "vortex_gaussian") cfg.initial_data = InitialData::VortexGaussian;
        else if (*v == "from_file") cfg.initial_data = InitialData::FromFile;
        else throw ConfigError("initial_data", "expected gaussian|vortex_gaussian|from_file");
    }
    text_value("initial_file", cfg.initial_file);

    integer("max_steps", cfg.max_steps);
    num("stop_tol", cfg.stop_tol);
    text_value("safeguard", cfg.safeguard);
    num("backtrack_shrink", cfg.backtrack_shrink);
    integer("backtrack_max_halvings", cfg.backtrack_max_halvings);
    boolean("record_h1_increments", cfg.record_h1_increments);
    num("krylov_rel_tol", cfg.krylov_rel_tol);
    num("krylov_abs_tol", cfg.krylov_abs_tol);
    integer("krylov_max_iters", cfg.krylov_max_iters);
    text_value("preconditioner", cfg.preconditioner);
    boolean("allow_indefinite", cfg.allow_indefinite);
    text_value("output_dir", cfg.output_dir);
    boolean("emit_fields", cfg.emit_fields);
    num("c_user", cfg.c_user);

    if (!kv.empty()) throw ConfigError(kv.begin()->first, "unknown key");

    if (cfg.potential != "harmonic" && cfg.potential != "custom")
        throw ConfigError("potential", "expected harmonic|custom");
    if (cfg.potential == "custom" && cfg.potential_file.empty())
        throw ConfigError("potential_file", "required for potential = custom");
    if (cfg.initial_data == InitialData::FromFile && cfg.initial_file.empty())
        throw ConfigError("initial_file", "required for initial_data = from_file");
    if (cfg.safeguard != "none" && cfg.safeguard != "backtrack")
        throw ConfigError("safeguard", "expected none|backtrack");
    if (cfg.preconditioner != "none" && cfg.preconditioner != "diagonal")
        throw ConfigError("preconditioner", "expected none|diagonal");
    return cfg;
}

inline RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// CSV helpers. Numbers are serialized in shortest round-trip decimal form.

inline std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline std::string format_bool(bool b) { return b ? "true" : "false"; }

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    return out;
}

inline void write_energy_series(const std::filesystem::path& path,
                                std::span<const IterationRecord> records) {
    std::ofstream out = open_output(path);
    out << "n,energy,lambda,mass,tilde_l2,inf_increment,h1_increment_sq,"
           "krylov_iters,tau_used\n";
    for (const auto& r : records) {
        out << r.n << ',' << format_double(r.energy) << ','
            << format_double(r.lambda) << ',' << format_double(r.mass) << ','
            << format_double(r.tilde_l2) << ',' << format_double(r.inf_increment)
            << ',' << format_double(r.h1_increment_sq) << ',' << r.krylov_iters
            << ',' << format_double(r.tau_used) << '\n';
    }
}

inline void write_summary(const std::filesystem::path& path,
                          const GroundStateResult& res) {
    std::ofstream out = open_output(path);
    out << "E,mu,steps,converged,stationarity_residual\n";
    out << format_double(res.energy.total) << ',' << format_double(res.mu) << ','
        << res.steps << ',' << format_bool(res.converged) << ','
        << format_double(res.stationarity_residual) << '\n';
}

/// Row-major dump of the interior field (y outer, x inner), one row per
/// node: coordinates, both complex components, and their densities.
inline void write_field_csv(const std::filesystem::path& path,
                            const WaveField& psi) {
    std::ofstream out = open_output(path);
    out << "x,y,re1,im1,re2,im2,dens1,dens2\n";
    const GridSpec& g = psi.grid();
    const int n = g.n_interior();
    for (int k = 0; k < n; ++k) {
        const double y = g.coord(k);
        for (int j = 0; j < n; ++j) {
            const Complex a = psi.at(0, j, k);
            const Complex b = psi.at(1, j, k);
            out << format_double(g.coord(j)) << ',' << format_double(y) << ','
                << format_double(a.real()) << ',' << format_double(a.imag()) << ','
                << format_double(b.real()) << ',' << format_double(b.imag()) << ','
                << format_double(std::norm(a)) << ',' << format_double(std::norm(b))
                << '\n';
        }
    }
}

namespace detail_io {

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

inline std::vector<std::vector<double>> read_numeric_csv(
    const std::string& path, const std::string& expected_header,
    std::size_t columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (trim(line) != expected_header)
        throw std::runtime_error(path + ": unexpected header '" + trim(line) + "'");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split_csv_row(line);
        if (cells.size() != columns)
            throw std::runtime_error(path + ": bad column count in row '" + line + "'");
        std::vector<double> row(columns);
        for (std::size_t i = 0; i < columns; ++i)
            row[i] = parse_double("csv cell", cells[i]);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void check_coord(const std::string& path, double got, double want) {
    if (std::abs(got - want) > 1e-9 * std::max(1.0, std::abs(want)))
        throw std::runtime_error(path + ": node coordinates do not match the grid");
}

}  // namespace detail_io

/// Reads a field written by write_field_csv back onto the given grid.
inline WaveField read_field_csv(const std::string& path, const GridSpec& g) {
    const auto rows = detail_io::read_numeric_csv(
        path, "x,y,re1,im1,re2,im2,dens1,dens2", 8);
    if (rows.size() != g.num_points())
        throw std::runtime_error(path + ": row count does not match the grid");
    WaveField psi(g);
    const int n = g.n_interior();
    std::size_t idx = 0;
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j, ++idx) {
            const auto& row = rows[idx];
            detail_io::check_coord(path, row[0], g.coord(j));
            detail_io::check_coord(path, row[1], g.coord(k));
            psi.at(0, j, k) = Complex(row[2], row[3]);
            psi.at(1, j, k) = Complex(row[4], row[5]);
        }
    }
    return psi;
}

/// Reads a per-component tabulated potential (header x,y,v1,v2, row-major
/// like write_field_csv).
inline CustomPotential read_potential_csv(const std::string& path,
                                          const GridSpec& g) {
    const auto rows = detail_io::read_numeric_csv(path, "x,y,v1,v2", 4);
    if (rows.size() != g.num_points())
        throw std::runtime_error(path + ": row count does not match the grid");
    CustomPotential pot{g, std::vector<double>(g.num_points()),
                        std::vector<double>(g.num_points())};
    const int n = g.n_interior();
    std::size_t idx = 0;
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j, ++idx) {
            const auto& row = rows[idx];
            detail_io::check_coord(path, row[0], g.coord(j));
            detail_io::check_coord(path, row[1], g.coord(k));
            pot.v1[idx] = row[2];
            pot.v2[idx] = row[3];
        }
    }
    return pot;
}

// ---------------------------------------------------------------------------
// Building runtime objects from a RunConfig.

inline GridSpec make_grid(const RunConfig& cfg) {
    try {
        return GridSpec(cfg.L, cfg.h);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("h", e.what());
    }
}

inline PhysicsParams make_params(const RunConfig& cfg, const GridSpec& g) {
    PhysicsParams p;
    p.k11 = cfg.k11;
    p.k12 = cfg.k12;
    p.k22 = cfg.k22;
    p.beta = cfg.beta;
    p.omega1 = cfg.omega1;
    p.omega2 = cfg.omega2;
    if (cfg.potential == "harmonic")
        p.potential = HarmonicPotential{cfg.gamma, cfg.add_abs_beta};
    else
        p.potential = read_potential_csv(cfg.potential_file, g);
    p.validate();
    return p;
}

inline SolverConfig make_solver_config(const RunConfig& cfg) {
    SolverConfig s;
    s.tau = cfg.tau;
    s.max_steps = cfg.max_steps;
    s.stop_tol = cfg.stop_tol;
    s.record_h1_increments = cfg.record_h1_increments;
    s.krylov.rel_tol = cfg.krylov_rel_tol;
    s.krylov.abs_tol = cfg.krylov_abs_tol;
    s.krylov.max_iters = cfg.krylov_max_iters;
    s.krylov.precond = cfg.preconditioner == "diagonal"
                           ? KrylovConfig::Precond::Diagonal
                           : KrylovConfig::Precond::None;
    s.krylov.allow_indefinite = cfg.allow_indefinite;
    if (cfg.safeguard == "backtrack")
        s.safeguard = BacktrackPolicy{cfg.backtrack_shrink,
                                      static_cast<int>(cfg.backtrack_max_halvings)};
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("tau", e.what());
    }
    return s;
}

/// Samples the configured initial data on the grid. The result carries the
/// raw (continuum-normalized) values; exact discrete normalization happens
/// inside solve_ground_state.
inline WaveField make_initial_data(const RunConfig& cfg, const GridSpec& g) {
    if (cfg.initial_data == InitialData::FromFile)
        return read_field_csv(cfg.initial_file, g);
    WaveField psi(g);
    const int n = g.n_interior();
    const double norm_factor = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (int k = 0; k < n; ++k) {
        const double y = g.coord(k);
        for (int j = 0; j < n; ++j) {
            const double x = g.coord(j);
            const double gauss = std::exp(-(x * x + y * y) / 2.0) * norm_factor;
            const Complex value = cfg.initial_data == InitialData::VortexGaussian
                                      ? Complex(x, y) * gauss
                                      : Complex(gauss, 0.0);
            psi.at(0, j, k) = value;
            psi.at(1, j, k) = value;
        }
    }
    return psi;
}

}  // namespace gpflow
