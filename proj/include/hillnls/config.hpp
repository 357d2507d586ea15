#ifndef HILLNLS_CONFIG_HPP
#define HILLNLS_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "grid.hpp"
#include "nls.hpp"
#include "sigma.hpp"

namespace hillnls {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Serializable description of one experiment. All quantities are in the
/// nondimensional units of the equation. Sections mirror the config file:
///   [sigma]         kind = "zero" | "constant" | "inverse_square" | "tabulated"
///                   value (constant sigma, or the inverse-square strength k)
///                   csv   (two-column t,sigma table for kind = "tabulated")
///   [nonlinearity]  nu, mu, rho_L, rho_S
///   [grid]          dim, n (points per axis), half_width (domain [-L, L]),
///                   initial_width (Gaussian width of the data),
///                   initial_budget (the data is scaled so that
///                   ||u0||_{gamma,0} + ||u0||_{0,gamma} equals this)
///   [time]          t_end, dt
///   [diagnostics]   r0, gamma, alpha_holder, samples (log-spaced diagnostic
///                   times in [r0, t_end]), fit_t_lo, fit_t_hi (fit window)
struct ScenarioConfig {
    std::string sigma_kind = "zero";
    double sigma_value = 0.0;
    std::string sigma_csv;

    double nu = 0.0, mu = 0.0, rho_L = 2.0, rho_S = 3.0;

    int dim = 1, n = 4096;
    double half_width = 60.0;
    double initial_width = 4.0;
    double initial_budget = 1.0;

    double t_end = 20.0, dt = 1e-3;

    double r0 = 1.0, gamma = 1.5, alpha_holder = 0.4;
    int samples = 33;
    double fit_t_lo = 0.0, fit_t_hi = 0.0;  // 0,0 = whole series
};

inline void set_config_key(ScenarioConfig& c, const std::string& section,
                           const std::string& key, const std::string& raw) {
    auto num = [&]() {
        try {
            std::size_t used = 0;
            double v = std::stod(raw, &used);
            while (used < raw.size() && std::isspace((unsigned char)raw[used])) ++used;
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: bad numeric value '" + raw + "' for " +
                              section + "." + key);
        }
    };
    auto str = [&]() {
        std::string s = raw;
        if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
            s = s.substr(1, s.size() - 2);
        return s;
    };
    auto integer = [&]() {
        double v = num();
        if (v != std::floor(v))
            throw ConfigError("config: " + section + "." + key + " must be an integer");
        return int(v);
    };

    const std::string full = section + "." + key;
    if (full == "sigma.kind") c.sigma_kind = str();
    else if (full == "sigma.value") c.sigma_value = num();
    else if (full == "sigma.csv") c.sigma_csv = str();
    else if (full == "nonlinearity.nu") c.nu = num();
    else if (full == "nonlinearity.mu") c.mu = num();
    else if (full == "nonlinearity.rho_L") c.rho_L = num();
    else if (full == "nonlinearity.rho_S") c.rho_S = num();
    else if (full == "grid.dim") c.dim = integer();
    else if (full == "grid.n") c.n = integer();
    else if (full == "grid.half_width") c.half_width = num();
    else if (full == "grid.initial_width") c.initial_width = num();
    else if (full == "grid.initial_budget") c.initial_budget = num();
    else if (full == "time.t_end") c.t_end = num();
    else if (full == "time.dt") c.dt = num();
    else if (full == "diagnostics.r0") c.r0 = num();
    else if (full == "diagnostics.gamma") c.gamma = num();
    else if (full == "diagnostics.alpha_holder") c.alpha_holder = num();
    else if (full == "diagnostics.samples") c.samples = integer();
    else if (full == "diagnostics.fit_t_lo") c.fit_t_lo = num();
    else if (full == "diagnostics.fit_t_hi") c.fit_t_hi = num();
    else throw ConfigError("config: unknown key " + full);
}

/// dotted-key override, e.g. "time.dt=5e-4".
inline void apply_override(ScenarioConfig& c, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like section.key=value: " + assignment);
    std::string key = assignment.substr(0, eq), value = assignment.substr(eq + 1);
    auto dot = key.find('.');
    if (dot == std::string::npos)
        throw ConfigError("override key must be section.key: " + key);
    set_config_key(c, key.substr(0, dot), key.substr(dot + 1), value);
}

inline ScenarioConfig parse_config(std::istream& in, const std::string& where) {
    ScenarioConfig c;
    std::string line, section;
    int lineno = 0;
    auto trim = [](std::string s) {
        std::size_t a = s.find_first_not_of(" \t\r");
        std::size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ":" + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError(where + ":" + std::to_string(lineno) + ": key outside any section");
        set_config_key(c, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

inline ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in, path);
}

/// Canonical serialization: every key, fixed order, %.17g numerics. Used
/// both for the resolved-config artifact and for the run-id hash.
inline std::string serialize_config(const ScenarioConfig& c) {
    char buf[64];
    auto g = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "[sigma]\nkind = \"" << c.sigma_kind << "\"\nvalue = " << g(c.sigma_value)
        << "\ncsv = \"" << c.sigma_csv << "\"\n\n[nonlinearity]\nnu = " << g(c.nu)
        << "\nmu = " << g(c.mu) << "\nrho_L = " << g(c.rho_L) << "\nrho_S = " << g(c.rho_S)
        << "\n\n[grid]\ndim = " << c.dim << "\nn = " << c.n
        << "\nhalf_width = " << g(c.half_width)
        << "\ninitial_width = " << g(c.initial_width)
        << "\ninitial_budget = " << g(c.initial_budget)
        << "\n\n[time]\nt_end = " << g(c.t_end) << "\ndt = " << g(c.dt)
        << "\n\n[diagnostics]\nr0 = " << g(c.r0) << "\ngamma = " << g(c.gamma)
        << "\nalpha_holder = " << g(c.alpha_holder) << "\nsamples = " << c.samples
        << "\nfit_t_lo = " << g(c.fit_t_lo) << "\nfit_t_hi = " << g(c.fit_t_hi) << "\n";
    return out.str();
}

inline std::uint64_t fnv1a_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline SigmaModel make_sigma(const ScenarioConfig& c) {
    if (c.sigma_kind == "zero") return SigmaModel::zero();
    if (c.sigma_kind == "constant") return SigmaModel::constant(c.sigma_value);
    if (c.sigma_kind == "inverse_square") return SigmaModel::inverse_square(c.sigma_value);
    if (c.sigma_kind == "tabulated") {
        if (c.sigma_csv.empty()) throw ConfigError("sigma.csv required for tabulated sigma");
        return SigmaModel::from_csv(c.sigma_csv);
    }
    throw ConfigError("unknown sigma.kind: " + c.sigma_kind);
}

/// Centered Gaussian e^{-|x|^2 / (2 w^2)} scaled so that
/// ||u0||_{gamma,0} + ||u0||_{0,gamma} = initial_budget.
inline WaveField make_initial(const ScenarioConfig& c) {
    Grid g(c.dim, c.n, c.half_width);
    WaveField f(g);
    double co[3];
    double w2 = 2.0 * c.initial_width * c.initial_width;
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        f.coords(i, co);
        double r2 = 0.0;
        for (int d = 0; d < c.dim; ++d) r2 += co[d] * co[d];
        f.samples[i] = std::exp(-r2 / w2);
    }
    NormSet n = weighted_norms(f, c.gamma);
    double scale = c.initial_budget / (n.h_gamma0 + n.h_0gamma);
    for (cplx& z : f.samples) z *= scale;
    return f;
}

/// Log-spaced diagnostic times in [r0, t_end] (inclusive ends).
inline std::vector<double> diagnostic_times(const ScenarioConfig& c) {
    if (c.samples < 2) throw ConfigError("diagnostics.samples must be >= 2");
    if (!(c.r0 > 0.0) || !(c.r0 < c.t_end))
        throw ConfigError("diagnostics.r0 must lie in (0, t_end)");
    std::vector<double> ts(std::size_t(c.samples));
    double la = std::log(c.r0), lb = std::log(c.t_end);
    for (int j = 0; j < c.samples; ++j)
        ts[std::size_t(j)] = std::exp(la + (lb - la) * j / (c.samples - 1));
    ts.front() = c.r0;
    ts.back() = c.t_end;
    return ts;
}

inline EvolutionConfig make_evolution_config(const ScenarioConfig& c) {
    EvolutionConfig e;
    e.model = make_sigma(c);
    e.nonlinearity = NonlinearitySpec(c.nu, c.mu, c.rho_L, c.rho_S);
    e.initial = make_initial(c);
    e.t_end = c.t_end;
    e.dt = c.dt;
    e.diagnostic_times = diagnostic_times(c);
    e.r0 = c.r0;
    e.validate();
    return e;
}

} // namespace hillnls

#endif
