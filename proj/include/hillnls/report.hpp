#ifndef HILLNLS_REPORT_HPP
#define HILLNLS_REPORT_HPP

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace hillnls {

namespace fs = std::filesystem;

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Compact time label for file names: trailing zeros trimmed, '.' kept.
inline std::string time_label(double t) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", t);
    return buf;
}

inline std::string run_id_for(const ScenarioConfig& cfg) {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%S", &tm);
    char hash[24];
    std::snprintf(hash, sizeof(hash), "%08llx",
                  (unsigned long long)(fnv1a_hash(serialize_config(cfg)) & 0xffffffffull));
    return std::string(stamp) + "-" + hash;
}

/// Per-time Cauchy differences ||w(t) - w(t_end)|| for the series columns;
/// the final row is identically zero.
inline void series_cauchy_columns(const ProfileSeries& s, std::vector<double>& l2,
                                  std::vector<double>& linf) {
    std::size_t m = s.times.size();
    l2.assign(m, 0.0);
    linf.assign(m, 0.0);
    if (m == 0 || s.w_hat.size() != m) return;
    const WaveField& last = s.w_hat[m - 1];
    for (std::size_t j = 0; j + 1 < m; ++j) {
        WaveField d = s.w_hat[j];
        for (std::size_t i = 0; i < d.samples.size(); ++i) d.samples[i] -= last.samples[i];
        l2[j] = d.l2_norm();
        linf[j] = d.linf_norm();
    }
}

inline void write_series_csv(const RunResult& r, const fs::path& path) {
    std::ofstream out(path);
    out << "t,l2,linf,h_gamma0,h_0gamma,pseudo_energy,zeta2_abs,main_term,"
           "remainder_bound,cauchy_l2,cauchy_linf\n";
    std::vector<double> cl2, clinf;
    series_cauchy_columns(r.series, cl2, clinf);
    for (std::size_t j = 0; j < r.series.times.size(); ++j) {
        double t = r.series.times[j];
        const NormSet& n = r.series.norms[j];
        double main = 0.0, rem = 0.0;
        // locate u(t) in the trajectory for the amplitude split
        for (std::size_t i = 0; i < r.trajectory.times.size(); ++i)
            if (r.trajectory.times[i] == t) {
                try {
                    LinftySplit sp = linfty_split_check(r.sol, t, r.trajectory.fields[i],
                                                        r.config.alpha_holder, r.config.gamma);
                    main = sp.main_term;
                    rem = sp.remainder_bound;
                } catch (const std::exception&) {}
                break;
            }
        out << format_g17(t) << ',' << format_g17(n.l2) << ',' << format_g17(n.linf) << ','
            << format_g17(n.h_gamma0) << ',' << format_g17(n.h_0gamma) << ','
            << format_g17(n.pseudo_energy) << ','
            << format_g17(std::fabs(r.sol.zeta2(t))) << ',' << format_g17(main) << ','
            << format_g17(rem) << ',' << format_g17(cl2[j]) << ',' << format_g17(clinf[j])
            << '\n';
    }
}

inline nlohmann::json summary_json(const RunResult& r, const std::string& scenario_name,
                                   bool strict_fp) {
    nlohmann::json j;
    j["scenario"] = scenario_name;
    j["config_hash"] = format_g17(double(fnv1a_hash(serialize_config(r.config)) & 0xffffffffull));
    j["strict_fp"] = strict_fp;
    j["numerical_failure"] = r.numerical_failure;
    if (r.numerical_failure) j["failure_time"] = r.failure_time;
    j["mass_drift"] = r.mass_drift;
    j["pseudo_energy_drift"] = r.pseudo_drift;
    nlohmann::json fits = nlohmann::json::object();
    if (r.decay) {
        fits["decay_slope_t"] = r.decay->vs_log_t.slope;
        fits["decay_slope_t_residual"] = r.decay->vs_log_t.residual;
        fits["decay_slope_zeta2"] = r.decay->vs_log_zeta2.slope;
        fits["decay_slope_zeta2_residual"] = r.decay->vs_log_zeta2.residual;
    }
    auto put_cauchy = [&fits](const char* tag, const CauchyRates& c) {
        fits[std::string("cauchy_corrected_") + tag] =
            c.corrected_converged ? nlohmann::json("converged")
                                  : nlohmann::json(c.corrected.slope);
        fits[std::string("cauchy_uncorrected_") + tag] =
            c.uncorrected_converged ? nlohmann::json("converged")
                                    : nlohmann::json(c.uncorrected.slope);
    };
    if (r.cauchy_l2) put_cauchy("l2", *r.cauchy_l2);
    if (r.cauchy_linf) put_cauchy("linf", *r.cauchy_linf);
    j["fits"] = fits;
    nlohmann::json checks = nlohmann::json::array();
    for (const CheckResult& c : r.checks) {
        nlohmann::json e;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["value"] = c.value;
        if (!c.detail.empty()) e["detail"] = c.detail;
        checks.push_back(e);
    }
    j["checks"] = checks;
    j["pass"] = r.expectations_pass && !r.numerical_failure;
    return j;
}

// ---------------------------------------------------------------------------
// Minimal self-contained SVG line plots.

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<double> x, y;
};

inline std::string svg_plot(const std::string& title, const std::string& xlabel,
                            const std::string& ylabel, const std::vector<PlotSeries>& series,
                            bool logx, bool logy) {
    const int W = 720, H = 480, ML = 70, MR = 160, MT = 40, MB = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto tx = [logx](double v) { return logx ? std::log10(v) : v; };
    auto ty = [logy](double v) { return logy ? std::log10(v) : v; };
    for (const PlotSeries& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((logx && !(s.x[i] > 0.0)) || (logy && !(s.y[i] > 0.0))) continue;
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    if (xmin > xmax) { xmin = 0.0; xmax = 1.0; }
    if (ymin > ymax) { ymin = 0.0; ymax = 1.0; }
    if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }
    auto px = [&](double v) { return ML + (tx(v) - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto py = [&](double v) { return H - MB - (ty(v) - ymin) / (ymax - ymin) * (H - MT - MB); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    // axes box and gridlines
    out << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << W - ML - MR
        << "\" height=\"" << H - MT - MB << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        double fx = xmin + (xmax - xmin) * k / 4.0;
        double fy = ymin + (ymax - ymin) * k / 4.0;
        double gx = ML + double(W - ML - MR) * k / 4.0;
        double gy = H - MB - double(H - MT - MB) * k / 4.0;
        char lab[40];
        out << "<line x1=\"" << gx << "\" y1=\"" << MT << "\" x2=\"" << gx << "\" y2=\""
            << H - MB << "\" stroke=\"#ddd\"/>\n";
        out << "<line x1=\"" << ML << "\" y1=\"" << gy << "\" x2=\"" << W - MR << "\" y2=\""
            << gy << "\" stroke=\"#ddd\"/>\n";
        std::snprintf(lab, sizeof(lab), "%.3g", logx ? std::pow(10.0, fx) : fx);
        out << "<text x=\"" << gx << "\" y=\"" << H - MB + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << lab << "</text>\n";
        std::snprintf(lab, sizeof(lab), "%.3g", logy ? std::pow(10.0, fy) : fy);
        out << "<text x=\"" << ML - 6 << "\" y=\"" << gy + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << lab << "</text>\n";
    }
    out << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 10
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n"
        << "<text x=\"18\" y=\"" << (MT + H - MB) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << (MT + H - MB) / 2 << ")\">" << ylabel << "</text>\n";
    int li = 0;
    for (const PlotSeries& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((logx && !(s.x[i] > 0.0)) || (logy && !(s.y[i] > 0.0))) continue;
            out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        out << "\"/>\n";
        int yy = MT + 18 + 18 * li++;
        out << "<line x1=\"" << W - MR + 10 << "\" y1=\"" << yy << "\" x2=\"" << W - MR + 34
            << "\" y2=\"" << yy << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << W - MR + 40 << "\" y=\"" << yy + 4 << "\" font-size=\"12\">"
            << s.label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

inline void write_run_plots(const RunResult& r, const fs::path& dir) {
    const ProfileSeries& s = r.series;
    if (s.times.empty()) return;
    {
        PlotSeries linf{"|u|_inf", "#1f6fb3", s.times, {}};
        PlotSeries zeta{"(1+|zeta2|)^{-1/2}", "#c44e52", s.times, {}};
        for (std::size_t j = 0; j < s.times.size(); ++j) {
            linf.y.push_back(s.norms[j].linf);
            zeta.y.push_back(std::pow(1.0 + std::fabs(r.sol.zeta2(s.times[j])), -0.5));
        }
        write_text(dir / "decay.svg",
                   svg_plot("sup-norm decay", "t", "norm", {linf, zeta}, true, true));
    }
    {
        std::vector<double> cl2, clinf;
        series_cauchy_columns(s, cl2, clinf);
        std::vector<double> ts(s.times.begin(), s.times.end() - 1);
        cl2.pop_back();
        clinf.pop_back();
        std::vector<double> ul(ts.size());
        const WaveField& last = s.v_hat.back();
        for (std::size_t j = 0; j < ts.size(); ++j) {
            WaveField d = s.v_hat[j];
            for (std::size_t i = 0; i < d.samples.size(); ++i) d.samples[i] -= last.samples[i];
            ul[j] = d.linf_norm();
        }
        write_text(dir / "cauchy.svg",
                   svg_plot("profile Cauchy differences vs final time", "t", "Linf difference",
                            {{"corrected w", "#1f6fb3", ts, clinf},
                             {"uncorrected v", "#c44e52", ts, ul}},
                            true, true));
    }
    {
        PlotSeries pe{"pseudo-energy", "#1f6fb3", s.times, {}};
        for (const NormSet& n : s.norms) pe.y.push_back(n.pseudo_energy);
        write_text(dir / "pseudo_energy.svg",
                   svg_plot("pseudo-energy along the flow", "t", "norm", {pe}, true, false));
    }
}

/// Write every artifact for one finished run into dir.
inline void write_run_artifacts(const RunResult& r, const fs::path& dir,
                                const std::string& scenario_name, bool strict_fp) {
    fs::create_directories(dir / "fields");
    fs::create_directories(dir / "profiles");
    fs::create_directories(dir / "phase");
    write_text(dir / "config.toml", serialize_config(r.config));

    for (std::size_t i = 0; i < r.trajectory.times.size(); ++i)
        save_field_csv(r.trajectory.fields[i],
                       (dir / "fields" / ("t=" + time_label(r.trajectory.times[i]) + ".csv"))
                           .string());
    for (std::size_t j = 0; j < r.series.times.size(); ++j) {
        std::string lab = time_label(r.series.times[j]);
        save_field_csv(r.series.v_hat[j], (dir / "profiles" / (lab + ".csv")).string());
        if (j < r.series.w_hat.size())
            save_field_csv(r.series.w_hat[j], (dir / "phase" / (lab + ".csv")).string());
    }
    write_series_csv(r, dir / "series.csv");
    r.sol.export_csv((dir / "classical.csv").string(), r.sol.time_grid());
    {
        std::ofstream out(dir / "summary.json");
        out << summary_json(r, scenario_name, strict_fp).dump(2) << '\n';
    }
    write_run_plots(r, dir);
}

/// Human-readable report over one or more run directories; rereads
/// summary.json and series.csv, emits report.txt plus a comparison overlay
/// when more than one run is given.
inline std::string report_runs(const std::vector<fs::path>& dirs, const fs::path& out_dir) {
    std::ostringstream rep;
    std::vector<PlotSeries> overlay;
    const char* colors[] = {"#1f6fb3", "#c44e52", "#55a868", "#8172b2", "#ccb974", "#64b5cd"};
    int ci = 0;
    for (const fs::path& dir : dirs) {
        std::ifstream js(dir / "summary.json");
        if (!js) {
            rep << dir.string() << ": missing summary.json\n";
            continue;
        }
        nlohmann::json j = nlohmann::json::parse(js);
        rep << "run " << dir.filename().string() << " (" << j.value("scenario", "?") << "): "
            << (j.value("pass", false) ? "PASS" : "FAIL") << '\n';
        for (auto& c : j["checks"])
            rep << "  " << (c.value("pass", false) ? "pass" : "FAIL") << "  "
                << c.value("name", "?") << " = " << c.value("value", 0.0)
                << (c.contains("detail") ? "  (" + c["detail"].get<std::string>() + ")" : "")
                << '\n';
        for (auto& [k, v] : j["fits"].items())
            rep << "  fit " << k << " = " << v.dump() << '\n';

        PlotSeries ps{dir.filename().string(), colors[ci++ % 6], {}, {}};
        std::ifstream cs(dir / "series.csv");
        std::string line;
        std::getline(cs, line);  // header
        while (std::getline(cs, line)) {
            double t, l2, linf;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &l2, &linf) == 3) {
                ps.x.push_back(t);
                ps.y.push_back(linf);
            }
        }
        if (!ps.x.empty()) overlay.push_back(std::move(ps));
    }
    fs::create_directories(out_dir);
    write_text(out_dir / "report.txt", rep.str());
    if (!overlay.empty())
        write_text(out_dir / "comparison.svg",
                   svg_plot("sup-norm decay comparison", "t", "|u|_inf", overlay, true, true));
    return rep.str();
}

} // namespace hillnls

#endif
