#ifndef HILLNLS_DIAGNOSTICS_HPP
#define HILLNLS_DIAGNOSTICS_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"
#include "hill.hpp"
#include "nls.hpp"
#include "ops.hpp"
#include "propagator.hpp"

namespace hillnls {

struct NormSet {
    double l2 = 0.0;
    double linf = 0.0;
    double h_gamma0 = 0.0;      // ||<xi>^gamma u^||_2
    double h_0gamma = 0.0;      // ||<x>^gamma u||_2
    double pseudo_energy = 0.0; // ||<alpha(t)>^{gamma/2}-weighted u||_2, filled by callers
};

inline NormSet weighted_norms(const WaveField& field, double gamma) {
    if (field.rep != Representation::Position)
        throw std::invalid_argument("weighted_norms: position representation required");
    NormSet n;
    n.l2 = field.l2_norm();
    n.linf = field.linf_norm();
    double co[3];
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < field.samples.size(); ++i) {
            field.coords(i, co);
            double r2 = 0.0;
            for (int d = 0; d < field.grid.dim; ++d) r2 += co[d] * co[d];
            acc += std::pow(1.0 + r2, gamma) * std::norm(field.samples[i]);
        }
        n.h_0gamma = std::sqrt(acc * field.measure());
    }
    {
        WaveField hat = fourier(field);
        double acc = 0.0;
        for (std::size_t i = 0; i < hat.samples.size(); ++i) {
            hat.coords(i, co);
            double r2 = 0.0;
            for (int d = 0; d < field.grid.dim; ++d) r2 += co[d] * co[d];
            acc += std::pow(1.0 + r2, gamma) * std::norm(hat.samples[i]);
        }
        n.h_gamma0 = std::sqrt(acc * hat.measure());
    }
    return n;
}

/// ||(1 + alpha(t))^{gamma/2} u||_2 with alpha(t) = (zeta2 p - zeta2' x)^2.
/// Away from zeros of zeta2 the operator is conjugate to the Fourier
/// multiplier (1 + |zeta2 xi|^2)^{gamma/2} by the chirp e^{-i zeta2' x^2 /
/// (2 zeta2)}; at zeta2 = 0 it degenerates to the pointwise weight
/// (1 + |zeta2' x|^2)^{gamma/2}. Constant along the linear flow.
inline double pseudo_energy_norm(const ClassicalSolution& sol, double t,
                                 const WaveField& field, double gamma,
                                 double band_base = 1e-8) {
    if (field.rep != Representation::Position)
        throw std::invalid_argument("pseudo_energy_norm: position representation required");
    ClassicalSolution::State s = sol.eval(t);
    double band = exclusion_band(t, band_base);
    double co[3];
    if (std::fabs(s.zeta2) > band) {
        WaveField chirped = apply_factor(Chirp{-s.zeta2p / (2.0 * s.zeta2)}, field);
        WaveField hat = fourier(chirped);
        double acc = 0.0;
        for (std::size_t i = 0; i < hat.samples.size(); ++i) {
            hat.coords(i, co);
            double r2 = 0.0;
            for (int d = 0; d < field.grid.dim; ++d) r2 += co[d] * co[d];
            acc += std::pow(1.0 + s.zeta2 * s.zeta2 * r2, gamma) * std::norm(hat.samples[i]);
        }
        return std::sqrt(acc * hat.measure());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < field.samples.size(); ++i) {
        field.coords(i, co);
        double r2 = 0.0;
        for (int d = 0; d < field.grid.dim; ++d) r2 += co[d] * co[d];
        acc += std::pow(1.0 + s.zeta2p * s.zeta2p * r2, gamma) * std::norm(field.samples[i]);
    }
    return std::sqrt(acc * field.measure());
}

namespace detail {

/// Zero-pad into a window twice as wide at the same spacing (node lattices
/// align: new index = old index + N/2 per axis).
inline WaveField embed_double_window(const WaveField& f) {
    const Grid& g = f.grid;
    Grid big(g.dim, 2 * g.n_per_axis, 2.0 * g.half_width);
    WaveField out(big, f.rep, f.scale);
    int N = g.n_per_axis, off = N / 2;
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        std::size_t fl = i, j = 0, stride = 1;
        for (int d = 0; d < g.dim; ++d) {
            j += (std::size_t(fl % std::size_t(N)) + std::size_t(off)) * stride;
            fl /= std::size_t(N);
            stride *= std::size_t(2 * N);
        }
        out.samples[j] = f.samples[i];
    }
    return out;
}

/// Inverse of embed_double_window: keep the central window.
inline WaveField extract_center_window(const WaveField& f, const Grid& g) {
    WaveField out(g, f.rep, f.scale);
    int N = g.n_per_axis, off = N / 2;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        std::size_t fl = i, j = 0, stride = 1;
        for (int d = 0; d < g.dim; ++d) {
            j += (std::size_t(fl % std::size_t(N)) + std::size_t(off)) * stride;
            fl /= std::size_t(N);
            stride *= std::size_t(2 * N);
        }
        out.samples[i] = f.samples[j];
    }
    return out;
}

} // namespace detail

/// v^(t) = F(U0(0,t) u(t)) on the reference grid. The scale-preserving
/// quadratic-phase chain is preferred for the pullback so no resampling is
/// needed; near a zero of zeta2 the globally defined chain is used and the
/// result resampled back to the input's scale. The pullback runs on a
/// zero-padded double window: the chain intermediates spread wider than the
/// physical field by a factor ~ |zeta1| and would otherwise wrap.
inline WaveField profile(const ClassicalSolution& sol, double t, const WaveField& field,
                         double band_base = 1e-8) {
    if (t == 0.0) return fourier(field);
    FactorCoefficients fc = sol.factor_coefficients(t, band_base);
    // The double window guards the spreading frequency-side step, but it is
    // only safe while the chirp factors stay below Nyquist over the content
    // window: a chirp exp(i c x^2) has local frequency 2|c|x, and once that
    // exceeds the lattice Nyquist the padded chain no longer inverts the
    // same-lattice forward chain exactly. Strong chirps (|zeta2| small, as
    // just past a caustic) therefore pull back on the input lattice, where
    // the chain is an exact unitary inverse.
    bool pad = true;
    if (fc.quadratic_phase) {
        double cc = std::max(std::fabs(fc.quadratic_phase->a),
                             std::fabs(fc.quadratic_phase->c));
        double nyquist = M_PI * field.grid.n_per_axis / (2.0 * field.grid.half_width);
        pad = 2.0 * cc * field.grid.half_width < 0.9 * nyquist;
    }
    WaveField padded = pad ? detail::embed_double_window(field) : field;
    WaveField v = fc.quadratic_phase
                      ? pullback(sol, t, padded, FactorizationKind::QuadraticPhase, band_base)
                      : pullback(sol, t, padded, FactorizationKind::MDMDFM, band_base);
    if (v.scale != padded.scale) v = resample_to_scale(v, padded.scale);
    return fourier(pad ? detail::extract_center_window(v, field.grid) : v);
}

/// Time-indexed scattering record: pullback profiles, the accumulated
/// long-range phase, the corrected profiles, and per-time norms of u.
struct ProfileSeries {
    std::vector<double> times;
    std::vector<WaveField> v_hat;
    std::vector<std::vector<double>> accumulated_phase;  // per node, per time
    std::vector<WaveField> w_hat;
    std::vector<NormSet> norms;  // norms of u(t) itself
};

/// Assemble v^, norms, and pseudo-energy from a trajectory, keeping only
/// times >= r0.
inline ProfileSeries build_profile_series(const Trajectory& traj, const ClassicalSolution& sol,
                                          double r0, double gamma) {
    ProfileSeries s;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        double t = traj.times[i];
        if (t < r0 * (1.0 - 1e-12)) continue;
        s.times.push_back(t);
        s.v_hat.push_back(profile(sol, t, traj.fields[i]));
        NormSet n = weighted_norms(traj.fields[i], gamma);
        n.pseudo_energy = pseudo_energy_norm(sol, t, traj.fields[i], gamma);
        s.norms.push_back(n);
    }
    return s;
}

/// Long-range phase correction: per frequency node, trapezoid accumulation
/// of nu |zeta2(tau)|^{-n rho_L/2} |v^(tau,xi)|^{rho_L} from the first
/// series time; w^(t) = e^{i phase(t)} v^(t). |w^| = |v^| pointwise.
inline void accumulate_phase(ProfileSeries& s, const ClassicalSolution& sol,
                             const NonlinearitySpec& spec) {
    std::size_t m = s.times.size();
    if (m == 0) return;
    int dim = s.v_hat[0].grid.dim;
    std::size_t total = s.v_hat[0].samples.size();
    s.accumulated_phase.assign(m, std::vector<double>(total, 0.0));
    s.w_hat = s.v_hat;

    auto integrand = [&](std::size_t j, std::vector<double>& out) {
        double z2 = std::fabs(sol.zeta2(s.times[j]));
        double w = spec.nu * std::pow(z2, -dim * spec.rho_L / 2.0);
        for (std::size_t i = 0; i < total; ++i)
            out[i] = w * std::pow(std::abs(s.v_hat[j].samples[i]), spec.rho_L);
    };

    std::vector<double> prev(total), curr(total);
    if (spec.nu != 0.0) {
        integrand(0, prev);
        for (std::size_t j = 1; j < m; ++j) {
            if (!(s.times[j] > s.times[j - 1]))
                throw std::invalid_argument("accumulate_phase: times must be increasing");
            integrand(j, curr);
            double hdt = 0.5 * (s.times[j] - s.times[j - 1]);
            for (std::size_t i = 0; i < total; ++i)
                s.accumulated_phase[j][i] =
                    s.accumulated_phase[j - 1][i] + hdt * (prev[i] + curr[i]);
            std::swap(prev, curr);
        }
    }
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < total; ++i) {
            double ph = s.accumulated_phase[j][i];
            s.w_hat[j].samples[i] = s.v_hat[j].samples[i] * cplx(std::cos(ph), std::sin(ph));
        }
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // rms of fit residuals
    int points = 0;
};

inline LinearFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares_line: need >= 2 matched points");
    double n = double(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    double det = n * sxx - sx * sx;
    if (std::fabs(det) < 1e-14 * std::max(1.0, n * sxx))
        throw std::invalid_argument("least_squares_line: degenerate abscissae");
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy * sxx - sx * sxy) / det;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (f.slope * x[i] + f.intercept);
        rss += r * r;
    }
    f.residual = std::sqrt(rss / n);
    f.points = int(n);
    return f;
}

enum class NormKind { L2, Linf };

inline double field_norm(const WaveField& f, NormKind k) {
    return k == NormKind::L2 ? f.l2_norm() : f.linf_norm();
}

struct CauchyRates {
    LinearFit corrected;       // log ||w^(t) - w^(t_last)|| vs log t
    LinearFit uncorrected;     // same with v^
    bool corrected_converged = false;    // differences below the 1e-13 floor
    bool uncorrected_converged = false;
    std::vector<double> fit_times;
    std::vector<double> corrected_diffs;
    std::vector<double> uncorrected_diffs;
};

/// Cauchy-in-time diagnostics against the final series entry, restricted to
/// the fit window. Differences below 1e-13 are dropped from the fit and
/// flagged as converged.
inline CauchyRates cauchy_rates(const ProfileSeries& s, NormKind kind,
                                double t_lo = 0.0, double t_hi = 1e300) {
    if (s.times.size() < 5)
        throw std::invalid_argument("cauchy_rates: need >= 5 time samples");
    if (s.w_hat.size() != s.times.size())
        throw std::invalid_argument("cauchy_rates: accumulate_phase must run first");
    std::size_t last = s.times.size() - 1;
    CauchyRates out;
    std::vector<double> lx, ly_c, ly_u;
    int floored_c = 0, floored_u = 0, total = 0;
    for (std::size_t j = 0; j + 1 <= last; ++j) {
        double t = s.times[j];
        if (t < t_lo || t > t_hi || t >= s.times[last]) continue;
        ++total;
        WaveField dc = s.w_hat[j], du = s.v_hat[j];
        for (std::size_t i = 0; i < dc.samples.size(); ++i) {
            dc.samples[i] -= s.w_hat[last].samples[i];
            du.samples[i] -= s.v_hat[last].samples[i];
        }
        double nc = field_norm(dc, kind), nu = field_norm(du, kind);
        out.fit_times.push_back(t);
        out.corrected_diffs.push_back(nc);
        out.uncorrected_diffs.push_back(nu);
        if (nc < 1e-13) { ++floored_c; } else { lx.push_back(std::log(t)); ly_c.push_back(std::log(nc)); }
        if (nu < 1e-13) { ++floored_u; }
    }
    if (total == 0) throw std::invalid_argument("cauchy_rates: empty fit window");
    out.corrected_converged = floored_c > total / 2;
    out.uncorrected_converged = floored_u > total / 2;
    if (!out.corrected_converged && lx.size() >= 4)
        out.corrected = least_squares_line(lx, ly_c);
    if (!out.uncorrected_converged) {
        std::vector<double> ux, uy;
        for (std::size_t i = 0; i < out.fit_times.size(); ++i)
            if (out.uncorrected_diffs[i] >= 1e-13) {
                ux.push_back(std::log(out.fit_times[i]));
                uy.push_back(std::log(out.uncorrected_diffs[i]));
            }
        if (ux.size() >= 4) out.uncorrected = least_squares_line(ux, uy);
    }
    return out;
}

struct DecayFit {
    LinearFit vs_log_t;        // log ||u||_inf vs log t
    LinearFit vs_log_zeta2;    // log ||u||_inf vs log(1 + |zeta2|)
};

inline DecayFit decay_fit(const ProfileSeries& s, const ClassicalSolution& sol,
                          double t_lo = 0.0, double t_hi = 1e300) {
    std::vector<double> lt, lz, ln;
    for (std::size_t j = 0; j < s.times.size(); ++j) {
        double t = s.times[j];
        if (t < t_lo || t > t_hi || !(t > 0.0)) continue;
        double linf = s.norms[j].linf;
        if (!(linf > 0.0)) continue;
        lt.push_back(std::log(t));
        lz.push_back(std::log(1.0 + std::fabs(sol.zeta2(t))));
        ln.push_back(std::log(linf));
    }
    if (lt.size() < 4) throw std::invalid_argument("decay_fit: degenerate fit window");
    DecayFit f;
    f.vs_log_t = least_squares_line(lt, ln);
    f.vs_log_zeta2 = least_squares_line(lz, ln);
    return f;
}

struct LinftySplit {
    double main_term = 0.0;        // |zeta2|^{-n/2} ||F U0(0,t) u||_inf
    double remainder_bound = 0.0;  // |zeta2|^{-n/2} |zeta1/zeta2|^alpha ||U0(0,t)u||_{0,gamma}
    double actual_linf = 0.0;      // ||u(t)||_inf
};

/// Amplitude splitting of u(t) through the MDFM chain: the leading term is
/// the dilated Fourier profile, the remainder is controlled by the weighted
/// norm of the pullback with a Hoelder factor |zeta1/zeta2|^alpha.
inline LinftySplit linfty_split_check(const ClassicalSolution& sol, double t,
                                      const WaveField& field, double alpha_holder,
                                      double gamma, double band_base = 1e-8) {
    FactorCoefficients fc = sol.factor_coefficients(t, band_base);
    if (!fc.mdfm) throw std::domain_error("linfty_split_check: MDFM undefined at this time");
    ClassicalSolution::State st = sol.eval(t);
    int dim = field.grid.dim;
    WaveField v = pullback(sol, t, field, FactorizationKind::QuadraticPhase, band_base);
    WaveField vhat = fourier(v);
    LinftySplit out;
    double z2 = std::fabs(st.zeta2);
    out.main_term = std::pow(z2, -dim / 2.0) * vhat.linf_norm();
    out.remainder_bound = std::pow(z2, -dim / 2.0) *
                          std::pow(std::fabs(st.zeta1 / st.zeta2), alpha_holder) *
                          weighted_norms(v, gamma).h_0gamma;
    out.actual_linf = field.linf_norm();
    return out;
}

} // namespace hillnls

#endif
