#ifndef HILLNLS_HILL_HPP
#define HILLNLS_HILL_HPP

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigma.hpp"

namespace hillnls {

/// Default zero-exclusion band: a denominator zeta_j(t) counts as zero when
/// |zeta_j(t)| < exclusion_band(t).
inline double exclusion_band(double t, double base = 1e-8) {
    return base * (1.0 + std::fabs(t));
}

struct FactorCoefficients {
    struct Korotyaev {
        double chirp;       // zeta1'/(2 zeta1)
        double log_dilate;  // log|zeta1|
        double free_coeff;  // zeta2/(2 zeta1)
        int parity;         // nu(t)
    };
    struct QuadraticPhase {
        double a;  // (1 - zeta2')/(2 zeta2)
        double b;  // zeta2/2
        double c;  // (1 - zeta1)/(2 zeta2)
    };
    struct Mdfm {
        double m_outer;  // zeta2/zeta2'
        double dilate;   // zeta2
        double m_inner;  // zeta2/zeta1
    };
    struct Mdmdfm {
        double a1;     // 1/(zeta1^2 + zeta2^2) with y1 = zeta2, y2 = zeta1
        double a2;     // -(zeta1 zeta1' + zeta2 zeta2')/(zeta1^2 + zeta2^2)
        double theta;  // int_0^t a1
    };

    std::optional<Korotyaev> korotyaev;
    std::optional<QuadraticPhase> quadratic_phase;
    std::optional<Mdfm> mdfm;
    Mdmdfm mdmdfm{};  // globally nonsingular
};

/// Fundamental solutions of y'' + sigma(t) y = 0 with
/// (zeta1, zeta1')(0) = (1, 0), (zeta2, zeta2')(0) = (0, 1),
/// integrated by an embedded Dormand-Prince 5(4) pair with the standard
/// quartic dense output. theta = int_0^t 1/(zeta1^2 + zeta2^2) rides along
/// as a fifth state component.
///
/// The Wronskian residual is tracked multiplicatively: the per-step linear
/// transfer matrix is propagated through the same RK stages and its
/// determinant defect accumulated as sum log det. Direct evaluation of
/// zeta1 zeta2' - zeta1' zeta2 - 1 is cancellation-dominated once the
/// solutions grow hyperbolically; the accumulated form is algebraically
/// identical and stays meaningful at any magnitude.
class ClassicalSolution {
public:
    struct State {
        double zeta1, zeta1p, zeta2, zeta2p, theta;
    };

    State eval(double t) const {
        const Segment& s = locate(t);
        double th = (t - s.t0) / s.h;
        double th1 = 1.0 - th;
        State out;
        double* o = &out.zeta1;
        for (int c = 0; c < 5; ++c)
            o[c] = s.r[0][c] + th * (s.r[1][c] + th1 * (s.r[2][c] + th * (s.r[3][c] + th1 * s.r[4][c])));
        return out;
    }

    double zeta1(double t) const { return eval(t).zeta1; }
    double zeta2(double t) const { return eval(t).zeta2; }
    double zeta1p(double t) const { return eval(t).zeta1p; }
    double zeta2p(double t) const { return eval(t).zeta2p; }
    double theta(double t) const { return eval(t).theta; }

    double t_max() const { return t_max_; }

    /// nu(t): number of zeros of zeta1 in [0,t] (or [t,0] for t < 0).
    int zero_count(double t) const {
        int n = 0;
        if (t >= 0.0) {
            for (double z : zeros_pos_) { if (z <= t) ++n; else break; }
        } else {
            for (double z : zeros_neg_) { if (z >= t) ++n; else break; }
        }
        return n;
    }

    /// mu(t): number of zeros of zeta2 strictly between 0 and t (the zero at
    /// t = 0 itself is not counted). Each such crossing is a caustic of the
    /// oscillator kernel and contributes a factor e^{-i n pi/2} to its
    /// amplitude relative to the principal branch.
    int zeta2_zero_count(double t) const {
        int n = 0;
        if (t >= 0.0) {
            for (double z : zeros2_pos_) { if (z < t) ++n; else break; }
        } else {
            for (double z : zeros2_neg_) { if (z > t) ++n; else break; }
        }
        return n;
    }

    const std::vector<double>& zeta1_zeros_positive() const { return zeros_pos_; }
    const std::vector<double>& zeta1_zeros_negative() const { return zeros_neg_; }
    bool has_degenerate_zero() const { return degenerate_zero_; }

    /// |prod det(step map) - 1| accumulated from 0 out to t.
    double wronskian_residual(double t) const {
        const Segment& s = locate(t);
        return std::fabs(std::expm1(s.logdet));
    }

    double max_wronskian_residual() const {
        double r = 0.0;
        for (const auto& s : fwd_) r = std::max(r, std::fabs(std::expm1(s.logdet)));
        for (const auto& s : bwd_) r = std::max(r, std::fabs(std::expm1(s.logdet)));
        return r;
    }

    /// Accepted-step endpoint grid, sorted ascending over [-t_max, t_max].
    std::vector<double> time_grid() const {
        std::vector<double> g;
        for (auto it = bwd_.rbegin(); it != bwd_.rend(); ++it) g.push_back(it->t0 + it->h);
        g.push_back(0.0);
        for (const auto& s : fwd_) g.push_back(s.t0 + s.h);
        return g;
    }

    FactorCoefficients factor_coefficients(double t, double band_base = 1e-8) const {
        State s = eval(t);
        double band = exclusion_band(t, band_base);
        FactorCoefficients fc;
        double nsq = s.zeta1 * s.zeta1 + s.zeta2 * s.zeta2;
        fc.mdmdfm.a1 = 1.0 / nsq;
        fc.mdmdfm.a2 = -(s.zeta1 * s.zeta1p + s.zeta2 * s.zeta2p) / nsq;
        fc.mdmdfm.theta = s.theta;
        if (std::fabs(s.zeta1) > band) {
            fc.korotyaev = FactorCoefficients::Korotyaev{
                s.zeta1p / (2.0 * s.zeta1), std::log(std::fabs(s.zeta1)),
                s.zeta2 / (2.0 * s.zeta1), zero_count(t)};
        }
        if (std::fabs(s.zeta2) > band) {
            fc.quadratic_phase = FactorCoefficients::QuadraticPhase{
                (1.0 - s.zeta2p) / (2.0 * s.zeta2), s.zeta2 / 2.0,
                (1.0 - s.zeta1) / (2.0 * s.zeta2)};
            if (std::fabs(s.zeta1) > band && std::fabs(s.zeta2p) > band) {
                fc.mdfm = FactorCoefficients::Mdfm{
                    s.zeta2 / s.zeta2p, s.zeta2, s.zeta2 / s.zeta1};
            }
        }
        return fc;
    }

    /// CSV export: t, zeta1, zeta1p, zeta2, zeta2p, nu, wronskian_residual.
    void export_csv(const std::string& path, const std::vector<double>& times) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << "t,zeta1,zeta1p,zeta2,zeta2p,nu,wronskian_residual\n";
        char buf[256];
        for (double t : times) {
            State s = eval(t);
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n",
                          t, s.zeta1, s.zeta1p, s.zeta2, s.zeta2p, zero_count(t),
                          wronskian_residual(t));
            out << buf;
        }
    }

    friend ClassicalSolution solve_fundamental(const SigmaModel&, double, double);

private:
    struct Segment {
        double t0, h;
        double r[5][5];  // dense-output coefficients, 5 state components
        double logdet;   // accumulated log det of step maps from t=0 to end of segment
    };

    const Segment& locate(double t) const {
        if (std::fabs(t) > t_max_ * (1.0 + 1e-12) + 1e-300)
            throw std::out_of_range("classical solution queried outside solved window");
        const std::vector<Segment>& side = (t >= 0.0) ? fwd_ : bwd_;
        if (side.empty()) throw std::out_of_range("empty solution window");
        // segments ordered by |t|; binary search on t0
        std::size_t lo = 0, hi = side.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi + 1) / 2;
            if (std::fabs(side[mid].t0) <= std::fabs(t)) lo = mid; else hi = mid - 1;
        }
        return side[lo];
    }

    std::vector<Segment> fwd_, bwd_;
    std::vector<double> zeros_pos_, zeros_neg_;    // zeta1
    std::vector<double> zeros2_pos_, zeros2_neg_;  // zeta2, excluding t = 0
    bool degenerate_zero_ = false;
    double t_max_ = 0.0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
inline constexpr double dp_b[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                                   -2187.0 / 6784, 11.0 / 84, 0.0};
inline constexpr double dp_e[7] = {  // b - bhat
    35.0 / 384 - 5179.0 / 57600, 0.0, 500.0 / 1113 - 7571.0 / 16695,
    125.0 / 192 - 393.0 / 640, -2187.0 / 6784 + 92097.0 / 339200,
    11.0 / 84 - 187.0 / 2100, -1.0 / 40};
inline constexpr double dp_d[7] = {  // dense-output weights
    -12715105075.0 / 11282082432.0, 0.0, 87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0, 701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0, 69997945.0 / 29380423.0};

struct Mat2 {
    double a11, a12, a21, a22;
};

}  // namespace detail

inline ClassicalSolution solve_fundamental(const SigmaModel& model, double t_max,
                                           double tol = 1e-10) {
    if (!(t_max > 0.0) || !(tol > 0.0))
        throw std::invalid_argument("solve_fundamental: t_max and tol must be positive");
    if (!model.covers(t_max) || !model.covers(-t_max))
        throw std::out_of_range("tabulated sigma does not cover the evolution window");

    ClassicalSolution sol;
    sol.t_max_ = t_max;

    auto rhs = [&model](double t, const std::array<double, 5>& y, std::array<double, 5>& dy) {
        double s = model(t);
        dy[0] = y[1];
        dy[1] = -s * y[0];
        dy[2] = y[3];
        dy[3] = -s * y[2];
        dy[4] = 1.0 / (y[0] * y[0] + y[2] * y[2]);
    };

    auto integrate = [&](double direction, std::vector<ClassicalSolution::Segment>& out) {
        using detail::dp_a;
        using detail::dp_b;
        using detail::dp_c;
        using detail::dp_d;
        using detail::dp_e;
        std::array<double, 5> y{1.0, 0.0, 0.0, 1.0, 0.0};
        double t = 0.0;
        double h = direction * std::min(0.01, t_max);
        double logdet = 0.0;
        std::array<std::array<double, 5>, 7> k;
        std::array<detail::Mat2, 7> km;
        rhs(t, y, k[0]);
        int rejected_in_a_row = 0;
        while (direction * t < t_max) {
            if (direction * (t + h) > t_max) h = direction * t_max - t;
            // stages (FSAL: k[0] holds f(t, y))
            std::array<double, 5> ytmp;
            for (int i = 1; i < 7; ++i) {
                for (int c = 0; c < 5; ++c) {
                    double acc = 0.0;
                    for (int j = 0; j < i; ++j) acc += dp_a[i][j] * k[j][c];
                    ytmp[c] = y[c] + h * acc;
                }
                rhs(t + dp_c[i] * h, ytmp, k[i]);
            }
            std::array<double, 5> ynew, err{};
            for (int c = 0; c < 5; ++c) {
                double acc = 0.0, eacc = 0.0;
                for (int i = 0; i < 7; ++i) {
                    acc += dp_b[i] * k[i][c];
                    eacc += dp_e[i] * k[i][c];
                }
                ynew[c] = y[c] + h * acc;
                err[c] = h * eacc;
            }
            double enorm = 0.0;
            for (int c = 0; c < 5; ++c) {
                double sc = tol + tol * std::max(std::fabs(y[c]), std::fabs(ynew[c]));
                double e = err[c] / sc;
                enorm += e * e;
            }
            enorm = std::sqrt(enorm / 5.0);
            if (enorm > 1.0) {
                h *= std::max(0.2, 0.9 * std::pow(enorm, -0.2));
                if (std::fabs(h) < 1e-14 * (1.0 + std::fabs(t)))
                    throw std::runtime_error("solve_fundamental: step size collapse at t=" +
                                             std::to_string(t));
                if (++rejected_in_a_row > 200)
                    throw std::runtime_error("solve_fundamental: integrator stalled");
                continue;
            }
            rejected_in_a_row = 0;

            // linear step map for the (y, y') block, same stages
            for (int i = 0; i < 7; ++i) {
                detail::Mat2 m{1.0, 0.0, 0.0, 1.0};
                for (int j = 0; j < i; ++j) {
                    m.a11 += h * dp_a[i][j] * km[j].a11;
                    m.a12 += h * dp_a[i][j] * km[j].a12;
                    m.a21 += h * dp_a[i][j] * km[j].a21;
                    m.a22 += h * dp_a[i][j] * km[j].a22;
                }
                double s = model(t + dp_c[i] * h);
                km[i] = detail::Mat2{m.a21, m.a22, -s * m.a11, -s * m.a12};
            }
            double e11 = 0.0, e12 = 0.0, e21 = 0.0, e22 = 0.0;
            for (int i = 0; i < 7; ++i) {
                e11 += h * dp_b[i] * km[i].a11;
                e12 += h * dp_b[i] * km[i].a12;
                e21 += h * dp_b[i] * km[i].a21;
                e22 += h * dp_b[i] * km[i].a22;
            }
            // det(I + E) - 1, grouped to avoid forming det - 1 by cancellation
            double ddet = e11 + e22 + e11 * e22 - e12 * e21;
            logdet += std::log1p(ddet);

            ClassicalSolution::Segment seg;
            seg.t0 = t;
            seg.h = h;
            seg.logdet = logdet;
            for (int c = 0; c < 5; ++c) {
                double ydiff = ynew[c] - y[c];
                double bspl = h * k[0][c] - ydiff;
                double dacc = 0.0;
                for (int i = 0; i < 7; ++i) dacc += dp_d[i] * k[i][c];
                seg.r[0][c] = y[c];
                seg.r[1][c] = ydiff;
                seg.r[2][c] = bspl;
                seg.r[3][c] = ydiff - h * k[6][c] - bspl;
                seg.r[4][c] = h * dacc;
            }
            out.push_back(seg);

            t += h;
            y = ynew;
            k[0] = k[6];  // FSAL
            h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(enorm, 1e-10), -0.2)));
        }
    };

    integrate(+1.0, sol.fwd_);
    integrate(-1.0, sol.bwd_);

    if (sol.max_wronskian_residual() > 100.0 * tol * std::max(1.0, double(sol.fwd_.size() + sol.bwd_.size()) / 100.0))
        throw std::runtime_error("solve_fundamental: Wronskian residual exceeds budget");

    // locate zeros of zeta1 / zeta2: subsample each dense segment, bracket,
    // bisect. The structural zero of zeta2 at t = 0 is skipped.
    auto find_zeros = [&sol](const std::vector<ClassicalSolution::Segment>& segs,
                             auto value, auto deriv, std::vector<double>& zeros,
                             bool* degenerate) {
        const int sub = 8;
        for (const auto& s : segs) {
            double prev_t = s.t0;
            double prev_v = value(prev_t);
            for (int i = 1; i <= sub; ++i) {
                double tt = s.t0 + s.h * (double(i) / sub);
                double v = value(tt);
                if (prev_v == 0.0) {
                    if (prev_t != 0.0) zeros.push_back(prev_t);
                } else if (v != 0.0 && std::signbit(v) != std::signbit(prev_v)) {
                    double a = prev_t, b = tt, fa = prev_v;
                    for (int it = 0; it < 80; ++it) {
                        double m = 0.5 * (a + b), fm = value(m);
                        if (fm == 0.0) { a = b = m; break; }
                        if (std::signbit(fm) == std::signbit(fa)) { a = m; fa = fm; }
                        else b = m;
                    }
                    zeros.push_back(0.5 * (a + b));
                } else if (degenerate && std::fabs(v) < 1e-10 * (1.0 + std::fabs(tt)) && v != 0.0) {
                    // candidate tangential zero: derivative changes sign, value does not
                    if (std::signbit(deriv(prev_t)) != std::signbit(deriv(tt))) {
                        zeros.push_back(tt);
                        *degenerate = true;
                    }
                }
                prev_t = tt;
                prev_v = v;
            }
        }
    };
    auto z1 = [&sol](double t) { return sol.zeta1(t); };
    auto z1p = [&sol](double t) { return sol.zeta1p(t); };
    auto z2 = [&sol](double t) { return sol.zeta2(t); };
    auto z2p = [&sol](double t) { return sol.zeta2p(t); };
    find_zeros(sol.fwd_, z1, z1p, sol.zeros_pos_, &sol.degenerate_zero_);
    find_zeros(sol.bwd_, z1, z1p, sol.zeros_neg_, &sol.degenerate_zero_);
    find_zeros(sol.fwd_, z2, z2p, sol.zeros2_pos_, nullptr);
    find_zeros(sol.bwd_, z2, z2p, sol.zeros2_neg_, nullptr);
    return sol;
}

} // namespace hillnls

#endif
