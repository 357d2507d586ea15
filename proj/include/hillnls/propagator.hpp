#ifndef HILLNLS_PROPAGATOR_HPP
#define HILLNLS_PROPAGATOR_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "fft.hpp"
#include "grid.hpp"
#include "hill.hpp"
#include "ops.hpp"

namespace hillnls {

enum class FactorizationKind { Korotyaev, QuadraticPhase, MDFM, MDMDFM, Auto };

namespace detail {

/// Harmonic rotation flow e^{-i theta (p^2 + x^2)/2} as chirp - dilated
/// Fourier - chirp (fractional Fourier form):
///   e^{-i theta H} = Chirp(cot/2) Dilate(sin theta, A) F Chirp(cot/2),
///   A = e^{-i n pi (1/4 + floor(theta/pi)/2)} |sin theta|^{-n/2}.
/// The floor term is the metaplectic index: it makes the flow compose
/// exactly across multiples of pi (checked against S = F^2 and against the
/// ground-state phase e^{-i n theta/2}). Near theta = 0 mod pi the chirp
/// coefficients diverge, so the angle is split into two nondegenerate
/// halves.
inline void append_harmonic_flow(FactorChain& chain, double theta, int dim) {
    auto single = [&chain, dim](double th) {
        double s = std::sin(th), cot = std::cos(th) / s;
        double ph = -dim * M_PI * (0.25 + 0.5 * std::floor(th / M_PI));
        cplx amp = std::pow(std::fabs(s), -dim / 2.0) * cplx(std::cos(ph), std::sin(ph));
        chain.factors.push_back(Chirp{cot / 2.0});
        chain.factors.push_back(Fourier{true});
        chain.factors.push_back(Dilate{s, amp});
        chain.factors.push_back(Chirp{cot / 2.0});
    };
    if (std::fabs(std::sin(theta)) > 0.3) {
        single(theta);
    } else if (std::fabs(std::sin(theta / 2.0)) > 0.3) {
        single(theta / 2.0);
        single(theta / 2.0);
    } else {
        // sin(th/2 + pi/2) sin(th/2 - pi/2) < 0: restore a positive frame
        single(theta / 2.0 + M_PI / 2.0);
        single(theta / 2.0 - M_PI / 2.0);
        chain.factors.push_back(FrameFlip{});
    }
}

/// Correction from the principal branch (i zeta2)^{-n/2} to the true
/// oscillator-kernel amplitude: each zero of zeta2 between 0 and t is a
/// caustic contributing e^{-sgn(t) i n pi/2}. Folding in the sign of zeta2
/// the net correction is always a real sign.
inline double maslov_sign(const ClassicalSolution& sol, double t, double zeta2, int dim) {
    int mu = sol.zeta2_zero_count(t);
    if ((t >= 0.0) != (zeta2 >= 0.0)) ++mu;  // mu is now even
    return (dim * (mu / 2)) % 2 ? -1.0 : 1.0;
}

} // namespace detail

inline FactorizationKind resolve_factorization(const FactorCoefficients& fc,
                                               FactorizationKind kind) {
    if (kind != FactorizationKind::Auto) return kind;
    if (fc.mdfm) return FactorizationKind::MDFM;
    if (fc.quadratic_phase) return FactorizationKind::QuadraticPhase;
    if (fc.korotyaev) return FactorizationKind::Korotyaev;
    return FactorizationKind::MDMDFM;
}

/// Factor chain realizing U0(t, 0) by the requested decomposition. Factors
/// are listed rightmost-first (application order).
inline FactorChain propagator_chain(const ClassicalSolution& sol, double t, int dim,
                                    FactorizationKind kind = FactorizationKind::Auto,
                                    double band_base = 1e-8) {
    FactorCoefficients fc = sol.factor_coefficients(t, band_base);
    FactorChain chain;
    switch (resolve_factorization(fc, kind)) {
        case FactorizationKind::Korotyaev: {
            if (!fc.korotyaev)
                throw std::domain_error("Korotyaev factorization undefined at t=" + std::to_string(t));
            const auto& k = *fc.korotyaev;
            double d = std::exp(k.log_dilate);  // |zeta1|
            chain.factors.push_back(Parity{k.parity});
            chain.factors.push_back(Fourier{});
            chain.factors.push_back(Chirp{-k.free_coeff});
            chain.factors.push_back(InvFourier{});
            chain.factors.push_back(Dilate{d, std::pow(d, -dim / 2.0)});
            chain.factors.push_back(Chirp{k.chirp});
            break;
        }
        case FactorizationKind::QuadraticPhase: {
            if (!fc.quadratic_phase)
                throw std::domain_error("quadratic-phase factorization undefined at t=" + std::to_string(t));
            const auto& q = *fc.quadratic_phase;
            chain.factors.push_back(Chirp{-q.c});
            chain.factors.push_back(Fourier{});
            chain.factors.push_back(Chirp{-q.b});
            chain.factors.push_back(InvFourier{});
            chain.factors.push_back(Chirp{-q.a});
            double ms = detail::maslov_sign(sol, t, 2.0 * q.b, dim);
            if (ms != 1.0) chain.factors.push_back(ConstPhase{cplx(ms, 0.0)});
            break;
        }
        case FactorizationKind::MDFM: {
            if (!fc.mdfm)
                throw std::domain_error("MDFM factorization undefined at t=" + std::to_string(t));
            const auto& m = *fc.mdfm;
            cplx amp = std::pow(cplx(0.0, m.dilate), -dim / 2.0) *
                       detail::maslov_sign(sol, t, m.dilate, dim);
            chain.factors.push_back(Chirp{1.0 / (2.0 * m.m_inner)});
            chain.factors.push_back(Fourier{true});
            chain.factors.push_back(Dilate{m.dilate, amp});
            chain.factors.push_back(Chirp{1.0 / (2.0 * m.m_outer)});
            break;
        }
        case FactorizationKind::MDMDFM: {
            const auto& m = fc.mdmdfm;
            detail::append_harmonic_flow(chain, m.theta, dim);
            chain.factors.push_back(
                Dilate{1.0 / std::sqrt(m.a1), std::pow(m.a1, dim / 4.0)});
            chain.factors.push_back(Chirp{-m.a2 / 2.0});
            break;
        }
        case FactorizationKind::Auto:
            break;  // unreachable
    }
    return chain;
}

/// Refuse to push a field through a chirp chain when spectral mass already
/// sits near the grid Nyquist edge: those components alias silently.
inline void check_aliasing(const WaveField& f, const char* where) {
    double tail = spectral_tail_fraction(f);
    if (tail > 1e-6)
        throw std::runtime_error(std::string(where) +
                                 ": field has " + std::to_string(tail) +
                                 " of its spectral mass in the outer 10% of frequency nodes");
}

inline WaveField propagate(const ClassicalSolution& sol, double t, const WaveField& field,
                           FactorizationKind kind = FactorizationKind::Auto,
                           double band_base = 1e-8) {
    if (field.rep != Representation::Position)
        throw std::invalid_argument("propagate: field must be in position representation");
    check_aliasing(field, "propagate");
    return propagator_chain(sol, t, field.grid.dim, kind, band_base).apply(field);
}

/// U0(0, t): the propagator chain inverted factor-by-factor, so
/// pullback(propagate(f)) == f to roundoff for every kind including Auto.
inline WaveField pullback(const ClassicalSolution& sol, double t, const WaveField& field,
                          FactorizationKind kind = FactorizationKind::Auto,
                          double band_base = 1e-8) {
    return propagator_chain(sol, t, field.grid.dim, kind, band_base).inverse().apply(field);
}

/// Independent oracle: Crank-Nicolson stepping of
/// i dv/dt = (-Lap/2 + sigma(t) x^2/2) v with spectral Laplacian and
/// midpoint potential. Each step solves (I + i a H) w = (I - i a H) v,
/// a = dt/2, by conjugate gradients on the normal equations
/// (I + a^2 H^2) w = (I - i a H)^2 v, which are Hermitian positive definite
/// with modest condition number at desk-scale dt.
inline WaveField crank_nicolson_linear(const SigmaModel& model, double t0, double t1,
                                       double dt, const WaveField& field) {
    if (!(dt > 0.0)) throw std::invalid_argument("crank_nicolson_linear: dt must be positive");
    if (field.rep != Representation::Position)
        throw std::invalid_argument("crank_nicolson_linear: position representation required");
    if (t1 == t0) return field;
    double span = t1 - t0;
    int steps = std::max(1, int(std::llround(std::fabs(span) / dt)));
    double h = span / steps;

    const Grid& g = field.grid;
    std::size_t total = g.total();
    int N = g.n_per_axis;

    // kinetic multiplier |xi_phys|^2 / 2 per flat frequency index
    std::vector<double> kin(total);
    {
        double s = 1.0 / field.scale;  // frequency-side scale
        for (std::size_t i = 0; i < total; ++i) {
            std::size_t fl = i;
            double k2 = 0.0;
            for (int d = 0; d < g.dim; ++d) {
                double xi = s * g.dual_node(int(fl % std::size_t(N)));
                fl /= std::size_t(N);
                k2 += xi * xi;
            }
            kin[i] = 0.5 * k2;
        }
    }
    std::vector<double> x2(total);
    {
        double co[3];
        WaveField probe = field;  // coords() helper only
        for (std::size_t i = 0; i < total; ++i) {
            probe.coords(i, co);
            double r2 = 0.0;
            for (int d = 0; d < g.dim; ++d) r2 += co[d] * co[d];
            x2[i] = r2;
        }
    }

    WaveField v = field;
    auto apply_H = [&](const std::vector<cplx>& in, std::vector<cplx>& out, double sig) {
        WaveField tmp = v;
        tmp.samples = in;
        WaveField hat = fourier(tmp);
        for (std::size_t i = 0; i < total; ++i) hat.samples[i] *= kin[i];
        WaveField kinpart = inverse_fourier(hat);
        out.resize(total);
        for (std::size_t i = 0; i < total; ++i)
            out[i] = kinpart.samples[i] + 0.5 * sig * x2[i] * in[i];
    };

    std::vector<cplx> rhs(total), w(total), r(total), p(total), Hp(total), tmp(total);
    auto dot = [&](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        cplx s(0.0);
        for (std::size_t i = 0; i < total; ++i) s += std::conj(a[i]) * b[i];
        return s;
    };

    double a = h / 2.0;
    double a2 = a * a;
    for (int m = 0; m < steps; ++m) {
        double sig = model(t0 + (m + 0.5) * h);
        // rhs = (I - i a H)^2 v = (I - 2 i a H - a^2 H^2) v
        apply_H(v.samples, tmp, sig);
        apply_H(tmp, Hp, sig);
        for (std::size_t i = 0; i < total; ++i)
            rhs[i] = v.samples[i] - cplx(0.0, 2.0 * a) * tmp[i] - a2 * Hp[i];
        // CG on (I + a^2 H^2) w = rhs, warm-started from v
        w = v.samples;
        apply_H(w, tmp, sig);
        apply_H(tmp, Hp, sig);
        for (std::size_t i = 0; i < total; ++i) r[i] = rhs[i] - (w[i] + a2 * Hp[i]);
        p = r;
        double rr = dot(r, r).real();
        double target = 1e-24 * std::max(1.0, dot(rhs, rhs).real());
        for (int it = 0; it < 500 && rr > target; ++it) {
            apply_H(p, tmp, sig);
            apply_H(tmp, Hp, sig);
            for (std::size_t i = 0; i < total; ++i) Hp[i] = p[i] + a2 * Hp[i];
            double alpha = rr / dot(p, Hp).real();
            for (std::size_t i = 0; i < total; ++i) {
                w[i] += alpha * p[i];
                r[i] -= alpha * Hp[i];
            }
            double rr_new = dot(r, r).real();
            double beta = rr_new / rr;
            rr = rr_new;
            for (std::size_t i = 0; i < total; ++i) p[i] = r[i] + beta * p[i];
        }
        if (rr > 1e6 * target && rr > 1e-20)
            throw std::runtime_error("crank_nicolson_linear: inner solve did not converge");
        v.samples = w;
    }
    return v;
}

/// Closed-form linear evolution of the centered Gaussian e^{-|x|^2/(2 w^2)}:
/// the quadratic-phase chain (chirp, free multiplier, chirp) maps Gaussians
/// to Gaussians, so the three Fresnel integrals collapse to a complex width
/// recursion. Near a zero of zeta2 the chain through the Korotyaev factors
/// is used instead (zeta1 and zeta2 never vanish together).
struct GaussianParams {
    cplx amp;  // overall complex amplitude
    cplx q2;   // evolved complex width: u(t,x) = amp * e^{-q2 |x|^2}
};

inline GaussianParams gaussian_exact_params(const ClassicalSolution& sol, double t,
                                            double width, int dim,
                                            double band_base = 1e-8) {
    if (!(width > 0.0)) throw std::invalid_argument("gaussian_exact: width must be positive");
    ClassicalSolution::State s = sol.eval(t);
    double band = exclusion_band(t, band_base);
    cplx q0(1.0 / (2.0 * width * width), 0.0);
    cplx amp, q2;
    if (std::fabs(s.zeta2) > band) {
        double qa = (1.0 - s.zeta2p) / (2.0 * s.zeta2);
        double qb = s.zeta2 / 2.0;
        double qc = (1.0 - s.zeta1) / (2.0 * s.zeta2);
        cplx q1 = q0 + cplx(0.0, qc);
        cplx p = 1.0 / (4.0 * q1) + cplx(0.0, qb);
        amp = std::pow(2.0 * q1, -dim / 2.0) * std::pow(2.0 * p, -dim / 2.0) *
              detail::maslov_sign(sol, t, s.zeta2, dim);
        q2 = 1.0 / (4.0 * p) + cplx(0.0, qa);
    } else {
        // Korotyaev route: parity, free multiplier, |zeta1| dilation, chirp
        double z1 = s.zeta1;
        cplx p = 1.0 / (4.0 * q0) + cplx(0.0, s.zeta2 / (2.0 * z1));
        double az1 = std::fabs(z1);
        int nu = sol.zero_count(t);
        double ph = -nu * dim * M_PI / 2.0;
        amp = std::pow(2.0 * q0, -dim / 2.0) * std::pow(2.0 * p, -dim / 2.0) *
              std::pow(az1, -dim / 2.0) * cplx(std::cos(ph), std::sin(ph));
        q2 = 1.0 / (4.0 * p * z1 * z1) - cplx(0.0, s.zeta1p / (2.0 * z1));
    }
    return {amp, q2};
}

inline WaveField gaussian_exact(const ClassicalSolution& sol, double t, double width,
                                const Grid& grid, double band_base = 1e-8) {
    auto [amp, q2] = gaussian_exact_params(sol, t, width, grid.dim, band_base);
    WaveField out(grid);
    double co[3];
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.coords(i, co);
        double r2 = 0.0;
        for (int d = 0; d < grid.dim; ++d) r2 += co[d] * co[d];
        out.samples[i] = amp * std::exp(-q2 * r2);
    }
    return out;
}

} // namespace hillnls

#endif
