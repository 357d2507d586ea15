#ifndef HILLNLS_NLS_HPP
#define HILLNLS_NLS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"
#include "hill.hpp"
#include "propagator.hpp"
#include "sigma.hpp"

namespace hillnls {

/// Couplings and exponents of the two power nonlinearities
/// nu |u|^rho_L u + mu |u|^rho_S u.
struct NonlinearitySpec {
    double nu = 0.0;
    double mu = 0.0;
    double rho_L = 2.0;
    double rho_S = 3.0;

    NonlinearitySpec() = default;
    NonlinearitySpec(double nu_, double mu_, double rho_L_, double rho_S_)
        : nu(nu_), mu(mu_), rho_L(rho_L_), rho_S(rho_S_) {
        if (!(rho_L > 0.0) || !(rho_S > 0.0))
            throw std::invalid_argument("nonlinearity exponents must be positive");
    }

    bool linear() const { return nu == 0.0 && mu == 0.0; }
};

struct EvolutionConfig {
    SigmaModel model = SigmaModel::zero();
    NonlinearitySpec nonlinearity;
    WaveField initial;
    double t_end = 1.0;
    double dt = 1e-3;
    std::vector<double> diagnostic_times;  // sorted, within [0, t_end]
    double r0 = 1.0;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
        if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
        if (r0 < 0.0) throw std::invalid_argument("r0 must be nonnegative");
        double prev = 0.0;
        for (double t : diagnostic_times) {
            if (t < prev || t > t_end * (1.0 + 1e-12))
                throw std::invalid_argument("diagnostic times must be sorted within [0, t_end]");
            prev = t;
        }
    }
};

/// Exact pointwise rotation through the potential + nonlinear phase:
/// u <- e^{-i dt (sigma_mid x^2/2 + nu |u|^rho_L + mu |u|^rho_S)} u.
/// Exact because |u| is invariant under the phase flow (the nonlinearity
/// depends on |u| only), so freezing |u| over the step incurs no error.
inline WaveField nonlinear_phase_step(const WaveField& field, const NonlinearitySpec& spec,
                                      double sigma_mid, double dt) {
    if (field.rep != Representation::Position)
        throw std::invalid_argument("nonlinear_phase_step: position representation required");
    WaveField out = field;
    double co[3];
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        double pot = 0.0;
        if (sigma_mid != 0.0) {
            out.coords(i, co);
            double r2 = 0.0;
            for (int d = 0; d < field.grid.dim; ++d) r2 += co[d] * co[d];
            pot = 0.5 * sigma_mid * r2;
        }
        double m = std::abs(out.samples[i]);
        double ph = pot;
        if (spec.nu != 0.0) ph += spec.nu * std::pow(m, spec.rho_L);
        if (spec.mu != 0.0) ph += spec.mu * std::pow(m, spec.rho_S);
        ph *= -dt;
        out.samples[i] *= cplx(std::cos(ph), std::sin(ph));
    }
    return out;
}

namespace detail {

/// Precomputed tables for repeated Strang steps at fixed dt on a fixed grid.
struct StrangWorkspace {
    std::vector<double> kin_phase_half;  // dt/2 * |xi|^2 / 2 per flat index
    std::vector<double> x2;

    StrangWorkspace(const WaveField& f, double dt) {
        const Grid& g = f.grid;
        int N = g.n_per_axis;
        std::size_t total = g.total();
        kin_phase_half.resize(total);
        x2.resize(total);
        double fs = 1.0 / f.scale;
        double co[3];
        WaveField probe = f;
        for (std::size_t i = 0; i < total; ++i) {
            std::size_t fl = i;
            double k2 = 0.0;
            for (int d = 0; d < g.dim; ++d) {
                double xi = fs * g.dual_node(int(fl % std::size_t(N)));
                fl /= std::size_t(N);
                k2 += xi * xi;
            }
            kin_phase_half[i] = dt * k2 / 4.0;
            probe.coords(i, co);
            double r2 = 0.0;
            for (int d = 0; d < g.dim; ++d) r2 += co[d] * co[d];
            x2[i] = r2;
        }
    }

    /// e^{-i w * kin_phase_half} applied in frequency representation,
    /// w = 1 for a half step, 2 for a merged full step.
    void kinetic(WaveField& hat, double w) const {
        for (std::size_t i = 0; i < hat.samples.size(); ++i) {
            double ph = -w * kin_phase_half[i];
            hat.samples[i] *= cplx(std::cos(ph), std::sin(ph));
        }
    }

    void nonlinear(WaveField& u, const NonlinearitySpec& spec, double sigma_mid,
                   double dt) const {
        for (std::size_t i = 0; i < u.samples.size(); ++i) {
            double ph = 0.5 * sigma_mid * x2[i];
            double m = std::abs(u.samples[i]);
            if (spec.nu != 0.0) ph += spec.nu * std::pow(m, spec.rho_L);
            if (spec.mu != 0.0) ph += spec.mu * std::pow(m, spec.rho_S);
            ph *= -dt;
            u.samples[i] *= cplx(std::cos(ph), std::sin(ph));
        }
    }
};

} // namespace detail

/// One Strang step: half kinetic, exact nonlinear/potential rotation at the
/// midpoint time, half kinetic.
inline WaveField strang_step(const WaveField& field, const SigmaModel& model,
                             const NonlinearitySpec& spec, double t, double dt) {
    detail::StrangWorkspace ws(field, dt);
    WaveField hat = fourier(field);
    ws.kinetic(hat, 1.0);
    WaveField u = inverse_fourier(hat);
    ws.nonlinear(u, spec, model(t + dt / 2.0), dt);
    hat = fourier(u);
    ws.kinetic(hat, 1.0);
    return inverse_fourier(hat);
}

struct Trajectory {
    std::vector<double> times;
    std::vector<WaveField> fields;
    bool aliasing_failure = false;
    double failure_time = 0.0;
};

/// Split-step evolution with snapshots at the requested diagnostic times
/// (snapped to the step lattice). Adjacent half-kinetic steps are merged
/// between snapshots. The spectral-tail aliasing guard runs on the in-hand
/// frequency data every 256 steps; a trip stops the run and returns the
/// partial trajectory with the failure flagged.
inline Trajectory evolve(const EvolutionConfig& config) {
    config.validate();
    if (config.initial.rep != Representation::Position)
        throw std::invalid_argument("evolve: initial field must be in position representation");

    long total_steps = std::llround(config.t_end / config.dt);
    if (total_steps < 1) total_steps = 1;
    double dt = config.t_end / double(total_steps);

    // snapshot step indices (unique, sorted)
    std::vector<long> snap_steps;
    for (double t : config.diagnostic_times) {
        long s = std::llround(t / dt);
        s = std::clamp(s, 0L, total_steps);
        if (snap_steps.empty() || snap_steps.back() != s) snap_steps.push_back(s);
    }

    detail::StrangWorkspace ws(config.initial, dt);
    Trajectory traj;
    WaveField u = config.initial;

    std::size_t next_snap = 0;
    auto take_snaps_at = [&](long step) {
        while (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
            traj.times.push_back(step * dt);
            traj.fields.push_back(u);
            ++next_snap;
        }
    };
    take_snaps_at(0);

    long guard_counter = 0;
    WaveField hat = fourier(u);
    ws.kinetic(hat, 1.0);  // leading half kinetic of step 0
    for (long step = 0; step < total_steps; ++step) {
        u = inverse_fourier(hat);
        ws.nonlinear(u, config.nonlinearity, config.model(step * dt + dt / 2.0), dt);
        hat = fourier(u);
        bool boundary = (step + 1 == total_steps) ||
                        (next_snap < snap_steps.size() && snap_steps[next_snap] == step + 1);
        // trailing half kinetic; merged with the next step's leading half
        // unless a snapshot needs the completed state
        ws.kinetic(hat, boundary ? 1.0 : 2.0);
        if (++guard_counter >= 256 || boundary) {
            guard_counter = 0;
            if (spectral_tail_fraction(hat) > 1e-6) {
                traj.aliasing_failure = true;
                traj.failure_time = (step + 1) * dt;
                return traj;
            }
        }
        if (boundary) {
            u = inverse_fourier(hat);
            take_snaps_at(step + 1);
            if (step + 1 < total_steps) {
                hat = fourier(u);
                ws.kinetic(hat, 1.0);  // leading half of the next step
            }
        }
    }
    return traj;
}

/// Direct Picard iteration of the Duhamel map
///   Xi(u)(t) = U0(t,0) u0 - i int_0^t U0(t,s) G(u(s)) ds
/// on a uniform mesh over [0, T], with composite trapezoid quadrature. The
/// integrand is pulled back to s = 0 (scale-preserving quadratic-phase
/// chain), accumulated, and pushed forward, so each sweep costs one chain
/// per mesh node. Returns sup-over-mesh L2 residuals between successive
/// iterates; for contractive data they decay geometrically.
struct PicardResult {
    std::vector<double> residuals;          // ||u_{k+1} - u_k|| per iteration
    std::vector<WaveField> fixed_point;     // final iterate on the mesh
    std::vector<double> mesh;
};

inline PicardResult picard_verify(const EvolutionConfig& config, double T, int iterations,
                                  int mesh_nodes = 128) {
    if (!(T > 0.0) || iterations < 1 || mesh_nodes < 2)
        throw std::invalid_argument("picard_verify: bad arguments");
    ClassicalSolution sol = solve_fundamental(config.model, T * 1.01);
    const NonlinearitySpec& spec = config.nonlinearity;
    double hs = T / (mesh_nodes - 1);

    std::vector<double> mesh(mesh_nodes);
    for (int j = 0; j < mesh_nodes; ++j) mesh[j] = j * hs;

    auto G = [&spec](const WaveField& u) {
        WaveField g = u;
        for (cplx& z : g.samples) {
            double m = std::abs(z);
            double f = 0.0;
            if (spec.nu != 0.0) f += spec.nu * std::pow(m, spec.rho_L);
            if (spec.mu != 0.0) f += spec.mu * std::pow(m, spec.rho_S);
            z *= f;
        }
        return g;
    };

    // u0 pushed forward along the mesh (reused every iteration)
    std::vector<WaveField> lin(mesh_nodes, config.initial);
    for (int j = 1; j < mesh_nodes; ++j)
        lin[j] = propagate(sol, mesh[j], config.initial, FactorizationKind::QuadraticPhase);

    std::vector<WaveField> cur(mesh_nodes, config.initial);  // initial guess: frozen u0
    PicardResult res;
    res.mesh = mesh;

    for (int k = 0; k < iterations; ++k) {
        // pull the integrand back to s = 0
        std::vector<WaveField> g0(mesh_nodes, config.initial);
        g0[0] = G(cur[0]);
        for (int j = 1; j < mesh_nodes; ++j)
            g0[j] = pullback(sol, mesh[j], G(cur[j]), FactorizationKind::QuadraticPhase);

        std::vector<WaveField> next(mesh_nodes, config.initial);
        WaveField acc = config.initial;  // running trapezoid of g0, at s=0 frame
        for (cplx& z : acc.samples) z = 0.0;
        next[0] = config.initial;
        for (int j = 1; j < mesh_nodes; ++j) {
            for (std::size_t i = 0; i < acc.samples.size(); ++i)
                acc.samples[i] += 0.5 * hs * (g0[j - 1].samples[i] + g0[j].samples[i]);
            WaveField integ = acc;
            for (std::size_t i = 0; i < integ.samples.size(); ++i)
                integ.samples[i] = config.initial.samples[i] - cplx(0.0, 1.0) * integ.samples[i];
            next[j] = propagate(sol, mesh[j], integ, FactorizationKind::QuadraticPhase);
        }

        double resid = 0.0;
        for (int j = 0; j < mesh_nodes; ++j) {
            WaveField diff = next[j];
            for (std::size_t i = 0; i < diff.samples.size(); ++i)
                diff.samples[i] -= cur[j].samples[i];
            resid = std::max(resid, diff.l2_norm());
        }
        res.residuals.push_back(resid);
        cur = std::move(next);
    }
    res.fixed_point = std::move(cur);
    return res;
}

} // namespace hillnls

#endif
