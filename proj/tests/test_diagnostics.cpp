#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hillnls/diagnostics.hpp"
#include "test_util.hpp"

using namespace hillnls;
using namespace hillnls::testutil;

TEST_CASE("weighted norms of the unit Gaussian match closed forms") {
    Grid g(1, 1024, 30.0);
    WaveField f = gaussian_field(g, cplx(0.5, 0.0));  // e^{-x^2/2}, self-dual
    NormSet n0 = weighted_norms(f, 0.0);
    double pi4 = std::pow(M_PI, 0.25);
    CHECK(n0.l2 == doctest::Approx(pi4).epsilon(1e-12));
    CHECK(n0.linf == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n0.h_0gamma == doctest::Approx(n0.l2).epsilon(1e-12));
    CHECK(n0.h_gamma0 == doctest::Approx(n0.l2).epsilon(1e-12));

    // int (1 + x^2) e^{-x^2} = sqrt(pi) * 3/2, and e^{-x^2/2} is self-dual
    NormSet n1 = weighted_norms(f, 1.0);
    double want = std::sqrt(1.5 * std::sqrt(M_PI));
    CHECK(n1.h_0gamma == doctest::Approx(want).epsilon(1e-12));
    CHECK(n1.h_gamma0 == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("pseudo-energy norm: limits at t = 0 and gamma = 0") {
    Grid g(1, 1024, 30.0);
    WaveField f = smooth_random_field(g, 3, 2.0, 5.0);
    auto sol = solve_fundamental(SigmaModel::inverse_square(0.15), 4.0);
    double gamma = 1.5;
    // at t = 0, alpha = x^2: the norm is exactly the weighted position norm
    CHECK(pseudo_energy_norm(sol, 0.0, f, gamma) ==
          doctest::Approx(weighted_norms(f, gamma).h_0gamma).epsilon(1e-12));
    // gamma = 0 collapses to L2 at any time
    for (double t : {0.0, 1.0, 3.0})
        CHECK(pseudo_energy_norm(sol, t, f, 0.0) ==
              doctest::Approx(f.l2_norm()).epsilon(1e-10));
}

TEST_CASE("pseudo-energy is constant along the linear flow on every preset") {
    Grid g(1, 2048, 60.0);
    double gamma = 1.5;
    for (auto model : {SigmaModel::zero(), SigmaModel::constant(-1.0),
                       SigmaModel::constant(1.0), SigmaModel::inverse_square(0.15)}) {
        auto sol = solve_fundamental(model, 4.0, 1e-12);
        WaveField f = smooth_random_field(g, 7, 2.0, 4.0);
        double e0 = weighted_norms(f, gamma).h_0gamma;  // value of the invariant at t = 0
        for (double t : {0.5, 1.5, 3.0}) {
            WaveField u = propagate(sol, t, f);
            double et = pseudo_energy_norm(sol, t, u, gamma);
            CHECK(std::fabs(et / e0 - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("profile undoes the linear flow: v^(t) = u0^ for linear evolution") {
    Grid g(1, 2048, 60.0);
    for (auto model : {SigmaModel::zero(), SigmaModel::constant(1.0),
                       SigmaModel::inverse_square(0.15)}) {
        auto sol = solve_fundamental(model, 4.0, 1e-12);
        WaveField f = smooth_random_field(g, 9, 2.0, 4.0);
        WaveField hat0 = fourier(f);
        for (double t : {0.5, 2.0, 3.5}) {
            // scale-preserving chain: u(t) lives on the same frame as the
            // trajectory snapshots that profile() is fed in practice
            WaveField u = propagate(sol, t, f, FactorizationKind::QuadraticPhase);
            WaveField v = profile(sol, t, u);
            CHECK(v.rep == Representation::Frequency);
            CHECK(rel_l2_diff(v, hat0) < 1e-8);
        }
    }
}

TEST_CASE("accumulated long-range phase matches the closed-form quadrature for sigma = 0") {
    // zeta2(tau) = tau, rho_L = 2, n = 1: phase = nu |g^(xi)|^2 log(t/t0)
    Grid g(1, 512, 25.0);
    auto sol = solve_fundamental(SigmaModel::zero(), 12.0);
    WaveField ghat = fourier(gaussian_field(g, cplx(0.5, 0.0)));
    ProfileSeries s;
    int m = 2000;
    for (int j = 0; j <= m; ++j) {
        s.times.push_back(1.0 + 9.0 * j / m);
        s.v_hat.push_back(ghat);
    }
    NonlinearitySpec spec(0.7, 0.0, 2.0, 3.0);
    accumulate_phase(s, sol, spec);
    REQUIRE(s.w_hat.size() == s.times.size());
    for (std::size_t j : {std::size_t(0), s.times.size() / 2, s.times.size() - 1}) {
        double t = s.times[j];
        for (std::size_t i = 0; i < ghat.samples.size(); i += 37) {
            double want = spec.nu * std::norm(ghat.samples[i]) * std::log(t / 1.0);
            CHECK(s.accumulated_phase[j][i] == doctest::Approx(want).epsilon(1e-5));
            // unimodular correction
            CHECK(std::abs(s.w_hat[j].samples[i]) ==
                  doctest::Approx(std::abs(ghat.samples[i])).epsilon(1e-13));
        }
        // phase is nonnegative and nondecreasing for nu > 0
        if (j > 0)
            for (std::size_t i = 0; i < ghat.samples.size(); i += 119)
                CHECK(s.accumulated_phase[j][i] >= s.accumulated_phase[j - 1][i]);
    }
}

TEST_CASE("least-squares line recovers exact affine data") {
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(0.3 * i - 2.0);
        y.push_back(-1.7 * x.back() + 0.45);
    }
    LinearFit f = least_squares_line(x, y);
    CHECK(f.slope == doctest::Approx(-1.7).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(0.45).epsilon(1e-12));
    CHECK(f.residual < 1e-12);
    CHECK_THROWS(least_squares_line({1.0}, {2.0}));
    CHECK_THROWS(least_squares_line({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}));
}

TEST_CASE("decay fit recovers a synthetic power law to 1e-6") {
    Grid g(1, 16, 5.0);
    auto sol = solve_fundamental(SigmaModel::zero(), 110.0);
    ProfileSeries s;
    for (double t = 2.0; t <= 100.0; t *= 1.15) {
        s.times.push_back(t);
        NormSet n;
        n.linf = 2.4 * std::pow(t, -0.5);
        s.norms.push_back(n);
        s.v_hat.push_back(WaveField(g));
    }
    DecayFit f = decay_fit(s, sol);
    CHECK(f.vs_log_t.slope == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(f.vs_log_t.residual < 1e-10);
    // against log(1 + zeta2) = log(1 + t) the law is not a pure power;
    // the fitted slope still sits near -0.5 for t in [2, 100]
    CHECK(f.vs_log_zeta2.slope == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("cauchy rates: synthetic t^{-1} tail and converged flag") {
    Grid g(1, 64, 8.0);
    auto sol = solve_fundamental(SigmaModel::zero(), 60.0);
    WaveField base = gaussian_field(g, cplx(0.5, 0.0));
    WaveField bump = gaussian_field(g, cplx(2.0, 0.3));

    ProfileSeries s;
    for (double t = 2.0; t <= 50.0; t *= 1.2) {
        WaveField v = base;
        for (std::size_t i = 0; i < v.samples.size(); ++i)
            v.samples[i] += bump.samples[i] / t;
        s.times.push_back(t);
        s.v_hat.push_back(v);
    }
    s.w_hat = s.v_hat;  // treat the same series as corrected
    NormKind kinds[] = {NormKind::L2, NormKind::Linf};
    for (NormKind k : kinds) {
        CauchyRates r = cauchy_rates(s, k, 2.0, 30.0);
        CHECK(!r.corrected_converged);
        // ||v(t) - v(t_last)|| = ||bump|| (1/t - 1/t_last): slope -> -1 as
        // t_last recedes; with t_last = 50 and the window up to 30 the
        // effective slope steepens slightly past -1
        CHECK(r.corrected.slope == doctest::Approx(-1.0).epsilon(0.25));
        CHECK(r.corrected.slope < -0.9);
    }

    // identical entries: everything below the floor, flagged converged
    ProfileSeries c;
    for (double t = 2.0; t <= 50.0; t *= 1.2) {
        c.times.push_back(t);
        c.v_hat.push_back(base);
    }
    c.w_hat = c.v_hat;
    CauchyRates r = cauchy_rates(c, NormKind::L2);
    CHECK(r.corrected_converged);
    CHECK(r.uncorrected_converged);
}

TEST_CASE("amplitude splitting bounds the sup norm along a linear Gaussian flow") {
    Grid g(1, 2048, 60.0);
    auto sol = solve_fundamental(SigmaModel::inverse_square(0.15), 6.0, 1e-12);
    WaveField f = gaussian_field(g, cplx(0.5, 0.0));
    for (double t : {1.0, 2.5, 5.0}) {
        WaveField u = propagate(sol, t, f);
        if (u.scale != 1.0) u = resample_to_scale(u, 1.0);
        LinftySplit sp = linfty_split_check(sol, t, u, 0.4, 1.5);
        CHECK(sp.actual_linf <= 1.0000001 * (sp.main_term + sp.remainder_bound));
        // the main term alone tracks the true sup norm at dispersive times
        CHECK(sp.main_term == doctest::Approx(sp.actual_linf).epsilon(0.5));
    }
}

TEST_CASE("build_profile_series drops times before r0 and fills every record") {
    Grid g(1, 512, 25.0);
    EvolutionConfig cfg;
    cfg.model = SigmaModel::inverse_square(0.15);
    cfg.initial = gaussian_field(g, cplx(0.5, 0.0));
    cfg.t_end = 2.0;
    cfg.dt = 1e-3;
    cfg.diagnostic_times = {0.25, 0.5, 1.0, 1.5, 2.0};
    Trajectory traj = evolve(cfg);
    REQUIRE(!traj.aliasing_failure);
    auto sol = solve_fundamental(cfg.model, 2.5);
    ProfileSeries s = build_profile_series(traj, sol, 0.5, 1.5);
    REQUIRE(s.times.size() == 4);
    CHECK(s.times.front() == doctest::Approx(0.5));
    for (const NormSet& n : s.norms) {
        CHECK(n.l2 > 0.0);
        CHECK(n.pseudo_energy > 0.0);
        CHECK(n.h_gamma0 >= n.l2);
        CHECK(n.h_0gamma >= n.l2);
    }
    // linear run: pseudo-energy flat across the series
    for (const NormSet& n : s.norms)
        CHECK(std::fabs(n.pseudo_energy / s.norms.front().pseudo_energy - 1.0) < 1e-5);
}
