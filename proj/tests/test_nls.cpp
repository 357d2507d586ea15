#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hillnls/nls.hpp"
#include "test_util.hpp"

using namespace hillnls;
using namespace hillnls::testutil;

namespace {

double rel_diff_samples(const WaveField& a, const WaveField& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        num += std::norm(a.samples[i] - b.samples[i]);
        den += std::norm(b.samples[i]);
    }
    return std::sqrt(num / den);
}

} // namespace

TEST_CASE("nonlinear phase step: identity for linear spec, exact pointwise rotation otherwise") {
    Grid g(1, 256, 15.0);
    WaveField f = gaussian_field(g, cplx(0.5, 0.2));
    WaveField same = nonlinear_phase_step(f, NonlinearitySpec{}, 0.0, 0.1);
    CHECK(rel_diff_samples(same, f) == 0.0);

    NonlinearitySpec spec(1.3, -0.4, 2.0, 3.0);
    double dt = 0.05, sig = 0.7;
    WaveField out = nonlinear_phase_step(f, spec, sig, dt);
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        double m = std::abs(f.samples[i]);
        // modulus exactly preserved
        CHECK(std::abs(out.samples[i]) == doctest::Approx(m).epsilon(1e-14));
        double x = g.node(int(i));
        double ph = -dt * (0.5 * sig * x * x + spec.nu * m * m + spec.mu * m * m * m);
        cplx want = f.samples[i] * cplx(std::cos(ph), std::sin(ph));
        CHECK(std::abs(out.samples[i] - want) < 1e-14);
    }
}

TEST_CASE("strang evolution conserves mass to 1e-10 over 10^4 steps") {
    Grid g(1, 256, 20.0);
    EvolutionConfig cfg;
    cfg.model = SigmaModel::constant(1.0);
    cfg.nonlinearity = NonlinearitySpec(1.0, 0.5, 2.0, 3.0);
    cfg.initial = gaussian_field(g, cplx(0.5, 0.0));
    cfg.t_end = 10.0;
    cfg.dt = 1e-3;
    cfg.diagnostic_times = {10.0};
    Trajectory traj = evolve(cfg);
    REQUIRE(!traj.aliasing_failure);
    REQUIRE(traj.fields.size() == 1);
    double n0 = cfg.initial.l2_norm();
    CHECK(std::fabs(traj.fields.back().l2_norm() / n0 - 1.0) < 1e-10);
}

TEST_CASE("gauge covariance: a global phase on the data rides through unchanged") {
    Grid g(1, 256, 20.0);
    EvolutionConfig cfg;
    cfg.model = SigmaModel::inverse_square(0.15);
    cfg.nonlinearity = NonlinearitySpec(1.0, 0.0, 2.0, 3.0);
    cfg.initial = gaussian_field(g, cplx(0.5, 0.0));
    cfg.t_end = 1.0;
    cfg.dt = 1e-3;
    cfg.diagnostic_times = {1.0};
    Trajectory a = evolve(cfg);

    cplx w(std::cos(0.8), std::sin(0.8));
    for (cplx& z : cfg.initial.samples) z *= w;
    Trajectory b = evolve(cfg);
    WaveField rotated = a.fields.back();
    for (cplx& z : rotated.samples) z *= w;
    CHECK(rel_diff_samples(b.fields.back(), rotated) < 1e-13);
}

TEST_CASE("linear limit converges at second order to the factorized propagator") {
    Grid g(1, 1024, 40.0);
    EvolutionConfig cfg;
    cfg.model = SigmaModel::inverse_square(0.15);
    cfg.initial = gaussian_field(g, cplx(0.5, 0.0));
    cfg.t_end = 1.5;
    cfg.diagnostic_times = {1.5};
    auto sol = solve_fundamental(cfg.model, 2.0);
    WaveField ref = propagate(sol, 1.5, cfg.initial, FactorizationKind::QuadraticPhase);
    std::vector<double> errs;
    for (double dt : {2e-3, 1e-3, 5e-4}) {
        cfg.dt = dt;
        Trajectory traj = evolve(cfg);
        REQUIRE(!traj.aliasing_failure);
        errs.push_back(rel_l2_diff(traj.fields.back(), ref));
    }
    CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.15));
    CHECK(errs[1] / errs[2] == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("nonlinear self-convergence: dt halving shrinks the change by ~4") {
    Grid g(1, 512, 25.0);
    EvolutionConfig cfg;
    cfg.model = SigmaModel::constant(-1.0);
    cfg.nonlinearity = NonlinearitySpec(1.0, 0.0, 2.0, 3.0);
    cfg.initial = gaussian_field(g, cplx(0.5, 0.0));
    cfg.t_end = 1.0;
    cfg.diagnostic_times = {1.0};
    std::vector<WaveField> sols;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        cfg.dt = dt;
        Trajectory traj = evolve(cfg);
        REQUIRE(!traj.aliasing_failure);
        sols.push_back(traj.fields.back());
    }
    double d01 = rel_diff_samples(sols[0], sols[1]);
    double d12 = rel_diff_samples(sols[1], sols[2]);
    CHECK(d01 / d12 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("snapshots land on the requested diagnostic times") {
    Grid g(1, 256, 20.0);
    EvolutionConfig cfg;
    cfg.initial = gaussian_field(g, cplx(0.5, 0.0));
    cfg.t_end = 1.0;
    cfg.dt = 1e-2;
    cfg.diagnostic_times = {0.0, 0.25, 0.5, 0.503, 1.0};  // 0.503 snaps onto 0.5
    Trajectory traj = evolve(cfg);
    REQUIRE(traj.times.size() == 4);
    CHECK(traj.times[0] == 0.0);
    CHECK(traj.times[1] == doctest::Approx(0.25));
    CHECK(traj.times[2] == doctest::Approx(0.5));
    CHECK(traj.times[3] == doctest::Approx(1.0));
    CHECK(rel_diff_samples(traj.fields[0], cfg.initial) == 0.0);
}

TEST_CASE("zero data stays zero") {
    Grid g(1, 256, 20.0);
    EvolutionConfig cfg;
    cfg.model = SigmaModel::constant(1.0);
    cfg.nonlinearity = NonlinearitySpec(1.0, 1.0, 2.0, 3.0);
    cfg.initial = WaveField(g);
    cfg.t_end = 0.5;
    cfg.dt = 1e-3;
    cfg.diagnostic_times = {0.5};
    Trajectory traj = evolve(cfg);
    CHECK(traj.fields.back().l2_norm() == 0.0);
}

TEST_CASE("aliasing guard stops the run and flags a partial trajectory") {
    // strong focusing nonlinearity on a coarse grid drives spectral mass to
    // the Nyquist edge well before t_end
    Grid g(1, 128, 8.0);
    EvolutionConfig cfg;
    cfg.nonlinearity = NonlinearitySpec(-80.0, 0.0, 2.0, 3.0);
    cfg.initial = gaussian_field(g, cplx(1.0, 0.0));
    cfg.t_end = 5.0;
    cfg.dt = 1e-3;
    cfg.diagnostic_times = {0.1, 5.0};
    Trajectory traj = evolve(cfg);
    CHECK(traj.aliasing_failure);
    CHECK(traj.failure_time < 5.0);
    CHECK(traj.fields.size() < 2);
}

TEST_CASE("picard iteration: linear problem converges in one sweep") {
    Grid g(1, 512, 25.0);
    EvolutionConfig cfg;
    cfg.model = SigmaModel::inverse_square(0.15);
    cfg.initial = gaussian_field(g, cplx(0.5, 0.0));
    PicardResult pr = picard_verify(cfg, 0.5, 3, 48);
    REQUIRE(pr.residuals.size() == 3);
    // first sweep replaces the frozen guess, afterwards the map is constant
    CHECK(pr.residuals[1] < 1e-12);
    CHECK(pr.residuals[2] < 1e-12);
    // fixed point equals the linear flow
    auto sol = solve_fundamental(cfg.model, 0.6);
    WaveField ref = propagate(sol, 0.5, cfg.initial, FactorizationKind::QuadraticPhase);
    CHECK(rel_l2_diff(pr.fixed_point.back(), ref) < 1e-9);
}

TEST_CASE("picard iteration contracts geometrically on short intervals") {
    Grid g(1, 512, 25.0);
    EvolutionConfig cfg;
    cfg.model = SigmaModel::inverse_square(0.15);
    cfg.nonlinearity = NonlinearitySpec(1.0, 0.0, 2.0, 3.0);
    cfg.initial = gaussian_field(g, cplx(0.5, 0.0));
    PicardResult pr = picard_verify(cfg, 0.5, 6, 64);
    for (std::size_t k = 1; k < pr.residuals.size(); ++k) {
        if (pr.residuals[k - 1] < 1e-13) break;  // converged to roundoff
        CHECK(pr.residuals[k] / pr.residuals[k - 1] < 0.5);
    }
}

TEST_CASE("picard fixed point agrees with the split-step evolution") {
    Grid g(1, 512, 25.0);
    EvolutionConfig cfg;
    cfg.model = SigmaModel::inverse_square(0.15);
    cfg.nonlinearity = NonlinearitySpec(1.0, 0.0, 2.0, 3.0);
    cfg.initial = gaussian_field(g, cplx(0.5, 0.0));
    cfg.t_end = 0.5;
    cfg.dt = 2.5e-4;
    cfg.diagnostic_times = {0.5};
    Trajectory traj = evolve(cfg);
    REQUIRE(!traj.aliasing_failure);
    PicardResult pr = picard_verify(cfg, 0.5, 8, 256);
    CHECK(rel_l2_diff(pr.fixed_point.back(), traj.fields.back()) < 1e-4);
}
