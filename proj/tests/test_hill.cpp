#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hillnls/hill.hpp"
#include "hillnls/sigma.hpp"

using namespace hillnls;

TEST_CASE("sigma presets evaluate") {
    CHECK(SigmaModel::zero()(3.7) == 0.0);
    CHECK(SigmaModel::constant(-1.0)(5.0) == -1.0);
    CHECK(SigmaModel::inverse_square(0.15)(0.0) == doctest::Approx(0.15));
    CHECK(SigmaModel::inverse_square(0.15)(10.0) ==
          doctest::Approx(0.15 / 101.0));
    // lambda = (1 - sqrt(1 - 4k))/2
    CHECK(SigmaModel::inverse_square(0.15).lambda() ==
          doctest::Approx((1.0 - std::sqrt(0.4)) / 2.0));
    CHECK(SigmaModel::zero().lambda() == 0.0);
    CHECK_THROWS(SigmaModel::inverse_square(0.25));
    CHECK_THROWS(SigmaModel::inverse_square(-0.1));
}

TEST_CASE("tabulated sigma interpolates and guards its span") {
    auto m = SigmaModel::tabulated({{-1.0, 2.0}, {0.0, 0.0}, {2.0, 4.0}});
    CHECK(m(-1.0) == 2.0);
    CHECK(m(-0.5) == doctest::Approx(1.0));
    CHECK(m(1.0) == doctest::Approx(2.0));
    CHECK(m.covers(2.0));
    CHECK(!m.covers(2.5));
    CHECK_THROWS(m(3.0));
    CHECK_THROWS(SigmaModel::tabulated({{0.0, 1.0}}));
    CHECK_THROWS(SigmaModel::tabulated({{1.0, 1.0}, {1.0, 2.0}}));

    const char* path = "sigma_table_test.csv";
    {
        std::ofstream out(path);
        out << "t,sigma\n-2,0.5\n0,1.5\n2,2.5\n";
    }
    auto c = SigmaModel::from_csv(path);
    CHECK(c(-1.0) == doctest::Approx(1.0));
    CHECK(c(2.0) == doctest::Approx(2.5));
    std::remove(path);
}

TEST_CASE("free model gives (1, t) exactly within dense-output accuracy") {
    auto sol = solve_fundamental(SigmaModel::zero(), 30.0);
    for (double t : {0.0, 0.3, 2.5, -7.1, 19.99, -30.0}) {
        auto s = sol.eval(t);
        CHECK(s.zeta1 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.zeta1p == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(s.zeta2 == doctest::Approx(t).epsilon(1e-12));
        CHECK(s.zeta2p == doctest::Approx(1.0).epsilon(1e-12));
        // theta = int 1/(1+tau^2) = arctan t
        CHECK(s.theta == doctest::Approx(std::atan(t)).epsilon(1e-8));
    }
    CHECK(sol.zero_count(25.0) == 0);
}

TEST_CASE("constant(-1) matches cosh/sinh on [0,20], constant(+1) matches cos/sin") {
    auto neg = solve_fundamental(SigmaModel::constant(-1.0), 20.0);
    for (double t = 0.0; t <= 20.0; t += 0.7) {
        auto s = neg.eval(t);
        CHECK(s.zeta1 == doctest::Approx(std::cosh(t)).epsilon(1e-8));
        CHECK(s.zeta2 == doctest::Approx(std::sinh(t)).epsilon(1e-8));
        CHECK(s.zeta1p == doctest::Approx(std::sinh(t)).epsilon(1e-8));
        CHECK(s.zeta2p == doctest::Approx(std::cosh(t)).epsilon(1e-8));
    }
    CHECK(neg.zero_count(10.0) == 0);

    auto pos = solve_fundamental(SigmaModel::constant(1.0), 20.0);
    for (double t = -20.0; t <= 20.0; t += 0.9) {
        auto s = pos.eval(t);
        CHECK(s.zeta1 == doctest::Approx(std::cos(t)).epsilon(1e-8));
        CHECK(s.zeta2 == doctest::Approx(std::sin(t)).epsilon(1e-8));
    }
    // zeros of cos at pi/2 + k pi
    CHECK(pos.zero_count(2.0) == 1);
    CHECK(pos.zero_count(10.0) == 3);
    CHECK(pos.zero_count(-2.0) == 1);
    CHECK(pos.zero_count(0.0) == 0);
    CHECK(pos.zeta1_zeros_positive()[0] == doctest::Approx(M_PI / 2).epsilon(1e-9));
}

TEST_CASE("Wronskian residual stays under budget on [-50, 50] for all presets") {
    for (auto model : {SigmaModel::zero(), SigmaModel::constant(-1.0),
                       SigmaModel::constant(1.0), SigmaModel::inverse_square(0.15)}) {
        auto sol = solve_fundamental(model, 50.0, 1e-13);
        CHECK(sol.max_wronskian_residual() < 1e-9);
        for (double t : {-50.0, -17.3, 1.0, 33.3, 50.0})
            CHECK(sol.wronskian_residual(t) < 1e-9);
    }
}

TEST_CASE("inverse-square growth exponent of zeta2 fits 1 - lambda") {
    auto model = SigmaModel::inverse_square(0.15);
    double lambda = model.lambda();
    auto sol = solve_fundamental(model, 1.2e4);
    // least-squares slope of log zeta2 vs log t on [1e2, 1e4]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double t = 100.0; t <= 1e4; t *= 1.2) {
        double x = std::log(t), y = std::log(sol.zeta2(t));
        sx += x; sy += y; sxx += x * x; sxy += x * y; ++n;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(1.0 - lambda).epsilon(0.02));
    // the ratio zeta2/t^{1-lambda} settles to a nonzero constant
    double r1 = sol.zeta2(5e3) / std::pow(5e3, 1.0 - lambda);
    double r2 = sol.zeta2(1e4) / std::pow(1e4, 1.0 - lambda);
    CHECK(r1 > 0.0);
    CHECK(r2 / r1 == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("factor coefficients: closed-form spot checks") {
    auto zero = solve_fundamental(SigmaModel::zero(), 5.0);
    auto fc = zero.factor_coefficients(2.0);
    REQUIRE(fc.quadratic_phase.has_value());
    CHECK(fc.quadratic_phase->a == doctest::Approx(0.0));
    CHECK(fc.quadratic_phase->b == doctest::Approx(1.0));
    CHECK(fc.quadratic_phase->c == doctest::Approx(0.0));

    // t = 0 for any model: a1 = 1, a2 = 0, theta = 0; zeta2 = 0 kills the
    // quadratic-phase and MDFM sets
    auto neg = solve_fundamental(SigmaModel::constant(-1.0), 5.0);
    auto fc0 = neg.factor_coefficients(0.0);
    CHECK(fc0.mdmdfm.a1 == doctest::Approx(1.0));
    CHECK(fc0.mdmdfm.a2 == doctest::Approx(0.0));
    CHECK(fc0.mdmdfm.theta == doctest::Approx(0.0));
    CHECK(!fc0.quadratic_phase.has_value());
    CHECK(!fc0.mdfm.has_value());
    REQUIRE(fc0.korotyaev.has_value());

    auto fc1 = neg.factor_coefficients(1.0);
    REQUIRE(fc1.korotyaev.has_value());
    CHECK(fc1.korotyaev->chirp == doctest::Approx(std::tanh(1.0) / 2).epsilon(1e-8));
    CHECK(fc1.korotyaev->log_dilate == doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-8));
    REQUIRE(fc1.mdfm.has_value());
    CHECK(fc1.mdfm->dilate == doctest::Approx(std::sinh(1.0)).epsilon(1e-8));

    // constant(+1): a1 = 1, a2 = 0, theta = t for all t
    auto pos = solve_fundamental(SigmaModel::constant(1.0), 8.0);
    for (double t : {0.5, 2.0, 7.5, -3.0}) {
        auto f = pos.factor_coefficients(t);
        CHECK(f.mdmdfm.a1 == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(f.mdmdfm.a2 == doctest::Approx(0.0).epsilon(1e-8));
        CHECK(f.mdmdfm.theta == doctest::Approx(t).epsilon(1e-8));
    }
}

TEST_CASE("a1 is positive and bounded, zeta1/zeta2 never vanish together") {
    for (auto model : {SigmaModel::zero(), SigmaModel::constant(-1.0),
                       SigmaModel::constant(1.0), SigmaModel::inverse_square(0.15)}) {
        auto sol = solve_fundamental(model, 20.0);
        double amin = 1e300, amax = 0.0;
        for (double t = -20.0; t <= 20.0; t += 0.05) {
            auto fc = sol.factor_coefficients(t);
            amin = std::min(amin, fc.mdmdfm.a1);
            amax = std::max(amax, fc.mdmdfm.a1);
            auto s = sol.eval(t);
            CHECK(std::max(std::fabs(s.zeta1), std::fabs(s.zeta2)) >
                  0.1 * std::min(1.0, 1.0 / std::max(std::fabs(s.zeta1p), std::fabs(s.zeta2p))));
        }
        CHECK(amin > 0.0);
        CHECK(amax < 1e300);
    }
}

TEST_CASE("solution export and query guards") {
    auto sol = solve_fundamental(SigmaModel::zero(), 2.0);
    CHECK_THROWS(sol.eval(3.0));
    CHECK_THROWS(solve_fundamental(SigmaModel::zero(), -1.0));
    CHECK_THROWS(solve_fundamental(
        SigmaModel::tabulated({{-1.0, 0.0}, {1.0, 0.0}}), 5.0));

    const char* path = "classical_export_test.csv";
    sol.export_csv(path, {0.0, 1.0, 2.0});
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,zeta1,zeta1p,zeta2,zeta2p,nu,wronskian_residual");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 3);
    std::remove(path);
}
