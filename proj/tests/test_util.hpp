#ifndef HILLNLS_TEST_UTIL_HPP
#define HILLNLS_TEST_UTIL_HPP

#include <cmath>
#include <functional>
#include <random>

#include "hillnls/fft.hpp"
#include "hillnls/grid.hpp"

namespace hillnls::testutil {

inline WaveField gaussian_field(const Grid& g, cplx q, double scale = 1.0) {
    WaveField f(g, Representation::Position, scale);
    double co[3];
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        f.coords(i, co);
        double r2 = 0.0;
        for (int d = 0; d < g.dim; ++d) r2 += co[d] * co[d];
        f.samples[i] = std::exp(-q * r2);
    }
    return f;
}

/// Random smooth localized field: random spectrum supported on |xi| <=
/// xi_max, inverse transformed, then damped by a Gaussian envelope of the
/// given width so both tails are far below the comparison tolerances.
/// Normalized in L2.
inline WaveField smooth_random_field(const Grid& g, unsigned seed, double xi_max,
                                     double envelope_width, double scale = 1.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    WaveField hat(g, Representation::Frequency, 1.0 / scale);
    int N = g.n_per_axis;
    for (std::size_t i = 0; i < hat.samples.size(); ++i) {
        std::size_t fl = i;
        double k2 = 0.0;
        for (int d = 0; d < g.dim; ++d) {
            double xi = g.dual_node(int(fl % std::size_t(N))) / scale;
            fl /= std::size_t(N);
            k2 += xi * xi;
        }
        if (k2 <= xi_max * xi_max) hat.samples[i] = cplx(nd(rng), nd(rng));
    }
    WaveField f = inverse_fourier(hat);
    double co[3];
    double w2 = 2.0 * envelope_width * envelope_width;
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        f.coords(i, co);
        double r2 = 0.0;
        for (int d = 0; d < g.dim; ++d) r2 += co[d] * co[d];
        f.samples[i] *= std::exp(-r2 / w2);
    }
    double n = f.l2_norm();
    for (cplx& z : f.samples) z /= n;
    return f;
}

/// Relative L2 error of a field against a closed-form function of the
/// physical coordinates.
inline double rel_error_vs(const WaveField& f,
                           const std::function<cplx(const double*)>& fn) {
    double err = 0.0, nrm = 0.0;
    double co[3];
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        f.coords(i, co);
        cplx want = fn(co);
        err += std::norm(f.samples[i] - want);
        nrm += std::norm(want);
    }
    return std::sqrt(err / nrm);
}

} // namespace hillnls::testutil

#endif
