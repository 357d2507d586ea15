#ifndef HILLNLS_FFT_HPP
#define HILLNLS_FFT_HPP

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace hillnls {
namespace detail {

/// Cached FFTW plans per (dim, N). Plans use FFTW_ESTIMATE so planning is
/// deterministic and results are reproducible run to run. One cache per
/// thread (the plan buffers are stateful); the FFTW planner itself is
/// serialized by a global lock.
class FftPlans {
public:
    static FftPlans& instance() {
        static thread_local FftPlans p;
        return p;
    }

    void execute(const Grid& g, std::vector<cplx>& data, int sign) {
        Entry& e = entry(g);
        fftw_complex* buf = reinterpret_cast<fftw_complex*>(e.buffer);
        for (std::size_t i = 0; i < data.size(); ++i) {
            buf[i][0] = data[i].real();
            buf[i][1] = data[i].imag();
        }
        fftw_execute(sign == FFTW_FORWARD ? e.fwd : e.bwd);
        for (std::size_t i = 0; i < data.size(); ++i)
            data[i] = cplx(buf[i][0], buf[i][1]);
    }

private:
    struct Entry {
        cplx* buffer = nullptr;
        fftw_plan fwd = nullptr, bwd = nullptr;
        std::size_t size = 0;
    };

    Entry& entry(const Grid& g) {
        auto key = std::make_pair(g.dim, g.n_per_axis);
        auto it = entries_.find(key);
        if (it != entries_.end()) return it->second;
        Entry e;
        e.size = g.total();
        e.buffer = static_cast<cplx*>(fftw_malloc(sizeof(cplx) * e.size));
        if (!e.buffer) throw std::bad_alloc();
        int dims[3] = {g.n_per_axis, g.n_per_axis, g.n_per_axis};
        fftw_complex* b = reinterpret_cast<fftw_complex*>(e.buffer);
        {
            std::lock_guard<std::mutex> guard(planner_mutex());
            e.fwd = fftw_plan_dft(g.dim, dims, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
            e.bwd = fftw_plan_dft(g.dim, dims, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        return entries_.emplace(key, e).first->second;
    }

    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

    ~FftPlans() {
        std::lock_guard<std::mutex> guard(planner_mutex());
        for (auto& [k, e] : entries_) {
            if (e.fwd) fftw_destroy_plan(e.fwd);
            if (e.bwd) fftw_destroy_plan(e.bwd);
            if (e.buffer) fftw_free(e.buffer);
        }
    }

    std::map<std::pair<int, int>, Entry> entries_;
};

/// Checkerboard sign (-1)^(j1+j2+...): shifts the DFT so node/frequency
/// indexing is symmetric about the origin.
inline void apply_checkerboard(const Grid& g, std::vector<cplx>& data) {
    int N = g.n_per_axis;
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t f = i;
        int parity = 0;
        for (int d = 0; d < g.dim; ++d) {
            parity ^= int(f % std::size_t(N)) & 1;
            f /= std::size_t(N);
        }
        if (parity) data[i] = -data[i];
    }
}

} // namespace detail

/// Unitary continuum Fourier transform, kernel (2pi)^(-n/2) e^(-i x.xi),
/// realized on the grid by a phase-shifted FFT. Representation flips to
/// Frequency and the scale inverts (physical frequency = node / scale).
///
/// With relabel = true the transform variable becomes the new position
/// coordinate (the factor chains treat the operator output as a function of
/// x again). The output samples still live on the dual lattice, so the
/// relabeled scale absorbs the lattice ratio dual_spacing/spacing:
/// scale_out = ratio / scale_in.
inline WaveField fourier(const WaveField& f, bool relabel = false) {
    if (f.rep != Representation::Position)
        throw std::invalid_argument("fourier: field must be in position representation");
    WaveField out = f;
    detail::apply_checkerboard(f.grid, out.samples);
    detail::FftPlans::instance().execute(f.grid, out.samples, FFTW_FORWARD);
    detail::apply_checkerboard(f.grid, out.samples);
    double amp = 1.0;
    for (int d = 0; d < f.grid.dim; ++d)
        amp *= f.grid.spacing() / std::sqrt(2.0 * M_PI) * std::fabs(f.scale);
    for (cplx& z : out.samples) z *= amp;
    if (relabel) {
        out.scale = (f.grid.dual_spacing() / f.grid.spacing()) / f.scale;
        out.rep = Representation::Position;
    } else {
        out.scale = 1.0 / f.scale;
        out.rep = Representation::Frequency;
    }
    return out;
}

/// Inverse transform. With relabel = true this is the exact inverse of
/// fourier(., relabel = true): the Position-tagged input is read as
/// frequency data of effective scale scale/ratio.
inline WaveField inverse_fourier(const WaveField& f, bool relabel = false) {
    WaveField out = f;
    double eff = relabel ? f.scale / (f.grid.dual_spacing() / f.grid.spacing()) : f.scale;
    detail::apply_checkerboard(f.grid, out.samples);
    detail::FftPlans::instance().execute(f.grid, out.samples, FFTW_BACKWARD);
    detail::apply_checkerboard(f.grid, out.samples);
    double amp = 1.0;
    for (int d = 0; d < f.grid.dim; ++d)
        amp *= f.grid.dual_spacing() / std::sqrt(2.0 * M_PI) * std::fabs(eff);
    for (cplx& z : out.samples) z *= amp;
    out.scale = 1.0 / eff;
    out.rep = Representation::Position;
    return out;
}

/// Fraction of L2 mass carried by the outer `edge` fraction of frequency
/// nodes (any axis). The input may be in either representation.
inline double spectral_tail_fraction(const WaveField& f, double edge = 0.1) {
    WaveField hat = f.rep == Representation::Position ? fourier(f) : f;
    int N = f.grid.n_per_axis;
    int cutoff = int((1.0 - edge) * (N / 2));
    double tail = 0.0, total = 0.0;
    for (std::size_t i = 0; i < hat.samples.size(); ++i) {
        double m = std::norm(hat.samples[i]);
        total += m;
        std::size_t fl = i;
        bool outer = false;
        for (int d = 0; d < f.grid.dim; ++d) {
            int j = int(fl % std::size_t(N));
            fl /= std::size_t(N);
            if (std::abs(j - N / 2) >= cutoff) outer = true;
        }
        if (outer) tail += m;
    }
    return total > 0.0 ? tail / total : 0.0;
}

/// Trigonometric resampling onto the same node lattice read at a different
/// scale: evaluates the field's trigonometric interpolant at the physical
/// points target_scale * node. Exact for band-limited data when
/// |target_scale| <= |scale| (the target window sits inside the source
/// support); outside that the periodic extension is sampled.
inline WaveField resample_to_scale(const WaveField& f, double target_scale) {
    if (target_scale == 0.0) throw std::invalid_argument("resample: zero target scale");
    if (target_scale == f.scale) return f;
    int N = f.grid.n_per_axis;
    double ratio = target_scale / f.scale;

    // 1D evaluation matrix applied per axis: e_m(k) = coeff phases at
    // node ratio * x_m. Coefficients from the centered DFT.
    std::vector<cplx> data = f.samples;
    detail::apply_checkerboard(f.grid, data);
    detail::FftPlans::instance().execute(f.grid, data, FFTW_FORWARD);
    detail::apply_checkerboard(f.grid, data);
    for (cplx& z : data) z /= double(N) * (f.grid.dim > 1 ? (f.grid.dim > 2 ? double(N) * N : double(N)) : 1.0);

    // data[k] are centered-DFT coefficients c_k with
    // f_j = sum_k c_k exp(i dual_node(k) * node(j)); evaluate at ratio*node(m).
    std::vector<cplx> row(std::size_t(N) * N);
    for (int m = 0; m < N; ++m) {
        double y = ratio * f.grid.node(m);
        for (int k = 0; k < N; ++k) {
            double ph = f.grid.dual_node(k) * y;
            row[std::size_t(m) * N + k] = cplx(std::cos(ph), std::sin(ph));
        }
    }

    auto apply_axis = [&](std::vector<cplx>& v, int axis) {
        // treat v as [pre][N][post] with the axis in the middle
        std::size_t post = 1;
        for (int d = axis + 1; d < f.grid.dim; ++d) post *= std::size_t(N);
        std::size_t pre = v.size() / (post * std::size_t(N));
        std::vector<cplx> tmp(static_cast<std::size_t>(N));
        for (std::size_t p = 0; p < pre; ++p)
            for (std::size_t q = 0; q < post; ++q) {
                for (int k = 0; k < N; ++k)
                    tmp[k] = v[(p * std::size_t(N) + k) * post + q];
                for (int m = 0; m < N; ++m) {
                    cplx acc(0.0);
                    const cplx* r = &row[std::size_t(m) * N];
                    for (int k = 0; k < N; ++k) acc += r[k] * tmp[k];
                    v[(p * std::size_t(N) + m) * post + q] = acc;
                }
            }
    };
    for (int d = 0; d < f.grid.dim; ++d) apply_axis(data, d);

    WaveField out = f;
    out.samples = std::move(data);
    out.scale = target_scale;
    return out;
}

} // namespace hillnls

#endif
