#ifndef HILLNLS_OPS_HPP
#define HILLNLS_OPS_HPP

#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"

namespace hillnls {

// Elementary unitary factors. Each multiplies phases, relabels the grid, or
// permutes samples; each has a closed-form inverse so factor chains invert
// factor-by-factor.

/// Multiply by e^{i beta |x|^2} in the current representation's physical
/// coordinates. The modulation M(tau) is Chirp{1/(2 tau)}; the free
/// multiplier e^{-i b p^2} is Chirp{-b} applied in frequency representation.
struct Chirp {
    double beta;
};

/// Forward unitary Fourier transform. relabel keeps the Position tag on the
/// output (the transform variable becomes the new position coordinate).
struct Fourier {
    bool relabel = false;
};

struct InvFourier {
    bool relabel = false;
};

/// D(tau)-style dilation: scale <- scale * tau, samples *= amp. The
/// amplitude (i tau)^{-n/2} (principal branch) is supplied by the caller so
/// branch choices stay explicit at the chain-building site.
struct Dilate {
    double tau;
    cplx amp;
};

/// count applications of the parity operator (Sf)(x) = e^{-i n pi/2} f(-x).
struct Parity {
    int count;
};

struct ConstPhase {
    cplx z;  // unimodular
};

/// Pure frame bookkeeping: reverse the samples and negate the scale. The
/// represented function is unchanged; this restores a positive frame after
/// a composition whose net dilation is negative. Self-inverse.
struct FrameFlip {};

using Factor = std::variant<Chirp, Fourier, InvFourier, Dilate, Parity, ConstPhase, FrameFlip>;

namespace detail {

inline void apply_chirp(WaveField& f, double beta) {
    if (beta == 0.0) return;
    int N = f.grid.n_per_axis;
    // per-axis phase table: beta * (scale * node)^2, summed over axes
    std::vector<double> ph(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
        double x = f.scale * (f.rep == Representation::Position ? f.grid.node(j)
                                                                : f.grid.dual_node(j));
        ph[j] = beta * x * x;
    }
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        std::size_t fl = i;
        double p = 0.0;
        for (int d = 0; d < f.grid.dim; ++d) {
            p += ph[fl % std::size_t(N)];
            fl /= std::size_t(N);
        }
        f.samples[i] *= cplx(std::cos(p), std::sin(p));
    }
}

/// Sample reversal about the origin: index j -> (N - j) mod N per axis
/// (node 0 at -L is its own periodic mirror).
inline void apply_reversal(WaveField& f) {
    int N = f.grid.n_per_axis;
    std::vector<cplx> out(f.samples.size());
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        std::size_t fl = i, mirror = 0, stride = 1;
        for (int d = 0; d < f.grid.dim; ++d) {
            int j = int(fl % std::size_t(N));
            fl /= std::size_t(N);
            mirror += std::size_t((N - j) % N) * stride;
            stride *= std::size_t(N);
        }
        out[mirror] = f.samples[i];
    }
    f.samples = std::move(out);
}

} // namespace detail

inline WaveField apply_factor(const Factor& op, const WaveField& in) {
    WaveField f = in;
    std::visit(
        [&f](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, Chirp>) {
                detail::apply_chirp(f, op.beta);
            } else if constexpr (std::is_same_v<T, Fourier>) {
                f = fourier(f, op.relabel);
            } else if constexpr (std::is_same_v<T, InvFourier>) {
                f = inverse_fourier(f, op.relabel);
            } else if constexpr (std::is_same_v<T, Dilate>) {
                if (op.tau == 0.0) throw std::invalid_argument("dilation by zero");
                f.scale *= op.tau;
                for (cplx& z : f.samples) z *= op.amp;
            } else if constexpr (std::is_same_v<T, Parity>) {
                if (op.count & 1) detail::apply_reversal(f);
                double ph = -op.count * f.grid.dim * M_PI / 2.0;
                cplx w(std::cos(ph), std::sin(ph));
                for (cplx& z : f.samples) z *= w;
            } else if constexpr (std::is_same_v<T, ConstPhase>) {
                for (cplx& z : f.samples) z *= op.z;
            } else if constexpr (std::is_same_v<T, FrameFlip>) {
                detail::apply_reversal(f);
                f.scale = -f.scale;
            }
        },
        op);
    return f;
}

inline Factor invert_factor(const Factor& op) {
    return std::visit(
        [](const auto& op) -> Factor {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, Chirp>) return Chirp{-op.beta};
            else if constexpr (std::is_same_v<T, Fourier>) return InvFourier{op.relabel};
            else if constexpr (std::is_same_v<T, InvFourier>) return Fourier{op.relabel};
            else if constexpr (std::is_same_v<T, Dilate>)
                return Dilate{1.0 / op.tau, 1.0 / op.amp};
            else if constexpr (std::is_same_v<T, Parity>) return Parity{-op.count};
            else if constexpr (std::is_same_v<T, FrameFlip>) return FrameFlip{};
            else return ConstPhase{std::conj(op.z)};
        },
        op);
}

/// Factors applied left to right: apply(chain, f) = F_k ... F_2 F_1 f with
/// chain = [F_1, ..., F_k].
struct FactorChain {
    std::vector<Factor> factors;

    WaveField apply(const WaveField& in) const {
        WaveField f = in;
        for (const Factor& op : factors) f = apply_factor(op, f);
        return f;
    }

    FactorChain inverse() const {
        FactorChain inv;
        inv.factors.reserve(factors.size());
        for (auto it = factors.rbegin(); it != factors.rend(); ++it)
            inv.factors.push_back(invert_factor(*it));
        return inv;
    }
};

} // namespace hillnls

#endif
