#ifndef HILLNLS_GRID_HPP
#define HILLNLS_GRID_HPP

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hillnls {

using cplx = std::complex<double>;

enum class Representation { Position, Frequency };

/// Uniform periodic grid: per axis N nodes on [-L, L), spacing h = 2L/N,
/// dual spacing pi/L with frequency nodes mapped to the symmetric interval.
struct Grid {
    int dim = 1;          // n in {1,2,3}
    int n_per_axis = 0;   // power of two, >= 16
    double half_width = 0.0;

    Grid() = default;
    Grid(int dim_, int n_per_axis_, double half_width_)
        : dim(dim_), n_per_axis(n_per_axis_), half_width(half_width_) {
        if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1..3");
        if (n_per_axis < 16 || (n_per_axis & (n_per_axis - 1)) != 0)
            throw std::invalid_argument("grid N must be a power of two >= 16");
        if (!(half_width > 0.0)) throw std::invalid_argument("grid half-width must be positive");
    }

    double spacing() const { return 2.0 * half_width / n_per_axis; }
    double dual_spacing() const { return M_PI / half_width; }
    double node(int j) const { return -half_width + j * spacing(); }
    double dual_node(int k) const { return (k - n_per_axis / 2) * dual_spacing(); }

    std::size_t total() const {
        std::size_t t = 1;
        for (int d = 0; d < dim; ++d) t *= std::size_t(n_per_axis);
        return t;
    }

    bool operator==(const Grid& o) const {
        return dim == o.dim && n_per_axis == o.n_per_axis && half_width == o.half_width;
    }
};

/// Complex samples on a Grid. Physical coordinate = scale * node coordinate
/// in both representations; stored values are the physical function values
/// at those points, so the L2 measure is (spacing * |scale|)^n.
struct WaveField {
    Grid grid;
    Representation rep = Representation::Position;
    double scale = 1.0;
    std::vector<cplx> samples;

    WaveField() = default;
    explicit WaveField(const Grid& g, Representation r = Representation::Position,
                       double s = 1.0)
        : grid(g), rep(r), scale(s), samples(g.total(), cplx(0.0)) {
        if (s == 0.0) throw std::invalid_argument("wave field scale must be nonzero");
    }

    double base_spacing() const {
        return rep == Representation::Position ? grid.spacing() : grid.dual_spacing();
    }

    /// Physical coordinate of the flat index along each axis.
    void coords(std::size_t flat, double* out) const {
        int N = grid.n_per_axis;
        for (int d = grid.dim - 1; d >= 0; --d) {
            int j = int(flat % std::size_t(N));
            flat /= std::size_t(N);
            double node = rep == Representation::Position ? grid.node(j) : grid.dual_node(j);
            out[d] = scale * node;
        }
    }

    double measure() const {
        double m = 1.0;
        for (int d = 0; d < grid.dim; ++d) m *= base_spacing() * std::fabs(scale);
        return m;
    }

    double l2_norm() const {
        double s = 0.0;
        for (const cplx& z : samples) s += std::norm(z);
        return std::sqrt(s * measure());
    }

    double linf_norm() const {
        double m = 0.0;
        for (const cplx& z : samples) m = std::max(m, std::abs(z));
        return m;
    }
};

inline cplx inner_product(const WaveField& a, const WaveField& b) {
    if (!(a.grid == b.grid) || a.samples.size() != b.samples.size())
        throw std::invalid_argument("inner_product: mismatched grids");
    cplx s(0.0);
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        s += std::conj(a.samples[i]) * b.samples[i];
    return s * a.measure();
}

/// Relative L2 difference ||a - b|| / max(||a||, ||b||), fields on the same
/// grid and scale.
inline double rel_l2_diff(const WaveField& a, const WaveField& b) {
    if (a.samples.size() != b.samples.size())
        throw std::invalid_argument("rel_l2_diff: size mismatch");
    double num = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        num += std::norm(a.samples[i] - b.samples[i]);
        na += std::norm(a.samples[i]);
        nb += std::norm(b.samples[i]);
    }
    double den = std::max(na, nb);
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

/// Modulus of the normalized overlap |<a,b>| / (||a|| ||b||); quotient out a
/// global unimodular constant when comparing factorization branches.
inline double overlap_defect(const WaveField& a, const WaveField& b) {
    double na = a.l2_norm(), nb = b.l2_norm();
    if (na == 0.0 || nb == 0.0) return (na == 0.0 && nb == 0.0) ? 0.0 : 1.0;
    return 1.0 - std::abs(inner_product(a, b)) / (na * nb);
}

/// Snapshot CSV: header (n, N, L, scale, representation) then (re, im) rows
/// in row-major node order, full double precision.
inline void save_field_csv(const WaveField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%s\n", f.grid.dim,
                  f.grid.n_per_axis, f.grid.half_width, f.scale,
                  f.rep == Representation::Position ? "position" : "frequency");
    out << buf;
    for (const cplx& z : f.samples) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", z.real(), z.imag());
        out << buf;
    }
}

inline WaveField load_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty field file: " + path);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream hs(line);
    int dim, N;
    double L, scale;
    std::string rep;
    if (!(hs >> dim >> N >> L >> scale >> rep))
        throw std::runtime_error("malformed field header: " + path);
    WaveField f(Grid(dim, N, L),
                rep == "frequency" ? Representation::Frequency : Representation::Position,
                scale);
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated field file: " + path);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double re, im;
        if (!(ls >> re >> im)) throw std::runtime_error("malformed field row: " + path);
        f.samples[i] = cplx(re, im);
    }
    return f;
}

} // namespace hillnls

#endif
