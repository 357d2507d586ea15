#ifndef HILLNLS_SIGMA_HPP
#define HILLNLS_SIGMA_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hillnls {

/// Coefficient family sigma(t) for the harmonic potential sigma(t)|x|^2/2.
/// The inverse-square preset is regularized as k/(1+t^2), which keeps
/// sigma bounded at t=0 while preserving t^2 sigma(t) -> k.
class SigmaModel {
public:
    enum class Kind { Zero, Constant, InverseSquare, Tabulated };

    static SigmaModel zero() { return SigmaModel(Kind::Zero, 0.0); }

    static SigmaModel constant(double value) {
        return SigmaModel(Kind::Constant, value);
    }

    static SigmaModel inverse_square(double k) {
        if (k < 0.0 || k >= 0.25)
            throw std::invalid_argument("inverse_square requires 0 <= k < 1/4");
        return SigmaModel(Kind::InverseSquare, k);
    }

    static SigmaModel tabulated(std::vector<std::pair<double, double>> samples) {
        if (samples.size() < 2)
            throw std::invalid_argument("tabulated sigma needs at least 2 samples");
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (!(samples[i - 1].first < samples[i].first))
                throw std::invalid_argument("tabulated sigma times must be strictly increasing");
        SigmaModel m(Kind::Tabulated, 0.0);
        m.table_ = std::move(samples);
        return m;
    }

    /// Two-column CSV (time, sigma); a non-numeric first line is treated as a header.
    static SigmaModel from_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open sigma table: " + path);
        std::vector<std::pair<double, double>> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            double t, s;
            if (ls >> t >> s) rows.emplace_back(t, s);
            else if (!rows.empty())
                throw std::runtime_error("malformed sigma table row: " + line);
            // else: header line, skip
        }
        return tabulated(std::move(rows));
    }

    Kind kind() const { return kind_; }
    double parameter() const { return param_; }

    /// lambda = (1 - sqrt(1-4k))/2 for the inverse-square preset, 0 otherwise.
    double lambda() const {
        if (kind_ != Kind::InverseSquare) return 0.0;
        return (1.0 - std::sqrt(1.0 - 4.0 * param_)) / 2.0;
    }

    double operator()(double t) const {
        switch (kind_) {
            case Kind::Zero: return 0.0;
            case Kind::Constant: return param_;
            case Kind::InverseSquare: return param_ / (1.0 + t * t);
            case Kind::Tabulated: return interpolate(t);
        }
        return 0.0;
    }

    bool covers(double t) const {
        if (kind_ != Kind::Tabulated) return true;
        return t >= table_.front().first && t <= table_.back().first;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::Zero: return "zero";
            case Kind::Constant: return "constant(" + std::to_string(param_) + ")";
            case Kind::InverseSquare: return "inverse_square(k=" + std::to_string(param_) + ")";
            case Kind::Tabulated: return "tabulated(" + std::to_string(table_.size()) + " rows)";
        }
        return "?";
    }

private:
    SigmaModel(Kind kind, double param) : kind_(kind), param_(param) {}

    double interpolate(double t) const {
        if (!covers(t))
            throw std::out_of_range("sigma query outside tabulated span");
        auto it = std::lower_bound(table_.begin(), table_.end(), t,
            [](const auto& row, double v) { return row.first < v; });
        if (it == table_.begin()) return it->second;
        auto lo = std::prev(it);
        if (it == table_.end()) return lo->second;
        double w = (t - lo->first) / (it->first - lo->first);
        return (1.0 - w) * lo->second + w * it->second;
    }

    Kind kind_;
    double param_;
    std::vector<std::pair<double, double>> table_;
};

} // namespace hillnls

#endif
