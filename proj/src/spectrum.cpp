#include "kboost/spectrum.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace kboost {

Spectrum Spectrum::from_values(std::vector<double> raw) {
    std::sort(raw.begin(), raw.end(), std::greater<double>());
    for (double& v : raw) {
        if (v < 0.0) v = 0.0;
    }
    return Spectrum{std::move(raw)};
}

Spectrum eigenvalues(const KernelMatrix& K) {
    const int n = K.n;
    if (n < 1 || K.entries.rows() != n || K.entries.cols() != n) {
        throw std::invalid_argument("kernel matrix has inconsistent dimensions");
    }
    const double scale = std::max(1e-300, K.entries.cwiseAbs().maxCoeff());
    const double asym = (K.entries - K.entries.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) {
        throw std::invalid_argument("matrix is not symmetric (relative asymmetry " +
                                    std::to_string(asym / scale) + ")");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K.entries,
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigenvalue iteration failed to converge");
    }

    const double trace = K.entries.trace();
    const double clip = 1e-8 * std::max(trace, 1e-300);
    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) {
        double v = solver.eigenvalues()(n - 1 - i);  // Eigen sorts ascending
        if (v < -clip) {
            throw std::runtime_error("matrix is not positive semidefinite: eigenvalue " +
                                     std::to_string(v));
        }
        vals[i] = std::max(v, 0.0);
    }
    return Spectrum{std::move(vals)};
}

double complexity_R(const Spectrum& s, double delta) {
    if (delta < 0.0) throw std::invalid_argument("delta must be >= 0");
    if (s.values.empty()) throw std::invalid_argument("empty spectrum");
    const double d2 = delta * delta;
    double sum = 0.0;
    for (double mu : s.values) sum += std::min(d2, mu);
    return std::sqrt(sum / static_cast<double>(s.n()));
}

CriticalRadius critical_radius(const Spectrum& s, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    if (s.values.empty() || s.values.front() <= 0.0) {
        throw std::runtime_error(
            "degenerate spectrum: the critical-radius inequality has no positive "
            "solution when all eigenvalues vanish");
    }

    const auto g = [&](double d) { return complexity_R(s, d) / d - d / sigma; };

    double lo = 1e-12;
    double hi = 2.0 * std::max({sigma, std::sqrt(s.values.front()) * sigma, 1.0});
    int doublings = 0;
    while (g(hi) >= 0.0) {
        hi *= 2.0;
        if (++doublings > 60) {
            throw std::runtime_error(
                "critical-radius bracket expansion exceeded 60 doublings "
                "(degenerate spectrum?)");
        }
    }
    if (g(lo) <= 0.0) {
        throw std::runtime_error(
            "degenerate spectrum: no positive crossing above the bracket floor");
    }

    int iterations = 0;
    while (hi - lo > 1e-12 * hi && iterations < 200) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        ++iterations;
    }

    CriticalRadius out;
    out.delta_n = 0.5 * (lo + hi);
    out.sigma = sigma;
    out.bracket_lo = lo;
    out.bracket_hi = hi;
    out.iterations = iterations;
    return out;
}

int statistical_dimension(const Spectrum& s, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    const double d2 = delta * delta;
    for (int j = 0; j < s.n(); ++j) {
        if (s.values[j] <= d2) return j + 1;
    }
    return s.n();  // no eigenvalue below the threshold
}

RegularityReport regularity_check(const Spectrum& s, double delta_n, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("c must be > 0");
    RegularityReport rep;
    rep.d_n = statistical_dimension(s, delta_n);
    double tail = 0.0;
    for (int j = rep.d_n; j < s.n(); ++j) tail += s.values[j];
    rep.tail_sum = tail;
    rep.is_regular = tail <= c * static_cast<double>(rep.d_n) * delta_n * delta_n;
    return rep;
}

double decay_slope(const Spectrum& s, int j_lo, int j_hi) {
    if (j_lo < 1 || j_hi <= j_lo || j_hi > s.n()) {
        throw std::invalid_argument("decay_slope requires 1 <= j_lo < j_hi <= n");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const int count = j_hi - j_lo + 1;
    for (int j = j_lo; j <= j_hi; ++j) {
        const double mu = s.values[j - 1];
        if (!(mu > 0.0)) {
            throw std::invalid_argument("decay_slope requires positive eigenvalues in range");
        }
        const double lx = std::log(static_cast<double>(j));
        const double ly = std::log(mu);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = sxx - sx * sx / count;
    return (sxy - sx * sy / count) / denom;
}

}  // namespace kboost
