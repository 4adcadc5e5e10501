// Eigenvalues of the normalized kernel matrix and the complexity
// quantities computed from them: the localized complexity R(delta), the
// critical radius delta_n, the statistical dimension d_n, and the
// regular-kernel tail check.

#ifndef KBOOST_SPECTRUM_HPP
#define KBOOST_SPECTRUM_HPP

#include <vector>

#include "kboost/kernels.hpp"

namespace kboost {

// Eigenvalues mu_1 >= mu_2 >= ... >= mu_n >= 0 of a normalized kernel
// matrix. Construction sorts descending and clips small negative
// round-off to zero.
struct Spectrum {
    std::vector<double> values;

    int n() const { return static_cast<int>(values.size()); }

    static Spectrum from_values(std::vector<double> raw);
};

// Full spectrum of a symmetric PSD matrix. Rejects asymmetric input
// (relative asymmetry > 1e-10) and eigenvalues below -1e-8 * trace,
// which indicate genuinely non-PSD input rather than round-off.
Spectrum eigenvalues(const KernelMatrix& K);

// R(delta) = sqrt(sum_j min{delta^2, mu_j}) / sqrt(n).
// Nondecreasing in delta, R(0) = 0, and R(delta)/delta is nonincreasing.
double complexity_R(const Spectrum& s, double delta);

struct CriticalRadius {
    double delta_n = 0.0;
    double sigma = 0.0;
    double bracket_lo = 0.0;  // final bisection bracket
    double bracket_hi = 0.0;
    int iterations = 0;
};

// Smallest delta > 0 with R(delta)/delta <= delta/sigma, located by
// bisection on g(delta) = R(delta)/delta - delta/sigma. The initial
// bracket is [1e-12, 2*max(sigma, sqrt(mu_1)*sigma, 1)], with the upper
// end doubled until g(hi) < 0. Fails on a degenerate (all-zero)
// spectrum, where no positive solution exists.
CriticalRadius critical_radius(const Spectrum& s, double sigma);

// Smallest 1-based index j with mu_j <= delta^2; n when no eigenvalue
// falls below the threshold.
int statistical_dimension(const Spectrum& s, double delta);

struct RegularityReport {
    bool is_regular = false;
    double tail_sum = 0.0;
    int d_n = 0;
};

// Tail-sum test: sum_{j > d_n} mu_j <= c * d_n * delta_n^2.
RegularityReport regularity_check(const Spectrum& s, double delta_n, double c);

// Least-squares slope of log mu_j against log j over the 1-based
// inclusive range [j_lo, j_hi]. Eigenvalues in range must be positive.
double decay_slope(const Spectrum& s, int j_lo, int j_hi);

}  // namespace kboost

#endif  // KBOOST_SPECTRUM_HPP
