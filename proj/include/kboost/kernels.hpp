// Kernel functions, design points, and the normalized kernel matrix
// K_ij = K(x_i, x_j) / n that drives the boosting update.

#ifndef KBOOST_KERNELS_HPP
#define KBOOST_KERNELS_HPP

#include <Eigen/Core>

#include <string>
#include <vector>

namespace kboost {

enum class KernelFamily { sobolev1, gaussian, tabulated };

// A kernel family plus its parameters.
//
// By default the kernel is rescaled so that sup_x K(x,x) <= 1 (the
// normalization the step-size theory assumes); the divisor is available
// through rescale_factor(). Setting `rescale = false` evaluates the raw
// kernel instead, which is what the simulation protocol uses. The two
// conventions produce identical boosting paths under alpha -> alpha/factor.
struct KernelSpec {
    KernelFamily family = KernelFamily::sobolev1;
    double bandwidth = 0.0;   // gaussian only, > 0
    Eigen::MatrixXd table;    // tabulated only, dense symmetric
    bool rescale = true;

    static KernelSpec sobolev1(bool rescale = true);
    static KernelSpec gaussian(double bandwidth, bool rescale = true);
    static KernelSpec tabulated(Eigen::MatrixXd table, bool rescale = true);

    // Plain-text format: first token n, then n*n whitespace-separated
    // entries in row-major order.
    static KernelSpec tabulated_from_file(const std::string& path,
                                          bool rescale = true);
};

// Divisor applied by eval_kernel: the diagonal supremum when it exceeds 1
// and rescaling is enabled, otherwise 1.
double rescale_factor(const KernelSpec& spec);

// Kernel value at (x, x'), divided by rescale_factor(spec). Sobolev-1 is
// 1 + min(x, x') on [0,1]^2; Gaussian is exp(-(x-x')^2 / (2 bw^2));
// tabulated kernels index their matrix with 1-based integer coordinates.
double eval_kernel(const KernelSpec& spec, double x, double xp);

struct DesignPoints {
    std::vector<double> points;
    int n() const { return static_cast<int>(points.size()); }
};

// x_i = i/n for i = 1..n; avoids x = 0 where first-order Sobolev
// functions vanish.
DesignPoints equidistant_design(int n);

// 1, 2, ..., n; the covariates of a tabulated kernel.
DesignPoints index_design(int n);

struct KernelMatrix {
    Eigen::MatrixXd entries;  // symmetric PSD, K(x_i,x_j)/n
    int n = 0;
    double factor = 1.0;      // kernel divisor that was in effect
};

// Exactly symmetric by construction (lower triangle mirrored).
KernelMatrix build_kernel_matrix(const KernelSpec& spec,
                                 const DesignPoints& design);

}  // namespace kboost

#endif  // KBOOST_KERNELS_HPP
