// The kernel boosting iteration, averaged iterates, stopping rules, the
// oracle gold standard, and a spectral closed form for the least-squares
// path that serves as an independent cross-check.

#ifndef KBOOST_BOOSTING_HPP
#define KBOOST_BOOSTING_HPP

#include <cstdint>
#include <vector>

#include "kboost/kernels.hpp"
#include "kboost/losses.hpp"

namespace kboost {

struct BoostConfig {
    double alpha = 0.75;       // constant step size
    long max_iterations = 0;
    long record_every = 1;     // thinning for stored iterate vectors
};

// True when alpha lies in the step-size range (0, min{1/M, M}] the
// averaged-iterate guarantees assume. Violations are worth a warning,
// not an error: the replication protocol runs LogitBoost at 0.75.
bool step_size_in_theory_range(double alpha, const LossModel& model);

struct BoostTrace {
    std::vector<long> recorded_t;             // includes t = 0
    std::vector<Eigen::VectorXd> iterates;    // f^t at recorded_t
    std::vector<long> averaged_at;            // recorded T >= 1
    std::vector<Eigen::VectorXd> averages;    // mean of f^1..f^T
    std::vector<double> per_iterate_error;    // |f^t - f*|_n^2, t = 1..T_final
    std::vector<double> per_average_error;    // |fbar^T - f*|_n^2, T = 1..T_final
    long T_final = 0;
};

// One update: f - alpha * n * K * empirical_gradient(model, y, f).
Eigen::VectorXd boost_step(const KernelMatrix& K, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& f_t, const LossModel& model,
                           double alpha);

// Iterates boost_step from f^0 = 0. Running averages are maintained in a
// single pass and are exact at every recorded T; per-iterate errors are
// filled when fstar is supplied. A non-finite iterate aborts with the
// offending iteration index (the exponential loss can overflow).
BoostTrace run_boosting(const KernelMatrix& K, const Eigen::VectorXd& y,
                        const LossModel& model, const BoostConfig& cfg,
                        const Eigen::VectorXd* fstar = nullptr);

// Least-squares path in closed form: f^t = (I - (I - alpha K)^t) y,
// evaluated in the eigenbasis of K. Requires alpha * mu_1 < 2.
Eigen::VectorXd closed_form_l2(const KernelMatrix& K, const Eigen::VectorXd& y,
                               double alpha, long t);

// Mean of iterates 1..T; T must have been recorded.
Eigen::VectorXd averaged_iterate(const BoostTrace& trace, long T);

enum class StoppingRule { recommended, range_cap };

// recommended:  floor(1 / (delta_n^2 * max{8, M})), the stopping time the
//               error guarantees are stated at
// range_cap:    floor(m / (8 M delta_n^2)), the largest iteration the
//               averaged-iterate guarantees cover
// Both floored at 1 (a zero stopping time would return f^0 = 0).
long stopping_time_theory(double delta_n, double m, double M, StoppingRule rule);

// floor((c n)^kappa), floored at 1.
long stopping_time_power(long n, double kappa, double c);

// |f - f*|_n^2 = (1/n) sum_i (f_i - f*_i)^2.
double empirical_error(const Eigen::VectorXd& f, const Eigen::VectorXd& fstar);

struct GoldStandard {
    long t_star = 0;   // 1-based; smallest index on ties
    double error = 0.0;
};

// Oracle stopping time: argmin over a per-iterate error sequence
// indexed from t = 1.
GoldStandard gold_standard(const std::vector<double>& per_iterate_error);

// Monte-Carlo excess risk E_Y[L_n(f)] - E_Y[L_n(f*)] with paired
// response draws (identical draws in both terms, so f = f* gives exactly
// zero). Least squares draws Y_i = f*_i + sd Z; the classification
// losses draw Y_i = +-1 with P(+1) = sigmoid(f*_i).
double excess_risk_mc(const LossModel& model, const Eigen::VectorXd& f,
                      const Eigen::VectorXd& fstar, const NoiseSpec& noise,
                      long n_mc, std::uint64_t seed);

}  // namespace kboost

#endif  // KBOOST_BOOSTING_HPP
