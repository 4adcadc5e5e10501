// Synthetic data generation and the simulation harness: n-sweeps over
// seeded trials, stopping-rule comparison against the oracle gold
// standard, Monte-Carlo population error, and CSV aggregation.

#ifndef KBOOST_EXPERIMENTS_HPP
#define KBOOST_EXPERIMENTS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "kboost/boosting.hpp"
#include "kboost/kernels.hpp"
#include "kboost/losses.hpp"

namespace kboost {

// f*(x) = |x - 1/2| - 1/4 on [0,1]; unit Hilbert norm in the
// first-order Sobolev space.
double fstar_piecewise(double x);

Eigen::VectorXd fstar_values(const DesignPoints& design);

// y_i = f*(x_i) + sd * z_i with z_i standard normal. Each component is
// drawn from a stream derived from (seed, i), so the vector does not
// depend on evaluation order.
Eigen::VectorXd gen_regression_data(const DesignPoints& design, double sd,
                                    std::uint64_t seed);

// n x reps matrix of +-1 labels; row i is drawn i.i.d. with
// P(+1) = exp(f*_i) / (1 + exp(f*_i)).
Eigen::MatrixXd gen_logit_labels(const Eigen::VectorXd& fstar_vals, int reps,
                                 std::uint64_t seed);

// Population L2 error of a kernel expansion f = (1/sqrt n) sum_i w_i K(., x_i)
// against a reference function, estimated over n_mc covariates drawn
// uniformly on [0,1].
double population_error_mc(const KernelSpec& spec, const DesignPoints& design,
                           const Eigen::VectorXd& omega,
                           const std::function<double(double)>& reference,
                           long n_mc, std::uint64_t seed);

struct RuleSpec {
    enum class Kind { gold, theory, power };
    Kind kind = Kind::gold;
    double kappa = 0.0;  // power only
    double c = 7.0;      // power only

    std::string name() const;
    static RuleSpec gold() { return {Kind::gold, 0.0, 0.0}; }
    static RuleSpec theory() { return {Kind::theory, 0.0, 0.0}; }
    static RuleSpec power(double kappa, double c = 7.0) {
        return {Kind::power, kappa, c};
    }
};

// Parses "gold", "theory", or "power(kappa[,c])".
RuleSpec parse_rule(const std::string& text);

struct ExperimentConfig {
    KernelSpec kernel = KernelSpec::sobolev1();
    LossKind loss = LossKind::least_squares;
    std::vector<int> n_grid;
    int trials = 1;
    std::vector<RuleSpec> rules;
    double alpha = 0.75;
    double noise_sd = 0.70710678118654752;  // least squares: sd of w_i
    int reps = 5;                           // classification: replicated labels
    double fstar_norm = 1.0;                // |f*|_H for the theory constants
    double sigma_override = 0.0;            // > 0: explicit effective noise level
    bool rescale_loss = false;              // divide phi'-bounded losses by B
    std::uint64_t seed = 42;
    long max_iter_cap = 0;                  // 0: default 4 * max rule time
    long mc_samples = 2000;                 // 0 disables the MC columns
    int jobs = 1;
    bool timing = false;                    // emit measured wall_ms
};

struct TrialRecord {
    int n = 0;
    int trial = 0;
    std::string rule;
    double kappa = 0.0;      // NaN when not applicable
    long T_used = 0;
    double mse_emp = 0.0;    // |f^T - f*|_n^2 at the stopped iterate
    double mse_pop = 0.0;    // Monte-Carlo L2(P_X) error (NaN when disabled)
    double excess_risk = 0.0;
    long wall_ms = 0;
    bool failed = false;
};

struct AggregateRecord {
    int n = 0;
    std::string rule;
    double kappa = 0.0;
    double mean_mse_emp = 0.0;
    double se_mse_emp = 0.0;
    double mean_T = 0.0;
};

struct ExperimentResult {
    std::vector<TrialRecord> records;
    std::vector<AggregateRecord> aggregates;
    int failed_trials = 0;
    std::vector<std::string> warnings;
};

// Runs the full sweep. For every n: the design, kernel matrix, and rule
// times are shared across trials; each trial draws data from a stream
// derived from (seed, n, trial) and runs the boosting iteration once to
// the trace length (4x the largest rule time by default, truncated by
// max_iter_cap), recording per-iterate errors for the gold standard.
// Records come out in (n, trial, rule) order regardless of `jobs`, so
// output is byte-identical under any parallelism.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_raw_csv(std::ostream& os, const std::vector<TrialRecord>& records);
void write_agg_csv(std::ostream& os, const std::vector<AggregateRecord>& aggregates);

}  // namespace kboost

#endif  // KBOOST_EXPERIMENTS_HPP
