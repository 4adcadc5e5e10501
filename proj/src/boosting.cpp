#include "kboost/boosting.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kboost/rng.hpp"

namespace kboost {

bool step_size_in_theory_range(double alpha, const LossModel& model) {
    const double cap = std::min(1.0 / model.M, model.M);
    return alpha > 0.0 && alpha <= cap;
}

Eigen::VectorXd boost_step(const KernelMatrix& K, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& f_t, const LossModel& model,
                           double alpha) {
    if (y.size() != K.n || f_t.size() != K.n) {
        throw std::invalid_argument("boost_step: dimension mismatch");
    }
    if (!(alpha > 0.0)) throw std::invalid_argument("boost_step: alpha must be > 0");
    const Eigen::VectorXd grad = empirical_gradient(model, y, f_t);
    return f_t - alpha * static_cast<double>(K.n) * (K.entries * grad);
}

BoostTrace run_boosting(const KernelMatrix& K, const Eigen::VectorXd& y,
                        const LossModel& model, const BoostConfig& cfg,
                        const Eigen::VectorXd* fstar) {
    if (cfg.max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
    if (cfg.record_every < 1) throw std::invalid_argument("record_every must be >= 1");
    if (y.size() != K.n) throw std::invalid_argument("run_boosting: dimension mismatch");
    if (fstar && fstar->size() != K.n) {
        throw std::invalid_argument("run_boosting: fstar dimension mismatch");
    }

    const int n = K.n;
    BoostTrace trace;
    trace.T_final = cfg.max_iterations;

    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    trace.recorded_t.push_back(0);
    trace.iterates.push_back(f);
    if (fstar) {
        trace.per_iterate_error.reserve(cfg.max_iterations);
        trace.per_average_error.reserve(cfg.max_iterations);
    }

    for (long t = 1; t <= cfg.max_iterations; ++t) {
        f = boost_step(K, y, f, model, cfg.alpha);
        if (!f.allFinite()) {
            throw std::runtime_error("boosting diverged (non-finite iterate) at iteration " +
                                     std::to_string(t));
        }
        sum += f;
        if (fstar) {
            trace.per_iterate_error.push_back(empirical_error(f, *fstar));
            trace.per_average_error.push_back(
                empirical_error(sum / static_cast<double>(t), *fstar));
        }
        if (t % cfg.record_every == 0 || t == cfg.max_iterations) {
            trace.recorded_t.push_back(t);
            trace.iterates.push_back(f);
            trace.averaged_at.push_back(t);
            trace.averages.push_back(sum / static_cast<double>(t));
        }
    }
    return trace;
}

Eigen::VectorXd closed_form_l2(const KernelMatrix& K, const Eigen::VectorXd& y,
                               double alpha, long t) {
    if (y.size() != K.n) throw std::invalid_argument("closed_form_l2: dimension mismatch");
    if (t < 0) throw std::invalid_argument("closed_form_l2: t must be >= 0");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K.entries);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigenvalue iteration failed to converge");
    }
    const Eigen::VectorXd& lam = solver.eigenvalues();
    const double mu1 = lam.maxCoeff();
    if (!(alpha * mu1 < 2.0)) {
        throw std::invalid_argument("closed_form_l2 requires alpha * mu_1 < 2 for stability");
    }
    Eigen::VectorXd coeff = solver.eigenvectors().transpose() * y;
    for (Eigen::Index i = 0; i < coeff.size(); ++i) {
        coeff(i) *= 1.0 - std::pow(1.0 - alpha * lam(i), static_cast<double>(t));
    }
    return solver.eigenvectors() * coeff;
}

Eigen::VectorXd averaged_iterate(const BoostTrace& trace, long T) {
    for (std::size_t i = 0; i < trace.averaged_at.size(); ++i) {
        if (trace.averaged_at[i] == T) return trace.averages[i];
    }
    throw std::invalid_argument("averaged iterate not recorded at T = " + std::to_string(T));
}

long stopping_time_theory(double delta_n, double m, double M, StoppingRule rule) {
    if (!(delta_n > 0.0)) throw std::invalid_argument("delta_n must be > 0");
    if (!(m > 0.0) || m > M) throw std::invalid_argument("requires 0 < m <= M");
    const double d2 = delta_n * delta_n;
    double v = 0.0;
    switch (rule) {
        case StoppingRule::recommended:
            v = 1.0 / (d2 * std::max(8.0, M));
            break;
        case StoppingRule::range_cap:
            v = m / (8.0 * M * d2);
            break;
    }
    v = std::floor(v);
    if (v < 1.0) return 1;
    if (v > 4.6e18) return static_cast<long>(4.6e18);
    return static_cast<long>(v);
}

long stopping_time_power(long n, double kappa, double c) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(c > 0.0) || !(kappa > 0.0)) throw std::invalid_argument("requires c > 0, kappa > 0");
    const double p = std::pow(c * static_cast<double>(n), kappa);
    // Nudge past 1-ulp pow error on exact powers before flooring.
    const double v = std::floor(p * (1.0 + 4e-16) + 1e-12);
    if (v < 1.0) return 1;
    if (v > 4.6e18) return static_cast<long>(4.6e18);
    return static_cast<long>(v);
}

double empirical_error(const Eigen::VectorXd& f, const Eigen::VectorXd& fstar) {
    if (f.size() != fstar.size()) {
        throw std::invalid_argument("empirical_error: length mismatch");
    }
    return (f - fstar).squaredNorm() / static_cast<double>(f.size());
}

GoldStandard gold_standard(const std::vector<double>& per_iterate_error) {
    if (per_iterate_error.empty()) {
        throw std::invalid_argument("gold_standard: empty error sequence");
    }
    GoldStandard g;
    g.t_star = 1;
    g.error = per_iterate_error[0];
    for (std::size_t i = 1; i < per_iterate_error.size(); ++i) {
        if (per_iterate_error[i] < g.error) {
            g.error = per_iterate_error[i];
            g.t_star = static_cast<long>(i) + 1;
        }
    }
    return g;
}

double excess_risk_mc(const LossModel& model, const Eigen::VectorXd& f,
                      const Eigen::VectorXd& fstar, const NoiseSpec& noise,
                      long n_mc, std::uint64_t seed) {
    if (n_mc < 1) throw std::invalid_argument("excess_risk_mc: n_mc must be >= 1");
    if (f.size() != fstar.size()) {
        throw std::invalid_argument("excess_risk_mc: length mismatch");
    }
    const bool classification = model.kind != LossKind::least_squares;
    if (classification && noise.kind != NoiseKind::bounded_loss) {
        throw std::invalid_argument("excess_risk_mc: classification losses need bounded_loss noise");
    }
    if (!classification && noise.kind != NoiseKind::gaussian_sd) {
        throw std::invalid_argument("excess_risk_mc: least squares needs gaussian_sd noise");
    }

    const auto n = f.size();
    const double inv = 1.0 / (static_cast<double>(n) * static_cast<double>(n_mc));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, {0x4d43u, static_cast<std::uint64_t>(i)}));
        const double p = classification ? 1.0 / (1.0 + std::exp(-fstar(i))) : 0.0;
        for (long k = 0; k < n_mc; ++k) {
            double yk;
            if (classification) {
                yk = rng.bernoulli(p) ? 1.0 : -1.0;
            } else {
                yk = fstar(i) + noise.sd * rng.normal();
            }
            acc += loss_value(model, yk, f(i)) - loss_value(model, yk, fstar(i));
        }
    }
    return acc * inv;
}

}  // namespace kboost
