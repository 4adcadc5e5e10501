// Scalar losses for L2-boost, LogitBoost and AdaBoost, their gradients,
// and the curvature/noise constants the stopping theory needs.

#ifndef KBOOST_LOSSES_HPP
#define KBOOST_LOSSES_HPP

#include <Eigen/Core>

namespace kboost {

enum class LossKind { least_squares, logistic, exponential };

struct MmConstants {
    double m = 0.0;  // local strong convexity
    double M = 0.0;  // smoothness
    double B = 0.0;  // gradient bound (infinity for least squares)
};

// Curvature and gradient-bound constants over the ball |theta| <= D:
//   least squares:  m = M = 1
//   logistic:       m = 1/(e^-D + e^D + 2),  M = 1/4,  B = 1
//   exponential:    m = e^-D,  M = e^D,  B = e^D
MmConstants mM_constants(LossKind kind, double D);

// A loss together with its constants. `D` is the prediction bound the
// constants were evaluated at (C_H + |f*|_H in the theory). When
// `rescale_by_B` is set the phi'-bounded losses are divided by B so the
// gradient bound becomes 1; least squares is unaffected.
struct LossModel {
    LossKind kind = LossKind::least_squares;
    double D = 0.0;
    double m = 1.0;
    double M = 1.0;
    double B = 0.0;
    double scale = 1.0;  // multiplies the loss; 1/B under rescaling

    static LossModel make(LossKind kind, double D = 0.0, bool rescale_by_B = false);
};

// phi(y, theta):
//   least squares:  (y - theta)^2 / 2, any real y
//   logistic:       ln(1 + e^{-y theta}),  y in {-1, +1}
//   exponential:    e^{-y theta},          y in {-1, +1}
// Classification losses also accept fractional labels y in [-1, 1],
// interpreted as the replicate average
//   (1+y)/2 * phi(+1, theta) + (1-y)/2 * phi(-1, theta),
// which coincides with the formulas above at y = +-1.
double loss_value(const LossModel& model, double y, double theta);

// d phi / d theta. The logistic branch evaluates -y / (1 + e^{y theta})
// through a saturating sigmoid, so it stays finite for large |theta|.
double loss_grad(const LossModel& model, double y, double theta);

// Component i is loss_grad(model, y_i, f_i) / n.
Eigen::VectorXd empirical_gradient(const LossModel& model,
                                   const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& f);

// C_H = sqrt(2 * max{|f*|_H^2, 32, sigma^2}).
double hilbert_radius(double hilbert_norm_fstar, double sigma);

// sigma = 4 (2M + 1)(1 + 2 C_H) for phi'-bounded losses.
double bounded_noise_level(double M, double C_H);

enum class NoiseKind { gaussian_sd, bounded_loss };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian_sd;
    double sd = 0.0;   // gaussian_sd: observation noise standard deviation
    double C_H = 0.0;  // bounded_loss: Hilbert radius

    static NoiseSpec gaussian(double sd);
    static NoiseSpec bounded(double C_H);
};

// Effective noise level: 2*sd for least squares under Gaussian noise
// (a computable point strictly inside the finite-Orlicz region), and
// bounded_noise_level(M, C_H) for the classification losses. Rejects
// mismatched loss/noise pairings.
double effective_noise_level(const NoiseSpec& noise, const LossModel& model);

// The radius C_H and the noise level sigma are mutually defined for the
// phi'-bounded losses. Resolved in two passes: C_H0 from |f*| alone,
// sigma from the constants at D0 = C_H0 + |f*|, then the final C_H and
// constants at D = C_H + |f*|.
struct LossConstantChain {
    double C_H = 0.0;
    double sigma = 0.0;
    double D = 0.0;
    double m = 0.0;
    double M = 0.0;
    double B = 0.0;
};

LossConstantChain resolve_classification_constants(LossKind kind,
                                                   double hilbert_norm_fstar);

}  // namespace kboost

#endif  // KBOOST_LOSSES_HPP
