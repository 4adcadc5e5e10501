#include "kboost/losses.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace kboost {

namespace {

double softplus(double z) {
    // ln(1 + e^z) without overflow.
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_label(double y) {
    if (y < -1.0 - 1e-12 || y > 1.0 + 1e-12 || !std::isfinite(y)) {
        throw std::invalid_argument("classification losses require labels in [-1, 1], got " +
                                    std::to_string(y));
    }
}

}  // namespace

MmConstants mM_constants(LossKind kind, double D) {
    switch (kind) {
        case LossKind::least_squares:
            return {1.0, 1.0, std::numeric_limits<double>::infinity()};
        case LossKind::logistic:
            return {1.0 / (std::exp(-D) + std::exp(D) + 2.0), 0.25, 1.0};
        case LossKind::exponential:
            return {std::exp(-D), std::exp(D), std::exp(D)};
    }
    throw std::logic_error("unknown loss kind");
}

LossModel LossModel::make(LossKind kind, double D, bool rescale_by_B) {
    LossModel model;
    model.kind = kind;
    model.D = D;
    const MmConstants c = mM_constants(kind, D);
    model.m = c.m;
    model.M = c.M;
    model.B = c.B;
    model.scale = 1.0;
    if (rescale_by_B && std::isfinite(c.B) && c.B > 0.0) {
        model.scale = 1.0 / c.B;
        model.m = c.m / c.B;
        model.M = c.M / c.B;
        model.B = 1.0;
    }
    return model;
}

double loss_value(const LossModel& model, double y, double theta) {
    switch (model.kind) {
        case LossKind::least_squares: {
            const double r = y - theta;
            return model.scale * 0.5 * r * r;
        }
        case LossKind::logistic: {
            check_label(y);
            const double wp = 0.5 * (1.0 + y);
            const double wm = 0.5 * (1.0 - y);
            return model.scale * (wp * softplus(-theta) + wm * softplus(theta));
        }
        case LossKind::exponential: {
            check_label(y);
            const double wp = 0.5 * (1.0 + y);
            const double wm = 0.5 * (1.0 - y);
            return model.scale * (wp * std::exp(-theta) + wm * std::exp(theta));
        }
    }
    throw std::logic_error("unknown loss kind");
}

double loss_grad(const LossModel& model, double y, double theta) {
    switch (model.kind) {
        case LossKind::least_squares:
            return model.scale * (theta - y);
        case LossKind::logistic: {
            check_label(y);
            const double wp = 0.5 * (1.0 + y);
            const double wm = 0.5 * (1.0 - y);
            return model.scale * (-wp * sigmoid(-theta) + wm * sigmoid(theta));
        }
        case LossKind::exponential: {
            check_label(y);
            const double wp = 0.5 * (1.0 + y);
            const double wm = 0.5 * (1.0 - y);
            return model.scale * (-wp * std::exp(-theta) + wm * std::exp(theta));
        }
    }
    throw std::logic_error("unknown loss kind");
}

Eigen::VectorXd empirical_gradient(const LossModel& model,
                                   const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& f) {
    if (y.size() != f.size()) {
        throw std::invalid_argument("empirical_gradient: length mismatch");
    }
    const auto n = y.size();
    Eigen::VectorXd g(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        g(i) = loss_grad(model, y(i), f(i)) * inv_n;
    }
    return g;
}

double hilbert_radius(double hilbert_norm_fstar, double sigma) {
    if (hilbert_norm_fstar < 0.0 || sigma < 0.0) {
        throw std::invalid_argument("hilbert_radius requires nonnegative inputs");
    }
    const double m = std::max({hilbert_norm_fstar * hilbert_norm_fstar, 32.0, sigma * sigma});
    return std::sqrt(2.0 * m);
}

double bounded_noise_level(double M, double C_H) {
    return 4.0 * (2.0 * M + 1.0) * (1.0 + 2.0 * C_H);
}

NoiseSpec NoiseSpec::gaussian(double sd) {
    if (!(sd > 0.0)) throw std::invalid_argument("gaussian noise requires sd > 0");
    NoiseSpec n;
    n.kind = NoiseKind::gaussian_sd;
    n.sd = sd;
    return n;
}

NoiseSpec NoiseSpec::bounded(double C_H) {
    if (C_H < 0.0) throw std::invalid_argument("bounded noise requires C_H >= 0");
    NoiseSpec n;
    n.kind = NoiseKind::bounded_loss;
    n.C_H = C_H;
    return n;
}

double effective_noise_level(const NoiseSpec& noise, const LossModel& model) {
    if (noise.kind == NoiseKind::gaussian_sd) {
        if (model.kind != LossKind::least_squares) {
            throw std::invalid_argument(
                "gaussian_sd noise pairs with the least-squares loss only");
        }
        return 2.0 * noise.sd;
    }
    if (model.kind == LossKind::least_squares) {
        throw std::invalid_argument(
            "bounded_loss noise pairs with the classification losses only");
    }
    return bounded_noise_level(model.M, noise.C_H);
}

LossConstantChain resolve_classification_constants(LossKind kind,
                                                   double hilbert_norm_fstar) {
    if (kind == LossKind::least_squares) {
        throw std::invalid_argument("constant chain applies to classification losses");
    }
    const double fn = hilbert_norm_fstar;
    const double C_H0 = std::sqrt(2.0 * std::max(fn * fn, 32.0));
    const MmConstants first = mM_constants(kind, C_H0 + fn);
    const double sigma = bounded_noise_level(first.M, C_H0);
    LossConstantChain chain;
    chain.sigma = sigma;
    chain.C_H = hilbert_radius(fn, sigma);
    chain.D = chain.C_H + fn;
    const MmConstants final = mM_constants(kind, chain.D);
    chain.m = final.m;
    chain.M = final.M;
    chain.B = final.B;
    return chain;
}

}  // namespace kboost
