#include "doctest.h"

#include <cmath>
#include <limits>

#include "kboost/losses.hpp"
#include "kboost/rng.hpp"

using namespace kboost;

namespace {

// 5-point second-derivative stencil; O(h^4) truncation keeps the
// round-off term far below the m/M tolerance bands.
double second_derivative(const LossModel& model, double y, double theta,
                         double h = 5e-3) {
    const double f2p = loss_value(model, y, theta + 2 * h);
    const double f1p = loss_value(model, y, theta + h);
    const double f0 = loss_value(model, y, theta);
    const double f1m = loss_value(model, y, theta - h);
    const double f2m = loss_value(model, y, theta - 2 * h);
    return (-f2p + 16 * f1p - 30 * f0 + 16 * f1m - f2m) / (12 * h * h);
}

}  // namespace

TEST_CASE("loss values") {
    const LossModel ls = LossModel::make(LossKind::least_squares);
    CHECK(loss_value(ls, 2.0, 0.5) == doctest::Approx(1.125).epsilon(1e-15));

    const LossModel logit = LossModel::make(LossKind::logistic, 2.0);
    CHECK(loss_value(logit, 1.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    const LossModel expo = LossModel::make(LossKind::exponential, 2.0);
    CHECK(loss_value(expo, -1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(loss_value(logit, 2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(loss_value(expo, -1.5, 0.0), std::invalid_argument);
}

TEST_CASE("loss gradients") {
    const LossModel ls = LossModel::make(LossKind::least_squares);
    CHECK(loss_grad(ls, 0.7, 0.7) == 0.0);

    const LossModel logit = LossModel::make(LossKind::logistic, 2.0);
    CHECK(loss_grad(logit, 1.0, 0.0) == doctest::Approx(-0.5).epsilon(1e-14));

    const LossModel expo = LossModel::make(LossKind::exponential, 2.0);
    CHECK(loss_grad(expo, 1.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-15));

    // the saturating form stays finite far outside the theory ball
    CHECK(std::isfinite(loss_grad(logit, 1.0, 50.0)));
    CHECK(std::isfinite(loss_grad(logit, -1.0, -50.0)));
    CHECK(std::abs(loss_grad(logit, 1.0, -50.0)) <= 1.0);
}

TEST_CASE("fractional labels average the replicate losses") {
    Rng rng(21);
    for (LossKind kind : {LossKind::logistic, LossKind::exponential}) {
        const LossModel model = LossModel::make(kind, 1.0);
        for (int rep = 0; rep < 50; ++rep) {
            const int reps = 1 + static_cast<int>(rng.uniform01() * 7);
            int plus = 0;
            for (int k = 0; k < reps; ++k) plus += rng.bernoulli(0.5) ? 1 : 0;
            const double ybar = (2.0 * plus - reps) / reps;
            const double theta = 2.0 * rng.normal();

            double mean_loss = 0.0, mean_grad = 0.0;
            for (int k = 0; k < reps; ++k) {
                const double yk = k < plus ? 1.0 : -1.0;
                mean_loss += loss_value(model, yk, theta) / reps;
                mean_grad += loss_grad(model, yk, theta) / reps;
            }
            CHECK(loss_value(model, ybar, theta) ==
                  doctest::Approx(mean_loss).epsilon(1e-12));
            CHECK(loss_grad(model, ybar, theta) ==
                  doctest::Approx(mean_grad).epsilon(1e-12));
        }
    }
}

TEST_CASE("empirical gradient") {
    const LossModel ls = LossModel::make(LossKind::least_squares);
    Eigen::VectorXd y(2), f(2);
    y << 1.0, 3.0;
    f << 0.0, 0.0;
    const Eigen::VectorXd g = empirical_gradient(ls, y, f);
    CHECK(g(0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(g(1) == doctest::Approx(-1.5).epsilon(1e-15));

    CHECK(empirical_gradient(ls, y, y).norm() == 0.0);

    const LossModel logit = LossModel::make(LossKind::logistic, 1.0);
    Eigen::VectorXd y1(1), f1(1);
    y1 << 1.0;
    f1 << 0.0;
    CHECK(empirical_gradient(logit, y1, f1)(0) == doctest::Approx(-0.5).epsilon(1e-14));

    Eigen::VectorXd y3(3);
    y3.setZero();
    CHECK_THROWS_AS(empirical_gradient(ls, y3, f), std::invalid_argument);
}

TEST_CASE("curvature constants") {
    const MmConstants ls = mM_constants(LossKind::least_squares, 0.0);
    CHECK(ls.m == 1.0);
    CHECK(ls.M == 1.0);
    CHECK(std::isinf(ls.B));

    const MmConstants logit0 = mM_constants(LossKind::logistic, 0.0);
    CHECK(logit0.m == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(logit0.M == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(logit0.B == 1.0);

    const MmConstants expo0 = mM_constants(LossKind::exponential, 0.0);
    CHECK(expo0.m == 1.0);
    CHECK(expo0.M == 1.0);
    CHECK(expo0.B == 1.0);

    const MmConstants logit2 = mM_constants(LossKind::logistic, 2.0);
    CHECK(logit2.m ==
          doctest::Approx(1.0 / (std::exp(-2.0) + std::exp(2.0) + 2.0)).epsilon(1e-14));
    CHECK(logit2.m == doctest::Approx(0.10499358540350662).epsilon(1e-12));

    SUBCASE("monotonicity in D") {
        double prev_m_logit = 1.0, prev_m_exp = 2.0, prev_M_exp = 0.0;
        for (double D = 0.0; D <= 6.0; D += 0.25) {
            const MmConstants lo = mM_constants(LossKind::logistic, D);
            const MmConstants ex = mM_constants(LossKind::exponential, D);
            CHECK(lo.m <= prev_m_logit + 1e-15);
            CHECK(ex.m <= prev_m_exp + 1e-15);
            CHECK(ex.M >= prev_M_exp - 1e-15);
            CHECK(lo.m > 0.0);
            CHECK(lo.m <= lo.M);
            CHECK(ex.m <= ex.M);
            prev_m_logit = lo.m;
            prev_m_exp = ex.m;
            prev_M_exp = ex.M;
        }
    }
}

TEST_CASE("hilbert radius and noise levels") {
    CHECK(hilbert_radius(1.0, 1.0) == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(hilbert_radius(10.0, 0.0) == doctest::Approx(std::sqrt(200.0)).epsilon(1e-15));
    CHECK(hilbert_radius(0.0, 0.0) == doctest::Approx(8.0).epsilon(1e-15));
    CHECK_THROWS_AS(hilbert_radius(-1.0, 0.0), std::invalid_argument);

    CHECK(bounded_noise_level(0.25, 8.0) == doctest::Approx(102.0).epsilon(1e-15));
    CHECK(bounded_noise_level(0.0, 0.0) == doctest::Approx(4.0).epsilon(1e-15));

    const LossModel ls = LossModel::make(LossKind::least_squares);
    const double sd = std::sqrt(0.5);
    CHECK(effective_noise_level(NoiseSpec::gaussian(sd), ls) ==
          doctest::Approx(2.0 * sd).epsilon(1e-15));

    const LossModel logit = LossModel::make(LossKind::logistic, 1.0);
    CHECK(effective_noise_level(NoiseSpec::bounded(8.0), logit) ==
          doctest::Approx(102.0).epsilon(1e-15));

    CHECK_THROWS_AS(effective_noise_level(NoiseSpec::gaussian(1.0), logit),
                    std::invalid_argument);
    CHECK_THROWS_AS(effective_noise_level(NoiseSpec::bounded(8.0), ls),
                    std::invalid_argument);
}

TEST_CASE("two-pass constant chain for classification losses") {
    const LossConstantChain logit = resolve_classification_constants(LossKind::logistic, 1.0);
    CHECK(logit.sigma == doctest::Approx(102.0).epsilon(1e-12));
    CHECK(logit.C_H == doctest::Approx(144.2497833620557).epsilon(1e-12));
    CHECK(logit.D == doctest::Approx(145.2497833620557).epsilon(1e-12));
    CHECK(logit.M == doctest::Approx(0.25));
    CHECK(logit.m > 0.0);

    const LossConstantChain expo = resolve_classification_constants(LossKind::exponential, 1.0);
    CHECK(std::isfinite(expo.sigma));
    CHECK(expo.sigma > 0.0);
    CHECK(expo.C_H >= expo.sigma);  // sigma dominates the radius here

    CHECK_THROWS_AS(resolve_classification_constants(LossKind::least_squares, 1.0),
                    std::invalid_argument);
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(77);
    const double h = 1e-6;
    for (int rep = 0; rep < 300; ++rep) {
        LossKind kind = LossKind::least_squares;
        double y = 2.0 * rng.normal();
        if (rep % 3 == 1) {
            kind = LossKind::logistic;
            y = rng.bernoulli(0.5) ? 1.0 : -1.0;
        } else if (rep % 3 == 2) {
            kind = LossKind::exponential;
            y = rng.bernoulli(0.5) ? 1.0 : -1.0;
        }
        const LossModel model = LossModel::make(kind, 8.0);
        const double theta = 16.0 * (rng.uniform01() - 0.5);
        const double grad = loss_grad(model, y, theta);
        const double fd =
            (loss_value(model, y, theta + h) - loss_value(model, y, theta - h)) / (2 * h);
        CHECK(std::abs(grad - fd) <= 1e-5 * (1.0 + std::abs(grad)));
    }
}

TEST_CASE("curvature sandwich and gradient bound on the theory ball") {
    for (double D : {0.5, 2.0}) {
        for (LossKind kind : {LossKind::logistic, LossKind::exponential}) {
            const LossModel model = LossModel::make(kind, D);
            for (double y : {-1.0, 1.0}) {
                for (int i = 0; i <= 200; ++i) {
                    const double theta = -D + 2.0 * D * i / 200.0;
                    const double dd = second_derivative(model, y, theta);
                    CHECK(dd >= model.m * (1.0 - 1e-6));
                    CHECK(dd <= model.M * (1.0 + 1e-6));
                    CHECK(std::abs(loss_grad(model, y, theta)) <=
                          model.B * (1.0 + 1e-9));
                }
            }
        }
    }
}

TEST_CASE("rescaling by the gradient bound") {
    const LossModel raw = LossModel::make(LossKind::exponential, 1.0);
    const LossModel scaled = LossModel::make(LossKind::exponential, 1.0, true);
    CHECK(scaled.B == doctest::Approx(1.0));
    CHECK(scaled.scale == doctest::Approx(1.0 / raw.B));
    CHECK(loss_value(scaled, 1.0, 0.3) ==
          doctest::Approx(loss_value(raw, 1.0, 0.3) / raw.B).epsilon(1e-14));
    CHECK(loss_grad(scaled, -1.0, 0.3) ==
          doctest::Approx(loss_grad(raw, -1.0, 0.3) / raw.B).epsilon(1e-14));

    // least squares has no finite gradient bound; the flag is a no-op
    const LossModel ls = LossModel::make(LossKind::least_squares, 0.0, true);
    CHECK(ls.scale == 1.0);
}
