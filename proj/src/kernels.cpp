#include "kboost/kernels.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace kboost {

namespace {

constexpr double kDomainSlack = 1e-12;

void check_unit_interval(double x, const char* what) {
    if (x < -kDomainSlack || x > 1.0 + kDomainSlack) {
        throw std::invalid_argument(std::string(what) +
                                    " outside the Sobolev-1 domain [0,1]: " +
                                    std::to_string(x));
    }
}

int table_index(double x, int n) {
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-9 || r < 1.0 || r > static_cast<double>(n)) {
        throw std::invalid_argument(
            "tabulated kernel expects integer coordinates in [1, n], got " +
            std::to_string(x));
    }
    return static_cast<int>(r) - 1;
}

}  // namespace

KernelSpec KernelSpec::sobolev1(bool rescale) {
    KernelSpec s;
    s.family = KernelFamily::sobolev1;
    s.rescale = rescale;
    return s;
}

KernelSpec KernelSpec::gaussian(double bandwidth, bool rescale) {
    if (!(bandwidth > 0.0)) {
        throw std::invalid_argument("gaussian kernel requires bandwidth > 0");
    }
    KernelSpec s;
    s.family = KernelFamily::gaussian;
    s.bandwidth = bandwidth;
    s.rescale = rescale;
    return s;
}

KernelSpec KernelSpec::tabulated(Eigen::MatrixXd table, bool rescale) {
    if (table.rows() == 0 || table.rows() != table.cols()) {
        throw std::invalid_argument("tabulated kernel matrix must be square and nonempty");
    }
    const double scale = std::max(1.0, table.cwiseAbs().maxCoeff());
    const double asym = (table - table.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) {
        throw std::invalid_argument("tabulated kernel matrix is not symmetric");
    }
    KernelSpec s;
    s.family = KernelFamily::tabulated;
    s.table = std::move(table);
    s.rescale = rescale;
    return s;
}

KernelSpec KernelSpec::tabulated_from_file(const std::string& path, bool rescale) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open kernel table file: " + path);
    }
    int n = 0;
    if (!(in >> n) || n < 1) {
        throw std::runtime_error("kernel table file must start with a positive size: " + path);
    }
    Eigen::MatrixXd table(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (!(in >> table(i, j))) {
                throw std::runtime_error("kernel table file truncated: " + path);
            }
        }
    }
    return tabulated(std::move(table), rescale);
}

double rescale_factor(const KernelSpec& spec) {
    if (!spec.rescale) return 1.0;
    switch (spec.family) {
        case KernelFamily::sobolev1:
            return 2.0;  // sup on [0,1] is K(1,1) = 1 + 1
        case KernelFamily::gaussian:
            return 1.0;  // K(x,x) = 1 everywhere
        case KernelFamily::tabulated: {
            const double sup = spec.table.diagonal().maxCoeff();
            return sup > 1.0 ? sup : 1.0;
        }
    }
    return 1.0;
}

double eval_kernel(const KernelSpec& spec, double x, double xp) {
    const double factor = rescale_factor(spec);
    switch (spec.family) {
        case KernelFamily::sobolev1:
            check_unit_interval(x, "x");
            check_unit_interval(xp, "x'");
            return (1.0 + std::min(x, xp)) / factor;
        case KernelFamily::gaussian: {
            if (!(spec.bandwidth > 0.0)) {
                throw std::invalid_argument("gaussian kernel requires bandwidth > 0");
            }
            const double d = x - xp;
            return std::exp(-d * d / (2.0 * spec.bandwidth * spec.bandwidth)) / factor;
        }
        case KernelFamily::tabulated: {
            const int n = static_cast<int>(spec.table.rows());
            return spec.table(table_index(x, n), table_index(xp, n)) / factor;
        }
    }
    throw std::logic_error("unknown kernel family");
}

DesignPoints equidistant_design(int n) {
    if (n < 1) throw std::invalid_argument("design requires n >= 1");
    DesignPoints d;
    d.points.reserve(n);
    for (int i = 1; i <= n; ++i) {
        d.points.push_back(static_cast<double>(i) / static_cast<double>(n));
    }
    return d;
}

DesignPoints index_design(int n) {
    if (n < 1) throw std::invalid_argument("design requires n >= 1");
    DesignPoints d;
    d.points.reserve(n);
    for (int i = 1; i <= n; ++i) d.points.push_back(static_cast<double>(i));
    return d;
}

KernelMatrix build_kernel_matrix(const KernelSpec& spec, const DesignPoints& design) {
    const int n = design.n();
    if (n < 1) throw std::invalid_argument("empty design");
    KernelMatrix K;
    K.n = n;
    K.factor = rescale_factor(spec);
    K.entries.resize(n, n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double v = eval_kernel(spec, design.points[i], design.points[j]) * inv_n;
            K.entries(i, j) = v;
            K.entries(j, i) = v;
        }
    }
    return K;
}

}  // namespace kboost
