#pragma once

#include <Eigen/Dense>
#include <functional>

#include "qgeo/models.hpp"

namespace qgeo::laplace {

struct DomainError : GeometryError {
    using GeometryError::GeometryError;
};

/// Step configuration of the finite-difference Laplacian.
struct FDConfig {
    double h = 1e-3;
    int richardson = 1;

    void validate() const {
        if (!(h >= 1e-5 && h <= 1e-1)) throw GeometryError("FDConfig: step outside [1e-5, 1e-1]");
        if (richardson < 0 || richardson > 3)
            throw GeometryError("FDConfig: richardson levels outside [0, 3]");
    }
};

struct MetricPatch {
    Eigen::MatrixXd g;
    Eigen::MatrixXd g_inv;
    double sqrt_det = 0.0;
};

using MetricFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using MatrixField = std::function<QMatrix(const Eigen::VectorXd&)>;
using ScalarField = std::function<double(const Eigen::VectorXd&)>;

/// Induced metric of a model chart: g_ij = Re Psi of the horizontally
/// projected coordinate tangents.  Throws on rank deficiency.
MetricPatch induced_metric(const models::Chart& chart, const Eigen::VectorXd& u,
                           double h_tangent = 1e-3);

/// Metric closure for a chart, for use with the generic kernel below.
MetricFn metric_fn(const models::Chart& chart, double h_tangent = 1e-3);

/// The position field u -> Phi(lift(u)).
MatrixField position_field(const models::Chart& chart);

namespace detail {

Eigen::VectorXd divergence_weights(const MetricFn& metric, const Eigen::VectorXd& u, double h,
                                   const Eigen::MatrixXd& g_inv, double sqrt_det);

template <class V>
V laplace_once(const std::function<V(const Eigen::VectorXd&)>& f, const MetricFn& metric,
               const Eigen::VectorXd& u, double h) {
    const int n = static_cast<int>(u.size());
    const Eigen::MatrixXd g = metric(u);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw GeometryError("laplace: induced metric is not positive definite");
    const Eigen::MatrixXd g_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    const double sqrt_det = std::sqrt(g.determinant());
    const Eigen::VectorXd b = divergence_weights(metric, u, h, g_inv, sqrt_det);

    const V f0 = f(u);
    V acc = f0 * 0.0;
    const double inv_h2 = 1.0 / (h * h);
    std::vector<V> plus, minus;
    plus.reserve(n);
    minus.reserve(n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd up = u, um = u;
        up[j] += h;
        um[j] -= h;
        plus.push_back(f(up));
        minus.push_back(f(um));
        acc += (plus[j] + minus[j] - 2.0 * f0) * (g_inv(j, j) * inv_h2);
        acc += (plus[j] - minus[j]) * (b(j) / (2.0 * h));
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(g_inv(i, j)) < 1e-15) continue;
            Eigen::VectorXd upp = u, upm = u, ump = u, umm = u;
            upp[i] += h;
            upp[j] += h;
            upm[i] += h;
            upm[j] -= h;
            ump[i] -= h;
            ump[j] += h;
            umm[i] -= h;
            umm[j] -= h;
            acc += (f(upp) - f(upm) - f(ump) + f(umm)) * (2.0 * g_inv(i, j) * 0.25 * inv_h2);
        }
    // Geometer's sign: positive spectrum on compact model spaces.
    return acc * (-1.0);
}

}  // namespace detail

/// Laplace-Beltrami operator applied componentwise to a field, as the
/// negative metric divergence of the gradient, with Romberg extrapolation of
/// the whole stencil in the step.
template <class V>
V laplace_beltrami(const std::function<V(const Eigen::VectorXd&)>& f, const MetricFn& metric,
                   const Eigen::VectorXd& u, const FDConfig& cfg = {}) {
    cfg.validate();
    std::vector<V> prev;
    for (int i = 0; i <= cfg.richardson; ++i) {
        std::vector<V> row;
        row.push_back(detail::laplace_once<V>(f, metric, u, cfg.h / double(1 << i)));
        for (int j = 1; j <= i; ++j) {
            const double w = std::pow(4.0, double(j));
            row.push_back((row[static_cast<size_t>(j - 1)] * w - prev[static_cast<size_t>(j - 1)]) *
                          (1.0 / (w - 1.0)));
        }
        prev = std::move(row);
    }
    return prev.back();
}

/// Laplacian on a model chart with a domain guard for the stencil.
QMatrix laplace_beltrami(const MatrixField& f, const models::Chart& chart,
                         const Eigen::VectorXd& u, const FDConfig& cfg = {});

double laplace_beltrami(const ScalarField& f, const models::Chart& chart,
                        const Eigen::VectorXd& u, const FDConfig& cfg = {});

/// Pure finite-difference bi-Laplacian (no closed forms anywhere): the outer
/// Laplacian is applied to the field u -> Laplacian(f)(u).  The two steps are
/// staggered; accuracy is limited to roughly 1e-3 relative.
QMatrix bi_laplacian_fd(const MatrixField& f, const models::Chart& chart,
                        const Eigen::VectorXd& u, const FDConfig& outer, const FDConfig& inner);

}  // namespace qgeo::laplace
