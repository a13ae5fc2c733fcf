#include "qgeo/laplace.hpp"

#include <cmath>

namespace qgeo::laplace {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

QVector chart_tangent(const models::Chart& chart, const VectorXd& u, int i, double h) {
    VectorXd up = u, um = u, up2 = u, um2 = u;
    up[i] += h;
    um[i] -= h;
    up2[i] += 2 * h;
    um2[i] -= 2 * h;
    return (8.0 * (chart.lift(up) - chart.lift(um)) - (chart.lift(up2) - chart.lift(um2))) *
           (1.0 / (12.0 * h));
}

void require_inside(const models::Chart& chart, const VectorXd& u, double extent) {
    for (int i = 0; i < u.size(); ++i)
        if (std::abs(u[i]) + extent > chart.halfwidth)
            throw DomainError("laplace: stencil leaves the chart domain");
}

}  // namespace

MetricPatch induced_metric(const models::Chart& chart, const VectorXd& u, double h_tangent) {
    const int n = chart.n;
    const QVector z = chart.lift(u);
    std::vector<QVector> H;
    H.reserve(n);
    for (int i = 0; i < n; ++i)
        H.push_back(horizontal_project(chart_tangent(chart, u, i, h_tangent), z));
    MetricPatch patch;
    patch.g.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            patch.g(i, j) = re_form(H[static_cast<size_t>(i)], H[static_cast<size_t>(j)]);
            patch.g(j, i) = patch.g(i, j);
        }
    Eigen::LLT<MatrixXd> llt(patch.g);
    if (llt.info() != Eigen::Success)
        throw GeometryError("induced_metric: chart is rank deficient");
    patch.g_inv = llt.solve(MatrixXd::Identity(n, n));
    patch.sqrt_det = std::sqrt(patch.g.determinant());
    return patch;
}

MetricFn metric_fn(const models::Chart& chart, double h_tangent) {
    return [chart, h_tangent](const VectorXd& u) { return induced_metric(chart, u, h_tangent).g; };
}

MatrixField position_field(const models::Chart& chart) {
    return [chart](const VectorXd& u) { return projector(chart.lift(u), 1e-8); };
}

namespace detail {

VectorXd divergence_weights(const MetricFn& metric, const VectorXd& u, double h,
                            const MatrixXd& g_inv, double sqrt_det) {
    const int n = static_cast<int>(u.size());
    (void)g_inv;
    auto weighted_inverse = [&](const VectorXd& v) -> MatrixXd {
        const MatrixXd g = metric(v);
        return std::sqrt(g.determinant()) * g.inverse();
    };
    VectorXd b = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        VectorXd up = u, um = u;
        up[i] += h;
        um[i] -= h;
        const MatrixXd d = (weighted_inverse(up) - weighted_inverse(um)) * (1.0 / (2.0 * h));
        for (int j = 0; j < n; ++j) b(j) += d(i, j);
    }
    return b / sqrt_det;
}

}  // namespace detail

QMatrix laplace_beltrami(const MatrixField& f, const models::Chart& chart, const VectorXd& u,
                         const FDConfig& cfg) {
    require_inside(chart, u, 2.0 * cfg.h);
    return laplace_beltrami<QMatrix>(f, metric_fn(chart), u, cfg);
}

double laplace_beltrami(const ScalarField& f, const models::Chart& chart, const VectorXd& u,
                        const FDConfig& cfg) {
    require_inside(chart, u, 2.0 * cfg.h);
    return laplace_beltrami<double>(f, metric_fn(chart), u, cfg);
}

QMatrix bi_laplacian_fd(const MatrixField& f, const models::Chart& chart, const VectorXd& u,
                        const FDConfig& outer, const FDConfig& inner) {
    require_inside(chart, u, 2.0 * outer.h + 2.0 * inner.h);
    MatrixField first = [&f, &chart, inner](const VectorXd& v) {
        return laplace_beltrami<QMatrix>(f, metric_fn(chart), v, inner);
    };
    return laplace_beltrami<QMatrix>(first, metric_fn(chart), u, outer);
}

}  // namespace qgeo::laplace
