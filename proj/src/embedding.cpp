#include "qgeo/embedding.hpp"

#include <cmath>

namespace qgeo {

namespace {

constexpr double kHorizTol = 1e-8;

void require_horizontal(const QVector& v, const QVector& z, const char* what) {
    if (horizontality_defect(v, z) > kHorizTol)
        throw GeometryError(std::string(what) + ": vector is not horizontal");
}

}  // namespace

SpaceFormPoint SpaceFormPoint::from_lift(const QVector& z, double tol) {
    return {z, projector(z, tol)};
}

QVector horizontal_project(const QVector& v, const QVector& z) {
    // v - c Psi(v, z) z removes the full quaternionic span of z (radial plus
    // the three fiber directions).
    const Quaternion coef = hermitian_form(v, z) * double(z.sig().c);
    return v - left_mul(coef, z);
}

double horizontality_defect(const QVector& v, const QVector& z) {
    return abs(hermitian_form(v, z));
}

HorizontalVector make_horizontal(const SpaceFormPoint& p, const QVector& raw) {
    return {p.lift, horizontal_project(raw, p.lift)};
}

QVector fiber_direction(const SpaceFormPoint& p, int q) {
    return left_mul(Quaternion::imaginary_unit(q), p.lift);
}

HorizontalVector jq_apply(const SpaceFormPoint& p, int q, const HorizontalVector& v) {
    return {p.lift, left_mul(Quaternion::imaginary_unit(q), v.v)};
}

QVector geodesic_lift(const QVector& z, const QVector& v, double t) {
    if (z.sig().c == 1) return std::cos(t) * z + std::sin(t) * v;
    return std::cosh(t) * z + std::sinh(t) * v;
}

SpaceFormPoint geodesic(const SpaceFormPoint& p, const HorizontalVector& X, double t, double tol) {
    require_horizontal(X.v, p.lift, "geodesic");
    if (std::abs(re_form(X.v, X.v) - 1.0) > tol)
        throw GeometryError("geodesic: direction is not unit");
    return SpaceFormPoint::from_lift(geodesic_lift(p.lift, X.v, t));
}

AmbientTangent push_tangent(const SpaceFormPoint& p, const QVector& v) {
    const QVector& z = p.lift;
    const int n = z.sig().ambient();
    QMatrix out(z.sig());
    for (int j = 0; j < n; ++j) {
        const Quaternion cvj = conj(v[j]);
        const Quaternion czj = conj(z[j]);
        for (int k = 0; k < n; ++k) {
            const double col = k == 0 ? 1.0 : double(z.sig().c);
            out.at(j, k) = (cvj * z[k] + czj * v[k]) * col;
        }
    }
    return {out};
}

std::vector<QVector> horizontal_basis(const SpaceFormPoint& p) {
    const FormSignature sig = p.lift.sig();
    std::vector<QVector> basis;
    basis.reserve(sig.horizontal_dim());
    // Quaternionic Gram-Schmidt over the coordinate directions, then the real
    // span of {b, ib, jb, kb} for each retained quaternionic vector.
    std::vector<QVector> qbasis;
    for (int a = 0; a < sig.ambient() && static_cast<int>(qbasis.size()) < sig.m; ++a) {
        QVector cand = horizontal_project(QVector::basis(sig, a), p.lift);
        for (const auto& b : qbasis) cand -= left_mul(hermitian_form(cand, b), b);
        const double n2 = re_form(cand, cand);
        if (n2 < 1e-10) continue;  // candidate collapsed into the line of z
        qbasis.push_back(cand * (1.0 / std::sqrt(n2)));
    }
    if (static_cast<int>(qbasis.size()) != sig.m)
        throw GeometryError("horizontal_basis: failed to span the horizontal space");
    for (const auto& b : qbasis) {
        basis.push_back(b);
        for (int q = 1; q <= 3; ++q) basis.push_back(left_mul(Quaternion::imaginary_unit(q), b));
    }
    return basis;
}

std::vector<QMatrix> embedded_tangent_basis(const SpaceFormPoint& p) {
    std::vector<QMatrix> out;
    for (const auto& b : horizontal_basis(p)) out.push_back(push_tangent(p, b).value);
    return out;
}

QMatrix normal_project(const QMatrix& M, const std::vector<QMatrix>& tangent_basis) {
    QMatrix out = M;
    for (const auto& B : tangent_basis) out -= trace_metric(out, B) * B;
    return out;
}

namespace {

QMatrix phi_of_lift(const QVector& z) {
    // Entrywise projector formula without the quadric check; used on points of
    // exact lift curves where the defect is at roundoff level.
    const int n = z.sig().ambient();
    QMatrix P(z.sig());
    for (int j = 0; j < n; ++j) {
        const Quaternion cj = conj(z[j]);
        for (int k = 0; k < n; ++k) {
            const double col = k == 0 ? 1.0 : double(z.sig().c);
            P.at(j, k) = (cj * z[k]) * col;
        }
    }
    return P;
}

/// Phi(z + delta) - Phi(z) evaluated through the increment so that the O(h)
/// and O(h^2) parts survive in full relative precision.
QMatrix phi_increment(const QVector& z, const QVector& delta) {
    const int n = z.sig().ambient();
    const QVector zpd = z + delta;
    QMatrix out(z.sig());
    for (int j = 0; j < n; ++j) {
        const Quaternion cdj = conj(delta[j]);
        const Quaternion czj = conj(z[j]);
        for (int k = 0; k < n; ++k) {
            const double col = k == 0 ? 1.0 : double(z.sig().c);
            out.at(j, k) = (cdj * zpd[k] + czj * delta[k]) * col;
        }
    }
    return out;
}

/// Increment of the geodesic lift, with the cosine term written through the
/// half-angle square to avoid cancellation near t = 0.
QVector geodesic_increment(const QVector& z, const QVector& v, double t) {
    if (z.sig().c == 1) {
        const double s = std::sin(0.5 * t);
        return (-2.0 * s * s) * z + std::sin(t) * v;
    }
    const double s = std::sinh(0.5 * t);
    return (2.0 * s * s) * z + std::sinh(t) * v;
}

/// Raw second difference of Phi along the unit geodesic in direction d at
/// scale h, without projection.
QMatrix second_difference(const SpaceFormPoint& p, const QVector& d, double h) {
    const QMatrix plus = phi_increment(p.lift, geodesic_increment(p.lift, d, h));
    const QMatrix minus = phi_increment(p.lift, geodesic_increment(p.lift, d, -h));
    return (plus + minus) * (1.0 / (h * h));
}

QMatrix sigma_diagonal(const SpaceFormPoint& p, const QVector& v, const SigmaConfig& cfg,
                       const std::vector<QMatrix>& tangent_basis) {
    const double scale2 = re_form(v, v);
    if (scale2 < 1e-28) return QMatrix(p.lift.sig());
    const QVector unit = v * (1.0 / std::sqrt(scale2));
    QMatrix est = second_difference(p, unit, cfg.h);
    double h = cfg.h;
    for (int level = 0; level < cfg.richardson; ++level) {
        h *= 0.5;
        const QMatrix finer = second_difference(p, unit, h);
        est = (4.0 * finer - est) * (1.0 / 3.0);
    }
    return scale2 * normal_project(est, tangent_basis);
}

}  // namespace

QMatrix sigma(const SpaceFormPoint& p, const HorizontalVector& X, const HorizontalVector& Y,
              const SigmaConfig& cfg) {
    require_horizontal(X.v, p.lift, "sigma");
    require_horizontal(Y.v, p.lift, "sigma");
    const auto basis = embedded_tangent_basis(p);
    const QVector diff = X.v - Y.v;
    if (re_form(diff, diff) < 1e-24) return sigma_diagonal(p, X.v, cfg, basis);
    // sigma(X, Y) = ( sigma(X+Y, X+Y) - sigma(X-Y, X-Y) ) / 4.
    const QMatrix plus = sigma_diagonal(p, X.v + Y.v, cfg, basis);
    const QMatrix minus = sigma_diagonal(p, diff, cfg, basis);
    return 0.25 * (plus - minus);
}

QMatrix sigma_exact(const SpaceFormPoint& p, const HorizontalVector& X,
                    const HorizontalVector& Y) {
    const QVector& z = p.lift;
    const QVector& x = X.v;
    const QVector& y = Y.v;
    const int n = z.sig().ambient();
    const double c = z.sig().c;
    const double cross = re_form(x, y);
    QMatrix out(z.sig());
    for (int j = 0; j < n; ++j) {
        const Quaternion cxj = conj(x[j]);
        const Quaternion cyj = conj(y[j]);
        const Quaternion czj = conj(z[j]);
        for (int k = 0; k < n; ++k) {
            const double col = k == 0 ? 1.0 : c;
            out.at(j, k) = (cxj * y[k] + cyj * x[k] - (2.0 * c * cross) * (czj * z[k])) * col;
        }
    }
    return out;
}

HorizontalVector shape_operator_of_embedding(const SpaceFormPoint& p, const HorizontalVector& X,
                                             const HorizontalVector& Y,
                                             const HorizontalVector& V) {
    const double c = p.lift.sig().c;
    QVector acc = (2.0 * re_form(X.v, Y.v)) * V.v + re_form(X.v, V.v) * Y.v +
                  re_form(Y.v, V.v) * X.v;
    for (int q = 1; q <= 3; ++q) {
        const QVector jx = left_mul(Quaternion::imaginary_unit(q), X.v);
        const QVector jy = left_mul(Quaternion::imaginary_unit(q), Y.v);
        acc += re_form(jx, V.v) * jy + re_form(jy, V.v) * jx;
    }
    return {p.lift, c * acc};
}

HorizontalVector curvature_op(const SpaceFormPoint& p, const HorizontalVector& X,
                              const HorizontalVector& Y, const HorizontalVector& Z) {
    const double c = p.lift.sig().c;
    QVector acc = re_form(Y.v, Z.v) * X.v - re_form(X.v, Z.v) * Y.v;
    for (int q = 1; q <= 3; ++q) {
        const QVector jx = left_mul(Quaternion::imaginary_unit(q), X.v);
        const QVector jy = left_mul(Quaternion::imaginary_unit(q), Y.v);
        const QVector jz = left_mul(Quaternion::imaginary_unit(q), Z.v);
        acc += re_form(jy, Z.v) * jx - re_form(jx, Z.v) * jy - (2.0 * re_form(jx, Y.v)) * jz;
    }
    return {p.lift, c * acc};
}

HorizontalVector normal_jacobi(const SpaceFormPoint& p, const HorizontalVector& xi,
                               const HorizontalVector& X) {
    return curvature_op(p, X, xi, xi);
}

HorizontalVector normal_jacobi_reduced(const SpaceFormPoint& p, const HorizontalVector& xi,
                                       const HorizontalVector& X) {
    const double c = p.lift.sig().c;
    QVector acc = X.v - re_form(X.v, xi.v) * xi.v;
    for (int q = 1; q <= 3; ++q) {
        const QVector uq = -1.0 * left_mul(Quaternion::imaginary_unit(q), xi.v);
        acc += (3.0 * re_form(X.v, uq)) * uq;
    }
    return {p.lift, c * acc};
}

QMatrix weingarten_fd(const SpaceFormPoint& p, const QMatrix& E, const HorizontalVector& V,
                      double h) {
    require_horizontal(V.v, p.lift, "weingarten_fd");
    auto extension = [&](double t) {
        const SpaceFormPoint q = SpaceFormPoint::from_lift(geodesic_lift(p.lift, V.v, t));
        return normal_project(E, embedded_tangent_basis(q));
    };
    auto derivative = [&](double step) {
        return (extension(step) - extension(-step)) * (1.0 / (2.0 * step));
    };
    const QMatrix coarse = derivative(h);
    const QMatrix fine = derivative(0.5 * h);
    const QMatrix d = (4.0 * fine - coarse) * (1.0 / 3.0);
    // Tangential part of -dE/dt.
    QMatrix out(p.lift.sig());
    for (const auto& B : embedded_tangent_basis(p)) out += (-trace_metric(d, B)) * B;
    return out;
}

HorizontalVector parallel_transport(const SpaceFormPoint& p, const HorizontalVector& dir,
                                    double t, const HorizontalVector& w) {
    require_horizontal(dir.v, p.lift, "parallel_transport");
    const Quaternion along = hermitian_form(w.v, dir.v);
    const QVector rest = w.v - left_mul(along, dir.v);
    const double c = p.lift.sig().c;
    QVector rotated =
        c == 1 ? -std::sin(t) * p.lift + std::cos(t) * dir.v
               : std::sinh(t) * p.lift + std::cosh(t) * dir.v;
    return {geodesic_lift(p.lift, dir.v, t), left_mul(along, rotated) + rest};
}

}  // namespace qgeo
