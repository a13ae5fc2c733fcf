#include "qgeo/models.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "qgeo/rng.hpp"

namespace qgeo::models {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

double cot(double r) { return std::cos(r) / std::sin(r); }
double coth(double r) { return std::cosh(r) / std::sinh(r); }

Quaternion from_complex(const cplx& z) { return {z.real(), z.imag(), 0.0, 0.0}; }

/// Complex entry times j on the right; (x + iy) j = x j + y k.
Quaternion complex_times_j(const cplx& z) { return {0.0, 0.0, z.real(), z.imag()}; }

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::P1k: return "p1k";
        case Family::P2: return "p2";
        case Family::H1k: return "h1k";
        case Family::H2: return "h2";
        case Family::H3: return "h3";
    }
    return "?";
}

std::optional<Family> family_from_name(const std::string& name) {
    if (name == "p1k") return Family::P1k;
    if (name == "p2") return Family::P2;
    if (name == "h1k") return Family::H1k;
    if (name == "h2") return Family::H2;
    if (name == "h3") return Family::H3;
    return std::nullopt;
}

void FamilySpec::validate() const {
    if (m < 2) throw GeometryError("FamilySpec: m must be at least 2");
    if (uses_k() && (k < 0 || k > m - 1))
        throw GeometryError("FamilySpec: k must lie in [0, m-1]");
    switch (family) {
        case Family::P1k:
            if (!(r > 0.0 && r < M_PI / 2))
                throw GeometryError("FamilySpec: radius outside (0, pi/2)");
            break;
        case Family::P2:
            if (!(r > 0.0 && r < M_PI / 4))
                throw GeometryError("FamilySpec: radius outside (0, pi/4)");
            break;
        case Family::H1k:
        case Family::H2:
            if (!(r > 0.0)) throw GeometryError("FamilySpec: radius must be positive");
            break;
        case Family::H3:
            break;
    }
}

namespace {

/// Affine section of the quaternionic core in the first block:
/// (1, s_1, ..., s_k) normalized for the block form; `timelike` switches
/// between the sphere and the index-1 hyperboloid normalization.
std::vector<Quaternion> core_block(const double* s, int k, bool timelike) {
    std::vector<Quaternion> a(static_cast<size_t>(k) + 1);
    a[0] = Quaternion::real(1.0);
    double s2 = 0.0;
    for (int j = 0; j < k; ++j) {
        a[static_cast<size_t>(j) + 1] = {s[4 * j], s[4 * j + 1], s[4 * j + 2], s[4 * j + 3]};
        s2 += norm_sq(a[static_cast<size_t>(j) + 1]);
    }
    const double scale = timelike ? 1.0 / std::sqrt(1.0 - s2) : 1.0 / std::sqrt(1.0 + s2);
    for (auto& q : a) q *= scale;
    return a;
}

/// Full sphere chart of the unit sphere of H^d: 4d - 1 parameters around the
/// first coordinate direction.
std::vector<Quaternion> sphere_block(const double* y, int d) {
    std::vector<Quaternion> b(static_cast<size_t>(d));
    b[0] = {1.0, y[0], y[1], y[2]};
    for (int j = 1; j < d; ++j)
        b[static_cast<size_t>(j)] = {y[4 * j - 1], y[4 * j], y[4 * j + 1], y[4 * j + 2]};
    double n2 = 0.0;
    for (const auto& q : b) n2 += norm_sq(q);
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& q : b) q *= scale;
    return b;
}

QVector tube_lift_a(const FamilySpec& spec, const VectorXd& u) {
    const FormSignature sig = spec.sig();
    const bool hyper = sig.c == -1;
    const int k = spec.k;
    const int d2 = spec.m - k;
    const auto a = core_block(u.data(), k, hyper);
    const auto b = sphere_block(u.data() + 4 * k, d2);
    const double ca = hyper ? std::cosh(spec.r) : std::cos(spec.r);
    const double sb = hyper ? std::sinh(spec.r) : std::sin(spec.r);
    QVector z = QVector::zero(sig);
    for (int j = 0; j <= k; ++j) z[j] = a[static_cast<size_t>(j)] * ca;
    for (int j = 0; j < d2; ++j) z[k + 1 + j] = b[static_cast<size_t>(j)] * sb;
    return z;
}

QVector tube_radial_a(const FamilySpec& spec, const VectorXd& u) {
    const FormSignature sig = spec.sig();
    const bool hyper = sig.c == -1;
    const int k = spec.k;
    const int d2 = spec.m - k;
    const auto a = core_block(u.data(), k, hyper);
    const auto b = sphere_block(u.data() + 4 * k, d2);
    const double da = hyper ? std::sinh(spec.r) : -std::sin(spec.r);
    const double db = hyper ? std::cosh(spec.r) : std::cos(spec.r);
    QVector z = QVector::zero(sig);
    for (int j = 0; j <= k; ++j) z[j] = a[static_cast<size_t>(j)] * da;
    for (int j = 0; j < d2; ++j) z[k + 1 + j] = b[static_cast<size_t>(j)] * db;
    return z;
}

struct ComplexCore {
    std::vector<cplx> u;
    std::vector<cplx> v;
};

/// Core point and unit tube direction for the tubes about the half-dimensional
/// complex core.  u is a normalized complex lift; v solves the weighted
/// bilinear condition sum_a g_a v_a u_a = 0, which makes v j horizontal at u
/// and normal to the core.
ComplexCore complex_core(const FamilySpec& spec, const VectorXd& uu) {
    const int m = spec.m;
    const int c = family_c(spec.family);
    ComplexCore out;
    out.u.assign(static_cast<size_t>(m) + 1, cplx(0, 0));
    out.u[0] = 1.0;
    double s2 = 0.0;
    for (int a = 1; a <= m; ++a) {
        out.u[static_cast<size_t>(a)] = cplx(uu[2 * (a - 1)], uu[2 * (a - 1) + 1]);
        s2 += std::norm(out.u[static_cast<size_t>(a)]);
    }
    const double scale = c == 1 ? 1.0 / std::sqrt(1.0 + s2) : 1.0 / std::sqrt(1.0 - s2);
    for (auto& z : out.u) z *= scale;

    // The bilinear condition is herm(v, d) = 0 with d_a = conj(g_a u_a).
    std::vector<cplx> d(static_cast<size_t>(m) + 1);
    for (int a = 0; a <= m; ++a)
        d[static_cast<size_t>(a)] =
            std::conj((a == 0 ? double(c) : 1.0) * out.u[static_cast<size_t>(a)]);
    auto herm = [m](const std::vector<cplx>& x, const std::vector<cplx>& y) {
        cplx acc(0, 0);
        for (int a = 0; a <= m; ++a)
            acc += x[static_cast<size_t>(a)] * std::conj(y[static_cast<size_t>(a)]);
        return acc;
    };
    const double dn2 = herm(d, d).real();
    std::vector<std::vector<cplx>> basis;
    for (int seed = 1; seed <= m; ++seed) {
        std::vector<cplx> cand(static_cast<size_t>(m) + 1, cplx(0, 0));
        cand[static_cast<size_t>(seed)] = 1.0;
        const cplx along = herm(cand, d) / dn2;
        for (int a = 0; a <= m; ++a) cand[static_cast<size_t>(a)] -= along * d[static_cast<size_t>(a)];
        for (const auto& b : basis) {
            const cplx coef = herm(cand, b);
            for (int a = 0; a <= m; ++a) cand[static_cast<size_t>(a)] -= coef * b[static_cast<size_t>(a)];
        }
        const double n2 = herm(cand, cand).real();
        if (n2 < 1e-12) throw GeometryError("complex core: direction basis collapsed");
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& z : cand) z *= inv;
        basis.push_back(std::move(cand));
    }

    const double* y = uu.data() + 2 * m;
    out.v.assign(static_cast<size_t>(m) + 1, cplx(0, 0));
    for (int a = 0; a <= m; ++a) {
        cplx acc = basis[0][static_cast<size_t>(a)] * cplx(1.0, y[0]);
        for (int t = 1; t < m; ++t)
            acc += basis[static_cast<size_t>(t)][static_cast<size_t>(a)] *
                   cplx(y[2 * t - 1], y[2 * t]);
        out.v[static_cast<size_t>(a)] = acc;
    }
    double n2 = 0.0;
    for (int a = 0; a <= m; ++a)
        n2 += (a == 0 ? double(c) : 1.0) * std::norm(out.v[static_cast<size_t>(a)]);
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& z : out.v) z *= inv;
    return out;
}

QVector tube_lift_b(const FamilySpec& spec, const VectorXd& uu) {
    const FormSignature sig = spec.sig();
    const ComplexCore core = complex_core(spec, uu);
    const bool hyper = sig.c == -1;
    const double ca = hyper ? std::cosh(spec.r) : std::cos(spec.r);
    const double sb = hyper ? std::sinh(spec.r) : std::sin(spec.r);
    QVector z = QVector::zero(sig);
    for (int a = 0; a <= spec.m; ++a)
        z[a] = from_complex(core.u[static_cast<size_t>(a)]) * ca +
               complex_times_j(core.v[static_cast<size_t>(a)]) * sb;
    return z;
}

QVector tube_radial_b(const FamilySpec& spec, const VectorXd& uu) {
    const FormSignature sig = spec.sig();
    const ComplexCore core = complex_core(spec, uu);
    const bool hyper = sig.c == -1;
    const double da = hyper ? std::sinh(spec.r) : -std::sin(spec.r);
    const double db = hyper ? std::cosh(spec.r) : std::cos(spec.r);
    QVector z = QVector::zero(sig);
    for (int a = 0; a <= spec.m; ++a)
        z[a] = from_complex(core.u[static_cast<size_t>(a)]) * da +
               complex_times_j(core.v[static_cast<size_t>(a)]) * db;
    return z;
}

QVector horosphere_lift(const FamilySpec& spec, const VectorXd& u) {
    const FormSignature sig = spec.sig();
    const int m = spec.m;
    // Null pair l = e0 + e1 and l' = (-e0 + e1)/2 with Psi(l, l') = 1; the
    // lift a l + l' + w stays on the level set Psi(z, l) = 1.
    double w2 = 0.0;
    QVector z = QVector::zero(sig);
    for (int a = 2; a <= m; ++a) {
        const int base = 4 * (a - 2);
        z[a] = {u[base], u[base + 1], u[base + 2], u[base + 3]};
        w2 += norm_sq(z[a]);
    }
    const Quaternion amp{-(1.0 + w2) / 2.0, u[4 * (m - 1)], u[4 * (m - 1) + 1],
                         u[4 * (m - 1) + 2]};
    z[0] = amp + Quaternion::real(-0.5);
    z[1] = amp + Quaternion::real(0.5);
    return z;
}

}  // namespace

Chart make_chart(const FamilySpec& spec) {
    spec.validate();
    Chart chart;
    chart.spec = spec;
    chart.sig = spec.sig();
    chart.n = spec.n();
    chart.halfwidth = 0.2;
    switch (spec.family) {
        case Family::P1k:
        case Family::H1k:
            chart.lift = [spec](const VectorXd& u) { return tube_lift_a(spec, u); };
            chart.radial = [spec](const VectorXd& u) { return tube_radial_a(spec, u); };
            break;
        case Family::P2:
        case Family::H2:
            chart.lift = [spec](const VectorXd& u) { return tube_lift_b(spec, u); };
            chart.radial = [spec](const VectorXd& u) { return tube_radial_b(spec, u); };
            break;
        case Family::H3:
            chart.halfwidth = 0.3;
            chart.lift = [spec](const VectorXd& u) { return horosphere_lift(spec, u); };
            chart.radial = nullptr;
            break;
    }
    return chart;
}

Chart reparametrized_chart(const Chart& base, const MatrixXd& linear, const VectorXd& shift,
                           bool gauge_twist) {
    Chart out = base;
    auto remap = [linear, shift](const VectorXd& u) -> VectorXd { return linear * u + shift; };
    auto lift = base.lift;
    out.lift = [remap, lift, gauge_twist](const VectorXd& u) {
        QVector z = lift(remap(u));
        if (gauge_twist) {
            // Position-dependent fiber rotation; invisible to everything that
            // passes through the horizontal projection.
            const double t = 0.3 * u[0] + 0.17 * (u.size() > 1 ? u[1] : 0.0);
            const Quaternion g{std::cos(t), std::sin(t) * 0.8, std::sin(t) * 0.6, 0.0};
            z = left_mul(normalized(g), z);
        }
        return z;
    };
    if (base.radial) {
        auto radial = base.radial;
        out.radial = [remap, radial](const VectorXd& u) { return radial(remap(u)); };
    }
    return out;
}

namespace {

QVector lift_derivative(const Chart& chart, const VectorXd& u, int i, double h) {
    VectorXd up = u, um = u, up2 = u, um2 = u;
    up[i] += h;
    um[i] -= h;
    up2[i] += 2 * h;
    um2[i] -= 2 * h;
    return (8.0 * (chart.lift(up) - chart.lift(um)) - (chart.lift(up2) - chart.lift(um2))) *
           (1.0 / (12.0 * h));
}

}  // namespace

NormalData normal_at(const Chart& chart, const VectorXd& u, const FrameConfig& cfg,
                     const QMatrix* align_with) {
    NormalData nd;
    nd.point = SpaceFormPoint::from_lift(chart.lift(u));
    const int n = chart.n;
    const int hd = chart.sig.horizontal_dim();

    std::vector<QVector> H;
    H.reserve(n);
    for (int i = 0; i < n; ++i)
        H.push_back(horizontal_project(lift_derivative(chart, u, i, cfg.h_tangent), nd.point.lift));

    const std::vector<QVector> B = horizontal_basis(nd.point);
    MatrixXd M(n, hd);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < hd; ++a) M(i, a) = re_form(H[i], B[static_cast<size_t>(a)]);

    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) < 1e-6) throw GeometryError("normal_at: chart tangents are rank deficient");
    const VectorXd w = svd.matrixV().col(hd - 1);
    QVector xi = QVector::zero(chart.sig);
    for (int a = 0; a < hd; ++a) xi += w(a) * B[static_cast<size_t>(a)];
    xi *= 1.0 / std::sqrt(re_form(xi, xi));

    QMatrix xi_push = push_tangent(nd.point, xi).value;
    bool flip = false;
    if (align_with != nullptr) {
        flip = frobenius_inner(xi_push, *align_with) < 0.0;
    } else if (chart.radial) {
        // Toward the tube core: with the Weingarten convention A = -D xi the
        // model spectra (cot r on the sphere directions and so on) carry the
        // signs of the inward normal.
        const QVector rad = horizontal_project(chart.radial(u), nd.point.lift);
        flip = re_form(xi, rad) > 0.0;
    }
    if (flip) {
        xi = -1.0 * xi;
        xi_push = -1.0 * xi_push;
    }
    nd.xi = xi;
    nd.xi_push = xi_push;

    // Orthonormal tangent frame by Gram-Schmidt over the horizontal
    // projections, tracking the combination over coordinate tangents.
    std::vector<QVector> frame;
    MatrixXd C = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        QVector v = H[i];
        VectorXd row = VectorXd::Zero(n);
        row(i) = 1.0;
        for (int l = 0; l < static_cast<int>(frame.size()); ++l) {
            const double coef = re_form(v, frame[static_cast<size_t>(l)]);
            v -= coef * frame[static_cast<size_t>(l)];
            row -= coef * C.row(l).transpose();
        }
        const double n2 = re_form(v, v);
        if (n2 < 1e-12) throw GeometryError("normal_at: frame Gram-Schmidt collapsed");
        const double inv = 1.0 / std::sqrt(n2);
        frame.push_back(v * inv);
        C.row(static_cast<int>(frame.size()) - 1) = inv * row.transpose();
    }
    nd.frame_hor = std::move(frame);
    nd.frame_from_coord = C;
    nd.frame_push.reserve(n);
    for (const auto& e : nd.frame_hor) nd.frame_push.push_back(push_tangent(nd.point, e).value);
    return nd;
}

ShapeFrame shape_frame(const Chart& chart, const VectorXd& u, const FrameConfig& cfg) {
    const int n = chart.n;
    NormalData nd = normal_at(chart, u, cfg);

    // d(xi)/du_j by five-point differences of the pushed normal field, with
    // neighbouring signs aligned to the centre normal.
    const double h = cfg.h_shape;
    std::vector<QMatrix> dxi;
    dxi.reserve(n);
    for (int j = 0; j < n; ++j) {
        auto eval = [&](double step) {
            VectorXd shifted = u;
            shifted[j] += step;
            return normal_at(chart, shifted, cfg, &nd.xi_push).xi_push;
        };
        dxi.push_back((8.0 * (eval(h) - eval(-h)) - (eval(2 * h) - eval(-2 * h))) *
                      (1.0 / (12.0 * h)));
    }

    MatrixXd N(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            N(i, j) = -trace_metric(nd.frame_push[static_cast<size_t>(i)], dxi[static_cast<size_t>(j)]);
    MatrixXd A = N * nd.frame_from_coord.transpose();

    ShapeFrame fr;
    fr.spec = chart.spec;
    fr.u = u;
    fr.point = nd.point;
    fr.frame_hor = std::move(nd.frame_hor);
    fr.frame_push = std::move(nd.frame_push);
    fr.frame_from_coord = nd.frame_from_coord;
    fr.xi = nd.xi;
    fr.xi_push = nd.xi_push;
    fr.asymmetry = (A - A.transpose()).cwiseAbs().maxCoeff();
    A = 0.5 * (A + A.transpose());

    if (!chart.radial && A.trace() < 0.0) {
        // No tube axis to orient against: fix the horosphere normal so the
        // mean curvature is positive.
        A = -A;
        fr.xi = -1.0 * fr.xi;
        fr.xi_push = -1.0 * fr.xi_push;
    }
    fr.A = A;

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
    fr.eigenvalues = es.eigenvalues();
    fr.eigenvectors = es.eigenvectors();

    // Raw triple U_q = -J_q xi, then the SO(3) gauge that diagonalizes A
    // restricted to span{U_1, U_2, U_3} so the triple is principal.
    std::array<QVector, 3> raw{QVector::zero(chart.sig), QVector::zero(chart.sig),
                               QVector::zero(chart.sig)};
    MatrixXd B3(n, 3);
    for (int q = 0; q < 3; ++q) {
        raw[static_cast<size_t>(q)] = -1.0 * left_mul(Quaternion::imaginary_unit(q + 1), fr.xi);
        for (int i = 0; i < n; ++i)
            B3(i, q) = re_form(raw[static_cast<size_t>(q)], fr.frame_hor[static_cast<size_t>(i)]);
    }
    const Eigen::Matrix3d M3 = B3.transpose() * A * B3;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es3(M3);
    Eigen::Matrix3d R = es3.eigenvectors().transpose();
    Eigen::Vector3d avals = es3.eigenvalues();
    // Keep an isolated restricted eigenvalue in the first slot so the simple
    // one is always alpha_1.
    if (std::abs(avals(1) - avals(0)) > cfg.cluster_gap &&
        std::abs(avals(2) - avals(1)) <= cfg.cluster_gap) {
        const Eigen::Matrix3d Rc = R;
        const Eigen::Vector3d ac = avals;
        R.row(0) = Rc.row(2);
        R.row(1) = Rc.row(0);
        R.row(2) = Rc.row(1);
        avals(0) = ac(2);
        avals(1) = ac(0);
        avals(2) = ac(1);
    }
    if (R.determinant() < 0.0) R.row(2) = -R.row(2);

    fr.triple_rotation = R;
    fr.Uq_coords = B3 * R.transpose();
    double presidual = 0.0;
    for (int q = 0; q < 3; ++q) {
        QVector uq = QVector::zero(chart.sig);
        for (int p = 0; p < 3; ++p) uq += R(q, p) * raw[static_cast<size_t>(p)];
        fr.Uq_hor[static_cast<size_t>(q)] = uq;
        const VectorXd col = fr.Uq_coords.col(q);
        fr.alpha[static_cast<size_t>(q)] = col.dot(A * col);
        presidual =
            std::max(presidual, (A * col - fr.alpha[static_cast<size_t>(q)] * col).norm());
    }
    fr.principality_residual = presidual;

    const MatrixXd Pperp = fr.Uq_coords * fr.Uq_coords.transpose();
    const MatrixXd Pd = MatrixXd::Identity(n, n) - Pperp;
    fr.d_invariance_residual = (Pperp * A * Pd).norm();
    return fr;
}

std::vector<Cluster> cluster_eigenvalues(const VectorXd& values, double gap) {
    std::vector<double> v(values.data(), values.data() + values.size());
    std::sort(v.begin(), v.end());
    std::vector<Cluster> out;
    size_t start = 0;
    for (size_t i = 1; i <= v.size(); ++i) {
        if (i == v.size() || v[i] - v[i - 1] > gap) {
            double sum = 0.0;
            for (size_t j = start; j < i; ++j) sum += v[j];
            out.push_back({sum / double(i - start), int(i - start)});
            start = i;
        }
    }
    return out;
}

double curvature_adapted_residual(const ShapeFrame& frame) {
    return curvature_adapted_residual(frame, frame.A);
}

double curvature_adapted_residual(const ShapeFrame& frame, const MatrixXd& A) {
    const int n = static_cast<int>(frame.frame_hor.size());
    MatrixXd K(n, n);
    const HorizontalVector xi{frame.point.lift, frame.xi};
    for (int j = 0; j < n; ++j) {
        const HorizontalVector Ej{frame.point.lift, frame.frame_hor[static_cast<size_t>(j)]};
        const QVector KEj = normal_jacobi(frame.point, xi, Ej).v;
        for (int i = 0; i < n; ++i)
            K(i, j) = re_form(frame.frame_hor[static_cast<size_t>(i)], KEj);
    }
    return (K * A - A * K).norm();
}

CurvatureScalars scalar_invariants(const ShapeFrame& frame, double cluster_gap) {
    CurvatureScalars out;
    out.f = frame.A.trace();
    out.f2 = (frame.A * frame.A).trace();
    out.alpha = frame.alpha;

    const int n = static_cast<int>(frame.A.rows());
    Eigen::FullPivHouseholderQR<MatrixXd> qr(frame.Uq_coords);
    const MatrixXd Q = qr.matrixQ();
    const MatrixXd W = Q.rightCols(n - 3);
    const MatrixXd AD = W.transpose() * frame.A * W;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(AD);
    out.d_spectrum = cluster_eigenvalues(es.eigenvalues(), cluster_gap);

    const double c = frame.spec.sig().c;
    for (const auto& cl : out.d_spectrum) {
        std::array<double, 3> taus{};
        for (int q = 0; q < 3; ++q) {
            const double aq = frame.alpha[static_cast<size_t>(q)];
            if (std::abs(aq * aq + 4.0 * c) < 1e-8) {
                out.partners_defined = false;
                taus[static_cast<size_t>(q)] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            const double tau_q = (2.0 * c + aq * cl.value) / (2.0 * cl.value - aq);
            taus[static_cast<size_t>(q)] = tau_q;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& other : out.d_spectrum)
                best = std::min(best, std::abs(other.value - tau_q));
            out.partner_residual = std::max(out.partner_residual, best);
        }
        out.partners.push_back(taus);
    }
    return out;
}

std::vector<Cluster> expected_spectrum(const FamilySpec& spec) {
    const int m = spec.m;
    std::vector<Cluster> rows;
    switch (spec.family) {
        case Family::P1k: {
            const int k = spec.k, l = m - k - 1;
            if (l > 0) rows.push_back({cot(spec.r), 4 * l});
            if (k > 0) rows.push_back({-std::tan(spec.r), 4 * k});
            rows.push_back({2.0 * cot(2.0 * spec.r), 3});
            break;
        }
        case Family::H1k: {
            const int k = spec.k, l = m - k - 1;
            if (l > 0) rows.push_back({coth(spec.r), 4 * l});
            if (k > 0) rows.push_back({std::tanh(spec.r), 4 * k});
            rows.push_back({2.0 * coth(2.0 * spec.r), 3});
            break;
        }
        case Family::P2:
            rows.push_back({cot(spec.r), 2 * (m - 1)});
            rows.push_back({-std::tan(spec.r), 2 * (m - 1)});
            rows.push_back({2.0 * cot(2.0 * spec.r), 1});
            rows.push_back({-2.0 * std::tan(2.0 * spec.r), 2});
            break;
        case Family::H2:
            rows.push_back({coth(spec.r), 2 * (m - 1)});
            rows.push_back({std::tanh(spec.r), 2 * (m - 1)});
            rows.push_back({2.0 * coth(2.0 * spec.r), 1});
            rows.push_back({2.0 * std::tanh(2.0 * spec.r), 2});
            break;
        case Family::H3:
            rows.push_back({1.0, 4 * (m - 1)});
            rows.push_back({2.0, 3});
            break;
    }
    std::sort(rows.begin(), rows.end(),
              [](const Cluster& a, const Cluster& b) { return a.value < b.value; });
    std::vector<Cluster> merged;
    for (const auto& r : rows) {
        if (!merged.empty() && std::abs(merged.back().value - r.value) < 1e-12)
            merged.back().multiplicity += r.multiplicity;
        else
            merged.push_back(r);
    }
    return merged;
}

VectorXd sq_apply(const ShapeFrame& frame, int q, const VectorXd& x) {
    const int n = static_cast<int>(frame.frame_hor.size());
    QVector X = QVector::zero(frame.point.lift.sig());
    for (int i = 0; i < n; ++i) X += x(i) * frame.frame_hor[static_cast<size_t>(i)];
    QVector JX = QVector::zero(frame.point.lift.sig());
    for (int p = 0; p < 3; ++p)
        JX += frame.triple_rotation(q - 1, p) * left_mul(Quaternion::imaginary_unit(p + 1), X);
    JX -= re_form(JX, frame.xi) * frame.xi;
    VectorXd out(n);
    for (int i = 0; i < n; ++i) out(i) = re_form(JX, frame.frame_hor[static_cast<size_t>(i)]);
    return out;
}

double class_a_derivative_residual(const Chart& chart, const VectorXd& u, const FrameConfig& cfg,
                                   int samples, unsigned seed) {
    const ShapeFrame fr = shape_frame(chart, u, cfg);
    const int n = chart.n;
    const double c = chart.sig.c;
    Rng rng(seed);

    const NormalData nd0 = normal_at(chart, u, cfg);
    auto tangent_coords = [&](const QMatrix& Mfield) {
        VectorXd coords(n);
        for (int i = 0; i < n; ++i)
            coords(i) = trace_metric(nd0.frame_push[static_cast<size_t>(i)], Mfield);
        return coords;
    };

    double residual = 0.0;
    for (int trial = 0; trial < samples; ++trial) {
        VectorXd x = VectorXd::Zero(n), y = VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            x(i) = rng.normal();
            y(i) = rng.normal();
        }
        x.normalize();
        y.normalize();
        const VectorXd xc = fr.frame_from_coord.transpose() * x;
        const VectorXd yc = fr.frame_from_coord.transpose() * y;

        // Extension of Y with frozen coordinate coefficients, optionally hit
        // with the shape operator of the frame at the shifted point.
        auto field = [&](double t, bool apply_A) {
            const VectorXd shifted = u + t * xc;
            const ShapeFrame g = shape_frame(chart, shifted, cfg);
            QVector w = QVector::zero(chart.sig);
            for (int j = 0; j < n; ++j)
                w += yc(j) * horizontal_project(lift_derivative(chart, shifted, j, cfg.h_tangent),
                                                g.point.lift);
            QMatrix wp = push_tangent(g.point, w).value;
            if (!apply_A) return wp;
            VectorXd coords(n);
            for (int i = 0; i < n; ++i)
                coords(i) = trace_metric(g.frame_push[static_cast<size_t>(i)], wp);
            const VectorXd acoords = g.A * coords;
            QMatrix out(chart.sig);
            for (int i = 0; i < n; ++i) out += acoords(i) * g.frame_push[static_cast<size_t>(i)];
            return out;
        };

        const double h = 2e-3;
        auto derivative = [&](bool apply_A) {
            auto central = [&](double step) {
                return (field(step, apply_A) - field(-step, apply_A)) * (1.0 / (2.0 * step));
            };
            return (4.0 * central(0.5 * h) - central(h)) * (1.0 / 3.0);
        };
        const QMatrix dAY = derivative(true);
        const QMatrix dY = derivative(false);
        const VectorXd lhs = tangent_coords(dAY) - fr.A * tangent_coords(dY);

        VectorXd rhs = VectorXd::Zero(n);
        for (int q = 1; q <= 3; ++q) {
            const VectorXd sqx = sq_apply(fr, q, x);
            const VectorXd uq = fr.Uq_coords.col(q - 1);
            rhs += -c * (sqx.dot(y) * uq + uq.dot(y) * sqx);
        }
        residual = std::max(residual, (lhs - rhs).norm());
    }
    return residual;
}

}  // namespace qgeo::models
