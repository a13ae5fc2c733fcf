#include "qgeo/chen.hpp"

#include <algorithm>
#include <cmath>

#include "qgeo/rng.hpp"

namespace qgeo::chen {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using models::Chart;
using models::Family;
using models::FamilySpec;
using models::ShapeFrame;

double cot_c(double r, int c) {
    return c == 1 ? std::cos(r) / std::sin(r) : std::cosh(r) / std::sinh(r);
}
double tan_c(double r, int c) { return 1.0 / cot_c(r, c); }

constexpr double kRootMatchTol = 1e-6;  // tolerance on mu^2 / alpha^2 against a closed-form root

}  // namespace

HyperClass classify(const FamilySpec& spec) {
    switch (spec.family) {
        case Family::P1k:
        case Family::H1k:
            return (spec.k == 0 || spec.k == spec.m - 1) ? HyperClass::A1 : HyperClass::A2;
        case Family::P2:
        case Family::H2:
            return HyperClass::B;
        case Family::H3:
            return HyperClass::Horosphere;
    }
    return HyperClass::A1;
}

FamilyScalars family_scalars(const FamilySpec& spec) {
    spec.validate();
    FamilyScalars fs;
    fs.c = spec.sig().c;
    fs.m = spec.m;
    fs.n = spec.n();
    fs.cls = classify(spec);
    const int c = fs.c;
    switch (spec.family) {
        case Family::P1k:
        case Family::H1k: {
            const int k = spec.k, l = spec.m - spec.k - 1;
            fs.K = 4 * k + 3;
            fs.L = 4 * l + 3;
            const double mu = cot_c(spec.r, c);
            const double nu = -c * tan_c(spec.r, c);
            if (l > 0) fs.d_rows.push_back({mu, 4 * l});
            if (k > 0) fs.d_rows.push_back({nu, 4 * k});
            const double alpha = mu - c / mu;
            fs.alpha = {alpha, alpha, alpha};
            break;
        }
        case Family::P2:
        case Family::H2: {
            const double mu = cot_c(spec.r, c);
            const double nu = -c * tan_c(spec.r, c);
            fs.d_rows.push_back({mu, 2 * (spec.m - 1)});
            fs.d_rows.push_back({nu, 2 * (spec.m - 1)});
            const double a1 = 2.0 * cot_c(2.0 * spec.r, c);
            fs.alpha = {a1, -4.0 * c / a1, -4.0 * c / a1};
            break;
        }
        case Family::H3:
            fs.d_rows.push_back({1.0, fs.n - 3});
            fs.alpha = {2.0, 2.0, 2.0};
            break;
    }
    fs.f = fs.f2 = 0.0;
    for (const auto& row : fs.d_rows) {
        fs.f += row.multiplicity * row.value;
        fs.f2 += row.multiplicity * row.value * row.value;
    }
    for (double aq : fs.alpha) {
        fs.f += aq;
        fs.f2 += aq * aq;
        fs.sum_alpha += aq;
        fs.sum_alpha2 += aq * aq;
    }
    return fs;
}

namespace {

/// Order-2 data for the sphere-like tubes from the single D-eigenvalue mu.
TypeCoefficients a1_coefficients(int n, int c, int m, double mu) {
    TypeCoefficients out;
    out.order = 2;
    out.verdict = "two-type";
    const double mu2 = mu * mu;
    out.a = (3.0 * n + 2.0) * mu2 + 3.0 / mu2 + c * (3.0 * n + 5.0);
    out.b = 2.0 * (n + 1.0) *
            (n * mu2 * mu2 + c * (2.0 * n + 3.0) * mu2 + 3.0 * c / mu2 + (n + 6.0));
    out.lambda_u = 2.0 * (n + 1.0) * (mu2 + c);
    out.lambda_v = n * mu2 + 3.0 / mu2 + c * (n + 3.0);
    out.mass_symmetric = (c == 1) && std::abs(m * mu2 - 1.0) <= 1e-9;
    return out;
}

TypeCoefficients a2_coefficients(int m, int K, int L, double mu2) {
    TypeCoefficients out;
    out.order = 2;
    out.verdict = "two-type";
    const double nu2 = 1.0 / mu2;
    out.lambda_u = (L + 1.0) * (L + 2.0) * mu2 + (K + 1.0) * (K + 2.0) * nu2 -
                   (L + K + 2.0 * L * K);
    out.lambda_v = L * mu2 + K * nu2 + L + K;
    out.a = out.lambda_u + out.lambda_v;
    out.b = out.lambda_u * out.lambda_v;
    out.mass_symmetric = std::abs(mu2 - double(K + 1) / double(L + 1)) <= 1e-9;
    (void)m;
    return out;
}

TypeCoefficients b_coefficients(int m, int c, double alpha2) {
    TypeCoefficients out;
    out.order = 2;
    out.verdict = "two-type";
    out.a = (4.0 * m * m + 4.0 * m - 1.0) * alpha2 - 64.0 / alpha2 + 4.0 * c * (4.0 * m - 1.0);
    out.b = 8.0 * c * (m + 1.0) *
            ((4.0 * m * m + 2.0 * m - 1.0) * alpha2 - 64.0 / alpha2 + 4.0 * c * (2.0 * m - 1.0));
    const double disc = std::sqrt(out.a * out.a - 4.0 * out.b);
    const double first = 0.5 * (out.a - disc);
    const double second = 0.5 * (out.a + disc);
    // Label the eigenvalue 4(m+1)(2m-1)/m of the inner admissible tube as
    // lambda_u when it matches; otherwise keep ascending order.
    const double lu_named = 4.0 * (m + 1.0) * (2.0 * m - 1.0) / m;
    if (std::abs(first - lu_named) < std::abs(second - lu_named)) {
        out.lambda_u = first;
        out.lambda_v = second;
    } else {
        out.lambda_u = second;
        out.lambda_v = first;
    }
    out.mass_symmetric = true;
    return out;
}

TypeCoefficients b_cubic(int m, int c, double alpha) {
    TypeCoefficients out;
    out.order = 3;
    out.verdict = "three-type";
    const double a2 = alpha * alpha;
    const double k = a2 + 4.0 * c;
    out.p = -(k / a2) * ((6.0 * m - 1.0) * a2 + 8.0 * c);
    out.q = (k / a2) * (4.0 * m * (2.0 * m - 1.0) * a2 * a2 +
                        8.0 * c * (6.0 * m * m + 2.0 * m - 1.0) * a2 + 32.0 * (4.0 * m + 1.0));
    out.r = -(16.0 * c / a2) * (2.0 * m * m + m - 1.0) * k * k * (m * a2 + 4.0 * c);
    out.mass_symmetric = true;
    return out;
}

}  // namespace

TypeCoefficients solve_type_coefficients(const FamilySpec& spec) {
    spec.validate();
    const int c = spec.sig().c;
    const int n = spec.n();
    const int m = spec.m;
    switch (classify(spec)) {
        case HyperClass::A1: {
            // Single D-eigenvalue: cot_c r about the point-like core, or the
            // tube value -c tan_c r when the core is the hyperplane side.
            const double mu = spec.k == 0 ? cot_c(spec.r, c) : -c * tan_c(spec.r, c);
            if (c == 1 && std::abs(mu * mu - 3.0 / (n + 2.0)) <= kRootMatchTol) {
                TypeCoefficients out;
                out.order = 1;
                out.verdict = "one-type";
                out.lambda_u = out.lambda_v = 2.0 * (n + 1.0) * (3.0 / (n + 2.0) + 1.0);
                return out;
            }
            return a1_coefficients(n, c, m, mu);
        }
        case HyperClass::A2: {
            TypeCoefficients none;
            none.order = 0;
            none.verdict = "not-two-type";
            if (c == -1) return none;
            const int K = 4 * spec.k + 3;
            const int L = 4 * (m - spec.k - 1) + 3;
            const double mu2 = cot_c(spec.r, c) * cot_c(spec.r, c);
            for (double root : {double(K + 1) / double(L + 1), double(K) / double(L + 2),
                                double(K + 2) / double(L)}) {
                if (std::abs(mu2 - root) <= kRootMatchTol)
                    return a2_coefficients(m, K, L, root);
            }
            return none;
        }
        case HyperClass::B: {
            const double alpha = 2.0 * cot_c(2.0 * spec.r, c);
            const double a2 = alpha * alpha;
            if (c == 1) {
                const double disc = std::sqrt(96.0 * m * m - 15.0);
                for (double root : {4.0 / m, (6.0 + 2.0 * disc) / (4.0 * m * m - 1.0)}) {
                    if (std::abs(a2 - root) <= kRootMatchTol) return b_coefficients(m, c, root);
                }
            }
            return b_cubic(m, c, alpha);
        }
        case HyperClass::Horosphere: {
            TypeCoefficients out;
            out.order = 0;
            out.verdict = "not-finite-type";
            return out;
        }
    }
    return {};
}

std::vector<SpecialRadius> special_radii(Family family, int m, int k) {
    std::vector<SpecialRadius> out;
    const int c = models::family_c(family);
    switch (family) {
        case Family::P1k: {
            if (k == 0 || k == m - 1) {
                // Radii from the D-eigenvalue: r = arctan(1/mu) about the
                // point core, complementary about the hyperplane core.
                auto to_r = [&](double mu2) {
                    const double r0 = std::atan(1.0 / std::sqrt(mu2));
                    return k == 0 ? r0 : M_PI / 2 - r0;
                };
                const double nn = 4.0 * m - 1.0;
                out.push_back({to_r(3.0 / (nn + 2.0)), "one-type"});
                out.push_back({to_r(1.0 / m), "mass-symmetric"});
                out.push_back({to_r(3.0 / nn), "minimal"});
            } else {
                const int K = 4 * k + 3, L = 4 * (m - k - 1) + 3;
                const double ra = std::atan(std::sqrt(double(L + 1) / double(K + 1)));
                out.push_back({ra, "two-type-a"});
                out.push_back({std::atan(std::sqrt(double(L + 2) / double(K))), "two-type-b"});
                out.push_back({ra, "mass-symmetric"});
                if (K == L) out.push_back({M_PI / 4, "minimal"});
            }
            break;
        }
        case Family::P2: {
            const double disc = std::sqrt(96.0 * m * m - 15.0);
            auto to_r = [](double alpha2) { return 0.5 * std::atan(2.0 / std::sqrt(alpha2)); };
            const double r1 = to_r(4.0 / m);
            const double r2 = to_r((6.0 + 2.0 * disc) / (4.0 * m * m - 1.0));
            out.push_back({r1, "two-type-a"});
            out.push_back({r2, "two-type-b"});
            out.push_back({r1, "mass-symmetric"});
            out.push_back({r2, "mass-symmetric"});
            out.push_back({to_r(8.0 / (2.0 * m - 1.0)), "minimal"});
            break;
        }
        case Family::H1k:
        case Family::H2:
        case Family::H3:
            // No admissible roots: the admissibility polynomials have no
            // solutions with coth/tanh values, and tr A never vanishes.
            (void)c;
            break;
    }
    std::sort(out.begin(), out.end(), [](const SpecialRadius& a, const SpecialRadius& b) {
        return a.r < b.r || (a.r == b.r && a.label < b.label);
    });
    return out;
}

namespace {

double c1_residual(const FamilyScalars& s, double a, double b, double ak) {
    const double lhs = (2.0 * s.c * (s.n + 3.0) + ak * s.f) * a;
    const double rhs = b + 4.0 * (s.n + 1.0) * (s.n + 6.0) +
                       ak * (s.f * (s.f2 + s.c * (3.0 * s.n + 7.0)) - 4.0 * s.c * s.sum_alpha) -
                       4.0 * s.c * s.f2 +
                       4.0 * s.c * (s.f * s.sum_alpha + s.sum_alpha2);
    return std::abs(lhs - rhs);
}

double c2_residual(const FamilyScalars& s, double a, double b, double tau) {
    double sum_tq = 0.0, sum_tq2 = 0.0;
    for (int q = 1; q <= 3; ++q) {
        const double tq = s.partner(tau, q);
        sum_tq += tq;
        sum_tq2 += tq * tq;
    }
    const double lhs = (2.0 * s.c * (s.n + 4.0) + tau * s.f) * a;
    const double rhs =
        b + 4.0 * (s.n * s.n + 8.0 * s.n + 13.0) +
        4.0 * s.c * (s.f * (tau + sum_tq) + (tau * tau + sum_tq2)) + 2.0 * s.c * s.f * s.f +
        (s.f * (s.f2 + s.c * (3.0 * s.n + 7.0)) - 4.0 * s.c * s.sum_alpha) * tau;
    return std::abs(lhs - rhs);
}

double c3_residual(const FamilyScalars& s, double a, double tau) {
    double sum_tq = 0.0, sum_tq2 = 0.0;
    for (int q = 1; q <= 3; ++q) {
        const double tq = s.partner(tau, q);
        sum_tq += tq;
        sum_tq2 += tq * tq;
    }
    const double lhs = (s.f + 2.0 * tau) * a;
    const double rhs =
        s.f * (s.f2 + s.c * (3.0 * s.n + 7.0)) - 4.0 * s.c * s.sum_alpha +
        4.0 * tau * (s.f * (tau + sum_tq) + (tau * tau + sum_tq2)) +
        2.0 * tau *
            (2.0 * s.f2 + s.f * s.f + 2.0 * s.c * (s.n + 7.0) - 2.0 * s.f * s.sum_alpha -
             2.0 * s.sum_alpha2);
    return std::abs(lhs - rhs);
}

double c41_residual(const FamilyScalars& s, double a, double tau, double ak) {
    double sum_tq = 0.0, sum_tq2 = 0.0;
    for (int q = 1; q <= 3; ++q) {
        const double tq = s.partner(tau, q);
        sum_tq += tq;
        sum_tq2 += tq * tq;
    }
    const double lhs = (2.0 * s.c + (tau - ak) * s.f) * a;
    const double rhs =
        4.0 * (s.n + 7.0) + 2.0 * s.c * s.f * s.f + 4.0 * s.c * s.f2 +
        4.0 * s.c * (s.f * (tau + sum_tq) + (tau * tau + sum_tq2)) +
        (s.f * (s.f2 + s.c * (3.0 * s.n + 7.0)) - 4.0 * s.c * s.sum_alpha) * (tau - ak) -
        4.0 * s.c * (s.f * s.sum_alpha + s.sum_alpha2);
    return std::abs(lhs - rhs);
}

}  // namespace

ConditionReport condition_residuals(const FamilyScalars& fs, double a, double b) {
    ConditionReport rep;
    rep.hypothesis_ok = fs.partners_defined();
    if (!rep.hypothesis_ok) return rep;
    for (double ak : fs.alpha) rep.c1.push_back(c1_residual(fs, a, b, ak));
    for (const auto& row : fs.d_rows) {
        rep.c2.push_back(c2_residual(fs, a, b, row.value));
        rep.c3.push_back(c3_residual(fs, a, row.value));
        for (double ak : fs.alpha) rep.c41.push_back(c41_residual(fs, a, row.value, ak));
    }
    for (const auto& v : {rep.c1, rep.c2, rep.c3, rep.c41})
        for (double x : v) rep.max_residual = std::max(rep.max_residual, x);
    return rep;
}

ConditionReport condition_residuals(const ShapeFrame& frame, const TypeCoefficients& coeffs) {
    return condition_residuals(family_scalars(frame.spec), coeffs.a, coeffs.b);
}

double a2_admissibility(const FamilyScalars& fs) {
    const double alpha = fs.alpha[0];
    return fs.f * (fs.f2 + fs.f * fs.f - fs.c * (fs.n + 1.0)) +
           2.0 * alpha * fs.f * (fs.f + alpha) - 4.0 * fs.c * alpha;
}

double b_admissibility(int m, int c, double alpha) {
    const double a2 = alpha * alpha;
    return m * (4.0 * m * m - 1.0) * a2 * a2 * a2 -
           4.0 * c * (4.0 * m * m + 3.0 * m - 1.0) * a2 * a2 - 48.0 * (2.0 * m - 1.0) * a2 +
           384.0 * c;
}

TubePointData tube_point_data(const Chart& chart, const VectorXd& u,
                              const models::FrameConfig& cfg) {
    const models::NormalData nd = models::normal_at(chart, u, cfg);
    TubePointData pd;
    pd.point = nd.point;
    pd.x = nd.point.P;
    pd.xi = nd.xi_push;
    const HorizontalVector xi{nd.point.lift, nd.xi};
    pd.sigma_xi = sigma_exact(nd.point, xi, xi);
    pd.sum_all = QMatrix(chart.sig);
    for (const auto& e : nd.frame_hor) {
        const HorizontalVector E{nd.point.lift, e};
        pd.sum_all += sigma_exact(nd.point, E, E);
    }
    pd.sum_D = pd.sum_all;
    for (int q = 1; q <= 3; ++q) {
        const QVector uq = -1.0 * left_mul(Quaternion::imaginary_unit(q), nd.xi);
        const HorizontalVector U{nd.point.lift, uq};
        pd.sum_D -= sigma_exact(nd.point, U, U);
    }
    return pd;
}

QMatrix eval_field(const TubePointData& pd, const ReducedField& rf) {
    const FormSignature sig = pd.x.sig();
    QMatrix out = rf.xi * pd.xi;
    out += rf.sigma_xi * pd.sigma_xi;
    out += rf.sum_all * pd.sum_all;
    out += rf.sum_D * pd.sum_D;
    if (rf.x_centered != 0.0)
        out += rf.x_centered * (pd.x - QMatrix::identity(sig) * (1.0 / (sig.m + 1.0)));
    return out;
}

ReducedField reduced_dx(const FamilyScalars& fs) {
    ReducedField rf;
    rf.xi = -fs.f;
    rf.sum_all = -1.0;
    return rf;
}

ReducedField reduced_d2x(const FamilyScalars& fs) {
    ReducedField rf;
    const double c = fs.c, n = fs.n, m = fs.m;
    switch (fs.cls) {
        case HyperClass::A1: {
            const double mu = fs.d_rows[0].value;
            const double mu2 = mu * mu;
            rf.xi = -(n * n * mu2 * mu + c * (3.0 * n * n - 2.0 * n - 12.0) * mu -
                      3.0 * (2.0 * n - 3.0) / mu - 9.0 * c / (mu2 * mu));
            rf.sigma_xi = (n * n - 4.0 * n - 6.0) * mu2 - 9.0 / mu2 - 6.0 * c * n;
            rf.sum_D = -2.0 * (n + 1.0) * (mu2 + c);
            break;
        }
        case HyperClass::B: {
            const double alpha = fs.alpha[0];
            const double a2 = alpha * alpha;
            rf.xi = -((2.0 * m - 1.0) * (2.0 * m - 1.0) * a2 * alpha +
                      4.0 * c * (8.0 * m * m - 8.0 * m + 1.0) * alpha - 64.0 * m / alpha -
                      256.0 * c / (a2 * alpha));
            rf.sigma_xi =
                (4.0 * m * m - 4.0 * m - 1.0) * a2 - 64.0 / a2 - 4.0 * c * (4.0 * m + 1.0);
            rf.sum_D = -2.0 * m * (a2 + 4.0 * c);
            break;
        }
        case HyperClass::Horosphere: {
            const double k = n * n + 2.0 * n - 15.0;
            rf.xi = 2.0 * k;
            rf.sigma_xi = k;
            break;
        }
        case HyperClass::A2:
            throw GeometryError("reduced_d2x: split eigen-sums require the generic route");
    }
    return rf;
}

ReducedField reduced_d3x(const FamilyScalars& fs) {
    if (fs.cls != HyperClass::B) throw GeometryError("reduced_d3x: complex-core tubes only");
    const double c = fs.c, m = fs.m;
    const double al = fs.alpha[0];
    const double a2 = al * al, a3 = a2 * al, a4 = a2 * a2, a5 = a4 * al;
    ReducedField rf;
    rf.xi = -((2.0 * m - 1.0) * (2.0 * m - 1.0) * (2.0 * m - 1.0) * a5 +
              8.0 * c * (16.0 * m * m * m - 20.0 * m * m + 6.0 * m - 1.0) * a3 +
              16.0 * (24.0 * m * m * m - 28.0 * m * m + 6.0 * m - 1.0) * al -
              512.0 * c * (2.0 * m - 1.0) / al - 4096.0 * m / a3 - 8192.0 * c / a5);
    rf.sigma_xi = (24.0 * m * m * m - 20.0 * m * m - 6.0 * m + 1.0) * a4 +
                  8.0 * c * (12.0 * m * m * m - 8.0 * m * m - 6.0 * m + 1.0) * a2 -
                  512.0 * c * (3.0 * m - 1.0) / a2 - 2048.0 / a4 +
                  16.0 * (4.0 * m * m - 30.0 * m + 17.0);
    rf.sum_D = -(8.0 * m * m * a4 + 48.0 * c * m * m * a2 - 256.0 * c / a2 +
                 64.0 * (m * m - 1.0));
    return rf;
}

ReducedField reduced_delta_xi(const FamilyScalars& fs) {
    if (fs.cls != HyperClass::B) throw GeometryError("reduced_delta_xi: complex-core tubes only");
    const double c = fs.c, m = fs.m, al = fs.alpha[0];
    ReducedField rf;
    rf.xi = (2.0 * m - 1.0) * al * al + 32.0 / (al * al) + 8.0 * c * (m - 1.0);
    rf.sigma_xi = -((2.0 * m - 3.0) * al + 8.0 * c / al);
    rf.sum_D = al;
    return rf;
}

ReducedField reduced_delta_sigma_xi(const FamilyScalars& fs) {
    if (fs.cls != HyperClass::B)
        throw GeometryError("reduced_delta_sigma_xi: complex-core tubes only");
    const double c = fs.c, m = fs.m, al = fs.alpha[0];
    ReducedField rf;
    rf.xi = 4.0 * c * (al - 8.0 * c / al);
    rf.sigma_xi = 4.0 * ((2.0 * m + 1.0) * c + (m - 1.0) * al * al);
    rf.sum_D = -al * al;
    return rf;
}

ReducedField reduced_delta_sum_d(const FamilyScalars& fs) {
    if (fs.cls != HyperClass::B)
        throw GeometryError("reduced_delta_sum_d: complex-core tubes only");
    const double c = fs.c, m = fs.m, al = fs.alpha[0];
    ReducedField rf;
    rf.xi = 8.0 * c * (m - 1.0) * ((2.0 * m + 3.0) * al - 8.0 * c / al);
    rf.sigma_xi = -8.0 * (m - 1.0) * (c + 2.0 * al * al);
    rf.sum_D = 4.0 * (2.0 * c * (m + 1.0) + al * al);
    return rf;
}

QMatrix dx_generic(const ShapeFrame& frame, const FamilyScalars& fs) {
    QMatrix out = (-fs.f) * frame.xi_push;
    for (const auto& e : frame.frame_hor) {
        const HorizontalVector E{frame.point.lift, e};
        out -= sigma_exact(frame.point, E, E);
    }
    return out;
}

QMatrix d2x_generic(const ShapeFrame& frame, const FamilyScalars& fs) {
    const int n = static_cast<int>(frame.frame_hor.size());
    const double c = fs.c;
    const FormSignature sig = frame.point.lift.sig();
    QMatrix sum_all(sig), sum_a(sig), sum_aa(sig);
    for (int i = 0; i < n; ++i) {
        const HorizontalVector E{frame.point.lift, frame.frame_hor[static_cast<size_t>(i)]};
        QVector Ae = QVector::zero(sig);
        for (int j = 0; j < n; ++j)
            Ae += frame.A(j, i) * frame.frame_hor[static_cast<size_t>(j)];
        const HorizontalVector AE{frame.point.lift, Ae};
        sum_all += sigma_exact(frame.point, E, E);
        sum_a += sigma_exact(frame.point, E, AE);
        sum_aa += sigma_exact(frame.point, AE, AE);
    }
    QMatrix out =
        (4.0 * c * fs.sum_alpha - fs.f * (fs.f2 + c * (3.0 * fs.n + 7.0))) * frame.xi_push;
    const HorizontalVector xi{frame.point.lift, frame.xi};
    out += (6.0 * c + 2.0 * fs.f2 + fs.f * fs.f) * sigma_exact(frame.point, xi, xi);
    out -= 2.0 * c * (fs.n + 4.0) * sum_all;
    out -= 2.0 * fs.f * sum_a;
    out -= 2.0 * sum_aa;
    return out;
}

QMatrix closed_dx_value(const Chart& chart, const VectorXd& u) {
    const FamilyScalars fs = family_scalars(chart.spec);
    return eval_field(tube_point_data(chart, u), reduced_dx(fs));
}

QMatrix closed_d2x_value(const Chart& chart, const VectorXd& u) {
    const FamilyScalars fs = family_scalars(chart.spec);
    if (fs.cls == HyperClass::A2)
        return d2x_generic(models::shape_frame(chart, u), fs);
    return eval_field(tube_point_data(chart, u), reduced_d2x(fs));
}

laplace::MatrixField closed_dx_field(const Chart& chart) {
    const FamilyScalars fs = family_scalars(chart.spec);
    const ReducedField rf = reduced_dx(fs);
    return [chart, rf](const VectorXd& u) { return eval_field(tube_point_data(chart, u), rf); };
}

laplace::MatrixField closed_d2x_field(const Chart& chart) {
    const FamilyScalars fs = family_scalars(chart.spec);
    const ReducedField rf = reduced_d2x(fs);
    return [chart, rf](const VectorXd& u) { return eval_field(tube_point_data(chart, u), rf); };
}

std::vector<VectorXd> sample_points(const Chart& chart, int count, unsigned seed, double box) {
    Rng rng(seed);
    std::vector<VectorXd> pts;
    pts.reserve(static_cast<size_t>(count));
    for (int t = 0; t < count; ++t) {
        VectorXd u(chart.n);
        for (int i = 0; i < chart.n; ++i) u(i) = rng.uniform(-box, box);
        pts.push_back(u);
    }
    return pts;
}

double relative_residual(const QMatrix& combo, const std::vector<QMatrix>& terms) {
    double scale = 0.0;
    for (const auto& t : terms) scale = std::max(scale, t.frobenius_norm());
    return combo.frobenius_norm() / (scale > 0.0 ? scale : 1.0);
}

double beltrami_residual(const Chart& chart, const std::vector<VectorXd>& pts,
                         const laplace::FDConfig& cfg) {
    const laplace::MatrixField pos = laplace::position_field(chart);
    double worst = 0.0;
    for (const auto& u : pts) {
        const QMatrix fd = laplace::laplace_beltrami(pos, chart, u, cfg);
        const QMatrix closed = closed_dx_value(chart, u);
        worst = std::max(worst, relative_residual(fd - closed, {fd, closed}));
    }
    return worst;
}

double pde2_residual(const Chart& chart, double a, double b, const QMatrix& x0,
                     const std::vector<VectorXd>& pts, const laplace::FDConfig& cfg) {
    const laplace::MatrixField pos = laplace::position_field(chart);
    const laplace::MatrixField dx_field = closed_dx_field(chart);
    double worst = 0.0;
    for (const auto& u : pts) {
        const QMatrix d1 = laplace::laplace_beltrami(pos, chart, u, cfg);
        const QMatrix d2 = laplace::laplace_beltrami(dx_field, chart, u, cfg);
        const QMatrix xc = projector(chart.lift(u), 1e-8) - x0;
        const QMatrix lhs = d2 - a * d1 + b * xc;
        worst = std::max(worst, relative_residual(lhs, {d2, a * d1, b * xc}));
    }
    return worst;
}

double pde3_residual(const Chart& chart, double p, double q, double r,
                     const std::vector<VectorXd>& pts, const laplace::FDConfig& cfg) {
    const laplace::MatrixField pos = laplace::position_field(chart);
    const laplace::MatrixField dx_field = closed_dx_field(chart);
    const laplace::MatrixField d2x_field = closed_d2x_field(chart);
    const QMatrix center = QMatrix::identity(chart.sig) * (1.0 / (chart.sig.m + 1.0));
    double worst = 0.0;
    for (const auto& u : pts) {
        const QMatrix d1 = laplace::laplace_beltrami(pos, chart, u, cfg);
        const QMatrix d2 = laplace::laplace_beltrami(dx_field, chart, u, cfg);
        const QMatrix d3 = laplace::laplace_beltrami(d2x_field, chart, u, cfg);
        const QMatrix xc = projector(chart.lift(u), 1e-8) - center;
        const QMatrix lhs = d3 + p * d2 + q * d1 + r * xc;
        worst = std::max(worst, relative_residual(lhs, {d3, p * d2, q * d1, r * xc}));
    }
    return worst;
}

namespace {

/// Flattens matrices to real vectors for the least-squares scans.
VectorXd flatten(const QMatrix& M) {
    const int d = M.dim();
    VectorXd v(4 * d * d);
    int idx = 0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            const Quaternion& q = M.at(j, k);
            v(idx++) = q.w;
            v(idx++) = q.x;
            v(idx++) = q.y;
            v(idx++) = q.z;
        }
    return v;
}

}  // namespace

OneTypeFit one_type_fit(const Chart& chart, const std::vector<VectorXd>& pts,
                        const laplace::FDConfig& cfg) {
    const laplace::MatrixField pos = laplace::position_field(chart);
    const size_t P = pts.size();
    std::vector<VectorXd> dx(P), x(P);
    for (size_t i = 0; i < P; ++i) {
        dx[i] = flatten(laplace::laplace_beltrami(pos, chart, pts[i], cfg));
        x[i] = flatten(projector(chart.lift(pts[i]), 1e-8));
    }
    VectorXd dx_mean = VectorXd::Zero(dx[0].size()), x_mean = VectorXd::Zero(x[0].size());
    for (size_t i = 0; i < P; ++i) {
        dx_mean += dx[i];
        x_mean += x[i];
    }
    dx_mean /= double(P);
    x_mean /= double(P);

    double num = 0.0, den = 0.0, total = 0.0;
    for (size_t i = 0; i < P; ++i) {
        num += (dx[i] - dx_mean).dot(x[i] - x_mean);
        den += (x[i] - x_mean).squaredNorm();
        total += dx[i].squaredNorm();
    }
    OneTypeFit fit;
    fit.lambda = den > 0 ? num / den : 0.0;
    double res = 0.0;
    for (size_t i = 0; i < P; ++i)
        res += ((dx[i] - dx_mean) - fit.lambda * (x[i] - x_mean)).squaredNorm();
    fit.residual = std::sqrt(res / (total > 0 ? total : 1.0));
    // x0 from the eliminated constant: lambda x0 = lambda x_mean - dx_mean.
    fit.x0 = QMatrix(chart.sig);
    if (std::abs(fit.lambda) > 1e-12) {
        const QMatrix I = QMatrix::identity(chart.sig);
        (void)I;
        // Rebuild from the flattened mean.
        QMatrix x0(chart.sig);
        int idx = 0;
        const VectorXd flat = x_mean - dx_mean / fit.lambda;
        for (int j = 0; j < x0.dim(); ++j)
            for (int k = 0; k < x0.dim(); ++k) {
                x0.at(j, k) = {flat(idx), flat(idx + 1), flat(idx + 2), flat(idx + 3)};
                idx += 4;
            }
        fit.x0 = x0;
    }
    return fit;
}

Order2Fit order2_fit(const Chart& chart, const std::vector<VectorXd>& pts,
                     const laplace::FDConfig& cfg) {
    const laplace::MatrixField pos = laplace::position_field(chart);
    const laplace::MatrixField dx_field = closed_dx_field(chart);
    const size_t P = pts.size();
    std::vector<VectorXd> d2(P), d1(P), x(P);
    for (size_t i = 0; i < P; ++i) {
        d1[i] = flatten(laplace::laplace_beltrami(pos, chart, pts[i], cfg));
        d2[i] = flatten(laplace::laplace_beltrami(dx_field, chart, pts[i], cfg));
        x[i] = flatten(projector(chart.lift(pts[i]), 1e-8));
    }
    auto center = [&](std::vector<VectorXd>& v) {
        VectorXd mean = VectorXd::Zero(v[0].size());
        for (const auto& w : v) mean += w;
        mean /= double(P);
        for (auto& w : v) w -= mean;
    };
    center(d2);
    center(d1);
    center(x);

    // Minimize || d2 - a d1 + b x ||^2 over (a, b).
    double g11 = 0, g12 = 0, g22 = 0, r1 = 0, r2 = 0, total = 0;
    for (size_t i = 0; i < P; ++i) {
        g11 += d1[i].squaredNorm();
        g12 += d1[i].dot(-x[i]);
        g22 += x[i].squaredNorm();
        r1 += d1[i].dot(d2[i]);
        r2 += -x[i].dot(d2[i]);
        total += d2[i].squaredNorm();
    }
    Eigen::Matrix2d G;
    G << g11, g12, g12, g22;
    Eigen::Vector2d rhs(r1, r2);
    const Eigen::Vector2d sol = G.ldlt().solve(rhs);
    Order2Fit fit;
    fit.a = sol(0);
    fit.b = sol(1);
    double res = 0.0;
    for (size_t i = 0; i < P; ++i)
        res += (d2[i] - fit.a * d1[i] + fit.b * x[i]).squaredNorm();
    fit.residual = std::sqrt(res / (total > 0 ? total : 1.0));
    return fit;
}

SpectralDecomposition spectral_decomposition(const Chart& chart, const TypeCoefficients& coeffs,
                                             const std::vector<VectorXd>& pts) {
    if (coeffs.order != 2 || std::abs(coeffs.lambda_u - coeffs.lambda_v) < 1e-12)
        throw GeometryError("spectral_decomposition: needs two distinct eigenvalues");
    const double lu = coeffs.lambda_u, lv = coeffs.lambda_v;
    SpectralDecomposition out;
    out.lambda_u = lu;
    out.lambda_v = lv;
    const QMatrix center = QMatrix::identity(chart.sig) * (1.0 / (chart.sig.m + 1.0));
    bool first = true;
    QMatrix x0_min, x0_max;
    for (const auto& u : pts) {
        const QMatrix dx = closed_dx_value(chart, u);
        const QMatrix d2x = closed_d2x_value(chart, u);
        const QMatrix x = projector(chart.lift(u), 1e-8);
        const QMatrix xu = (d2x - lv * dx) * (1.0 / (lu * (lu - lv)));
        const QMatrix xv = (d2x - lu * dx) * (1.0 / (lv * (lv - lu)));
        const QMatrix x0 = x - xu - xv;
        out.mass_defect = std::max(out.mass_defect, (x0 - center).frobenius_norm());
        if (first) {
            out.x0 = x0;
            out.xu = xu;
            out.xv = xv;
            x0_min = x0;
            x0_max = x0;
            first = false;
        } else {
            // Track the entrywise envelope for the spread.
            for (int j = 0; j < x0.dim(); ++j)
                for (int k = 0; k < x0.dim(); ++k) {
                    auto& lo = x0_min.at(j, k);
                    auto& hi = x0_max.at(j, k);
                    const Quaternion& q = x0.at(j, k);
                    lo = {std::min(lo.w, q.w), std::min(lo.x, q.x), std::min(lo.y, q.y),
                          std::min(lo.z, q.z)};
                    hi = {std::max(hi.w, q.w), std::max(hi.x, q.x), std::max(hi.y, q.y),
                          std::max(hi.z, q.z)};
                }
        }
    }
    out.x0_spread = (x0_max - x0_min).max_abs_entry();
    return out;
}

double eigenfunction_residual(const Chart& chart, const TypeCoefficients& coeffs,
                              const std::vector<VectorXd>& pts, const laplace::FDConfig& cfg) {
    const FamilyScalars fs = family_scalars(chart.spec);
    const double lu = coeffs.lambda_u, lv = coeffs.lambda_v;
    const ReducedField d1 = reduced_dx(fs);
    const ReducedField d2 = reduced_d2x(fs);  // throws for the split-sum class
    ReducedField xu_rf;
    const double scale = 1.0 / (lu * (lu - lv));
    xu_rf.xi = (d2.xi - lv * d1.xi) * scale;
    xu_rf.sigma_xi = (d2.sigma_xi - lv * d1.sigma_xi) * scale;
    xu_rf.sum_all = (d2.sum_all - lv * d1.sum_all) * scale;
    xu_rf.sum_D = (d2.sum_D - lv * d1.sum_D) * scale;
    laplace::MatrixField xu_field = [chart, xu_rf](const VectorXd& u) {
        return eval_field(tube_point_data(chart, u), xu_rf);
    };
    double worst = 0.0;
    for (const auto& u : pts) {
        const QMatrix lap = laplace::laplace_beltrami(xu_field, chart, u, cfg);
        const QMatrix expect = lu * xu_field(u);
        worst = std::max(worst, relative_residual(lap - expect, {lap, expect}));
    }
    return worst;
}

HorosphereReport horosphere_report(const Chart& chart, const std::vector<VectorXd>& pts,
                                   const laplace::FDConfig& cfg) {
    const FamilyScalars fs = family_scalars(chart.spec);
    const laplace::MatrixField dx_field = closed_dx_field(chart);
    HorosphereReport rep;
    std::vector<QMatrix> values;
    QMatrix mean(chart.sig);
    for (const auto& u : pts) {
        values.push_back(laplace::laplace_beltrami(dx_field, chart, u, cfg));
        mean += values.back();
    }
    mean *= 1.0 / double(pts.size());
    QMatrix lo = values[0], hi = values[0];
    for (const auto& v : values)
        for (int j = 0; j < v.dim(); ++j)
            for (int k = 0; k < v.dim(); ++k) {
                auto& l = lo.at(j, k);
                auto& h = hi.at(j, k);
                const Quaternion& q = v.at(j, k);
                l = {std::min(l.w, q.w), std::min(l.x, q.x), std::min(l.y, q.y),
                     std::min(l.z, q.z)};
                h = {std::max(h.w, q.w), std::max(h.x, q.x), std::max(h.y, q.y),
                     std::max(h.z, q.z)};
            }
    rep.spread = (hi - lo).max_abs_entry();
    rep.norm = mean.frobenius_norm();
    // Compare with the constant closed form at the first sample point.
    const QMatrix closed = eval_field(tube_point_data(chart, pts[0]), reduced_d2x(fs));
    rep.closed_form_rel = relative_residual(mean - closed, {mean, closed});
    rep.one_type_residual = one_type_fit(chart, pts, cfg).residual;
    return rep;
}

}  // namespace qgeo::chen
