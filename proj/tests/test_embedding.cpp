#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qgeo/embedding.hpp"
#include "qgeo/rng.hpp"

using namespace qgeo;

namespace {

QVector random_quadric_point(FormSignature sig, Rng& rng) {
    QVector z = QVector::zero(sig);
    for (int j = 0; j < z.size(); ++j) z[j] = rng.quaternion_normal();
    if (sig.c == -1) {
        double pos = 0.0;
        for (int j = 1; j < z.size(); ++j) pos += norm_sq(z[j]);
        z[0] = normalized(z[0]) * std::sqrt(pos + 1.0 + rng.uniform());
    }
    const double q = hermitian_form(z, z).w;
    return z * (1.0 / std::sqrt(std::abs(q)));
}

HorizontalVector random_unit_horizontal(const SpaceFormPoint& p, Rng& rng) {
    QVector raw = QVector::zero(p.lift.sig());
    for (int j = 0; j < raw.size(); ++j) raw[j] = rng.quaternion_normal();
    QVector h = horizontal_project(raw, p.lift);
    return {p.lift, h * (1.0 / std::sqrt(re_form(h, h)))};
}

HorizontalVector orthogonal_unit_horizontal(const SpaceFormPoint& p, const HorizontalVector& X,
                                            Rng& rng) {
    for (;;) {
        HorizontalVector Y = random_unit_horizontal(p, rng);
        QVector v = Y.v - re_form(Y.v, X.v) * X.v;
        const double n2 = re_form(v, v);
        if (n2 > 1e-6) return {p.lift, v * (1.0 / std::sqrt(n2))};
    }
}

}  // namespace

TEST_CASE("geodesics stay on the quadric and close up in the projective case") {
    for (int c : {1, -1}) {
        const FormSignature sig{c, 2};
        Rng rng(c == 1 ? 1 : 2);
        const SpaceFormPoint p = SpaceFormPoint::from_lift(random_quadric_point(sig, rng));
        const HorizontalVector X = random_unit_horizontal(p, rng);

        const SpaceFormPoint q0 = geodesic(p, X, 0.0);
        CHECK((q0.P - p.P).max_abs_entry() <= 1e-14);

        for (double t : {0.3, 0.7, 1.2}) {
            const SpaceFormPoint qt = geodesic(p, X, t);
            CHECK(quadric_defect(qt.lift) <= 1e-12);
        }

        if (c == 1) {
            // Closed geodesics of period pi.
            const SpaceFormPoint qpi = geodesic(p, X, M_PI);
            CHECK((qpi.P - p.P).max_abs_entry() <= 1e-12);
            // Distance law cos d = |Psi(z, lift(t))| = |cos t|.
            for (double t : {0.2, 0.6, 1.0, 1.4}) {
                const SpaceFormPoint qt = geodesic(p, X, t);
                CHECK(abs(hermitian_form(p.lift, qt.lift)) ==
                      doctest::Approx(std::abs(std::cos(t))).epsilon(1e-12));
            }
        } else {
            for (double t : {0.2, 0.6, 1.0}) {
                const SpaceFormPoint qt = geodesic(p, X, t);
                CHECK(abs(hermitian_form(p.lift, qt.lift)) ==
                      doctest::Approx(std::cosh(t)).epsilon(1e-12));
            }
        }

        // Non-horizontal direction is rejected.
        CHECK_THROWS_AS(geodesic(p, HorizontalVector{p.lift, p.lift}, 0.1), GeometryError);
    }
}

TEST_CASE("push_tangent kills fibers, is isometric, and lands tangent to the hyperquadric") {
    for (int c : {1, -1}) {
        const FormSignature sig{c, 2};
        Rng rng(c == 1 ? 5 : 6);
        for (int trial = 0; trial < 20; ++trial) {
            const SpaceFormPoint p = SpaceFormPoint::from_lift(random_quadric_point(sig, rng));

            for (int q = 1; q <= 3; ++q) {
                const AmbientTangent dphi = push_tangent(p, fiber_direction(p, q));
                CHECK(dphi.value.max_abs_entry() <= 1e-13);
            }

            const HorizontalVector v = random_unit_horizontal(p, rng);
            const HorizontalVector w = orthogonal_unit_horizontal(p, v, rng);
            const QMatrix dv = push_tangent(p, v.v).value;
            const QMatrix dw = push_tangent(p, w.v).value;
            CHECK(trace_metric(dv, dv) == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(trace_metric(dw, dw) == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(std::abs(trace_metric(dv, dw)) <= 1e-8);

            const QMatrix centered = p.P - QMatrix::identity(sig) * (1.0 / (sig.m + 1));
            CHECK(std::abs(trace_metric(dv, centered)) <= 1e-10);
        }
    }
}

TEST_CASE("canonical triple obeys the quaternion algebra and skew symmetry") {
    for (int c : {1, -1}) {
        const FormSignature sig{c, 3};
        Rng rng(c == 1 ? 11 : 12);
        const SpaceFormPoint p = SpaceFormPoint::from_lift(random_quadric_point(sig, rng));
        for (int trial = 0; trial < 10; ++trial) {
            const HorizontalVector v = random_unit_horizontal(p, rng);
            const HorizontalVector w = random_unit_horizontal(p, rng);
            for (int q = 1; q <= 3; ++q) {
                const HorizontalVector jv = jq_apply(p, q, v);
                CHECK(horizontality_defect(jv.v, p.lift) <= 1e-12);
                // J_q^2 = -I
                const QVector jjv = jq_apply(p, q, jv).v;
                CHECK(entry_norm(jjv + v.v) <= 1e-12);
                // skew symmetry and isometry
                CHECK(std::abs(re_form(jv.v, w.v) + re_form(v.v, jq_apply(p, q, w).v)) <= 1e-12);
                CHECK(std::abs(re_form(jv.v, v.v)) <= 1e-12);
            }
            // J_1 J_2 = J_3 = -J_2 J_1
            const QVector a = jq_apply(p, 1, jq_apply(p, 2, v)).v;
            const QVector b = jq_apply(p, 3, v).v;
            CHECK(entry_norm(a - b) <= 1e-12);
            const QVector d = jq_apply(p, 2, jq_apply(p, 1, v)).v + b;
            CHECK(entry_norm(d) <= 1e-12);
        }
    }
}

TEST_CASE("second fundamental form identities") {
    for (int c : {1, -1}) {
        const FormSignature sig{c, 2};
        Rng rng(c == 1 ? 31 : 32);
        for (int trial = 0; trial < 25; ++trial) {
            const SpaceFormPoint p = SpaceFormPoint::from_lift(random_quadric_point(sig, rng));
            const HorizontalVector X = random_unit_horizontal(p, rng);
            const HorizontalVector Y = random_unit_horizontal(p, rng);

            const QMatrix s = sigma(p, X, Y);

            // <sigma(X,Y), x> = -<X,Y> and <sigma(X,Y), I> = 0.
            CHECK(trace_metric(s, p.P) == doctest::Approx(-re_form(X.v, Y.v)).epsilon(1e-9));
            CHECK(std::abs(trace_metric(s, QMatrix::identity(sig))) <= 1e-10);

            // sigma(J_q X, J_q Y) = sigma(X, Y).
            for (int q = 1; q <= 3; ++q) {
                const QMatrix sq = sigma(p, jq_apply(p, q, X), jq_apply(p, q, Y));
                CHECK((sq - s).max_abs_entry() <= 1e-8);
            }

            // Finite-difference kernel agrees with the exact quadratic derivative.
            CHECK((s - sigma_exact(p, X, Y)).max_abs_entry() <= 1e-9);
        }
    }
}

TEST_CASE("inner products of sigma values follow the closed quadratic expansion") {
    for (int c : {1, -1}) {
        const FormSignature sig{c, 2};
        Rng rng(c == 1 ? 41 : 42);
        const SpaceFormPoint p = SpaceFormPoint::from_lift(random_quadric_point(sig, rng));
        auto expansion = [&](const HorizontalVector& X, const HorizontalVector& Y,
                             const HorizontalVector& V, const HorizontalVector& W) {
            double acc = 2.0 * re_form(X.v, Y.v) * re_form(V.v, W.v) +
                         re_form(X.v, V.v) * re_form(Y.v, W.v) +
                         re_form(X.v, W.v) * re_form(Y.v, V.v);
            for (int q = 1; q <= 3; ++q) {
                const QVector jx = jq_apply(p, q, X).v;
                const QVector jy = jq_apply(p, q, Y).v;
                acc += re_form(jx, V.v) * re_form(jy, W.v) + re_form(jx, W.v) * re_form(jy, V.v);
            }
            return c * acc;
        };
        for (int trial = 0; trial < 200; ++trial) {
            const HorizontalVector X = random_unit_horizontal(p, rng);
            const HorizontalVector Y = random_unit_horizontal(p, rng);
            const HorizontalVector V = random_unit_horizontal(p, rng);
            const HorizontalVector W = random_unit_horizontal(p, rng);
            const double lhs = trace_metric(sigma(p, X, Y), sigma(p, V, W));
            CHECK(std::abs(lhs - expansion(X, Y, V, W)) <= 1e-8);
        }

        // Orthogonality pattern: unit X, Y with Y perp X and Y perp J_q X.
        for (int trial = 0; trial < 10; ++trial) {
            const HorizontalVector X = random_unit_horizontal(p, rng);
            HorizontalVector Y = random_unit_horizontal(p, rng);
            QVector y = Y.v - re_form(Y.v, X.v) * X.v;
            for (int q = 1; q <= 3; ++q) {
                const QVector jx = jq_apply(p, q, X).v;
                y -= re_form(y, jx) * jx;
            }
            y *= 1.0 / std::sqrt(re_form(y, y));
            Y = {p.lift, y};
            const double val = trace_metric(sigma(p, X, X), sigma(p, Y, Y));
            CHECK(val == doctest::Approx(2.0 * c).epsilon(1e-8));
        }
    }
}

TEST_CASE("closed-form embedding shape operator against the numerical Weingarten map") {
    for (int c : {1, -1}) {
        const FormSignature sig{c, 2};
        Rng rng(c == 1 ? 51 : 52);
        const SpaceFormPoint p = SpaceFormPoint::from_lift(random_quadric_point(sig, rng));

        // X = Y = V unit gives 4c V.
        {
            const HorizontalVector X = random_unit_horizontal(p, rng);
            const HorizontalVector AV = shape_operator_of_embedding(p, X, X, X);
            CHECK(entry_norm(AV.v - 4.0 * c * X.v) <= 1e-10);
        }
        // V orthogonal to X, Y, J_q X, J_q Y with <X,Y> = 0 gives zero; needs
        // m >= 3 for the quaternionic spans of X and Y to leave room for V.
        {
            const FormSignature big{c, 3};
            Rng rng3(c == 1 ? 53 : 54);
            const SpaceFormPoint p3 = SpaceFormPoint::from_lift(random_quadric_point(big, rng3));
            const HorizontalVector X = random_unit_horizontal(p3, rng3);
            const HorizontalVector Y = orthogonal_unit_horizontal(p3, X, rng3);
            std::vector<QVector> family{X.v, Y.v};
            for (int q = 1; q <= 3; ++q) {
                family.push_back(jq_apply(p3, q, X).v);
                family.push_back(jq_apply(p3, q, Y).v);
            }
            std::vector<QVector> ortho;
            for (QVector w : family) {
                for (const auto& b : ortho) w -= re_form(w, b) * b;
                const double n2 = re_form(w, w);
                if (n2 > 1e-12) ortho.push_back(w * (1.0 / std::sqrt(n2)));
            }
            QVector v = random_unit_horizontal(p3, rng3).v;
            for (const auto& b : ortho) v -= re_form(v, b) * b;
            REQUIRE(re_form(v, v) > 1e-6);
            v *= 1.0 / std::sqrt(re_form(v, v));
            const HorizontalVector AV =
                shape_operator_of_embedding(p3, X, Y, HorizontalVector{p3.lift, v});
            CHECK(entry_norm(AV.v) <= 1e-10);
        }

        for (int trial = 0; trial < 8; ++trial) {
            const HorizontalVector X = random_unit_horizontal(p, rng);
            const HorizontalVector Y = random_unit_horizontal(p, rng);
            const HorizontalVector V = random_unit_horizontal(p, rng);
            const QMatrix E = sigma(p, X, Y);
            const QMatrix lhs = weingarten_fd(p, E, V);
            const QMatrix rhs = push_tangent(p, shape_operator_of_embedding(p, X, Y, V).v).value;
            CHECK((lhs - rhs).max_abs_entry() <= 1e-7);
        }
    }
}

TEST_CASE("normal Jacobi operator: literal curvature evaluation equals reduced form") {
    for (int c : {1, -1}) {
        const FormSignature sig{c, 2};
        Rng rng(c == 1 ? 61 : 62);
        const SpaceFormPoint p = SpaceFormPoint::from_lift(random_quadric_point(sig, rng));
        const HorizontalVector xi = random_unit_horizontal(p, rng);
        for (int trial = 0; trial < 20; ++trial) {
            const HorizontalVector X = random_unit_horizontal(p, rng);
            const QVector a = normal_jacobi(p, xi, X).v;
            const QVector b = normal_jacobi_reduced(p, xi, X).v;
            CHECK(entry_norm(a - b) <= 1e-10);
        }
        // Eigenvalues: 4c on U_q, c on the J-invariant complement of xi.
        for (int q = 1; q <= 3; ++q) {
            const HorizontalVector Uq = {p.lift, -1.0 * jq_apply(p, q, xi).v};
            const QVector KU = normal_jacobi(p, xi, Uq).v;
            CHECK(entry_norm(KU - 4.0 * c * Uq.v) <= 1e-10);
        }
        QVector d = random_unit_horizontal(p, rng).v;
        d -= re_form(d, xi.v) * xi.v;
        for (int q = 1; q <= 3; ++q) {
            const QVector u = jq_apply(p, q, xi).v;
            d -= re_form(d, u) * u;
        }
        d *= 1.0 / std::sqrt(re_form(d, d));
        const QVector KD = normal_jacobi(p, xi, HorizontalVector{p.lift, d}).v;
        CHECK(entry_norm(KD - double(c) * d) <= 1e-10);
    }
}

TEST_CASE("sigma is parallel: transported arguments give a normally-parallel field") {
    for (int c : {1, -1}) {
        const FormSignature sig{c, 2};
        Rng rng(c == 1 ? 71 : 72);
        const SpaceFormPoint p = SpaceFormPoint::from_lift(random_quadric_point(sig, rng));
        for (int trial = 0; trial < 6; ++trial) {
            const HorizontalVector dir = random_unit_horizontal(p, rng);
            const HorizontalVector X = random_unit_horizontal(p, rng);
            const HorizontalVector Y = random_unit_horizontal(p, rng);

            auto field = [&](double t) {
                const HorizontalVector Xt = parallel_transport(p, dir, t, X);
                const HorizontalVector Yt = parallel_transport(p, dir, t, Y);
                const SpaceFormPoint pt = SpaceFormPoint::from_lift(Xt.base);
                return sigma(pt, Xt, Yt);
            };
            const double h = 1e-3;
            const QMatrix deriv = (field(h) - field(-h)) * (1.0 / (2.0 * h));
            const QMatrix normal_part = normal_project(deriv, embedded_tangent_basis(p));
            CHECK(normal_part.max_abs_entry() <= 1e-6);
        }
    }
}

TEST_CASE("parallel transport preserves inner products and horizontality") {
    const FormSignature sig{1, 2};
    Rng rng(81);
    const SpaceFormPoint p = SpaceFormPoint::from_lift(random_quadric_point(sig, rng));
    const HorizontalVector dir = random_unit_horizontal(p, rng);
    const HorizontalVector X = random_unit_horizontal(p, rng);
    const HorizontalVector Y = random_unit_horizontal(p, rng);
    for (double t : {0.2, 0.9}) {
        const HorizontalVector Xt = parallel_transport(p, dir, t, X);
        const HorizontalVector Yt = parallel_transport(p, dir, t, Y);
        CHECK(horizontality_defect(Xt.v, Xt.base) <= 1e-12);
        CHECK(re_form(Xt.v, Yt.v) == doctest::Approx(re_form(X.v, Y.v)).epsilon(1e-12));
    }
}
