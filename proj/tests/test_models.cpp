#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qgeo/models.hpp"
#include "qgeo/rng.hpp"

using namespace qgeo;
using namespace qgeo::models;
using Eigen::VectorXd;

namespace {

VectorXd random_point(int n, Rng& rng, double box = 0.1) {
    VectorXd u(n);
    for (int i = 0; i < n; ++i) u(i) = rng.uniform(-box, box);
    return u;
}

void check_spectrum(const ShapeFrame& fr, const std::vector<Cluster>& expected, double tol) {
    const auto got = cluster_eigenvalues(fr.eigenvalues, 1e-4);
    REQUIRE(got.size() == expected.size());
    for (size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].multiplicity == expected[i].multiplicity);
        CHECK(got[i].value == doctest::Approx(expected[i].value).epsilon(tol));
    }
}

}  // namespace

TEST_CASE("family spec validation") {
    CHECK_THROWS_AS((FamilySpec{Family::P1k, 2, 0, 2.0}).validate(), GeometryError);
    CHECK_THROWS_AS((FamilySpec{Family::P2, 2, 0, 1.0}).validate(), GeometryError);
    CHECK_THROWS_AS((FamilySpec{Family::H1k, 2, 5, 0.5}).validate(), GeometryError);
    CHECK_THROWS_AS((FamilySpec{Family::H2, 2, 0, -0.5}).validate(), GeometryError);
    CHECK_THROWS_AS((FamilySpec{Family::P1k, 1, 0, 0.5}).validate(), GeometryError);
    CHECK_NOTHROW((FamilySpec{Family::H3, 2, 0, 0.0}).validate());
}

TEST_CASE("charts stay on the quadric for all families") {
    const std::vector<FamilySpec> specs = {
        {Family::P1k, 2, 0, 0.7},  {Family::P1k, 3, 1, M_PI / 4}, {Family::P2, 2, 0, M_PI / 6},
        {Family::H1k, 2, 1, 0.8},  {Family::H2, 2, 0, 0.6},       {Family::H3, 2, 0, 0.0},
        {Family::H3, 3, 0, 0.0}};
    for (const auto& spec : specs) {
        const Chart chart = make_chart(spec);
        Rng rng(17);
        for (int trial = 0; trial < 20; ++trial) {
            const VectorXd u = random_point(chart.n, rng);
            CHECK(quadric_defect(chart.lift(u)) <= 1e-12);
        }
    }
}

TEST_CASE("tube lift lives on the product of spheres with radii cos r, sin r") {
    const FamilySpec spec{Family::P1k, 3, 1, M_PI / 4};
    const Chart chart = make_chart(spec);
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const QVector z = chart.lift(random_point(chart.n, rng));
        double block1 = 0.0, block2 = 0.0;
        for (int j = 0; j <= spec.k; ++j) block1 += norm_sq(z[j]);
        for (int j = spec.k + 1; j <= spec.m; ++j) block2 += norm_sq(z[j]);
        CHECK(std::sqrt(block1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
        CHECK(std::sqrt(block2) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    }
}

TEST_CASE("complex-core tube points sit at constant distance from the core") {
    const FamilySpec spec{Family::P2, 2, 0, M_PI / 6};
    const Chart chart = make_chart(spec);
    Rng rng(29);
    const double cosr = std::cos(spec.r);
    for (int trial = 0; trial < 10; ++trial) {
        const VectorXd u = random_point(chart.n, rng);
        const QVector z = chart.lift(u);

        // Foot point: the normalized complex core lift of the same chart coords.
        QVector foot = QVector::zero(chart.sig);
        double s2 = 0.0;
        foot[0] = Quaternion::real(1.0);
        for (int a = 1; a <= spec.m; ++a) {
            foot[a] = {u[2 * (a - 1)], u[2 * (a - 1) + 1], 0.0, 0.0};
            s2 += norm_sq(foot[a]);
        }
        foot *= 1.0 / std::sqrt(1.0 + s2);
        CHECK(abs(hermitian_form(z, foot)) == doctest::Approx(cosr).epsilon(1e-12));

        // Any other core point is at least as far: |Psi| <= cos r.
        for (int probe = 0; probe < 200; ++probe) {
            QVector other = QVector::zero(chart.sig);
            double n2 = 0.0;
            for (int a = 0; a <= spec.m; ++a) {
                other[a] = {rng.normal(), rng.normal(), 0.0, 0.0};
                n2 += norm_sq(other[a]);
            }
            other *= 1.0 / std::sqrt(n2);
            CHECK(abs(hermitian_form(z, other)) <= cosr + 1e-9);
        }
    }
}

TEST_CASE("hyperbolic complex-core tube points sit at distance r from the core") {
    const FamilySpec spec{Family::H2, 2, 0, 0.6};
    const Chart chart = make_chart(spec);
    Rng rng(31);
    const double coshr = std::cosh(spec.r);
    for (int trial = 0; trial < 5; ++trial) {
        const VectorXd u = random_point(chart.n, rng);
        const QVector z = chart.lift(u);
        QVector foot = QVector::zero(chart.sig);
        double s2 = 0.0;
        foot[0] = Quaternion::real(1.0);
        for (int a = 1; a <= spec.m; ++a) {
            foot[a] = {u[2 * (a - 1)], u[2 * (a - 1) + 1], 0.0, 0.0};
            s2 += norm_sq(foot[a]);
        }
        foot *= 1.0 / std::sqrt(1.0 - s2);
        CHECK(abs(hermitian_form(z, foot)) == doctest::Approx(coshr).epsilon(1e-12));

        for (int probe = 0; probe < 100; ++probe) {
            QVector other = QVector::zero(chart.sig);
            double s = 0.0;
            other[0] = Quaternion::real(1.0);
            for (int a = 1; a <= spec.m; ++a) {
                other[a] = {0.3 * rng.normal(), 0.3 * rng.normal(), 0.0, 0.0};
                s += norm_sq(other[a]);
            }
            if (s >= 0.9) continue;
            other *= 1.0 / std::sqrt(1.0 - s);
            CHECK(abs(hermitian_form(z, other)) >= coshr - 1e-9);
        }
    }
}

TEST_CASE("horosphere chart is a level set of the null pairing") {
    const FamilySpec spec{Family::H3, 2, 0, 0.0};
    const Chart chart = make_chart(spec);
    QVector ell = QVector::zero(chart.sig);
    ell[0] = Quaternion::real(1.0);
    ell[1] = Quaternion::real(1.0);
    CHECK(abs(hermitian_form(ell, ell)) <= 1e-15);
    Rng rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const QVector z = chart.lift(random_point(chart.n, rng, 0.2));
        CHECK(abs(hermitian_form(z, ell)) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("geodesic sphere spectrum: cot r and 2 cot 2r with the right multiplicities") {
    const FamilySpec spec{Family::P1k, 2, 0, M_PI / 4};
    const Chart chart = make_chart(spec);
    Rng rng(41);
    const VectorXd u = random_point(chart.n, rng);
    const ShapeFrame fr = shape_frame(chart, u);
    CHECK(fr.asymmetry <= 1e-9);
    check_spectrum(fr, {{0.0, 3}, {1.0, 4}}, 1e-8);

    for (int i = 0; i < chart.n; ++i) {
        const VectorXd v = fr.eigenvectors.col(i);
        CHECK((fr.A * v - fr.eigenvalues(i) * v).norm() <= 1e-8);
    }
}

TEST_CASE("horosphere spectrum is 1 (mult n-3) and 2 (mult 3)") {
    const FamilySpec spec{Family::H3, 2, 0, 0.0};
    const Chart chart = make_chart(spec);
    Rng rng(43);
    const ShapeFrame fr = shape_frame(chart, random_point(chart.n, rng));
    check_spectrum(fr, {{1.0, 4}, {2.0, 3}}, 1e-8);
}

TEST_CASE("complex-core tube spectrum at r = pi/6") {
    const FamilySpec spec{Family::P2, 2, 0, M_PI / 6};
    const Chart chart = make_chart(spec);
    Rng rng(47);
    const ShapeFrame fr = shape_frame(chart, random_point(chart.n, rng));
    const double s3 = std::sqrt(3.0);
    check_spectrum(fr, {{-2.0 * s3, 2}, {-1.0 / s3, 2}, {2.0 / s3, 1}, {s3, 2}}, 1e-7);
}

TEST_CASE("multiplicity census across families and radii") {
    std::vector<FamilySpec> specs;
    for (double r : {0.4, 0.7, 1.1}) specs.push_back({Family::P1k, 2, 0, r});
    for (double r : {0.5, M_PI / 4, 0.9}) specs.push_back({Family::P1k, 3, 1, r});
    for (double r : {0.3, 0.5, 0.7}) specs.push_back({Family::P2, 2, 0, r});
    for (double r : {0.4, 0.8, 1.3}) specs.push_back({Family::H1k, 2, 0, r});
    for (double r : {0.4, 0.8, 1.3}) specs.push_back({Family::H1k, 2, 1, r});
    for (double r : {0.4, 0.7, 1.0}) specs.push_back({Family::H2, 2, 0, r});
    specs.push_back({Family::H3, 2, 0, 0.0});

    Rng rng(53);
    for (const auto& spec : specs) {
        CAPTURE(family_name(spec.family));
        CAPTURE(spec.r);
        CAPTURE(spec.k);
        const Chart chart = make_chart(spec);
        const ShapeFrame fr = shape_frame(chart, random_point(chart.n, rng));
        const auto expected = expected_spectrum(spec);
        const auto got = cluster_eigenvalues(fr.eigenvalues, 1e-4);
        REQUIRE(got.size() == expected.size());
        int total = 0;
        for (size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].multiplicity == expected[i].multiplicity);
            CHECK(std::abs(got[i].value - expected[i].value) <= 1e-6);
            total += got[i].multiplicity;
        }
        CHECK(total == spec.n());

        CHECK(fr.principality_residual <= 1e-8);
        CHECK(fr.d_invariance_residual <= 1e-8);
        CHECK(curvature_adapted_residual(fr) <= 1e-8);
    }
}

TEST_CASE("curvature-adapted residual flags mixing perturbations and passes identity") {
    const FamilySpec spec{Family::P1k, 2, 0, 0.6};
    const Chart chart = make_chart(spec);
    Rng rng(59);
    const ShapeFrame fr = shape_frame(chart, random_point(chart.n, rng));

    Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(chart.n, chart.n);
    CHECK(curvature_adapted_residual(fr, identity) == doctest::Approx(0.0));

    const VectorXd uq = fr.Uq_coords.col(0);
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(fr.Uq_coords);
    const VectorXd d_dir = qr.matrixQ().rightCols(chart.n - 3).col(0);
    Eigen::MatrixXd mixed = fr.A + 0.5 * (uq * d_dir.transpose() + d_dir * uq.transpose());
    CHECK(curvature_adapted_residual(fr, mixed) > 0.1);
}

TEST_CASE("scalar invariants: sphere, horosphere, complex-core tube") {
    {
        const FamilySpec spec{Family::P1k, 2, 0, M_PI / 4};
        const Chart chart = make_chart(spec);
        Rng rng(61);
        const ShapeFrame fr = shape_frame(chart, random_point(chart.n, rng));
        const CurvatureScalars sc = scalar_invariants(fr);
        CHECK(sc.f == doctest::Approx(4.0).epsilon(1e-9));
        CHECK(sc.f2 == doctest::Approx(4.0).epsilon(1e-9));
        CHECK(sc.partners_defined);
        REQUIRE(sc.d_spectrum.size() == 1);
        for (int q = 0; q < 3; ++q)
            CHECK(sc.partners[0][static_cast<size_t>(q)] == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(sc.partner_residual <= 1e-7);
    }
    {
        const FamilySpec spec{Family::H3, 2, 0, 0.0};
        const Chart chart = make_chart(spec);
        Rng rng(67);
        const ShapeFrame fr = shape_frame(chart, random_point(chart.n, rng));
        const CurvatureScalars sc = scalar_invariants(fr);
        CHECK(sc.f == doctest::Approx(10.0).epsilon(1e-8));
        CHECK_FALSE(sc.partners_defined);  // alpha^2 + 4c = 0 on the horosphere
    }
    {
        // Partner pattern: tau = sqrt(3) maps to nu = -1/sqrt(3) under the
        // double restricted eigenvalue alpha_2 = -2 sqrt(3).
        const FamilySpec spec{Family::P2, 2, 0, M_PI / 6};
        const Chart chart = make_chart(spec);
        Rng rng(71);
        const ShapeFrame fr = shape_frame(chart, random_point(chart.n, rng));
        const CurvatureScalars sc = scalar_invariants(fr);
        const double s3 = std::sqrt(3.0);
        REQUIRE(sc.d_spectrum.size() == 2);
        CHECK(sc.d_spectrum[0].value == doctest::Approx(-1.0 / s3).epsilon(1e-8));
        CHECK(sc.d_spectrum[1].value == doctest::Approx(s3).epsilon(1e-8));
        CHECK(sc.alpha[1] == doctest::Approx(-2.0 * s3).epsilon(1e-8));
        CHECK(sc.partners[1][1] == doctest::Approx(-1.0 / s3).epsilon(1e-7));
        CHECK(sc.partner_residual <= 1e-8);
    }
}

TEST_CASE("tube families satisfy the covariant-derivative characterization") {
    for (const auto& spec :
         {FamilySpec{Family::P1k, 2, 0, 0.7}, FamilySpec{Family::H1k, 2, 1, 0.8}}) {
        const Chart chart = make_chart(spec);
        Rng rng(73);
        const VectorXd u = random_point(chart.n, rng, 0.05);
        const double res = class_a_derivative_residual(chart, u, FrameConfig{}, 3, 97);
        CHECK(res <= 1e-5);
    }
}

TEST_CASE("reparametrized and gauge-twisted charts describe the same hypersurface") {
    const FamilySpec spec{Family::P1k, 2, 0, 0.7};
    const Chart chart = make_chart(spec);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(chart.n, chart.n);
    Q(0, 1) = 0.25;
    VectorXd shift = VectorXd::Zero(chart.n);
    shift(2) = 0.05;
    const Chart twisted = reparametrized_chart(chart, Q, shift, true);

    Rng rng(79);
    const VectorXd u = random_point(chart.n, rng, 0.05);
    const VectorXd v = Q.inverse() * (u - shift);
    const QMatrix P1 = projector(chart.lift(u));
    const QMatrix P2 = projector(twisted.lift(v));
    CHECK((P1 - P2).max_abs_entry() <= 1e-12);

    const ShapeFrame f1 = shape_frame(chart, u);
    const ShapeFrame f2 = shape_frame(twisted, v);
    const auto c1 = cluster_eigenvalues(f1.eigenvalues, 1e-4);
    const auto c2 = cluster_eigenvalues(f2.eigenvalues, 1e-4);
    REQUIRE(c1.size() == c2.size());
    for (size_t i = 0; i < c1.size(); ++i) {
        CHECK(c1[i].multiplicity == c2[i].multiplicity);
        CHECK(c1[i].value == doctest::Approx(c2[i].value).epsilon(1e-8));
    }
}
