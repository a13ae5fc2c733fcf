#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qgeo/laplace.hpp"
#include "qgeo/models.hpp"

namespace qgeo::chen {

enum class HyperClass { A1, A2, B, Horosphere };

HyperClass classify(const models::FamilySpec& spec);

/// Closed-form scalar data of a model family: principal curvatures with
/// multiplicities, the restricted eigenvalues alpha_q, and the traces f, f2.
struct FamilyScalars {
    int c = 1;
    int m = 2;
    int n = 7;
    HyperClass cls = HyperClass::A1;
    std::vector<models::Cluster> d_rows;  // spectrum on the invariant complement of the triple
    std::array<double, 3> alpha{};
    double f = 0.0;
    double f2 = 0.0;
    double sum_alpha = 0.0;
    double sum_alpha2 = 0.0;
    int K = 0;  // 4k + 3, tube families
    int L = 0;  // 4l + 3

    /// Partner eigenvalue of tau under the q-th structure rotation.
    double partner(double tau, int q) const {
        const double aq = alpha[static_cast<size_t>(q - 1)];
        return (2.0 * c + aq * tau) / (2.0 * tau - aq);
    }
    bool partners_defined() const {
        for (double aq : alpha)
            if (std::abs(aq * aq + 4.0 * c) < 1e-12) return false;
        return true;
    }
};

FamilyScalars family_scalars(const models::FamilySpec& spec);

/// Coefficients of the finite-type differential equation satisfied by the
/// position field, when one exists.
struct TypeCoefficients {
    int order = 0;  // 1, 2, 3; 0 when no finite-type equation is asserted
    std::string verdict;  // one-type | two-type | three-type | not-two-type | not-finite-type
    double a = 0.0, b = 0.0;           // order 2: a = lu + lv, b = lu lv
    double p = 0.0, q = 0.0, r = 0.0;  // order 3 cubic coefficients
    double lambda_u = 0.0, lambda_v = 0.0;
    bool mass_symmetric = false;
};

TypeCoefficients solve_type_coefficients(const models::FamilySpec& spec);

struct SpecialRadius {
    double r = 0.0;
    std::string label;  // one-type | two-type-a | two-type-b | mass-symmetric | minimal
};

/// Closed-form special radii of a family, deduplicated; empty when the family
/// has none (hyperbolic tube families).
std::vector<SpecialRadius> special_radii(models::Family family, int m, int k);

/// Residuals of the three scalar consistency conditions (and the eliminated
/// form pairing each D-eigenvalue with each restricted eigenvalue) that an
/// order-2 equation forces on a curvature-adapted hypersurface with constant
/// principal curvatures.
struct ConditionReport {
    std::vector<double> c1;    // one per restricted eigenvalue
    std::vector<double> c2;    // one per D-eigenvalue
    std::vector<double> c3;    // one per D-eigenvalue
    std::vector<double> c41;   // eliminated form, per (tau, alpha_k) pair
    double max_residual = 0.0;
    bool hypothesis_ok = true;  // false when alpha_q^2 + 4c = 0
};

ConditionReport condition_residuals(const FamilyScalars& fs, double a, double b);
ConditionReport condition_residuals(const models::ShapeFrame& frame,
                                    const TypeCoefficients& coeffs);

/// Admissibility polynomials whose closed-form roots are the 2-type radii:
/// zero exactly at the admissible tube parameters.
double a2_admissibility(const FamilyScalars& fs);
double b_admissibility(int m, int c, double alpha);

/// Geometric data of one chart point needed by every closed-form field:
/// position, pushed normal, sigma(xi, xi) and the sigma traces.
struct TubePointData {
    SpaceFormPoint point;
    QMatrix x;          // position in the matrix space
    QMatrix xi;         // pushed unit normal
    QMatrix sigma_xi;   // sigma(xi, xi)
    QMatrix sum_all;    // sum of sigma(e_i, e_i) over a tangent frame
    QMatrix sum_D;      // same sum restricted to the complement of the triple
};

TubePointData tube_point_data(const models::Chart& chart, const Eigen::VectorXd& u,
                              const models::FrameConfig& cfg = {});

/// A field with constant coefficients over the point data above.
struct ReducedField {
    double xi = 0.0;
    double sigma_xi = 0.0;
    double sum_all = 0.0;
    double sum_D = 0.0;
    double x_centered = 0.0;  // against I/(m+1)
};

QMatrix eval_field(const TubePointData& pd, const ReducedField& rf);

/// Closed forms of the first and second Laplacians of the position field (and
/// the third for the complex-core tubes), as constant-coefficient fields over
/// the point data.  The reduced second Laplacian exists for every class except
/// the tubes about the quaternionic cores with 1 <= k <= m-2, whose split
/// eigen-sums require the shape operator; those use the generic form below.
ReducedField reduced_dx(const FamilyScalars& fs);
ReducedField reduced_d2x(const FamilyScalars& fs);      // A1, B, horosphere
ReducedField reduced_d3x(const FamilyScalars& fs);      // B only
ReducedField reduced_delta_xi(const FamilyScalars& fs);        // B only
ReducedField reduced_delta_sigma_xi(const FamilyScalars& fs);  // B only
ReducedField reduced_delta_sum_d(const FamilyScalars& fs);     // B only

/// Laplacian and bi-Laplacian of the position field evaluated from the full
/// trace expression over a shape frame (sums weighted by the shape operator),
/// with the family's exact scalars as coefficients.
QMatrix dx_generic(const models::ShapeFrame& frame, const FamilyScalars& fs);
QMatrix d2x_generic(const models::ShapeFrame& frame, const FamilyScalars& fs);

/// Value of the closed-form first/second Laplacian at a chart point,
/// dispatching between the reduced and generic routes per class.
QMatrix closed_dx_value(const models::Chart& chart, const Eigen::VectorXd& u);
QMatrix closed_d2x_value(const models::Chart& chart, const Eigen::VectorXd& u);

/// Field closures for layering under the finite-difference Laplacian.
laplace::MatrixField closed_dx_field(const models::Chart& chart);
laplace::MatrixField closed_d2x_field(const models::Chart& chart);  // A-free classes only

/// Deterministic sample points in the chart interior.
std::vector<Eigen::VectorXd> sample_points(const models::Chart& chart, int count, unsigned seed,
                                           double box = 0.08);

/// Relative residual: Frobenius norm of the combination over the largest term.
double relative_residual(const QMatrix& combo, const std::vector<QMatrix>& terms);

/// Max over sample points of the relative defect between the FD Laplacian of
/// the position field and the closed first Laplacian.
double beltrami_residual(const models::Chart& chart, const std::vector<Eigen::VectorXd>& pts,
                         const laplace::FDConfig& cfg = {});

/// Residual of the order-2 equation D2x - a Dx + b (x - x0) = 0 with both
/// Laplacian iterates from the FD oracle (the second layered on the closed
/// first Laplacian field).
double pde2_residual(const models::Chart& chart, double a, double b, const QMatrix& x0,
                     const std::vector<Eigen::VectorXd>& pts, const laplace::FDConfig& cfg = {});

/// Residual of the cubic D3x + p D2x + q Dx + r (x - I/(m+1)) = 0; the third
/// iterate is the FD Laplacian of the closed second-Laplacian field.
double pde3_residual(const models::Chart& chart, double p, double q, double r,
                     const std::vector<Eigen::VectorXd>& pts, const laplace::FDConfig& cfg = {});

struct OneTypeFit {
    double lambda = 0.0;
    QMatrix x0;
    double residual = 0.0;  // relative to the RMS of the Laplacian samples
};

/// Least-squares fit of Dx = lambda (x - x0) over sample points; linear in
/// (lambda, lambda x0).
OneTypeFit one_type_fit(const models::Chart& chart, const std::vector<Eigen::VectorXd>& pts,
                        const laplace::FDConfig& cfg = {});

struct Order2Fit {
    double a = 0.0;
    double b = 0.0;
    double residual = 0.0;
};

/// Least-squares fit of D2x - a Dx + b(x - x0) = 0 over sample points,
/// eliminating x0; reports the relative misfit.
Order2Fit order2_fit(const models::Chart& chart, const std::vector<Eigen::VectorXd>& pts,
                     const laplace::FDConfig& cfg = {});

struct SpectralDecomposition {
    double lambda_u = 0.0;
    double lambda_v = 0.0;
    QMatrix x0;              // constant part at the first sample point
    double x0_spread = 0.0;  // max entrywise variation across points
    double mass_defect = 0.0;  // max Frobenius distance of x0 from I/(m+1)
    QMatrix xu, xv;            // components at the first sample point
};

SpectralDecomposition spectral_decomposition(const models::Chart& chart,
                                             const TypeCoefficients& coeffs,
                                             const std::vector<Eigen::VectorXd>& pts);

/// FD check that the projected component is an eigenfunction:
/// relative residual of D(xu) - lambda_u xu.  A-free classes only.
double eigenfunction_residual(const models::Chart& chart, const TypeCoefficients& coeffs,
                              const std::vector<Eigen::VectorXd>& pts,
                              const laplace::FDConfig& cfg = {});

struct HorosphereReport {
    double spread = 0.0;         // entrywise variation of D2x across points
    double closed_form_rel = 0.0;  // relative distance to the constant closed form
    double norm = 0.0;           // Frobenius norm of the mean
    double one_type_residual = 0.0;
};

HorosphereReport horosphere_report(const models::Chart& chart,
                                   const std::vector<Eigen::VectorXd>& pts,
                                   const laplace::FDConfig& cfg);

}  // namespace qgeo::chen
