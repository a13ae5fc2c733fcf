#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qgeo/embedding.hpp"

namespace qgeo::models {

enum class Family { P1k, P2, H1k, H2, H3 };

std::string family_name(Family f);
std::optional<Family> family_from_name(const std::string& name);

/// Curvature sign of the ambient space form the family lives in.
constexpr int family_c(Family f) { return (f == Family::P1k || f == Family::P2) ? 1 : -1; }

struct FamilySpec {
    Family family = Family::P1k;
    int m = 2;
    int k = 0;       // only meaningful for P1k / H1k
    double r = 0.5;  // ignored for H3

    FormSignature sig() const { return {family_c(family), m}; }
    int n() const { return 4 * m - 1; }
    bool uses_k() const { return family == Family::P1k || family == Family::H1k; }
    bool uses_radius() const { return family != Family::H3; }

    /// Throws GeometryError when m, k or the radius is outside the family's
    /// legal range.
    void validate() const;
};

/// A coordinate chart of a model hypersurface through its quadric lift.  The
/// lift need not have horizontal coordinate tangents; the metric and frames
/// always pass through the horizontal projection.
struct Chart {
    FamilySpec spec;
    FormSignature sig;
    int n = 0;
    double halfwidth = 0.2;
    std::function<QVector(const Eigen::VectorXd&)> lift;
    /// Outward radial direction of the tube at the chart point (raw, not
    /// projected); absent for the horosphere.  The unit normal is oriented
    /// against it, toward the core, which is the orientation whose principal
    /// curvatures match the model spectrum table.
    std::function<QVector(const Eigen::VectorXd&)> radial;
};

Chart make_chart(const FamilySpec& spec);

/// Same hypersurface patch in new coordinates u -> scale * Q u + shift,
/// composed with a position-dependent unit-quaternion gauge twist of the lift.
Chart reparametrized_chart(const Chart& base, const Eigen::MatrixXd& linear,
                           const Eigen::VectorXd& shift, bool gauge_twist);

struct FrameConfig {
    double h_tangent = 1e-3;  // 5-point first derivatives of the lift
    double h_shape = 1e-3;    // 5-point first derivatives of the normal field
    double cluster_gap = 1e-4;
};

/// Orthonormal frame data of a model hypersurface at one chart point.
struct ShapeFrame {
    FamilySpec spec;
    Eigen::VectorXd u;
    SpaceFormPoint point;

    std::vector<QVector> frame_hor;    // orthonormal tangent frame, lift level
    std::vector<QMatrix> frame_push;   // its pushforward
    Eigen::MatrixXd frame_from_coord;  // row i: frame vector i over coordinate tangents

    QVector xi;        // unit normal, lift level
    QMatrix xi_push;   // pushed normal

    Eigen::MatrixXd A;  // shape operator in the frame, symmetrized
    double asymmetry = 0.0;

    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // columns

    /// Rotated canonical triple making U_q = -J_q xi principal; rotation holds
    /// the rows that recombine the raw triple.
    Eigen::Matrix3d triple_rotation;
    std::array<QVector, 3> Uq_hor;
    Eigen::MatrixXd Uq_coords;  // n x 3, columns are U_q in the frame
    std::array<double, 3> alpha{};
    double principality_residual = 0.0;
    double d_invariance_residual = 0.0;
};

ShapeFrame shape_frame(const Chart& chart, const Eigen::VectorXd& u, const FrameConfig& cfg = {});

/// Unit normal at a chart point with the family sign convention; `align_with`
/// overrides the radial rule when comparing neighbouring stencil points.
struct NormalData {
    QVector xi;
    QMatrix xi_push;
    std::vector<QVector> frame_hor;
    std::vector<QMatrix> frame_push;
    Eigen::MatrixXd frame_from_coord;
    SpaceFormPoint point;
};
NormalData normal_at(const Chart& chart, const Eigen::VectorXd& u, const FrameConfig& cfg,
                     const QMatrix* align_with = nullptr);

/// || K A - A K ||_F with the normal Jacobi operator evaluated literally from
/// the constant-curvature tensor.
double curvature_adapted_residual(const ShapeFrame& frame);

/// Same residual for an arbitrary matrix in place of the frame's A.
double curvature_adapted_residual(const ShapeFrame& frame, const Eigen::MatrixXd& A);

struct Cluster {
    double value = 0.0;
    int multiplicity = 0;
};

std::vector<Cluster> cluster_eigenvalues(const Eigen::VectorXd& values, double gap);

struct CurvatureScalars {
    double f = 0.0;
    double f2 = 0.0;
    std::array<double, 3> alpha{};
    std::vector<Cluster> d_spectrum;                // spectrum of A restricted to D
    std::vector<std::array<double, 3>> partners;    // tau_q per D-cluster
    double partner_residual = 0.0;                  // distance of partners to the D-spectrum
    bool partners_defined = true;                   // false when alpha_q^2 + 4c = 0
};

CurvatureScalars scalar_invariants(const ShapeFrame& frame, double cluster_gap = 1e-4);

/// Expected principal curvatures (value, multiplicity) of the model family.
std::vector<Cluster> expected_spectrum(const FamilySpec& spec);

/// Tangential part of J_q (rotated triple) applied to a frame-coordinate
/// vector; returns frame coordinates.
Eigen::VectorXd sq_apply(const ShapeFrame& frame, int q, const Eigen::VectorXd& x);

/// Covariant-derivative check of the tube characterization
///   (nabla_X A)Y = -c sum_q [ <S_qX, Y> U_q + <U_q, Y> S_qX ]
/// by finite differences; returns the maximal deviation over the supplied
/// coordinate directions.
double class_a_derivative_residual(const Chart& chart, const Eigen::VectorXd& u,
                                   const FrameConfig& cfg, int samples, unsigned seed);

}  // namespace qgeo::models
