#pragma once

#include <functional>
#include <vector>

#include "qgeo/linalg.hpp"

namespace qgeo {

/// A point of the space form: a quadric lift z together with the projector
/// it maps to under the first standard embedding.
struct SpaceFormPoint {
    QVector lift;
    QMatrix P;

    static SpaceFormPoint from_lift(const QVector& z, double tol = 1e-9);
};

/// A tangent vector of the space form given as a horizontal lift: a vector v
/// at the quadric point z with Psi_c(v, z) = 0.  Horizontality is quaternionic
/// orthogonality, so it removes the radial direction and all three fiber
/// directions at once.
struct HorizontalVector {
    QVector base;
    QVector v;
};

/// A matrix tangent to the embedded space form at a projector point.
struct AmbientTangent {
    QMatrix value;
};

/// Step configuration for the second-derivative kernel used by sigma.
struct SigmaConfig {
    double h = 1e-3;
    int richardson = 1;
};

/// Quaternionic projection of v onto the form-orthogonal complement of z.
QVector horizontal_project(const QVector& v, const QVector& z);

double horizontality_defect(const QVector& v, const QVector& z);

HorizontalVector make_horizontal(const SpaceFormPoint& p, const QVector& raw);

/// Fiber tangent at the lift: (imaginary unit) . z for q in {1,2,3}.
QVector fiber_direction(const SpaceFormPoint& p, int q);

/// J_q acting on a horizontal vector by left multiplication with i, j, k.
HorizontalVector jq_apply(const SpaceFormPoint& p, int q, const HorizontalVector& v);

/// Lift of the unit-speed geodesic through z with initial velocity v:
/// cos(t) z + sin(t) v when c = +1 and cosh(t) z + sinh(t) v when c = -1.
QVector geodesic_lift(const QVector& z, const QVector& v, double t);

/// Unit-speed geodesic of the space form; X must be horizontal and unit.
SpaceFormPoint geodesic(const SpaceFormPoint& p, const HorizontalVector& X, double t,
                        double tol = 1e-8);

/// Differential of the projector embedding applied to a lift direction.  The
/// embedding is quadratic in the lift, so this is its exact first derivative
/// along any curve through z with velocity v.
AmbientTangent push_tangent(const SpaceFormPoint& p, const QVector& v);

/// Orthonormal basis of the horizontal space at p (4m vectors, Re Psi_c).
std::vector<QVector> horizontal_basis(const SpaceFormPoint& p);

/// Pushforward of a horizontal basis; orthonormal for the trace metric.
std::vector<QMatrix> embedded_tangent_basis(const SpaceFormPoint& p);

/// Component of M orthogonal (trace metric) to the embedded tangent space.
QMatrix normal_project(const QMatrix& M, const std::vector<QMatrix>& tangent_basis);

/// Second fundamental form of the embedding by central second differences of
/// the projector map along lift geodesics, with one Richardson level and a
/// final normal projection; mixed arguments by polarization.
QMatrix sigma(const SpaceFormPoint& p, const HorizontalVector& X, const HorizontalVector& Y,
              const SigmaConfig& cfg = {});

/// Exact second t-derivative of t -> Phi(geodesic lift); the embedding is
/// quadratic in the lift so the derivative is available in closed form.
/// Used where finite-difference noise would be amplified by an outer
/// differential operator; validated against sigma() in the test suite.
QMatrix sigma_exact(const SpaceFormPoint& p, const HorizontalVector& X,
                    const HorizontalVector& Y);

/// Closed-form shape operator of the embedding in direction sigma(X, Y):
///   c [ 2<X,Y> V + <X,V> Y + <Y,V> X + sum_q (<J_qX,V> J_qY + <J_qY,V> J_qX) ].
HorizontalVector shape_operator_of_embedding(const SpaceFormPoint& p, const HorizontalVector& X,
                                             const HorizontalVector& Y, const HorizontalVector& V);

/// Curvature operator R(X, Y)Z of the space form, evaluated literally from the
/// constant-curvature expression with the canonical J-triple at p's lift.
HorizontalVector curvature_op(const SpaceFormPoint& p, const HorizontalVector& X,
                              const HorizontalVector& Y, const HorizontalVector& Z);

/// Normal Jacobi operator K(X) = R(X, xi)xi.
HorizontalVector normal_jacobi(const SpaceFormPoint& p, const HorizontalVector& xi,
                               const HorizontalVector& X);

/// Reduced form c [ X - <X,xi> xi + 3 sum_q <X,U_q> U_q ] with U_q = -J_q xi.
HorizontalVector normal_jacobi_reduced(const SpaceFormPoint& p, const HorizontalVector& xi,
                                       const HorizontalVector& X);

/// Numerical Weingarten map of the embedding: for a normal matrix E at p and a
/// horizontal direction V, the tangential part of -d/dt of the normal
/// extension of E along the geodesic in direction V.
QMatrix weingarten_fd(const SpaceFormPoint& p, const QMatrix& E, const HorizontalVector& V,
                      double h = 1e-4);

/// Parallel transport of a horizontal vector w along the geodesic with unit
/// initial direction dir: the dir-component rotates in the (z, dir) plane and
/// the orthogonal complement is carried unchanged.
HorizontalVector parallel_transport(const SpaceFormPoint& p, const HorizontalVector& dir,
                                    double t, const HorizontalVector& w);

}  // namespace qgeo
