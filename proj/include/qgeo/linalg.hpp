#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qgeo/quaternion.hpp"

namespace qgeo {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Signature of the Hermitian form Psi_c on H^{m+1}:
///   Psi_c(z, w) = c z_0 conj(w_0) + sum_{j>=1} z_j conj(w_j),
/// with c = +1 for the projective space form and c = -1 for the hyperbolic one.
struct FormSignature {
    int c = 1;  // +1 or -1
    int m = 2;  // quaternionic dimension, >= 2

    constexpr int ambient() const { return m + 1; }       // entries of a lift
    constexpr int hypersurface_dim() const { return 4 * m - 1; }
    constexpr int horizontal_dim() const { return 4 * m; }

    /// Weight of coordinate j in Psi_c.
    constexpr double weight(int j) const { return j == 0 ? double(c) : 1.0; }

    friend constexpr bool operator==(const FormSignature& a, const FormSignature& b) {
        return a.c == b.c && a.m == b.m;
    }
};

/// A vector in H^{m+1} carrying the signature of the form it lives under.
class QVector {
  public:
    QVector() = default;
    QVector(FormSignature sig, std::vector<Quaternion> entries)
        : sig_(sig), e_(std::move(entries)) {
        if (static_cast<int>(e_.size()) != sig_.ambient())
            throw DimensionError("QVector: entry count does not match signature");
    }

    static QVector zero(FormSignature sig) {
        return QVector(sig, std::vector<Quaternion>(sig.ambient()));
    }
    static QVector basis(FormSignature sig, int j) {
        QVector v = zero(sig);
        v[j] = Quaternion::real(1.0);
        return v;
    }

    const FormSignature& sig() const { return sig_; }
    int size() const { return static_cast<int>(e_.size()); }
    Quaternion& operator[](int j) { return e_[j]; }
    const Quaternion& operator[](int j) const { return e_[j]; }

    QVector& operator+=(const QVector& r);
    QVector& operator-=(const QVector& r);
    QVector& operator*=(double s);
    friend QVector operator+(QVector a, const QVector& b) { return a += b; }
    friend QVector operator-(QVector a, const QVector& b) { return a -= b; }
    friend QVector operator*(QVector a, double s) { return a *= s; }
    friend QVector operator*(double s, QVector a) { return a *= s; }
    friend QVector operator-(QVector a) { return a *= -1.0; }

  private:
    FormSignature sig_;
    std::vector<Quaternion> e_;
};

/// Left scalar action q.v (each entry multiplied by q on the left); this is the
/// side on which H acts on lifts and on which the fiber group Sp(1) acts.
QVector left_mul(const Quaternion& q, const QVector& v);

/// Entrywise right multiplication v.q, used for complex-subspace constructions.
QVector right_mul(const QVector& v, const Quaternion& q);

/// Entrywise Euclidean norm of the real coordinates (signature-blind).
double entry_norm(const QVector& v);

/// The form Psi_c(z, w); quaternion-valued, left-linear in z.
Quaternion hermitian_form(const QVector& z, const QVector& w);

/// Re Psi_c(z, w), the (pseudo) Riemannian pairing of lifts.
double re_form(const QVector& z, const QVector& w);

/// A square quaternion matrix over H^{m+1}, same signature bookkeeping as QVector.
class QMatrix {
  public:
    QMatrix() = default;
    explicit QMatrix(FormSignature sig)
        : sig_(sig), a_(static_cast<size_t>(sig.ambient()) * sig.ambient()) {}

    static QMatrix identity(FormSignature sig);
    /// Matrix unit with 1 in row j, column k.
    static QMatrix unit(FormSignature sig, int j, int k);

    const FormSignature& sig() const { return sig_; }
    int dim() const { return sig_.ambient(); }

    Quaternion& at(int j, int k) { return a_[static_cast<size_t>(j) * dim() + k]; }
    const Quaternion& at(int j, int k) const { return a_[static_cast<size_t>(j) * dim() + k]; }

    QMatrix& operator+=(const QMatrix& r);
    QMatrix& operator-=(const QMatrix& r);
    QMatrix& operator*=(double s);
    friend QMatrix operator+(QMatrix a, const QMatrix& b) { return a += b; }
    friend QMatrix operator-(QMatrix a, const QMatrix& b) { return a -= b; }
    friend QMatrix operator*(QMatrix a, double s) { return a *= s; }
    friend QMatrix operator*(double s, QMatrix a) { return a *= s; }
    friend QMatrix operator-(QMatrix a) { return a *= -1.0; }
    friend QMatrix operator*(const QMatrix& a, const QMatrix& b);

    Quaternion trace() const;

    /// Entrywise Frobenius norm (signature-blind, used for residual reporting).
    double frobenius_norm() const;
    double max_abs_entry() const;

    /// Whether S is Hermitian with respect to Psi_c, i.e. S G = G S^* with
    /// G = diag(c, 1, ..., 1).
    bool is_form_hermitian(double tol) const;

  private:
    FormSignature sig_;
    std::vector<Quaternion> a_;
};

/// Trace metric <S, T> = (c/2) Re tr(S T).
double trace_metric(const QMatrix& S, const QMatrix& T);

/// Frobenius (entrywise) inner product of the real coordinates; used only for
/// least-squares fits and spread measurements, never as the geometry's metric.
double frobenius_inner(const QMatrix& S, const QMatrix& T);

/// Quadric membership defect |Psi_c(z, z) - c|.
double quadric_defect(const QVector& z);

/// Projection operator onto the (time-like) quaternion line through a quadric
/// point z: entry (j, k) is conj(z_j) z_k scaled by 1 in column 0 and by c in
/// the other columns.  Throws GeometryError if z is off the quadric.
QMatrix projector(const QVector& z, double tol = 1e-9);

}  // namespace qgeo
