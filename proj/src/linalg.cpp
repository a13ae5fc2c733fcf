#include "qgeo/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace qgeo {

namespace {

void require_same(const FormSignature& a, const FormSignature& b, const char* what) {
    if (!(a == b)) throw DimensionError(std::string(what) + ": signature mismatch");
}

}  // namespace

QVector& QVector::operator+=(const QVector& r) {
    require_same(sig_, r.sig_, "QVector::operator+=");
    for (int j = 0; j < size(); ++j) e_[j] += r.e_[j];
    return *this;
}

QVector& QVector::operator-=(const QVector& r) {
    require_same(sig_, r.sig_, "QVector::operator-=");
    for (int j = 0; j < size(); ++j) e_[j] -= r.e_[j];
    return *this;
}

QVector& QVector::operator*=(double s) {
    for (int j = 0; j < size(); ++j) e_[j] *= s;
    return *this;
}

QVector left_mul(const Quaternion& q, const QVector& v) {
    QVector out = v;
    for (int j = 0; j < v.size(); ++j) out[j] = q * v[j];
    return out;
}

QVector right_mul(const QVector& v, const Quaternion& q) {
    QVector out = v;
    for (int j = 0; j < v.size(); ++j) out[j] = v[j] * q;
    return out;
}

double entry_norm(const QVector& v) {
    double s = 0.0;
    for (int j = 0; j < v.size(); ++j) s += norm_sq(v[j]);
    return std::sqrt(s);
}

Quaternion hermitian_form(const QVector& z, const QVector& w) {
    require_same(z.sig(), w.sig(), "hermitian_form");
    Quaternion acc;
    for (int j = 0; j < z.size(); ++j) acc += z.sig().weight(j) * (z[j] * conj(w[j]));
    return acc;
}

double re_form(const QVector& z, const QVector& w) { return hermitian_form(z, w).w; }

QMatrix QMatrix::identity(FormSignature sig) {
    QMatrix I(sig);
    for (int j = 0; j < I.dim(); ++j) I.at(j, j) = Quaternion::real(1.0);
    return I;
}

QMatrix QMatrix::unit(FormSignature sig, int j, int k) {
    QMatrix E(sig);
    E.at(j, k) = Quaternion::real(1.0);
    return E;
}

QMatrix& QMatrix::operator+=(const QMatrix& r) {
    require_same(sig_, r.sig_, "QMatrix::operator+=");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += r.a_[i];
    return *this;
}

QMatrix& QMatrix::operator-=(const QMatrix& r) {
    require_same(sig_, r.sig_, "QMatrix::operator-=");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= r.a_[i];
    return *this;
}

QMatrix& QMatrix::operator*=(double s) {
    for (auto& q : a_) q *= s;
    return *this;
}

QMatrix operator*(const QMatrix& a, const QMatrix& b) {
    require_same(a.sig(), b.sig(), "QMatrix::operator*");
    const int n = a.dim();
    QMatrix out(a.sig());
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            const Quaternion& ajl = a.at(j, l);
            if (norm_sq(ajl) == 0.0) continue;
            for (int k = 0; k < n; ++k) out.at(j, k) += ajl * b.at(l, k);
        }
    return out;
}

Quaternion QMatrix::trace() const {
    Quaternion acc;
    for (int j = 0; j < dim(); ++j) acc += at(j, j);
    return acc;
}

double QMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& q : a_) s += norm_sq(q);
    return std::sqrt(s);
}

double QMatrix::max_abs_entry() const {
    double s = 0.0;
    for (const auto& q : a_) s = std::max(s, norm_sq(q));
    return std::sqrt(s);
}

bool QMatrix::is_form_hermitian(double tol) const {
    // S G = G S^* entrywise: S_jk g_k = g_j conj(S_kj).
    for (int j = 0; j < dim(); ++j)
        for (int k = 0; k < dim(); ++k) {
            const Quaternion lhs = at(j, k) * sig_.weight(k);
            const Quaternion rhs = sig_.weight(j) * conj(at(k, j));
            if (dist(lhs, rhs) > tol) return false;
        }
    return true;
}

double trace_metric(const QMatrix& S, const QMatrix& T) {
    require_same(S.sig(), T.sig(), "trace_metric");
    const int n = S.dim();
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            const Quaternion& a = S.at(j, k);
            const Quaternion& b = T.at(k, j);
            acc += a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z;
        }
    return 0.5 * S.sig().c * acc;
}

double frobenius_inner(const QMatrix& S, const QMatrix& T) {
    require_same(S.sig(), T.sig(), "frobenius_inner");
    double acc = 0.0;
    const int n = S.dim();
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            const Quaternion& a = S.at(j, k);
            const Quaternion& b = T.at(j, k);
            acc += a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
        }
    return acc;
}

double quadric_defect(const QVector& z) {
    return abs(hermitian_form(z, z) - Quaternion::real(z.sig().c));
}

QMatrix projector(const QVector& z, double tol) {
    if (quadric_defect(z) > tol)
        throw GeometryError("projector: lift is not on the quadric");
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

}  // namespace qgeo
