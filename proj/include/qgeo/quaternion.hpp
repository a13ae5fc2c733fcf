#pragma once

#include <cmath>

namespace qgeo {

/// A quaternion q = w + x i + y j + z k over binary64 reals, with the
/// Hamilton convention ij = k.
struct Quaternion {
    double w = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Quaternion() = default;
    constexpr Quaternion(double w_, double x_, double y_, double z_)
        : w(w_), x(x_), y(y_), z(z_) {}

    /// Real scalar as a quaternion.
    static constexpr Quaternion real(double r) { return {r, 0.0, 0.0, 0.0}; }

    static constexpr Quaternion unit_i() { return {0.0, 1.0, 0.0, 0.0}; }
    static constexpr Quaternion unit_j() { return {0.0, 0.0, 1.0, 0.0}; }
    static constexpr Quaternion unit_k() { return {0.0, 0.0, 0.0, 1.0}; }

    /// Imaginary unit along axis q in {1,2,3} -> i, j, k.
    static constexpr Quaternion imaginary_unit(int q) {
        return q == 1 ? unit_i() : (q == 2 ? unit_j() : unit_k());
    }

    constexpr Quaternion& operator+=(const Quaternion& r) {
        w += r.w; x += r.x; y += r.y; z += r.z;
        return *this;
    }
    constexpr Quaternion& operator-=(const Quaternion& r) {
        w -= r.w; x -= r.x; y -= r.y; z -= r.z;
        return *this;
    }
    constexpr Quaternion& operator*=(double s) {
        w *= s; x *= s; y *= s; z *= s;
        return *this;
    }

    friend constexpr Quaternion operator+(Quaternion a, const Quaternion& b) { return a += b; }
    friend constexpr Quaternion operator-(Quaternion a, const Quaternion& b) { return a -= b; }
    friend constexpr Quaternion operator*(Quaternion a, double s) { return a *= s; }
    friend constexpr Quaternion operator*(double s, Quaternion a) { return a *= s; }
    friend constexpr Quaternion operator-(const Quaternion& a) { return {-a.w, -a.x, -a.y, -a.z}; }

    /// Hamilton product.
    friend constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) {
        return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
    }
};

constexpr Quaternion qmul(const Quaternion& a, const Quaternion& b) { return a * b; }

constexpr Quaternion conj(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

constexpr double norm_sq(const Quaternion& q) {
    return q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
}

inline double abs(const Quaternion& q) { return std::sqrt(norm_sq(q)); }

constexpr double real_part(const Quaternion& q) { return q.w; }

constexpr Quaternion imaginary_part(const Quaternion& q) { return {0.0, q.x, q.y, q.z}; }

inline Quaternion normalized(const Quaternion& q) {
    const double n = abs(q);
    return {q.w / n, q.x / n, q.y / n, q.z / n};
}

constexpr Quaternion inverse(const Quaternion& q) {
    const double n2 = norm_sq(q);
    return {q.w / n2, -q.x / n2, -q.y / n2, -q.z / n2};
}

inline double dist(const Quaternion& a, const Quaternion& b) { return abs(a - b); }

}  // namespace qgeo
