#pragma once

// Quaternion algebra on scalar-last 4-vectors [e; s].
//
// Conventions used throughout the library:
//  * compose(p, q) = [p_s e_q + q_s e_p + e_p x e_q ; e_p^T e_q - p_s q_s].
//    The scalar part carries the opposite sign of the Hamilton product, so
//    compose has no identity element; instead compose(inverse(q), q) = [0;1]
//    with inverse(q) = [e; -s] (scalar negation, same rotation).
//  * rotate(q, v) applies the attitude matrix
//      A(q) = (s^2 - e.e) I + 2 e e^T - 2 s [e x],
//    the frame transformation that maps reference coordinates to body
//    coordinates. A noise-free two-vector estimate q satisfies
//    rotate(q, r_i) = b_i; this is pinned by tests.
//  * hamilton(p, q) is the plain scalar-last Hamilton product, used where
//    rotations must be chained as operators (sequential-rotation remaps).

#include <cmath>

#include "tvqe/error.hpp"
#include "tvqe/linalg.hpp"

namespace tvqe {

// General (possibly unnormalized) quaternion / 4-vector, scalar-last.
struct Quat4 {
    Vec3 e;         // vector part
    double s = 0.0; // scalar part

    double operator[](int i) const { return i < 3 ? e[i] : s; }
    double& operator[](int i) { return i < 3 ? e[i] : s; }

    Quat4 operator+(const Quat4& o) const { return {e + o.e, s + o.s}; }
    Quat4 operator-(const Quat4& o) const { return {e - o.e, s - o.s}; }
    Quat4 operator-() const { return {-e, -s}; }
    Quat4 operator*(double a) const { return {e * a, s * a}; }
};

inline Quat4 operator*(double a, const Quat4& q) { return q * a; }
inline double dot(const Quat4& a, const Quat4& b) { return dot(a.e, b.e) + a.s * b.s; }
inline double norm(const Quat4& q) { return std::sqrt(dot(q, q)); }

inline Quat4 identity_quat() { return {{0.0, 0.0, 0.0}, 1.0}; }

inline Quat4 mat_vec(const Mat4& m, const Quat4& q) {
    Quat4 r;
    for (int i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += m(i, j) * q[j];
        r[i] = s;
    }
    return r;
}

inline Mat4 outer(const Quat4& a, const Quat4& b) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r(i, j) = a[i] * b[j];
    return r;
}

// Unit-norm rotation quaternion. Construction checks |q| = 1 to 1e-12;
// normalize() is the only place a renormalization happens.
class UnitQuaternion {
public:
    UnitQuaternion() : q_(identity_quat()) {}

    static UnitQuaternion from_unit(const Quat4& q, double tol = 1e-12) {
        const double n = norm(q);
        if (std::abs(n - 1.0) > tol)
            throw Error(ErrorCode::not_unit, "quaternion norm deviates from 1");
        return UnitQuaternion(q);
    }

    const Quat4& value() const { return q_; }
    const Vec3& vector_part() const { return q_.e; }
    double scalar_part() const { return q_.s; }
    double operator[](int i) const { return q_[i]; }

    UnitQuaternion negated() const { return UnitQuaternion(-q_); }

private:
    explicit UnitQuaternion(const Quat4& q) : q_(q) {}
    friend UnitQuaternion normalize(const Quat4&);
    friend UnitQuaternion unchecked_unit(const Quat4&);
    Quat4 q_;
};

// Internal: wrap a quaternion known unit by construction (e.g. signed
// permutations of a unit quaternion).
inline UnitQuaternion unchecked_unit(const Quat4& q) { return UnitQuaternion(q); }

inline UnitQuaternion normalize(const Quat4& q) {
    const double n = norm(q);
    if (n <= 0.0 || !std::isfinite(n))
        throw Error(ErrorCode::norm_underflow, "cannot normalize zero quaternion");
    return UnitQuaternion(q * (1.0 / n));
}

inline Quat4 compose(const Quat4& p, const Quat4& q) {
    return {p.s * q.e + q.s * p.e + cross(p.e, q.e), dot(p.e, q.e) - p.s * q.s};
}

inline UnitQuaternion inverse(const UnitQuaternion& q) {
    return unchecked_unit({q.value().e, -q.value().s});
}

inline Quat4 hamilton(const Quat4& p, const Quat4& q) {
    return {p.s * q.e + q.s * p.e + cross(p.e, q.e), p.s * q.s - dot(p.e, q.e)};
}

inline Vec3 rotate(const UnitQuaternion& q, const Vec3& v) {
    const Vec3& e = q.vector_part();
    const double s = q.scalar_part();
    return (s * s - dot(e, e)) * v + 2.0 * dot(e, v) * e - 2.0 * s * cross(e, v);
}

// Attitude matrix A(q) with rotate(q, v) == A(q) v.
inline Mat3 attitude_matrix(const UnitQuaternion& q) {
    const Vec3& e = q.vector_part();
    const double s = q.scalar_part();
    return (s * s - dot(e, e)) * Mat3::identity() + 2.0 * outer(e, e) -
           2.0 * s * cross_matrix(e);
}

// Rotation angle between the two attitudes, in [0, pi]. Equals
// 2 acos(|q1 . q2|); evaluated through asin of the sign-aligned chord so that
// angles far below the acos resolution limit (~3e-8) are still exact.
inline double angle_between(const UnitQuaternion& q1, const UnitQuaternion& q2) {
    // chord = min over double cover = 2 sin(angle/4), so angle = 4 asin(chord/2)
    const double chord =
        std::min(norm(q1.value() - q2.value()), norm(q1.value() + q2.value()));
    return 4.0 * std::asin(std::min(1.0, 0.5 * chord));
}

}  // namespace tvqe
