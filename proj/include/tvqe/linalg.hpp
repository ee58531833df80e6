#pragma once

// Small fixed-size vector/matrix algebra. Everything is a plain value type;
// matrices are row-major.

#include <array>
#include <cmath>
#include <cstddef>

#include "tvqe/error.hpp"

namespace tvqe {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double a) const { return {a * x, a * y, a * z}; }
    Vec3 operator/(double a) const { return {x / a, y / a, z / a}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
};

inline Vec3 operator*(double a, const Vec3& v) { return v * a; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    if (n <= 0.0) throw Error(ErrorCode::norm_underflow, "cannot normalize zero vector");
    return v / n;
}

struct Mat3 {
    std::array<double, 9> m{};  // row-major

    double& operator()(int i, int j) { return m[3 * i + j]; }
    double operator()(int i, int j) const { return m[3 * i + j]; }

    static Mat3 zero() { return {}; }
    static Mat3 identity() {
        Mat3 r;
        r(0, 0) = r(1, 1) = r(2, 2) = 1.0;
        return r;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    Mat3 operator*(double a) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = a * m[i];
        return r;
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }
    Vec3 operator*(const Vec3& v) const {
        Vec3 r;
        for (int i = 0; i < 3; ++i) r[i] = (*this)(i, 0) * v.x + (*this)(i, 1) * v.y + (*this)(i, 2) * v.z;
        return r;
    }
    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }
    double trace() const { return m[0] + m[4] + m[8]; }
};

inline Mat3 operator*(double a, const Mat3& m) { return m * a; }

inline Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
}

// cross_matrix(v) * w == cross(v, w) for all w; antisymmetric.
inline Mat3 cross_matrix(const Vec3& v) {
    Mat3 r;
    r(0, 1) = -v.z; r(0, 2) = v.y;
    r(1, 0) = v.z;  r(1, 2) = -v.x;
    r(2, 0) = -v.y; r(2, 1) = v.x;
    return r;
}

struct Mat4 {
    std::array<double, 16> m{};  // row-major

    double& operator()(int i, int j) { return m[4 * i + j]; }
    double operator()(int i, int j) const { return m[4 * i + j]; }

    static Mat4 zero() { return {}; }
    static Mat4 identity() {
        Mat4 r;
        for (int i = 0; i < 4; ++i) r(i, i) = 1.0;
        return r;
    }

    Mat4 operator+(const Mat4& o) const {
        Mat4 r;
        for (int i = 0; i < 16; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat4 operator-(const Mat4& o) const {
        Mat4 r;
        for (int i = 0; i < 16; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    Mat4 operator*(double a) const {
        Mat4 r;
        for (int i = 0; i < 16; ++i) r.m[i] = a * m[i];
        return r;
    }
    Mat4 operator*(const Mat4& o) const {
        Mat4 r;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }
    Mat4 transposed() const {
        Mat4 r;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) r(i, j) = (*this)(j, i);
        return r;
    }
    double trace() const { return m[0] + m[5] + m[10] + m[15]; }
};

inline Mat4 operator*(double a, const Mat4& m) { return m * a; }

inline Mat4 symmetrized(const Mat4& a) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r(i, j) = 0.5 * (a(i, j) + a(j, i));
    return r;
}

inline double max_abs_asymmetry(const Mat4& a) {
    double w = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) w = std::max(w, std::abs(a(i, j) - a(j, i)));
    return w;
}

inline double frobenius_norm(const Mat4& a) {
    double s = 0.0;
    for (double v : a.m) s += v * v;
    return std::sqrt(s);
}

// Cyclic Jacobi eigendecomposition of a symmetric N x N matrix.
// On return eigenvalues are ascending and evecs stores eigenvectors as columns.
template <int N>
void jacobi_eigen(std::array<double, N * N> a, std::array<double, N>& evals,
                  std::array<double, N * N>& evecs) {
    auto A = [&a](int i, int j) -> double& { return a[N * i + j]; };
    auto V = [&evecs](int i, int j) -> double& { return evecs[N * i + j]; };
    evecs.fill(0.0);
    for (int i = 0; i < N; ++i) V(i, i) = 1.0;

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-300) break;
        for (int p = 0; p < N; ++p) {
            for (int q = p + 1; q < N; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < N; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < N; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    for (int i = 0; i < N; ++i) evals[i] = A(i, i);
    // sort ascending, permuting eigenvector columns alongside
    for (int i = 0; i < N - 1; ++i) {
        int lo = i;
        for (int j = i + 1; j < N; ++j)
            if (evals[j] < evals[lo]) lo = j;
        if (lo != i) {
            std::swap(evals[i], evals[lo]);
            for (int k = 0; k < N; ++k) std::swap(V(k, i), V(k, lo));
        }
    }
}

}  // namespace tvqe
