#pragma once

// Shared helpers for the test suites: seeded random geometry, an
// independently coded Gaussian fourth-moment evaluator keyed on the exponent
// pattern of a monomial, and the sampling oracle for the quadratic error
// model. Everything here is deliberately written without reusing the
// production Wick-assembly path.

#include <array>
#include <cmath>
#include <random>

#include "tvqe/error_analysis.hpp"
#include "tvqe/estimator.hpp"
#include "tvqe/linalg.hpp"
#include "tvqe/quat.hpp"

#include "quartic_term_tables.hpp"

namespace tvqe::testutil {

inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(0xC0FFEE123456789ULL);
    return gen;
}

inline double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline double gauss() { return std::normal_distribution<double>(0.0, 1.0)(rng()); }

inline Vec3 random_unit_vec3() {
    for (;;) {
        const Vec3 v{gauss(), gauss(), gauss()};
        const double n = norm(v);
        if (n > 1e-6) return v / n;
    }
}

inline UnitQuaternion random_unit_quat() {
    for (;;) {
        const Quat4 q{{gauss(), gauss(), gauss()}, gauss()};
        const double n = norm(q);
        if (n > 1e-6) return normalize(q);
    }
}

// Unit reference pair with separation angle inside [min_sep, pi - min_sep].
inline std::pair<Vec3, Vec3> random_reference_pair(double min_sep = 0.17) {
    for (;;) {
        const Vec3 r1 = random_unit_vec3();
        const Vec3 r2 = random_unit_vec3();
        const double c = std::abs(dot(r1, r2));
        if (c < std::cos(min_sep)) return {r1, r2};
    }
}

// Noise-free observation pair for a given attitude.
inline std::pair<VectorObservation, VectorObservation> observations_for(
    const UnitQuaternion& q, const Vec3& r1, const Vec3& r2) {
    return {VectorObservation{rotate(q, r1), r1}, VectorObservation{rotate(q, r2), r2}};
}

// Random symmetric PSD 4x4, entries scaled to about `scale`^2.
inline Mat4 random_psd4(double scale) {
    Mat4 a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = gauss();
    Mat4 p;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += a(i, k) * a(j, k);
            p(i, j) = 0.25 * scale * scale * s;
        }
    return p;
}

// Lower-triangular Cholesky factor (with a tiny ridge for semidefinite P).
inline Mat4 cholesky4(const Mat4& p_in) {
    Mat4 p = p_in;
    for (int i = 0; i < 4; ++i) p(i, i) += 1e-300;
    Mat4 l;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = p(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j)
                l(i, i) = std::sqrt(std::max(0.0, s));
            else
                l(i, j) = l(j, j) > 0.0 ? s / l(j, j) : 0.0;
        }
    }
    return l;
}

inline Quat4 draw_gaussian4(const Mat4& chol) {
    const Quat4 g{{gauss(), gauss(), gauss()}, gauss()};
    Quat4 x{};
    for (int i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int j = 0; j <= i; ++j) s += chol(i, j) * g[j];
        x[i] = s;
    }
    return x;
}

// Closed-form moment of one monomial prod x_i^xpow[i] under N(0, P), using
// the pattern-specific identities
//   E{x_i^4} = 3 s_ii^2                E{x_i^3 x_j} = 3 s_ii s_ij
//   E{x_i^2 x_j^2} = s_ii s_jj + 2 s_ij^2
//   E{x_i^2 x_j x_k} = s_ii s_jk + 2 s_ij s_ik
//   E{x_i x_j x_k x_m} = s_ij s_km + s_ik s_jm + s_im s_jk
// (independent of the production pairing-enumeration route).
inline double moment_by_pattern(const Mat4& p, const std::array<int, 4>& xpow) {
    int total = 0;
    for (int i = 0; i < 4; ++i) total += xpow[i];
    if (total == 0) return 1.0;
    if (total != 4) return 0.0;  // the tables are purely quartic

    int distinct = 0;
    std::array<int, 4> who{}, pow{};
    for (int i = 0; i < 4; ++i)
        if (xpow[i] > 0) {
            who[distinct] = i;
            pow[distinct] = xpow[i];
            ++distinct;
        }
    if (distinct == 1) {
        const int i = who[0];
        return 3.0 * p(i, i) * p(i, i);
    }
    if (distinct == 2 && pow[0] == 2 && pow[1] == 2) {
        const int i = who[0], j = who[1];
        return p(i, i) * p(j, j) + 2.0 * p(i, j) * p(i, j);
    }
    if (distinct == 2) {  // (3,1) in either order
        const int i = pow[0] == 3 ? who[0] : who[1];
        const int j = pow[0] == 3 ? who[1] : who[0];
        return 3.0 * p(i, i) * p(i, j);
    }
    if (distinct == 3) {  // (2,1,1)
        int i = -1, j = -1, k = -1;
        for (int t = 0; t < 3; ++t) {
            if (pow[t] == 2)
                i = who[t];
            else if (j < 0)
                j = who[t];
            else
                k = who[t];
        }
        return p(i, i) * p(j, k) + 2.0 * p(i, j) * p(i, k);
    }
    // (1,1,1,1)
    return p(0, 1) * p(2, 3) + p(0, 2) * p(1, 3) + p(0, 3) * p(1, 2);
}

inline double eval_monomials(const testdata::MonomialSum& sum, const Quat4& q,
                             const Mat4& p) {
    double acc = 0.0;
    for (const testdata::QuarticMonomial& m : sum) {
        double qf = 1.0;
        for (int i = 0; i < 4; ++i)
            for (int t = 0; t < m.qpow[i]; ++t) qf *= q[i];
        acc += m.coeff * qf * moment_by_pattern(p, m.xpow);
    }
    return acc;
}

// The six reference terms evaluated from the transcribed expansion tables.
inline Mat4 table_term(int index, const UnitQuaternion& q_true, const Mat4& p) {
    const Quat4& q = q_true.value();
    const Mat4 qq = outer(q, q);
    Mat4 out;
    switch (index) {
        case 1:
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    out(i, j) = eval_monomials(testdata::kQuarticTerm1[i][j], q, p);
            return out;
        case 2:
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    out(i, j) = -3.0 * eval_monomials(testdata::kQuarticTerm2[i][j], q, p);
            return out;
        case 3: {
            Mat4 core;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    core(i, j) = eval_monomials(testdata::kQuarticTerm3Core[i][j], q, p);
            return core * qq;
        }
        case 4:
            return 0.25 * eval_monomials(testdata::kQuarticTerm4Scalar, q, p) * qq;
        case 5:
            return -1.5 * eval_monomials(testdata::kQuarticTerm5Scalar, q, p) * qq;
        case 6:
            return 2.25 * eval_monomials(testdata::kQuarticTerm6Scalar, q, p) * qq;
        default:
            return out;
    }
}

// Sample second-order error model: x = (I - qq^T) d + [d d^T + (d.Qd/2) I] q.
struct QuadraticModelSample {
    Quat4 full;       // full second-order model
    Quat4 quadratic;  // W q alone (the quartic-term integrand)
};

inline QuadraticModelSample sample_quadratic_model(const UnitQuaternion& q_true,
                                                   const Mat4& chol) {
    const Quat4& q = q_true.value();
    const Quat4 d = draw_gaussian4(chol);
    const double dq = dot(d, q);
    const double dQd = dot(d, d) - 3.0 * dq * dq;
    const Quat4 wq = dq * d + 0.5 * dQd * q;
    const Quat4 lin = d - dq * q;
    return {lin + wq, wq};
}

inline double max_abs_diff(const Mat4& a, const Mat4& b) {
    double w = 0.0;
    for (int i = 0; i < 16; ++i) w = std::max(w, std::abs(a.m[i] - b.m[i]));
    return w;
}

}  // namespace tvqe::testutil
