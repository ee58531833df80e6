#include "tvqe/error_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tvqe/error.hpp"

namespace tvqe {

Quat4 delta_qbar_exact(const VectorObservation& vm1_true,
                       const VectorObservation& vm2_true, const NoiseDeltas& deltas) {
    const Vec3 d1 = sum_diff(vm1_true).d;
    const Vec3 d2 = sum_diff(vm2_true).d;
    const Vec3 s1 = sum_diff(vm1_true).s;
    const Vec3 ds1 = 0.5 * (deltas.db1 + deltas.dr1);
    const Vec3 dd1 = 0.5 * (deltas.db1 - deltas.dr1);
    const Vec3 dd2 = 0.5 * (deltas.db2 - deltas.dr2);
    return {cross(d2, dd1) - cross(d1, dd2) - cross(dd1, dd2),
            -dot(d2, ds1) - dot(s1, dd2) - dot(ds1, dd2)};
}

double nu_exact(const UnitQuaternion& q_true, const Quat4& dq_check) {
    const double arg = 1.0 - 2.0 * dot(q_true.value(), dq_check) + dot(dq_check, dq_check);
    // arg equals |q_bar|^2 / |q_bar_t|^2; anything at rounding distance of
    // zero means the perturbed stack was annihilated
    if (arg <= 1e-13)
        throw Error(ErrorCode::degenerate_ratio, "perturbed raw stack annihilated");
    return 1.0 / std::sqrt(arg);
}

Quat4 additive_error_exact(const UnitQuaternion& q_true, const Quat4& dq_check) {
    const double nu = nu_exact(q_true, dq_check);
    return nu * dq_check + (1.0 - nu) * q_true.value();
}

Mat4 M_matrix(const UnitQuaternion& q_true) {
    const Vec3& e = q_true.vector_part();
    const double s = q_true.scalar_part();
    const Mat3 top = cross_matrix(e) - s * Mat3::identity();
    Mat4 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = top(i, j);
    for (int i = 0; i < 3; ++i) {
        m(i, 3) = e[i];
        m(3, i) = -e[i];
    }
    m(3, 3) = -s;
    return m;
}

Quat4 multiplicative_error_exact(const UnitQuaternion& q_true, const Quat4& dq_hat) {
    return identity_quat() + mat_vec(M_matrix(q_true), dq_hat);
}

namespace {

// Q = I - 3 q q^T
Mat4 q_weight(const UnitQuaternion& q) {
    return Mat4::identity() - 3.0 * outer(q.value(), q.value());
}

double quad_form(const Quat4& x, const Mat4& a, const Quat4& y) {
    return dot(x, mat_vec(a, y));
}

double trace_product(const Mat4& a, const Mat4& b) {
    double t = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) t += a(i, k) * b(k, i);
    return t;
}

Mat4 bias_operator(const Mat4& P, const UnitQuaternion& q) {
    const double t = trace_product(q_weight(q), P);
    return P + 0.5 * t * Mat4::identity();
}

}  // namespace

double nu_second_order(const UnitQuaternion& q_true, const Quat4& dq_check) {
    return 1.0 + dot(q_true.value(), dq_check) -
           0.5 * quad_form(dq_check, q_weight(q_true), dq_check);
}

Quat4 additive_error_second_order(const UnitQuaternion& q_true, const Quat4& dq_check) {
    const Quat4& q = q_true.value();
    const Quat4 proj = dq_check - dot(q, dq_check) * q;
    const double w = 0.5 * quad_form(dq_check, q_weight(q_true), dq_check);
    return proj + dot(dq_check, q) * dq_check + w * q;
}

double bias_nu(const Mat4& P_qcheck, const UnitQuaternion& q_true) {
    return 1.0 - 0.5 * trace_product(q_weight(q_true), P_qcheck);
}

Quat4 bias_additive(const Mat4& P_qcheck, const UnitQuaternion& q_true) {
    return mat_vec(bias_operator(P_qcheck, q_true), q_true.value());
}

Quat4 bias_multiplicative(const Mat4& P_qcheck, const UnitQuaternion& q_true) {
    return identity_quat() + mat_vec(M_matrix(q_true), bias_additive(P_qcheck, q_true));
}

Mat4 cov_delta_qbar(const VectorObservation& vm1_true,
                    const VectorObservation& vm2_true, const NoiseModel& noise) {
    noise.validate(vm1_true, vm2_true);
    const NoiseModel::Resolved n = noise.resolve(vm1_true, vm2_true);

    // joint covariance of (ds1, dd1, dd2)
    const Mat3 zero;
    const Mat3 c_b1r1 = n.has_cross ? n.C_b1r1 : zero;
    const Mat3 c_b1b2 = n.has_cross ? n.C_b1b2 : zero;
    const Mat3 c_b1r2 = n.has_cross ? n.C_b1r2 : zero;
    const Mat3 c_r1b2 = n.has_cross ? n.C_r1b2 : zero;
    const Mat3 c_r1r2 = n.has_cross ? n.C_r1r2 : zero;
    const Mat3 c_b2r2 = n.has_cross ? n.C_b2r2 : zero;

    const Mat3 p_s1 = 0.25 * (n.P_b1 + n.P_r1 + c_b1r1 + c_b1r1.transposed());
    const Mat3 p_d1 = 0.25 * (n.P_b1 + n.P_r1 - c_b1r1 - c_b1r1.transposed());
    const Mat3 p_s1d1 = 0.25 * (n.P_b1 - n.P_r1 - c_b1r1 + c_b1r1.transposed());
    const Mat3 p_s1d2 = 0.25 * (c_b1b2 - c_b1r2 + c_r1b2 - c_r1r2);
    const Mat3 p_d1d2 = 0.25 * (c_b1b2 - c_b1r2 - c_r1b2 + c_r1r2);
    const Mat3 p_d2 = 0.25 * (n.P_b2 + n.P_r2 - c_b2r2 - c_b2r2.transposed());

    std::array<std::array<Mat3, 3>, 3> joint;
    joint[0][0] = p_s1;   joint[0][1] = p_s1d1;              joint[0][2] = p_s1d2;
    joint[1][0] = p_s1d1.transposed(); joint[1][1] = p_d1;   joint[1][2] = p_d1d2;
    joint[2][0] = p_s1d2.transposed(); joint[2][1] = p_d1d2.transposed(); joint[2][2] = p_d2;

    const Vec3 d1 = sum_diff(vm1_true).d;
    const Vec3 d2 = sum_diff(vm2_true).d;
    const Vec3 s1 = sum_diff(vm1_true).s;
    const Mat3 e_blk = cross_matrix(d2);
    const Mat3 f_blk = -1.0 * cross_matrix(d1);
    const Vec3 g_row = -1.0 * d2;
    const Vec3 h_row = -1.0 * s1;

    // T is 4x9: rows 0..2 = [0 E F], row 3 = [G 0 H]
    std::array<std::array<double, 9>, 4> tmap{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            tmap[i][3 + j] = e_blk(i, j);
            tmap[i][6 + j] = f_blk(i, j);
        }
    for (int j = 0; j < 3; ++j) {
        tmap[3][j] = g_row[j];
        tmap[3][6 + j] = h_row[j];
    }

    auto joint_at = [&joint](int a, int b) { return joint[a / 3][b / 3](a % 3, b % 3); };

    Mat4 out;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            double acc = 0.0;
            for (int a = 0; a < 9; ++a) {
                if (tmap[i][a] == 0.0) continue;
                for (int b = 0; b < 9; ++b) acc += tmap[i][a] * joint_at(a, b) * tmap[j][b];
            }
            out(i, j) = acc;
            out(j, i) = acc;
        }
    return out;
}

CovFamily cov_family(const Mat4& P_qbar, double qbar_true_norm,
                     const UnitQuaternion& q_true) {
    if (qbar_true_norm <= 0.0)
        throw Error(ErrorCode::singular_true_geometry, "true raw-stack norm must be positive");
    CovFamily f;
    f.P_qcheck = (1.0 / (qbar_true_norm * qbar_true_norm)) * P_qbar;
    const Mat4 proj = Mat4::identity() - outer(q_true.value(), q_true.value());
    const Mat4 n_op = bias_operator(f.P_qcheck, q_true);
    const Mat4 qq = outer(q_true.value(), q_true.value());
    f.P_qhat_2nd = proj * f.P_qcheck * proj.transposed() + n_op * qq * n_op.transposed();
    const Mat4 m = M_matrix(q_true);
    f.P_deltaq = m * f.P_qhat_2nd * m.transposed();
    return f;
}

double gaussian_moment4(const Mat4& P, int i, int j, int k, int m) {
    // canonicalize the index multiset so the pairing sum is evaluated in one
    // fixed order; permutation invariance then holds exactly, not just to
    // rounding
    std::array<int, 4> s{i, j, k, m};
    std::sort(s.begin(), s.end());
    return P(s[0], s[1]) * P(s[2], s[3]) + P(s[0], s[2]) * P(s[1], s[3]) +
           P(s[0], s[3]) * P(s[1], s[2]);
}

double wick_expectation(const Mat4& P, std::span<const int> indices) {
    const std::size_t n = indices.size();
    if (n == 0) return 1.0;
    if (n % 2 != 0) return 0.0;  // odd orders have no pairings
    if (n == 2) return P(indices[0], indices[1]);
    // pair the first index with each other index, recurse on the rest
    double total = 0.0;
    std::vector<int> rest(n - 2);
    for (std::size_t k = 1; k < n; ++k) {
        std::size_t w = 0;
        for (std::size_t t = 1; t < n; ++t)
            if (t != k) rest[w++] = indices[t];
        total += P(indices[0], indices[k]) * wick_expectation(P, rest);
    }
    return total;
}

namespace {

// E{(x.q)^3 x_i} assembled by Wick pairing
Quat4 cubic_projection(const UnitQuaternion& q, const Mat4& P) {
    Quat4 v{};
    for (int i = 0; i < 4; ++i) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l)
                for (int m = 0; m < 4; ++m)
                    acc += q[k] * q[l] * q[m] * gaussian_moment4(P, k, l, m, i);
        v[i] = acc;
    }
    return v;
}

}  // namespace

Mat4 quartic_term(int index, const UnitQuaternion& q_true, const Mat4& P) {
    const Quat4& q = q_true.value();
    const Mat4 qq = outer(q, q);
    switch (index) {
        case 1: {  // E{(x.q)^2 x x^T}
            Mat4 t;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    double acc = 0.0;
                    for (int k = 0; k < 4; ++k)
                        for (int l = 0; l < 4; ++l)
                            acc += q[k] * q[l] * gaussian_moment4(P, k, l, i, j);
                    t(i, j) = acc;
                }
            return t;
        }
        case 2:  // -3 E{(x.q)^3 x} q^T
            return -3.0 * outer(cubic_projection(q_true, P), q);
        case 3: {  // E{(x.x) x x^T} q q^T
            Mat4 s;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    double acc = 0.0;
                    for (int k = 0; k < 4; ++k) acc += gaussian_moment4(P, i, j, k, k);
                    s(i, j) = acc;
                }
            return s * qq;
        }
        case 4: {  // E{(x.x)^2} q q^T / 4
            double acc = 0.0;
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) acc += gaussian_moment4(P, k, k, l, l);
            return 0.25 * acc * qq;
        }
        case 5: {  // -3/2 E{(x.q)^2 (x.x)} q q^T
            double acc = 0.0;
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l)
                    for (int m = 0; m < 4; ++m)
                        acc += q[k] * q[l] * gaussian_moment4(P, k, l, m, m);
            return -1.5 * acc * qq;
        }
        case 6: {  // 9/4 E{(x.q)^4} q q^T
            double acc = 0.0;
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l)
                    for (int m = 0; m < 4; ++m)
                        for (int n = 0; n < 4; ++n)
                            acc += q[k] * q[l] * q[m] * q[n] * gaussian_moment4(P, k, l, m, n);
            return 2.25 * acc * qq;
        }
        default:
            throw Error(ErrorCode::invalid_config, "quartic term index must be 1..6");
    }
}

Mat4 quartic_term_sum(const UnitQuaternion& q_true, const Mat4& P) {
    Mat4 sum;
    for (int k = 1; k <= 6; ++k) sum = sum + quartic_term(k, q_true, P);
    // terms 2 and 3 are one-sided halves of symmetric pairs; the summed
    // expectation is symmetric, so fold the transpose back in
    if (max_abs_asymmetry(sum) > 1e-13 * (1.0 + frobenius_norm(sum)))
        sum = symmetrized(sum);
    return sum;
}

Mat4 cov_additive_fourth_order(const UnitQuaternion& q_true, const Mat4& P) {
    const Mat4 qq = outer(q_true.value(), q_true.value());
    const Mat4 proj = Mat4::identity() - qq;
    const Mat4 n_op = bias_operator(P, q_true);
    return proj * P * proj.transposed() + quartic_term_sum(q_true, P) -
           n_op * qq * n_op.transposed();
}

Mat4 cov_additive_projection(const UnitQuaternion& q_true, const Mat4& P) {
    const Mat4 proj =
        Mat4::identity() - outer(q_true.value(), q_true.value());
    return proj * P * proj.transposed();
}

ErrorBudget error_budget(const VectorObservation& vm1_true,
                         const VectorObservation& vm2_true, const NoiseModel& noise,
                         const UnitQuaternion& q_true, double singularity_threshold) {
    ErrorBudget b;
    b.qbar_true = estimate_raw(vm1_true, vm2_true);
    b.qbar_true_norm = norm(b.qbar_true);
    if (b.qbar_true_norm <= singularity_threshold)
        throw Error(ErrorCode::singular_true_geometry,
                    "error analysis undefined at a singular true geometry");
    b.P_qbar = cov_delta_qbar(vm1_true, vm2_true, noise);
    const CovFamily fam = cov_family(b.P_qbar, b.qbar_true_norm, q_true);
    b.P_qcheck = fam.P_qcheck;
    b.P_qhat_2nd = fam.P_qhat_2nd;
    b.P_deltaq = fam.P_deltaq;
    b.P_qhat_4th = cov_additive_fourth_order(q_true, b.P_qcheck);
    b.bias_qhat = bias_additive(b.P_qcheck, q_true);
    b.bias_deltaq = bias_multiplicative(b.P_qcheck, q_true);
    b.nu_mean = bias_nu(b.P_qcheck, q_true);
    return b;
}

}  // namespace tvqe
