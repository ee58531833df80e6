#pragma once

// Deterministic error identities, second-order approximations, analytic
// biases, and second/fourth-order covariance matrices for the regular-path
// estimate.
//
// Error definitions, with q the true quaternion, q_bar_t the noise-free raw
// stack, q_bar the noisy one:
//   dq_bar   = q_bar_t - q_bar
//   dq_check = dq_bar / |q_bar_t|            (scaled error)
//   nu       = |q_bar_t| / |q_bar|
//   dq_hat   = q - q_bar/|q_bar|             (additive error of the estimate)
//   mult err = compose(inverse(q_hat), q) = [0;1] + M dq_hat   (exact)
// The multiplicative error is the estimate-to-truth rotation; its exactness
// against the M-matrix identity is tested at large perturbations.

#include <array>
#include <span>

#include "tvqe/linalg.hpp"
#include "tvqe/noise.hpp"
#include "tvqe/quat.hpp"

namespace tvqe {

struct NoiseDeltas {
    Vec3 db1, dr1, db2, dr2;
};

// Exact raw-stack error: vector part [d2 x] dd1 - [d1 x] dd2 - dd1 x dd2,
// scalar part -d2.ds1 - s1.dd2 - ds1.dd2, with ds_i = (db_i + dr_i)/2 and
// dd_i = (db_i - dr_i)/2 and d_i, s_i taken from the true observations.
Quat4 delta_qbar_exact(const VectorObservation& vm1_true,
                       const VectorObservation& vm2_true, const NoiseDeltas& deltas);

// nu = (1 - 2 q.dq_check + |dq_check|^2)^(-1/2); throws degenerate_ratio when
// the radicand is not positive (the perturbed raw stack vanished).
double nu_exact(const UnitQuaternion& q_true, const Quat4& dq_check);

// dq_hat = nu dq_check + (1 - nu) q, exact.
Quat4 additive_error_exact(const UnitQuaternion& q_true, const Quat4& dq_check);

// M = [ [e x] - s I , e ; -e^T , -s ].
Mat4 M_matrix(const UnitQuaternion& q_true);

// [0;1] + M dq_hat; equals compose(inverse(q_hat), q_true) exactly.
Quat4 multiplicative_error_exact(const UnitQuaternion& q_true, const Quat4& dq_hat);

// Second-order approximations in dq_check, with Q = I - 3 q q^T:
//   nu     ~ 1 + q.dq_check - dq_check.Q dq_check / 2
//   dq_hat ~ (I - q q^T) dq_check + [dq_check dq_check^T + (dq_check.Q dq_check/2) I] q
double nu_second_order(const UnitQuaternion& q_true, const Quat4& dq_check);
Quat4 additive_error_second_order(const UnitQuaternion& q_true, const Quat4& dq_check);

// Biases under zero-mean dq_check with covariance P:
//   E{nu}     = 1 - tr(Q P)/2
//   E{dq_hat} = [P + tr(Q P)/2 I] q = N q
//   E{mult}   = [0;1] + M N q
double bias_nu(const Mat4& P_qcheck, const UnitQuaternion& q_true);
Quat4 bias_additive(const Mat4& P_qcheck, const UnitQuaternion& q_true);
Quat4 bias_multiplicative(const Mat4& P_qcheck, const UnitQuaternion& q_true);

// Covariance of the linearized raw-stack error for a given noise model,
// propagated through the block map (0 E F; G 0 H) with E = [d2 x],
// F = -[d1 x], G = -d2^T, H = -s1^T over the joint covariance of
// (ds1, dd1, dd2). Cross-covariances are honored when present.
Mat4 cov_delta_qbar(const VectorObservation& vm1_true,
                    const VectorObservation& vm2_true, const NoiseModel& noise);

struct CovFamily {
    Mat4 P_qcheck;   // P_qbar / |q_bar_t|^2
    Mat4 P_qhat_2nd; // (I - qq^T) P (I - qq^T) + N qq^T N^T
    Mat4 P_deltaq;   // M P_qhat_2nd M^T
};
CovFamily cov_family(const Mat4& P_qbar, double qbar_true_norm,
                     const UnitQuaternion& q_true);

// Gaussian fourth moment E{x_i x_j x_k x_m} = P_ij P_km + P_ik P_jm + P_im P_jk.
double gaussian_moment4(const Mat4& P, int i, int j, int k, int m);

// Zero-mean Gaussian expectation of an arbitrary product x_{i0} ... x_{in-1}
// by pairing enumeration; odd orders have no pairings and return 0.
double wick_expectation(const Mat4& P, std::span<const int> indices);

// The six quartic building blocks of the fourth-order covariance, in their
// raw (unsymmetrized) form including coefficients:
//   1:  E{(x.q)^2 x x^T}          2: -3 E{(x.q)^3 x} q^T
//   3:  E{(x.x) x x^T} q q^T      4:  E{(x.x)^2} q q^T / 4
//   5: -3/2 E{(x.q)^2 (x.x)} q q^T
//   6:  9/4 E{(x.q)^4} q q^T
// assembled generically from gaussian_moment4.
Mat4 quartic_term(int index, const UnitQuaternion& q_true, const Mat4& P_qcheck);

// Symmetrized sum of the six terms: E{W q q^T W} for W = x x^T + (x.Q x/2) I.
Mat4 quartic_term_sum(const UnitQuaternion& q_true, const Mat4& P_qcheck);

// Complete covariance of the second-order error model under Gaussian
// dq_check ~ N(0, P): (I-qq^T) P (I-qq^T) + quartic_term_sum - N qq^T N^T.
// Exact for the quadratic model; an O(sigma^4)-complete approximation for the
// estimator.
Mat4 cov_additive_fourth_order(const UnitQuaternion& q_true, const Mat4& P_qcheck);

// Leading-order (pure projection) covariance (I-qq^T) P (I-qq^T); the
// baseline the fourth-order prediction is judged against.
Mat4 cov_additive_projection(const UnitQuaternion& q_true, const Mat4& P_qcheck);

struct ErrorBudget {
    Quat4 qbar_true;
    double qbar_true_norm = 0.0;
    Mat4 P_qbar, P_qcheck, P_qhat_2nd, P_qhat_4th, P_deltaq;
    Quat4 bias_qhat, bias_deltaq;
    double nu_mean = 1.0;
};

// Full analytic pipeline for a non-singular true geometry; throws
// singular_true_geometry when |q_bar_t| is at or below the threshold.
ErrorBudget error_budget(const VectorObservation& vm1_true,
                         const VectorObservation& vm2_true, const NoiseModel& noise,
                         const UnitQuaternion& q_true,
                         double singularity_threshold = 1e-6);

}  // namespace tvqe
