#pragma once

// Independent attitude solutions used for cross-checking the closed-form
// estimator: the q-method (dominant eigenvector of the 4x4 gain matrix) and
// the orthonormal-triad construction anchored on the first observation.

#include <span>

#include "tvqe/estimator.hpp"
#include "tvqe/quat.hpp"

namespace tvqe {

// Weighted least-squares optimal quaternion. Builds
//   B = sum w_i b_i r_i^T,  z = sum w_i (b_i x r_i),
//   K = [ B + B^T - tr(B) I , z ; z^T , tr(B) ]
// and returns the eigenvector of the largest eigenvalue. Throws
// degenerate_spectrum when the top eigenvalue is separated by less than
// 1e-10 (ambiguous attitude).
UnitQuaternion davenport_oracle(std::span<const VectorObservation> observations,
                                std::span<const double> weights);

// Deterministic two-vector solution that reproduces the first observation
// exactly: rotate(q, r1) = b1 to machine precision.
UnitQuaternion triad_oracle(const VectorObservation& vm1, const VectorObservation& vm2);

// Quaternion with attitude_matrix(q) equal to the given orthonormal matrix.
UnitQuaternion quaternion_from_attitude_matrix(const Mat3& a);

}  // namespace tvqe
