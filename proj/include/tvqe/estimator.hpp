#pragma once

// Closed-form two-vector attitude estimation.
//
// The regular path stacks q_bar = [d1 x d2 ; s1^T d2] from the half-sum and
// half-difference vectors s_i = (b_i + r_i)/2, d_i = (b_i - r_i)/2 and
// normalizes. Degenerate geometries (vanishing differences or parallel
// differences) are classified and handled by dedicated formulas, falling back
// to sequential rotations when even those are undefined.

#include <array>
#include <optional>
#include <string>

#include "tvqe/linalg.hpp"
#include "tvqe/quat.hpp"

namespace tvqe {

struct VectorObservation {
    Vec3 b;  // body-frame unit vector
    Vec3 r;  // reference-frame unit vector
};

struct SumDiffPair {
    Vec3 s;  // (b + r) / 2
    Vec3 d;  // (b - r) / 2
};

enum class SingularCase {
    regular,
    a_zero_attitude,   // d1 = d2 = 0, identity attitude
    b_around_vm1,      // d1 = 0, rotation about the first observation
    c_around_vm2,      // d2 = 0, rotation about the second observation
    d_parallel_diffs,  // d1 x d2 = 0 with both nonzero
};

const char* to_string(SingularCase c);

enum class Axis { x, y, z };

const char* to_string(Axis a);

enum class HemisphereConvention {
    scalar_non_negative,  // flip sign so the scalar part is >= 0
    align_to_reference,   // flip sign so q . q_ref >= 0
};

enum class InputPolicy {
    validate,     // reject vectors whose norm deviates from 1 by more than 1e-9
    renormalize,  // renormalize on ingestion
    accept_raw,   // feed the formulas as-is (additive-error studies)
};

struct EstimatorConfig {
    // Conditioning threshold: the raw-norm floor below which the regular
    // formula is abandoned, and the per-quantity floor for |d_i| and the
    // relative parallelism test in classification.
    double singularity_threshold = 1e-6;
    // Relative floor on |r1 x r2| (and |b1 x b2|) below which the attitude is
    // underdetermined.
    double collinearity_threshold = 1e-8;
    HemisphereConvention hemisphere = HemisphereConvention::scalar_non_negative;
    std::optional<UnitQuaternion> hemisphere_reference;
    InputPolicy input_policy = InputPolicy::validate;
};

struct EstimateResult {
    UnitQuaternion quaternion;
    SingularCase singular_case = SingularCase::regular;
    std::optional<Axis> rotated_frame;  // set when sequential rotations were used
    double raw_norm = 0.0;              // |q_bar| of the path that produced the estimate
};

SumDiffPair sum_diff(const VectorObservation& obs);

// Orthonormal 4-vector basis attached to one observation:
//   k1 = [s;0]/|s|       k2 = [-s x d; |s|^2]/|s|   (null-space plane)
//   k3 = [d;0]/|d|       k4 = [ s x d; |d|^2]/|d|   (orthogonal complement)
// Throws degenerate_basis when |s| or |d| falls below the threshold.
std::array<Quat4, 4> kernel_basis(const VectorObservation& obs,
                                  double degeneracy_threshold = 1e-8);

// Unnormalized regular-path estimate [d1 x d2 ; s1^T d2]; no normalization,
// no singularity handling.
Quat4 estimate_raw(const VectorObservation& vm1, const VectorObservation& vm2);

SingularCase classify(const VectorObservation& vm1, const VectorObservation& vm2,
                      const EstimatorConfig& cfg);

UnitQuaternion estimate_case_a();

// Rotation about the invariant first (B) / second (C) observation. When the
// two observations are not perpendicular the non-invariant one is replaced by
// the cross-product pseudo-measurement first.
UnitQuaternion estimate_case_b(const VectorObservation& vm1, const VectorObservation& vm2,
                               const EstimatorConfig& cfg);
UnitQuaternion estimate_case_c(const VectorObservation& vm1, const VectorObservation& vm2,
                               const EstimatorConfig& cfg);

// Rotation about the eigenaxis u = (b3 x r3)/|b3 x r3| by the angle between
// the plane normals b3, r3. Throws undefined_axis when the angle approaches
// pi and the axis direction is lost.
UnitQuaternion estimate_case_d(const VectorObservation& vm1, const VectorObservation& vm2,
                               const EstimatorConfig& cfg);

// (b1 x b2, r1 x r2), both normalized.
VectorObservation pseudo_measurement(const VectorObservation& vm1,
                                     const VectorObservation& vm2,
                                     const EstimatorConfig& cfg);

// Full dispatch: classify, apply the regular formula or the case handler,
// fall back to sequential rotations when the raw norm is below the threshold
// or a case handler reports an undefined axis.
EstimateResult estimate(const VectorObservation& vm1, const VectorObservation& vm2,
                        const EstimatorConfig& cfg = {});

// Apply the configured hemisphere convention to a unit quaternion.
UnitQuaternion apply_hemisphere(const UnitQuaternion& q, const EstimatorConfig& cfg);

}  // namespace tvqe
