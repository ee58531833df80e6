#pragma once

// Singularity mitigation by re-expressing the reference frame through a pi
// rotation about a coordinate axis, estimating in the rotated frame, and
// composing back.

#include <optional>
#include <utility>
#include <vector>

#include "tvqe/estimator.hpp"

namespace tvqe {

// Body vectors are untouched; the two off-axis components of each reference
// vector are negated (a pi rotation about the given axis). Applying the same
// axis twice returns the original observations exactly.
std::pair<VectorObservation, VectorObservation> rotate_observations(
    const VectorObservation& vm1, const VectorObservation& vm2, Axis axis);

// Map an estimate taken against the rotated reference frame back to the
// original frame. Componentwise ((x,y,z,s) of the input):
//   X: ( s, -z,  y, -x)    Y: ( z,  s, -x, -y)    Z: (-y,  x,  s, -z)
// These are the signed permutations of the Hamilton product [axis;0] * q,
// equivalently compose([axis;0], q) with the scalar part negated; the
// round-trip identity rotate(unmap(q_c), r) = b is pinned by tests.
UnitQuaternion unmap_quaternion(const UnitQuaternion& q_c, Axis axis);

// A-priori validity screen for one (singular case, axis) pair, evaluated on
// the unrotated observations. Every "parallel" clause is tested as
// |u x v| <= tol |u||v|, with zero vectors counting as parallel.
//   A: invalid if b1 || axis, or b2 || axis, or the reference vectors with
//      the axis component zeroed are parallel.
//   B: invalid if b1 || axis and masked(b2 + r2) || masked(r1).
//   C: invalid if b2 || axis and masked(b1 + r1) || masked(r2).
//   D: invalid if d1 + masked(r1) || d2 + masked(r2)  (these are exactly the
//      difference vectors after the rotation).
bool validate_axis(SingularCase singular_case, const VectorObservation& vm1,
                   const VectorObservation& vm2, Axis axis, const EstimatorConfig& cfg);

// Try axes in the fixed order X, Y, Z; use the first one that passes
// validate_axis and whose rotated observations classify as regular with raw
// norm at or above the singularity threshold. For a regular classification
// the a-priori screen is skipped (only the post-rotation checks apply).
// Throws estimation_failed when no axis qualifies.
EstimateResult resolve(const VectorObservation& vm1, const VectorObservation& vm2,
                       const EstimatorConfig& cfg);

}  // namespace tvqe
