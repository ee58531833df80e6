#include "tvqe/sequential_rotation.hpp"

#include <cmath>

#include "tvqe/error.hpp"

namespace tvqe {

namespace {

Vec3 flip_off_axis(const Vec3& v, Axis axis) {
    switch (axis) {
        case Axis::x: return {v.x, -v.y, -v.z};
        case Axis::y: return {-v.x, v.y, -v.z};
        case Axis::z: return {-v.x, -v.y, v.z};
    }
    return v;
}

Vec3 mask_axis(const Vec3& v, Axis axis) {
    switch (axis) {
        case Axis::x: return {0.0, v.y, v.z};
        case Axis::y: return {v.x, 0.0, v.z};
        case Axis::z: return {v.x, v.y, 0.0};
    }
    return v;
}

// |u x v| <= tol |u||v|; a zero vector is parallel to everything.
bool parallel(const Vec3& u, const Vec3& v, double tol) {
    return norm(cross(u, v)) <= tol * norm(u) * norm(v);
}

bool parallel_to_axis(const Vec3& v, Axis axis, double tol) {
    return norm(mask_axis(v, axis)) <= tol * norm(v);
}

}  // namespace

std::pair<VectorObservation, VectorObservation> rotate_observations(
    const VectorObservation& vm1, const VectorObservation& vm2, Axis axis) {
    return {VectorObservation{vm1.b, flip_off_axis(vm1.r, axis)},
            VectorObservation{vm2.b, flip_off_axis(vm2.r, axis)}};
}

UnitQuaternion unmap_quaternion(const UnitQuaternion& q_c, Axis axis) {
    const double x = q_c[0], y = q_c[1], z = q_c[2], s = q_c[3];
    switch (axis) {
        case Axis::x: return unchecked_unit({{s, -z, y}, -x});
        case Axis::y: return unchecked_unit({{z, s, -x}, -y});
        case Axis::z: return unchecked_unit({{-y, x, s}, -z});
    }
    return q_c;
}

bool validate_axis(SingularCase singular_case, const VectorObservation& vm1,
                   const VectorObservation& vm2, Axis axis, const EstimatorConfig& cfg) {
    const double tol = cfg.singularity_threshold;
    switch (singular_case) {
        case SingularCase::regular:
            throw Error(ErrorCode::invalid_config,
                        "validate_axis is defined for singular cases only");
        case SingularCase::a_zero_attitude:
            return !(parallel_to_axis(vm1.b, axis, tol) || parallel_to_axis(vm2.b, axis, tol) ||
                     parallel(mask_axis(vm1.r, axis), mask_axis(vm2.r, axis), tol));
        case SingularCase::b_around_vm1:
            return !(parallel_to_axis(vm1.b, axis, tol) &&
                     parallel(mask_axis(vm2.b + vm2.r, axis), mask_axis(vm1.r, axis), tol));
        case SingularCase::c_around_vm2:
            return !(parallel_to_axis(vm2.b, axis, tol) &&
                     parallel(mask_axis(vm1.b + vm1.r, axis), mask_axis(vm2.r, axis), tol));
        case SingularCase::d_parallel_diffs: {
            const Vec3 d1 = sum_diff(vm1).d;
            const Vec3 d2 = sum_diff(vm2).d;
            return !parallel(d1 + mask_axis(vm1.r, axis), d2 + mask_axis(vm2.r, axis), tol);
        }
    }
    return false;
}

EstimateResult resolve(const VectorObservation& vm1, const VectorObservation& vm2,
                       const EstimatorConfig& cfg) {
    const SingularCase original = classify(vm1, vm2, cfg);
    for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
        if (original != SingularCase::regular &&
            !validate_axis(original, vm1, vm2, axis, cfg))
            continue;
        const auto [w1, w2] = rotate_observations(vm1, vm2, axis);
        if (classify(w1, w2, cfg) != SingularCase::regular) continue;
        const Quat4 qbar = estimate_raw(w1, w2);
        const double raw_norm = norm(qbar);
        if (raw_norm < cfg.singularity_threshold) continue;
        const UnitQuaternion q = unmap_quaternion(normalize(qbar), axis);
        return {apply_hemisphere(q, cfg), original, axis, raw_norm};
    }
    throw Error(ErrorCode::estimation_failed, "no valid sequential rotation found");
}

}  // namespace tvqe
