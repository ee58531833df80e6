#include "tvqe/estimator.hpp"

#include <cmath>

#include "tvqe/error.hpp"
#include "tvqe/sequential_rotation.hpp"

namespace tvqe {

const char* to_string(SingularCase c) {
    switch (c) {
        case SingularCase::regular: return "regular";
        case SingularCase::a_zero_attitude: return "A";
        case SingularCase::b_around_vm1: return "B";
        case SingularCase::c_around_vm2: return "C";
        case SingularCase::d_parallel_diffs: return "D";
    }
    return "?";
}

const char* to_string(Axis a) {
    switch (a) {
        case Axis::x: return "x";
        case Axis::y: return "y";
        case Axis::z: return "z";
    }
    return "?";
}

namespace {

constexpr double kUnitTol = 1e-9;

VectorObservation checked(const VectorObservation& obs, const EstimatorConfig& cfg) {
    switch (cfg.input_policy) {
        case InputPolicy::renormalize:
            return {normalized(obs.b), normalized(obs.r)};
        case InputPolicy::accept_raw:
            return obs;
        case InputPolicy::validate:
            break;
    }
    if (std::abs(norm(obs.b) - 1.0) > kUnitTol || std::abs(norm(obs.r) - 1.0) > kUnitTol)
        throw Error(ErrorCode::not_unit, "observation vectors must be unit norm");
    return obs;
}

void require_non_collinear(const VectorObservation& vm1, const VectorObservation& vm2,
                           const EstimatorConfig& cfg) {
    const double cr = norm(cross(vm1.r, vm2.r));
    const double cb = norm(cross(vm1.b, vm2.b));
    if (cr < cfg.collinearity_threshold || cb < cfg.collinearity_threshold)
        throw Error(ErrorCode::collinear_observations,
                    "observation pair is collinear; attitude underdetermined");
}

// Minimal-angle unit quaternion determined by a single observation whose
// rotation axis is perpendicular to it: [d x s ; |s|^2] normalized, which for
// unit inputs is already unit since s.d = 0 and |s|^2 + |d|^2 = 1. The
// 180-degree case (|s| = 0) degenerates to [axis; 0].
UnitQuaternion minimal_rotation(const VectorObservation& obs, const Vec3& axis,
                                const EstimatorConfig& cfg) {
    const SumDiffPair sd = sum_diff(obs);
    const double sn = norm(sd.s);
    if (sn < cfg.singularity_threshold) return normalize({axis, 0.0});
    return normalize({cross(sd.d, sd.s), sn * sn});
}

}  // namespace

SumDiffPair sum_diff(const VectorObservation& obs) {
    return {0.5 * (obs.b + obs.r), 0.5 * (obs.b - obs.r)};
}

std::array<Quat4, 4> kernel_basis(const VectorObservation& obs, double degeneracy_threshold) {
    const auto [s, d] = sum_diff(obs);
    const double sn = norm(s), dn = norm(d);
    if (sn < degeneracy_threshold || dn < degeneracy_threshold)
        throw Error(ErrorCode::degenerate_basis, "sum or difference vector vanishes");
    const Vec3 sxd = cross(s, d);
    return {Quat4{s / sn, 0.0},
            Quat4{-sxd / sn, sn},   // [-s x d; |s|^2] / |s|
            Quat4{d / dn, 0.0},
            Quat4{sxd / dn, dn}};   // [ s x d; |d|^2] / |d|
}

Quat4 estimate_raw(const VectorObservation& vm1, const VectorObservation& vm2) {
    const SumDiffPair p1 = sum_diff(vm1);
    const SumDiffPair p2 = sum_diff(vm2);
    return {cross(p1.d, p2.d), dot(p1.s, p2.d)};
}

SingularCase classify(const VectorObservation& vm1, const VectorObservation& vm2,
                      const EstimatorConfig& cfg) {
    const double tau = cfg.singularity_threshold;
    const double d1 = norm(sum_diff(vm1).d);
    const double d2 = norm(sum_diff(vm2).d);
    const bool z1 = d1 < tau, z2 = d2 < tau;
    if (z1 && z2) return SingularCase::a_zero_attitude;
    if (z1) return SingularCase::b_around_vm1;
    if (z2) return SingularCase::c_around_vm2;
    const double cx = norm(cross(sum_diff(vm1).d, sum_diff(vm2).d));
    if (cx < tau * d1 * d2) return SingularCase::d_parallel_diffs;
    return SingularCase::regular;
}

UnitQuaternion estimate_case_a() { return unchecked_unit(identity_quat()); }

UnitQuaternion estimate_case_b(const VectorObservation& vm1, const VectorObservation& vm2,
                               const EstimatorConfig& cfg) {
    require_non_collinear(vm1, vm2, cfg);
    if (std::abs(dot(vm1.r, vm2.r)) <= cfg.collinearity_threshold)
        return minimal_rotation(vm2, vm1.r, cfg);
    return minimal_rotation(pseudo_measurement(vm1, vm2, cfg), vm1.r, cfg);
}

UnitQuaternion estimate_case_c(const VectorObservation& vm1, const VectorObservation& vm2,
                               const EstimatorConfig& cfg) {
    require_non_collinear(vm1, vm2, cfg);
    if (std::abs(dot(vm1.r, vm2.r)) <= cfg.collinearity_threshold)
        return minimal_rotation(vm1, vm2.r, cfg);
    return minimal_rotation(pseudo_measurement(vm1, vm2, cfg), vm2.r, cfg);
}

UnitQuaternion estimate_case_d(const VectorObservation& vm1, const VectorObservation& vm2,
                               const EstimatorConfig& cfg) {
    require_non_collinear(vm1, vm2, cfg);
    const VectorObservation p = pseudo_measurement(vm1, vm2, cfg);
    const Vec3 axis_raw = cross(p.b, p.r);
    const double an = norm(axis_raw);
    const double ca = dot(p.b, p.r);
    if (an < cfg.singularity_threshold) {
        if (ca > 0.0) return unchecked_unit(identity_quat());
        throw Error(ErrorCode::undefined_axis,
                    "rotation angle near pi with vanishing axis direction");
    }
    const double alpha = std::atan2(an, ca);  // in [0, pi]
    const Vec3 u = axis_raw / an;
    return normalize({u * std::sin(0.5 * alpha), std::cos(0.5 * alpha)});
}

VectorObservation pseudo_measurement(const VectorObservation& vm1,
                                     const VectorObservation& vm2,
                                     const EstimatorConfig& cfg) {
    require_non_collinear(vm1, vm2, cfg);
    return {normalized(cross(vm1.b, vm2.b)), normalized(cross(vm1.r, vm2.r))};
}

UnitQuaternion apply_hemisphere(const UnitQuaternion& q, const EstimatorConfig& cfg) {
    switch (cfg.hemisphere) {
        case HemisphereConvention::scalar_non_negative:
            return q.scalar_part() < 0.0 ? q.negated() : q;
        case HemisphereConvention::align_to_reference: {
            if (!cfg.hemisphere_reference)
                throw Error(ErrorCode::invalid_config,
                            "align_to_reference requires a reference quaternion");
            const double d = dot(q.value(), cfg.hemisphere_reference->value());
            return d < 0.0 ? q.negated() : q;
        }
    }
    return q;
}

EstimateResult estimate(const VectorObservation& vm1_in, const VectorObservation& vm2_in,
                        const EstimatorConfig& cfg) {
    const VectorObservation vm1 = checked(vm1_in, cfg);
    const VectorObservation vm2 = checked(vm2_in, cfg);
    require_non_collinear(vm1, vm2, cfg);

    const SingularCase c = classify(vm1, vm2, cfg);
    const Quat4 qbar = estimate_raw(vm1, vm2);
    const double raw_norm = norm(qbar);

    switch (c) {
        case SingularCase::regular:
            if (raw_norm >= cfg.singularity_threshold) {
                return {apply_hemisphere(normalize(qbar), cfg), c, std::nullopt, raw_norm};
            }
            break;  // ill-conditioned despite regular classification
        case SingularCase::a_zero_attitude:
            return {apply_hemisphere(estimate_case_a(), cfg), c, std::nullopt, raw_norm};
        case SingularCase::b_around_vm1:
            return {apply_hemisphere(estimate_case_b(vm1, vm2, cfg), cfg), c, std::nullopt,
                    raw_norm};
        case SingularCase::c_around_vm2:
            return {apply_hemisphere(estimate_case_c(vm1, vm2, cfg), cfg), c, std::nullopt,
                    raw_norm};
        case SingularCase::d_parallel_diffs:
            try {
                return {apply_hemisphere(estimate_case_d(vm1, vm2, cfg), cfg), c, std::nullopt,
                        raw_norm};
            } catch (const Error& e) {
                if (e.code() != ErrorCode::undefined_axis) throw;
            }
            break;  // axis undefined, use a frame detour
    }

    EstimateResult res = resolve(vm1, vm2, cfg);
    res.singular_case = c;
    return res;
}

}  // namespace tvqe
