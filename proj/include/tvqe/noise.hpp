#pragma once

// Measurement error model for the two observation pairs: per-vector 3x3
// covariances of the additive errors on (b1, r1, b2, r2), optional
// cross-covariances (zero by default), plus the two common shorthands
//   isotropic:     P = sigma^2 I
//   tangent-plane: P = sigma^2 (I - v v^T), built from the true vector v.

#include <array>

#include "tvqe/estimator.hpp"
#include "tvqe/linalg.hpp"

namespace tvqe {

struct NoiseModel {
    enum class Kind { general, isotropic, tangent_plane };

    Kind kind = Kind::isotropic;
    double sigma = 0.0;

    // general kind only
    Mat3 P_b1, P_r1, P_b2, P_r2;
    // optional cross-covariances E{da db^T}; all zero unless has_cross is set
    bool has_cross = false;
    Mat3 C_b1r1, C_b1b2, C_b1r2, C_r1b2, C_r1r2, C_b2r2;

    static NoiseModel isotropic_diagonal(double sigma) {
        NoiseModel m;
        m.kind = Kind::isotropic;
        m.sigma = sigma;
        return m;
    }

    static NoiseModel tangent_plane(double sigma) {
        NoiseModel m;
        m.kind = Kind::tangent_plane;
        m.sigma = sigma;
        return m;
    }

    static NoiseModel general(const Mat3& pb1, const Mat3& pr1, const Mat3& pb2,
                              const Mat3& pr2) {
        NoiseModel m;
        m.kind = Kind::general;
        m.P_b1 = pb1; m.P_r1 = pr1; m.P_b2 = pb2; m.P_r2 = pr2;
        return m;
    }

    // Concrete covariances for given true observations (the tangent-plane
    // projectors depend on them).
    struct Resolved {
        Mat3 P_b1, P_r1, P_b2, P_r2;
        bool has_cross = false;
        Mat3 C_b1r1, C_b1b2, C_b1r2, C_r1b2, C_r1r2, C_b2r2;
    };
    Resolved resolve(const VectorObservation& vm1_true,
                     const VectorObservation& vm2_true) const;

    // Symmetry within 1e-12 and eigenvalues >= -1e-12 for every covariance;
    // throws invalid_noise_model otherwise.
    void validate(const VectorObservation& vm1_true,
                  const VectorObservation& vm2_true) const;
};

// Factor of a PSD covariance suitable for sampling: columns scaled by the
// square roots of the (clamped) eigenvalues. Throws invalid_noise_model on
// asymmetric or indefinite input.
Mat3 covariance_factor(const Mat3& cov);

}  // namespace tvqe
