#include "tvqe/noise.hpp"

#include <cmath>

#include "tvqe/error.hpp"

namespace tvqe {

namespace {

Mat3 tangent_cov(double sigma, const Vec3& v) {
    return sigma * sigma * (Mat3::identity() - outer(v, v));
}

void check_one(const Mat3& p, const char* name) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (std::abs(p(i, j) - p(j, i)) > 1e-12)
                throw Error(ErrorCode::invalid_noise_model,
                            std::string(name) + " covariance is not symmetric");
    std::array<double, 3> evals;
    std::array<double, 9> evecs;
    jacobi_eigen<3>(p.m, evals, evecs);
    if (evals[0] < -1e-12)
        throw Error(ErrorCode::invalid_noise_model,
                    std::string(name) + " covariance is indefinite");
}

}  // namespace

NoiseModel::Resolved NoiseModel::resolve(const VectorObservation& vm1_true,
                                         const VectorObservation& vm2_true) const {
    Resolved r;
    switch (kind) {
        case Kind::general:
            r.P_b1 = P_b1; r.P_r1 = P_r1; r.P_b2 = P_b2; r.P_r2 = P_r2;
            r.has_cross = has_cross;
            if (has_cross) {
                r.C_b1r1 = C_b1r1; r.C_b1b2 = C_b1b2; r.C_b1r2 = C_b1r2;
                r.C_r1b2 = C_r1b2; r.C_r1r2 = C_r1r2; r.C_b2r2 = C_b2r2;
            }
            break;
        case Kind::isotropic: {
            const Mat3 p = sigma * sigma * Mat3::identity();
            r.P_b1 = r.P_r1 = r.P_b2 = r.P_r2 = p;
            break;
        }
        case Kind::tangent_plane:
            r.P_b1 = tangent_cov(sigma, vm1_true.b);
            r.P_r1 = tangent_cov(sigma, vm1_true.r);
            r.P_b2 = tangent_cov(sigma, vm2_true.b);
            r.P_r2 = tangent_cov(sigma, vm2_true.r);
            break;
    }
    return r;
}

void NoiseModel::validate(const VectorObservation& vm1_true,
                          const VectorObservation& vm2_true) const {
    const Resolved r = resolve(vm1_true, vm2_true);
    check_one(r.P_b1, "b1");
    check_one(r.P_r1, "r1");
    check_one(r.P_b2, "b2");
    check_one(r.P_r2, "r2");
}

Mat3 covariance_factor(const Mat3& cov) {
    check_one(cov, "sampling");
    std::array<double, 3> evals;
    std::array<double, 9> evecs;
    jacobi_eigen<3>(cov.m, evals, evecs);
    Mat3 f;
    for (int j = 0; j < 3; ++j) {
        const double s = std::sqrt(std::max(0.0, evals[j]));
        for (int i = 0; i < 3; ++i) f(i, j) = evecs[3 * i + j] * s;
    }
    return f;
}

}  // namespace tvqe
