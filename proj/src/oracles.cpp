#include "tvqe/oracles.hpp"

#include <cmath>

#include "tvqe/error.hpp"

namespace tvqe {

UnitQuaternion davenport_oracle(std::span<const VectorObservation> observations,
                                std::span<const double> weights) {
    if (observations.size() < 2 || weights.size() != observations.size())
        throw Error(ErrorCode::invalid_config,
                    "need at least two weighted observations");

    Mat3 bmat;
    Vec3 z;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        bmat = bmat + weights[i] * outer(observations[i].b, observations[i].r);
        z += weights[i] * cross(observations[i].b, observations[i].r);
    }
    const double tr = bmat.trace();
    const Mat3 s = bmat + bmat.transposed();

    Mat4 k;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k(i, j) = s(i, j) - (i == j ? tr : 0.0);
    for (int i = 0; i < 3; ++i) {
        k(i, 3) = z[i];
        k(3, i) = z[i];
    }
    k(3, 3) = tr;

    std::array<double, 4> evals;
    std::array<double, 16> evecs;
    jacobi_eigen<4>(k.m, evals, evecs);
    if (evals[3] - evals[2] <= 1e-10)
        throw Error(ErrorCode::degenerate_spectrum,
                    "top eigenvalue of the gain matrix is not separated");
    Quat4 q;
    for (int i = 0; i < 4; ++i) q[i] = evecs[4 * i + 3];  // last column = max eigenvalue
    return normalize(q);
}

UnitQuaternion quaternion_from_attitude_matrix(const Mat3& a) {
    // attitude_matrix(q) = (s^2-e.e) I + 2 e e^T - 2 s [e x]; recover [e; s]
    // from the best-conditioned of the four Shepperd branches.
    const double tr = a.trace();
    const std::array<double, 4> gate = {a(0, 0), a(1, 1), a(2, 2), tr};
    int pick = 3;
    for (int i = 0; i < 3; ++i)
        if (gate[i] > gate[pick]) pick = i;

    Quat4 q;
    if (pick == 3) {
        const double s = std::sqrt(1.0 + tr);
        q.s = 0.5 * s;
        const double f = 0.5 / s;
        q.e = {(a(1, 2) - a(2, 1)) * f, (a(2, 0) - a(0, 2)) * f, (a(0, 1) - a(1, 0)) * f};
    } else {
        const int i = pick, j = (pick + 1) % 3, k = (pick + 2) % 3;
        const double s = std::sqrt(1.0 + a(i, i) - a(j, j) - a(k, k));
        const double f = 0.5 / s;
        q.e[i] = 0.5 * s;
        q.e[j] = (a(i, j) + a(j, i)) * f;
        q.e[k] = (a(i, k) + a(k, i)) * f;
        q.s = (a(j, k) - a(k, j)) * f;
    }
    return normalize(q);
}

UnitQuaternion triad_oracle(const VectorObservation& vm1, const VectorObservation& vm2) {
    const Vec3 cb = cross(vm1.b, vm2.b);
    const Vec3 cr = cross(vm1.r, vm2.r);
    if (norm(cb) < 1e-12 || norm(cr) < 1e-12)
        throw Error(ErrorCode::collinear_observations, "triad requires non-collinear pairs");

    const Vec3 tb1 = normalized(vm1.b), tb2 = normalized(cb), tb3 = cross(tb1, tb2);
    const Vec3 tr1 = normalized(vm1.r), tr2 = normalized(cr), tr3 = cross(tr1, tr2);

    // A maps reference coordinates to body coordinates: A = Mb * Mr^T with
    // triad vectors as columns.
    Mat3 a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            a(i, j) = tb1[i] * tr1[j] + tb2[i] * tr2[j] + tb3[i] * tr3[j];
    return quaternion_from_attitude_matrix(a);
}

}  // namespace tvqe
