#pragma once

// Monte Carlo validation engine. Trials are partitioned into fixed-size
// chunks; chunk c draws from an independent generator seeded by
// splitmix64(seed + GOLDEN * (c + 1)), and chunk accumulators are combined in
// ascending chunk order. Results are therefore bit-identical between the
// serial reference and the OpenMP path for any thread count.

#include <cstdint>
#include <optional>
#include <string>

#include "tvqe/estimator.hpp"
#include "tvqe/noise.hpp"
#include "tvqe/quat.hpp"

namespace tvqe {

// Deterministic normal deviates: mt19937_64 driven Marsaglia polar transform.
// The stdlib distribution objects are avoided so the byte stream does not
// depend on the standard library version.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : state_(seed) {}

    double next();
    Vec3 next_vec3() { return {next(), next(), next()}; }
    Quat4 next_quat4() { return {{next(), next(), next()}, next()}; }
    std::uint64_t next_u64();

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk_index);

struct ScenarioConfig {
    std::optional<UnitQuaternion> true_quaternion;  // empty: derived from seed
    Vec3 r1{1.0, 0.0, 0.0};
    Vec3 r2{0.0, 1.0, 0.0};
    NoiseModel noise;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    std::uint32_t chunk_size = 4096;
    EstimatorConfig estimator;
    bool renormalize_after_noise = false;
    std::string out_path;
    std::string format = "json";

    void check() const;
    UnitQuaternion resolved_true_quaternion() const;
};

struct EmpiricalStats {
    std::uint64_t trials = 0;
    std::uint64_t accepted = 0;
    Quat4 mean_additive, mean_multiplicative;
    Mat4 cov_additive, cov_multiplicative;
    Quat4 se_mean_additive, se_mean_multiplicative;
    Mat4 se_cov_additive, se_cov_multiplicative;
    std::uint64_t singular_path_count = 0;
    std::uint64_t rejection_count = 0;

    bool bitwise_equal(const EmpiricalStats& other) const;
};

// Draw one additive error vector for the given covariance.
Vec3 sample_noise(const Mat3& covariance, GaussianStream& rng);
// Shorthand/kind-aware variant: v_true feeds the tangent-plane projector.
Vec3 sample_noise(const NoiseModel& model, const Vec3& v_true, GaussianStream& rng);

// Serial reference implementation: one straight pass over the chunks.
EmpiricalStats run_trials_serial(const ScenarioConfig& cfg);

// OpenMP implementation: chunks are processed in parallel, then combined in
// fixed order. threads <= 0 leaves the OpenMP default in place.
EmpiricalStats run_trials(const ScenarioConfig& cfg, int threads = 0);

}  // namespace tvqe
