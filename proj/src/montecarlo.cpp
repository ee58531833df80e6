#include "tvqe/montecarlo.hpp"

#include <cmath>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tvqe/error.hpp"
#include "tvqe/sequential_rotation.hpp"

namespace tvqe {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk_index) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (chunk_index + 1));
}

std::uint64_t GaussianStream::next_u64() {
    // splitmix64 as the underlying uniform generator: one multiply-xor chain
    // per draw, full 64-bit state walk
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Marsaglia polar method
    for (;;) {
        const double u = 2.0 * (double(next_u64() >> 11) * 0x1.0p-53) - 1.0;
        const double v = 2.0 * (double(next_u64() >> 11) * 0x1.0p-53) - 1.0;
        const double s = u * u + v * v;
        if (s >= 1.0 || s == 0.0) continue;
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }
}

void ScenarioConfig::check() const {
    if (trials < 1) throw Error(ErrorCode::invalid_config, "trials must be >= 1");
    if (chunk_size < 1) throw Error(ErrorCode::invalid_config, "chunk_size must be >= 1");
    if (std::abs(norm(r1) - 1.0) > 1e-9 || std::abs(norm(r2) - 1.0) > 1e-9)
        throw Error(ErrorCode::invalid_config, "reference vectors must be unit norm");
    if (norm(cross(r1, r2)) < estimator.collinearity_threshold)
        throw Error(ErrorCode::invalid_config, "reference vectors must not be collinear");
}

UnitQuaternion ScenarioConfig::resolved_true_quaternion() const {
    if (true_quaternion) return *true_quaternion;
    GaussianStream g(splitmix64(seed ^ 0xA5A5A5A5A5A5A5A5ULL));
    return normalize(g.next_quat4());
}

Vec3 sample_noise(const Mat3& covariance, GaussianStream& rng) {
    const Mat3 f = covariance_factor(covariance);
    return f * rng.next_vec3();
}

Vec3 sample_noise(const NoiseModel& model, const Vec3& v_true, GaussianStream& rng) {
    switch (model.kind) {
        case NoiseModel::Kind::isotropic:
            return model.sigma * rng.next_vec3();
        case NoiseModel::Kind::tangent_plane: {
            // sigma * (I - v v^T) g has covariance sigma^2 (I - v v^T) and is
            // orthogonal to v by construction
            const Vec3 g = rng.next_vec3();
            return model.sigma * (g - dot(v_true, g) * v_true);
        }
        case NoiseModel::Kind::general:
            throw Error(ErrorCode::invalid_config,
                        "general noise needs the per-vector covariance overload");
    }
    return {};
}

namespace {

// Raw moment sums for one 4-vector error channel: sum x_i, sum x_i x_j, and
// sum (x_i x_j)^2 for the covariance-entry standard errors.
struct ChannelAccum {
    std::array<double, 4> s1{};
    std::array<double, 10> s2{};
    std::array<double, 10> s4{};

    void add(const Quat4& x) {
        int t = 0;
        for (int i = 0; i < 4; ++i) {
            s1[i] += x[i];
            for (int j = i; j < 4; ++j, ++t) {
                const double p = x[i] * x[j];
                s2[t] += p;
                s4[t] += p * p;
            }
        }
    }
    void combine(const ChannelAccum& o) {
        for (int i = 0; i < 4; ++i) s1[i] += o.s1[i];
        for (int i = 0; i < 10; ++i) {
            s2[i] += o.s2[i];
            s4[i] += o.s4[i];
        }
    }
};

struct ChunkAccum {
    ChannelAccum additive;
    ChannelAccum multiplicative;
    std::uint64_t accepted = 0;
    std::uint64_t singular = 0;
    std::uint64_t rejected = 0;

    void combine(const ChunkAccum& o) {
        additive.combine(o.additive);
        multiplicative.combine(o.multiplicative);
        accepted += o.accepted;
        singular += o.singular;
        rejected += o.rejected;
    }
};

struct TrialContext {
    UnitQuaternion q_true;
    VectorObservation vm1_true, vm2_true;
    // general noise kind: joint 12x12 factor over (db1, dr1, db2, dr2) so
    // that configured cross-covariances are honored by the sampler
    std::array<double, 144> joint_factor{};
    bool use_joint = false;
    EstimatorConfig est;
};

std::array<double, 144> joint_noise_factor(const NoiseModel::Resolved& r) {
    std::array<double, 144> cov{};
    auto put = [&cov](int bi, int bj, const Mat3& m) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                cov[12 * (3 * bi + i) + 3 * bj + j] = m(i, j);
                cov[12 * (3 * bj + j) + 3 * bi + i] = m(j, i);
            }
    };
    put(0, 0, r.P_b1);
    put(1, 1, r.P_r1);
    put(2, 2, r.P_b2);
    put(3, 3, r.P_r2);
    if (r.has_cross) {
        put(0, 1, r.C_b1r1);
        put(0, 2, r.C_b1b2);
        put(0, 3, r.C_b1r2);
        put(1, 2, r.C_r1b2);
        put(1, 3, r.C_r1r2);
        put(2, 3, r.C_b2r2);
    }
    std::array<double, 12> evals;
    std::array<double, 144> evecs;
    jacobi_eigen<12>(cov, evals, evecs);
    if (evals[0] < -1e-12)
        throw Error(ErrorCode::invalid_noise_model, "joint noise covariance is indefinite");
    std::array<double, 144> factor{};
    for (int j = 0; j < 12; ++j) {
        const double s = std::sqrt(std::max(0.0, evals[j]));
        for (int i = 0; i < 12; ++i) factor[12 * i + j] = evecs[12 * i + j] * s;
    }
    return factor;
}

TrialContext make_context(const ScenarioConfig& cfg) {
    TrialContext ctx;
    ctx.q_true = cfg.resolved_true_quaternion();
    ctx.vm1_true = {rotate(ctx.q_true, cfg.r1), cfg.r1};
    ctx.vm2_true = {rotate(ctx.q_true, cfg.r2), cfg.r2};
    cfg.noise.validate(ctx.vm1_true, ctx.vm2_true);
    if (cfg.noise.kind == NoiseModel::Kind::general) {
        ctx.joint_factor = joint_noise_factor(cfg.noise.resolve(ctx.vm1_true, ctx.vm2_true));
        ctx.use_joint = true;
    }
    ctx.est = cfg.estimator;
    ctx.est.hemisphere = HemisphereConvention::align_to_reference;
    ctx.est.hemisphere_reference = ctx.q_true;
    // additive-noise vectors are deliberately not renormalized, so the
    // formulas must accept raw norms
    ctx.est.input_policy = InputPolicy::accept_raw;
    return ctx;
}

void run_chunk(const ScenarioConfig& cfg, const TrialContext& ctx, std::uint64_t chunk,
               std::uint64_t count, ChunkAccum& acc) {
    GaussianStream rng(chunk_seed(cfg.seed, chunk));
    for (std::uint64_t t = 0; t < count; ++t) {
        Vec3 db1, dr1, db2, dr2;
        if (ctx.use_joint) {
            std::array<double, 12> g, d{};
            for (double& x : g) x = rng.next();
            for (int i = 0; i < 12; ++i)
                for (int j = 0; j < 12; ++j) d[i] += ctx.joint_factor[12 * i + j] * g[j];
            db1 = {d[0], d[1], d[2]};
            dr1 = {d[3], d[4], d[5]};
            db2 = {d[6], d[7], d[8]};
            dr2 = {d[9], d[10], d[11]};
        } else {
            db1 = sample_noise(cfg.noise, ctx.vm1_true.b, rng);
            dr1 = sample_noise(cfg.noise, ctx.vm1_true.r, rng);
            db2 = sample_noise(cfg.noise, ctx.vm2_true.b, rng);
            dr2 = sample_noise(cfg.noise, ctx.vm2_true.r, rng);
        }
        VectorObservation vm1{ctx.vm1_true.b + db1, ctx.vm1_true.r + dr1};
        VectorObservation vm2{ctx.vm2_true.b + db2, ctx.vm2_true.r + dr2};
        if (cfg.renormalize_after_noise) {
            vm1 = {normalized(vm1.b), normalized(vm1.r)};
            vm2 = {normalized(vm2.b), normalized(vm2.r)};
        }
        try {
            const EstimateResult res = estimate(vm1, vm2, ctx.est);
            const Quat4 additive = ctx.q_true.value() - res.quaternion.value();
            const Quat4 mult =
                compose(inverse(res.quaternion).value(), ctx.q_true.value());
            acc.additive.add(additive);
            acc.multiplicative.add(mult);
            acc.accepted += 1;
            if (res.rotated_frame || res.singular_case != SingularCase::regular)
                acc.singular += 1;
        } catch (const Error&) {
            acc.rejected += 1;
        }
    }
}

EmpiricalStats finalize(const ScenarioConfig& cfg, const std::vector<ChunkAccum>& chunks) {
    ChunkAccum total;
    for (const ChunkAccum& c : chunks) total.combine(c);  // fixed ascending order

    EmpiricalStats out;
    out.trials = cfg.trials;
    out.accepted = total.accepted;
    out.singular_path_count = total.singular;
    out.rejection_count = total.rejected;
    const double n = double(total.accepted);
    if (total.accepted == 0) return out;

    auto reduce = [n](const ChannelAccum& a, Quat4& mean, Mat4& cov, Quat4& se_mean,
                      Mat4& se_cov) {
        for (int i = 0; i < 4; ++i) mean[i] = a.s1[i] / n;
        int t = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j, ++t) {
                const double raw = a.s2[t] / n;
                const double c = (n > 1.5) ? (raw - mean[i] * mean[j]) * n / (n - 1.0)
                                           : 0.0;
                cov(i, j) = c;
                cov(j, i) = c;
                // Var(sample cov entry) ~ (E{(x_i x_j)^2} - E{x_i x_j}^2) / n
                const double v = std::max(0.0, a.s4[t] / n - raw * raw);
                const double se = std::sqrt(v / n);
                se_cov(i, j) = se;
                se_cov(j, i) = se;
            }
        for (int i = 0; i < 4; ++i) se_mean[i] = std::sqrt(std::max(0.0, cov(i, i)) / n);
    };
    reduce(total.additive, out.mean_additive, out.cov_additive, out.se_mean_additive,
           out.se_cov_additive);
    reduce(total.multiplicative, out.mean_multiplicative, out.cov_multiplicative,
           out.se_mean_multiplicative, out.se_cov_multiplicative);
    return out;
}

}  // namespace

bool EmpiricalStats::bitwise_equal(const EmpiricalStats& other) const {
    auto eq = [](const void* a, const void* b, std::size_t len) {
        return std::memcmp(a, b, len) == 0;
    };
    return trials == other.trials && accepted == other.accepted &&
           singular_path_count == other.singular_path_count &&
           rejection_count == other.rejection_count &&
           eq(&mean_additive, &other.mean_additive, sizeof(Quat4)) &&
           eq(&mean_multiplicative, &other.mean_multiplicative, sizeof(Quat4)) &&
           eq(cov_additive.m.data(), other.cov_additive.m.data(), sizeof(double) * 16) &&
           eq(cov_multiplicative.m.data(), other.cov_multiplicative.m.data(),
              sizeof(double) * 16);
}

EmpiricalStats run_trials_serial(const ScenarioConfig& cfg) {
    cfg.check();
    const TrialContext ctx = make_context(cfg);
    const std::uint64_t nchunks = (cfg.trials + cfg.chunk_size - 1) / cfg.chunk_size;
    std::vector<ChunkAccum> chunks(nchunks);
    for (std::uint64_t c = 0; c < nchunks; ++c) {
        const std::uint64_t begin = c * cfg.chunk_size;
        const std::uint64_t count = std::min<std::uint64_t>(cfg.chunk_size, cfg.trials - begin);
        run_chunk(cfg, ctx, c, count, chunks[c]);
    }
    return finalize(cfg, chunks);
}

EmpiricalStats run_trials(const ScenarioConfig& cfg, int threads) {
    cfg.check();
    const TrialContext ctx = make_context(cfg);
    const std::uint64_t nchunks = (cfg.trials + cfg.chunk_size - 1) / cfg.chunk_size;
    std::vector<ChunkAccum> chunks(nchunks);
#ifdef _OPENMP
    const std::int64_t n = std::int64_t(nchunks);
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (std::int64_t c = 0; c < n; ++c) {
        const std::uint64_t begin = std::uint64_t(c) * cfg.chunk_size;
        const std::uint64_t count =
            std::min<std::uint64_t>(cfg.chunk_size, cfg.trials - begin);
        run_chunk(cfg, ctx, std::uint64_t(c), count, chunks[c]);
    }
#else
    (void)threads;
    for (std::uint64_t c = 0; c < nchunks; ++c) {
        const std::uint64_t begin = c * cfg.chunk_size;
        const std::uint64_t count = std::min<std::uint64_t>(cfg.chunk_size, cfg.trials - begin);
        run_chunk(cfg, ctx, c, count, chunks[c]);
    }
#endif
    return finalize(cfg, chunks);
}

}  // namespace tvqe
