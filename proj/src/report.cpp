#include "tvqe/report.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tvqe/error.hpp"

namespace tvqe {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const char* where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw Error(ErrorCode::invalid_config, std::string(where) + " must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw Error(ErrorCode::invalid_config,
                        std::string("unknown key \"") + key + "\" in " + where);
}

Vec3 vec3_from(const json& j, const char* where) {
    if (!j.is_array() || j.size() != 3)
        throw Error(ErrorCode::invalid_config, std::string(where) + " must be a 3-array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Quat4 quat_from(const json& j, const char* where) {
    if (!j.is_array() || j.size() != 4)
        throw Error(ErrorCode::invalid_config, std::string(where) + " must be a 4-array");
    return {{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}, j[3].get<double>()};
}

Mat3 mat3_from(const json& j, const char* where) {
    if (!j.is_array() || j.size() != 9)
        throw Error(ErrorCode::invalid_config, std::string(where) + " must be a 9-array (row-major)");
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.m[i] = j[i].get<double>();
    return m;
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json to_json(const Quat4& q) { return json::array({q.e.x, q.e.y, q.e.z, q.s}); }
json to_json(const Mat4& m) {
    json a = json::array();
    for (double v : m.m) a.push_back(v);
    return a;
}
json to_json(const Mat3& m) {
    json a = json::array();
    for (double v : m.m) a.push_back(v);
    return a;
}

NoiseModel noise_from(const json& j) {
    require_keys(j, "noise",
                 {"kind", "sigma", "P_b1", "P_r1", "P_b2", "P_r2", "C_b1r1", "C_b1b2",
                  "C_b1r2", "C_r1b2", "C_r1r2", "C_b2r2"});
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "isotropic") return NoiseModel::isotropic_diagonal(j.at("sigma").get<double>());
    if (kind == "tangent_plane") return NoiseModel::tangent_plane(j.at("sigma").get<double>());
    if (kind != "general")
        throw Error(ErrorCode::invalid_config, "noise.kind must be isotropic, tangent_plane or general");
    NoiseModel m = NoiseModel::general(
        mat3_from(j.at("P_b1"), "noise.P_b1"), mat3_from(j.at("P_r1"), "noise.P_r1"),
        mat3_from(j.at("P_b2"), "noise.P_b2"), mat3_from(j.at("P_r2"), "noise.P_r2"));
    auto cross_of = [&j, &m](const char* key, Mat3 NoiseModel::* member) {
        if (j.contains(key)) {
            m.*member = mat3_from(j.at(key), key);
            m.has_cross = true;
        }
    };
    cross_of("C_b1r1", &NoiseModel::C_b1r1);
    cross_of("C_b1b2", &NoiseModel::C_b1b2);
    cross_of("C_b1r2", &NoiseModel::C_b1r2);
    cross_of("C_r1b2", &NoiseModel::C_r1b2);
    cross_of("C_r1r2", &NoiseModel::C_r1r2);
    cross_of("C_b2r2", &NoiseModel::C_b2r2);
    return m;
}

json noise_to_json(const NoiseModel& m) {
    json j;
    switch (m.kind) {
        case NoiseModel::Kind::isotropic: j["kind"] = "isotropic"; j["sigma"] = m.sigma; break;
        case NoiseModel::Kind::tangent_plane: j["kind"] = "tangent_plane"; j["sigma"] = m.sigma; break;
        case NoiseModel::Kind::general:
            j["kind"] = "general";
            j["P_b1"] = to_json(m.P_b1);
            j["P_r1"] = to_json(m.P_r1);
            j["P_b2"] = to_json(m.P_b2);
            j["P_r2"] = to_json(m.P_r2);
            if (m.has_cross) {
                j["C_b1r1"] = to_json(m.C_b1r1);
                j["C_b1b2"] = to_json(m.C_b1b2);
                j["C_b1r2"] = to_json(m.C_b1r2);
                j["C_r1b2"] = to_json(m.C_r1b2);
                j["C_r1r2"] = to_json(m.C_r1r2);
                j["C_b2r2"] = to_json(m.C_b2r2);
            }
            break;
    }
    return j;
}

EstimatorConfig estimator_from(const json& j) {
    require_keys(j, "estimator",
                 {"singularity_threshold", "collinearity_threshold", "hemisphere",
                  "input_policy"});
    EstimatorConfig c;
    if (j.contains("singularity_threshold"))
        c.singularity_threshold = j.at("singularity_threshold").get<double>();
    if (j.contains("collinearity_threshold"))
        c.collinearity_threshold = j.at("collinearity_threshold").get<double>();
    if (j.contains("hemisphere")) {
        const std::string h = j.at("hemisphere").get<std::string>();
        if (h == "scalar_non_negative")
            c.hemisphere = HemisphereConvention::scalar_non_negative;
        else if (h == "align_to_reference")
            c.hemisphere = HemisphereConvention::align_to_reference;
        else
            throw Error(ErrorCode::invalid_config, "unknown hemisphere convention");
    }
    if (j.contains("input_policy")) {
        const std::string p = j.at("input_policy").get<std::string>();
        if (p == "validate") c.input_policy = InputPolicy::validate;
        else if (p == "renormalize") c.input_policy = InputPolicy::renormalize;
        else if (p == "accept_raw") c.input_policy = InputPolicy::accept_raw;
        else throw Error(ErrorCode::invalid_config, "unknown input_policy");
    }
    if (c.singularity_threshold <= 0.0 || c.singularity_threshold >= 1.0 ||
        c.collinearity_threshold <= 0.0 || c.collinearity_threshold >= 1.0)
        throw Error(ErrorCode::invalid_config, "estimator thresholds must lie in (0, 1)");
    return c;
}

json estimator_to_json(const EstimatorConfig& c) {
    json j;
    j["singularity_threshold"] = c.singularity_threshold;
    j["collinearity_threshold"] = c.collinearity_threshold;
    j["hemisphere"] = c.hemisphere == HemisphereConvention::scalar_non_negative
                          ? "scalar_non_negative"
                          : "align_to_reference";
    j["input_policy"] = c.input_policy == InputPolicy::validate
                            ? "validate"
                            : (c.input_policy == InputPolicy::renormalize ? "renormalize"
                                                                          : "accept_raw");
    return j;
}

ScenarioConfig scenario_from(const json& j) {
    require_keys(j, "scenario",
                 {"true_quaternion", "r1", "r2", "noise", "trials", "seed", "chunk_size",
                  "estimator", "renormalize_after_noise", "output", "validation"});
    ScenarioConfig cfg;
    const json& tq = j.at("true_quaternion");
    if (tq.is_string()) {
        if (tq.get<std::string>() != "random")
            throw Error(ErrorCode::invalid_config,
                        "true_quaternion must be a 4-array or \"random\"");
    } else {
        cfg.true_quaternion = normalize(quat_from(tq, "true_quaternion"));
    }
    cfg.r1 = vec3_from(j.at("r1"), "r1");
    cfg.r2 = vec3_from(j.at("r2"), "r2");
    cfg.noise = noise_from(j.at("noise"));
    cfg.trials = j.at("trials").get<std::uint64_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("chunk_size")) cfg.chunk_size = j.at("chunk_size").get<std::uint32_t>();
    if (j.contains("estimator")) cfg.estimator = estimator_from(j.at("estimator"));
    if (j.contains("renormalize_after_noise"))
        cfg.renormalize_after_noise = j.at("renormalize_after_noise").get<bool>();
    if (j.contains("output")) {
        require_keys(j.at("output"), "output", {"path", "format"});
        if (j.at("output").contains("path"))
            cfg.out_path = j.at("output").at("path").get<std::string>();
        if (j.at("output").contains("format"))
            cfg.format = j.at("output").at("format").get<std::string>();
        if (cfg.format != "json" && cfg.format != "csv")
            throw Error(ErrorCode::invalid_config, "output.format must be json or csv");
    }
    cfg.check();
    return cfg;
}

json scenario_to(const ScenarioConfig& cfg) {
    json j;
    if (cfg.true_quaternion)
        j["true_quaternion"] = to_json(cfg.true_quaternion->value());
    else
        j["true_quaternion"] = "random";
    j["r1"] = to_json(cfg.r1);
    j["r2"] = to_json(cfg.r2);
    j["noise"] = noise_to_json(cfg.noise);
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["chunk_size"] = cfg.chunk_size;
    j["estimator"] = estimator_to_json(cfg.estimator);
    j["renormalize_after_noise"] = cfg.renormalize_after_noise;
    // the output destination is operational metadata, not payload: identical
    // scenarios give identical payloads wherever the report is written
    return j;
}

json json_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_config, std::string("bad JSON: ") + e.what());
    }
    return j;
}

double safe_z(double diff, double se) {
    // differences at rounding scale are not evidence; without the floor a
    // zero-noise run divides 1e-17-level means by 1e-17-level standard errors
    if (std::abs(diff) <= 1e-12) return 0.0;
    if (se > 0.0) return diff / se;
    return std::numeric_limits<double>::infinity();
}

json payload_json(const ValidationReport& r) {
    json analytic;
    analytic["qbar_true"] = to_json(r.analytic.qbar_true);
    analytic["qbar_true_norm"] = r.analytic.qbar_true_norm;
    analytic["P_qbar"] = to_json(r.analytic.P_qbar);
    analytic["P_qcheck"] = to_json(r.analytic.P_qcheck);
    analytic["P_qhat_2nd"] = to_json(r.analytic.P_qhat_2nd);
    analytic["P_qhat_4th"] = to_json(r.analytic.P_qhat_4th);
    analytic["P_deltaq"] = to_json(r.analytic.P_deltaq);
    analytic["bias_qhat"] = to_json(r.analytic.bias_qhat);
    analytic["bias_deltaq"] = to_json(r.analytic.bias_deltaq);
    analytic["nu_mean"] = r.analytic.nu_mean;

    json empirical;
    empirical["trials"] = r.empirical.trials;
    empirical["accepted"] = r.empirical.accepted;
    empirical["mean_additive"] = to_json(r.empirical.mean_additive);
    empirical["mean_multiplicative"] = to_json(r.empirical.mean_multiplicative);
    empirical["cov_additive"] = to_json(r.empirical.cov_additive);
    empirical["cov_multiplicative"] = to_json(r.empirical.cov_multiplicative);
    empirical["se_mean_additive"] = to_json(r.empirical.se_mean_additive);
    empirical["se_mean_multiplicative"] = to_json(r.empirical.se_mean_multiplicative);
    empirical["se_cov_additive"] = to_json(r.empirical.se_cov_additive);
    empirical["singular_path_count"] = r.empirical.singular_path_count;
    empirical["rejection_count"] = r.empirical.rejection_count;

    json validation;
    validation["bias_z_additive"] = r.bias_z_additive;
    validation["bias_z_multiplicative"] = r.bias_z_multiplicative;
    validation["cov_z_additive"] = to_json(r.cov_z_additive);
    validation["max_abs_bias_z"] = r.max_abs_bias_z;
    validation["max_abs_cov_z"] = r.max_abs_cov_z;
    validation["frob_dist_2nd"] = r.frob_dist_2nd;
    validation["frob_dist_4th"] = r.frob_dist_4th;
    validation["checks"] = {{"bias", r.checks.bias},
                            {"cov_entries", r.checks.cov_entries},
                            {"frob_ordering", r.checks.frob_ordering},
                            {"z_threshold", r.checks.z_threshold}};
    validation["pass_bias"] = r.pass_bias;
    validation["pass_cov"] = r.pass_cov;
    validation["pass_frob_ordering"] = r.pass_frob_ordering;
    validation["pass"] = r.pass;

    json payload;
    payload["config"] = scenario_to(r.config);
    payload["analytic"] = analytic;
    payload["empirical"] = empirical;
    payload["validation"] = validation;
    return payload;
}

void flatten(const json& j, const std::string& prefix, std::ostringstream& out) {
    if (j.is_object()) {
        for (const auto& [key, val] : j.items())
            flatten(val, prefix.empty() ? key : prefix + "." + key, out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    } else {
        out << prefix << "," << j.dump() << "\n";
    }
}

}  // namespace

ValidationReport validate(const ScenarioConfig& cfg, const ValidationChecks& checks,
                          int threads) {
    ValidationReport r;
    r.config = cfg;
    r.checks = checks;
    r.threads = threads;

    const UnitQuaternion q_true = cfg.resolved_true_quaternion();
    const VectorObservation vm1{rotate(q_true, cfg.r1), cfg.r1};
    const VectorObservation vm2{rotate(q_true, cfg.r2), cfg.r2};
    r.analytic = error_budget(vm1, vm2, cfg.noise, q_true,
                              cfg.estimator.singularity_threshold);

    const auto t0 = std::chrono::steady_clock::now();
    r.empirical = run_trials(cfg, threads);
    r.elapsed_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0).count();

    for (int i = 0; i < 4; ++i) {
        r.bias_z_additive[i] = safe_z(r.empirical.mean_additive[i] - r.analytic.bias_qhat[i],
                                      r.empirical.se_mean_additive[i]);
        r.bias_z_multiplicative[i] =
            safe_z(r.empirical.mean_multiplicative[i] - r.analytic.bias_deltaq[i],
                   r.empirical.se_mean_multiplicative[i]);
        r.max_abs_bias_z = std::max({r.max_abs_bias_z, std::abs(r.bias_z_additive[i]),
                                     std::abs(r.bias_z_multiplicative[i])});
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double z = safe_z(
                r.empirical.cov_additive(i, j) - r.analytic.P_qhat_4th(i, j),
                r.empirical.se_cov_additive(i, j));
            r.cov_z_additive(i, j) = z;
            r.max_abs_cov_z = std::max(r.max_abs_cov_z, std::abs(z));
        }
    // the second-order baseline is the pure projection prediction; the full
    // fourth-order matrix must come out at least as close
    const Mat4 proj_pred = cov_additive_projection(q_true, r.analytic.P_qcheck);
    r.frob_dist_2nd = frobenius_norm(r.empirical.cov_additive - proj_pred);
    r.frob_dist_4th = frobenius_norm(r.empirical.cov_additive - r.analytic.P_qhat_4th);

    r.pass_bias = r.max_abs_bias_z < checks.z_threshold;
    r.pass_cov = r.max_abs_cov_z < checks.z_threshold;
    r.pass_frob_ordering = r.frob_dist_4th <= r.frob_dist_2nd;
    r.pass = (!checks.bias || r.pass_bias) && (!checks.cov_entries || r.pass_cov) &&
             (!checks.frob_ordering || r.pass_frob_ordering);
    return r;
}

ScenarioConfig scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_config, std::string("bad JSON: ") + e.what());
    }
    return scenario_from(j);
}

ScenarioConfig scenario_from_json_file(const std::string& path) {
    return scenario_from(json_from_file(path));
}

std::pair<ScenarioConfig, ValidationChecks> scenario_and_checks_from_json_file(
    const std::string& path) {
    const json j = json_from_file(path);
    ScenarioConfig cfg = scenario_from(j);
    ValidationChecks checks;
    if (j.contains("validation")) checks = checks_from_json_text(j.at("validation").dump());
    return {cfg, checks};
}

ValidationChecks checks_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_config, std::string("bad JSON: ") + e.what());
    }
    require_keys(j, "validation", {"bias", "cov_entries", "frob_ordering", "z_threshold"});
    ValidationChecks c;
    if (j.contains("bias")) c.bias = j.at("bias").get<bool>();
    if (j.contains("cov_entries")) c.cov_entries = j.at("cov_entries").get<bool>();
    if (j.contains("frob_ordering")) c.frob_ordering = j.at("frob_ordering").get<bool>();
    if (j.contains("z_threshold")) c.z_threshold = j.at("z_threshold").get<double>();
    return c;
}

std::string scenario_to_json_text(const ScenarioConfig& cfg) {
    return scenario_to(cfg).dump(2);
}

std::string report_payload_text(const ValidationReport& report) {
    return payload_json(report).dump();
}

std::string report_to_json_text(const ValidationReport& report) {
    json doc;
    doc["payload"] = payload_json(report);
    doc["meta"] = {{"elapsed_seconds", report.elapsed_seconds},
                   {"threads", report.threads},
                   {"output", {{"path", report.config.out_path},
                               {"format", report.config.format}}},
                   {"unix_time", std::chrono::duration_cast<std::chrono::seconds>(
                                     std::chrono::system_clock::now().time_since_epoch())
                                     .count()}};
    return doc.dump(2);
}

std::string report_to_csv_text(const ValidationReport& report) {
    std::ostringstream out;
    out << "key,value\n";
    flatten(payload_json(report), "", out);
    return out.str();
}

std::pair<VectorObservation, VectorObservation> observations_from_json_file(
    const std::string& path) {
    const json j = json_from_file(path);
    require_keys(j, "observations", {"b1", "r1", "b2", "r2"});
    return {VectorObservation{vec3_from(j.at("b1"), "b1"), vec3_from(j.at("r1"), "r1")},
            VectorObservation{vec3_from(j.at("b2"), "b2"), vec3_from(j.at("r2"), "r2")}};
}

std::string estimate_result_to_json_text(const EstimateResult& result) {
    json j;
    j["quaternion"] = to_json(result.quaternion.value());
    j["case"] = to_string(result.singular_case);
    j["rotated_frame"] =
        result.rotated_frame ? json(to_string(*result.rotated_frame)) : json(nullptr);
    j["raw_norm"] = result.raw_norm;
    return j.dump(2);
}

}  // namespace tvqe
