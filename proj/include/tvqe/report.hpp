#pragma once

// Scenario ingestion (strict JSON), analytic-vs-empirical validation, and
// report serialization. The report document has two top-level blocks:
// "payload" (config echo, analytic budget, empirical statistics, validation
// verdicts; byte-stable for a fixed config and seed) and "meta" (timestamps,
// wall time, thread count).

#include <array>
#include <string>

#include "tvqe/error_analysis.hpp"
#include "tvqe/montecarlo.hpp"

namespace tvqe {

struct ValidationChecks {
    bool bias = true;            // every bias z within the threshold
    bool cov_entries = true;     // cov(additive) entries within 5 SE of the
                                 // fourth-order prediction
    bool frob_ordering = false;  // 4th-order Frobenius distance <= 2nd-order
    double z_threshold = 5.0;
};

struct ValidationReport {
    ScenarioConfig config;
    ValidationChecks checks;
    ErrorBudget analytic;
    EmpiricalStats empirical;
    std::array<double, 4> bias_z_additive{};
    std::array<double, 4> bias_z_multiplicative{};
    Mat4 cov_z_additive;
    double max_abs_bias_z = 0.0;
    double max_abs_cov_z = 0.0;
    double frob_dist_2nd = 0.0;
    double frob_dist_4th = 0.0;
    bool pass_bias = false;
    bool pass_cov = false;
    bool pass_frob_ordering = false;
    bool pass = false;
    double elapsed_seconds = 0.0;
    int threads = 0;
};

ValidationReport validate(const ScenarioConfig& cfg, const ValidationChecks& checks,
                          int threads = 0);

// Strict parsers: unknown keys anywhere in the document are rejected.
ScenarioConfig scenario_from_json_text(const std::string& text);
ScenarioConfig scenario_from_json_file(const std::string& path);
ValidationChecks checks_from_json_text(const std::string& text);
// Scenario plus the optional top-level "validation" block.
std::pair<ScenarioConfig, ValidationChecks> scenario_and_checks_from_json_file(
    const std::string& path);

std::string scenario_to_json_text(const ScenarioConfig& cfg);

// Full document (meta + payload) and the byte-stable payload alone.
std::string report_to_json_text(const ValidationReport& report);
std::string report_payload_text(const ValidationReport& report);
// "path,value" rows, one per scalar leaf of the payload.
std::string report_to_csv_text(const ValidationReport& report);

// Observation file for the estimate subcommand: {"b1":[...],"r1":[...],
// "b2":[...],"r2":[...]}.
std::pair<VectorObservation, VectorObservation> observations_from_json_file(
    const std::string& path);

std::string estimate_result_to_json_text(const EstimateResult& result);

}  // namespace tvqe
