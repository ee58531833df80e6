#pragma once

#include <stdexcept>
#include <string>

namespace tvqe {

enum class ErrorCode {
    norm_underflow,
    not_unit,
    degenerate_basis,
    collinear_observations,
    undefined_axis,
    estimation_failed,
    degenerate_ratio,
    invalid_noise_model,
    singular_true_geometry,
    degenerate_spectrum,
    invalid_config,
    io_error,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::norm_underflow: return "norm_underflow";
        case ErrorCode::not_unit: return "not_unit";
        case ErrorCode::degenerate_basis: return "degenerate_basis";
        case ErrorCode::collinear_observations: return "collinear_observations";
        case ErrorCode::undefined_axis: return "undefined_axis";
        case ErrorCode::estimation_failed: return "estimation_failed";
        case ErrorCode::degenerate_ratio: return "degenerate_ratio";
        case ErrorCode::invalid_noise_model: return "invalid_noise_model";
        case ErrorCode::singular_true_geometry: return "singular_true_geometry";
        case ErrorCode::degenerate_spectrum: return "degenerate_spectrum";
        case ErrorCode::invalid_config: return "invalid_config";
        case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tvqe
