#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lrdbreak {

/// Broad error classes. Each maps onto a distinct process exit status in the CLI.
enum class ErrorKind {
  config,     ///< invalid parameters, scale rules, search space
  data,       ///< malformed or degenerate input series
  numerical,  ///< embedding failure, singular designs, quadrature trouble
  io,
};

/// Machine-readable error codes. The string form is what lands in result documents.
enum class ErrorCode {
  domain_error,
  invalid_spec,
  embedding_failed,
  scale_below_minimum,
  invalid_coefficient,
  too_few_blocks,
  degenerate_segment,
  singular_design,
  infeasible_search_space,
  unusable_segments,
  alpha_out_of_range,
  quadrature_failure,
  unknown_wavelet,
  unknown_scenario,
  parse_error,
  io_failure,
  table_mismatch,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::domain_error: return "domain_error";
    case ErrorCode::invalid_spec: return "invalid_spec";
    case ErrorCode::embedding_failed: return "embedding_failed";
    case ErrorCode::scale_below_minimum: return "scale_below_minimum";
    case ErrorCode::invalid_coefficient: return "invalid_coefficient";
    case ErrorCode::too_few_blocks: return "too_few_blocks";
    case ErrorCode::degenerate_segment: return "degenerate_segment";
    case ErrorCode::singular_design: return "singular_design";
    case ErrorCode::infeasible_search_space: return "infeasible_search_space";
    case ErrorCode::unusable_segments: return "unusable_segments";
    case ErrorCode::alpha_out_of_range: return "alpha_out_of_range";
    case ErrorCode::quadrature_failure: return "quadrature_failure";
    case ErrorCode::unknown_wavelet: return "unknown_wavelet";
    case ErrorCode::unknown_scenario: return "unknown_scenario";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::table_mismatch: return "table_mismatch";
  }
  return "unknown";
}

constexpr ErrorKind kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::domain_error:
    case ErrorCode::invalid_spec:
    case ErrorCode::scale_below_minimum:
    case ErrorCode::infeasible_search_space:
    case ErrorCode::unusable_segments:
    case ErrorCode::alpha_out_of_range:
    case ErrorCode::unknown_wavelet:
    case ErrorCode::unknown_scenario:
    case ErrorCode::table_mismatch:
      return ErrorKind::config;
    case ErrorCode::invalid_coefficient:
    case ErrorCode::too_few_blocks:
    case ErrorCode::degenerate_segment:
    case ErrorCode::parse_error:
      return ErrorKind::data;
    case ErrorCode::embedding_failed:
    case ErrorCode::singular_design:
    case ErrorCode::quadrature_failure:
      return ErrorKind::numerical;
    case ErrorCode::io_failure:
      return ErrorKind::io;
  }
  return ErrorKind::numerical;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  ErrorCode code_;
};

/// Non-fatal condition recorded alongside a result.
struct Warning {
  std::string code;
  std::string message;

  friend bool operator==(const Warning&, const Warning&) = default;
};

}  // namespace lrdbreak
