#pragma once

#include <stdexcept>
#include <string>

namespace netsel {

// Every failure mode the library reports. Tests match on the code, not the
// message text.
enum class ErrorCode {
  missing_column,
  timestamp_not_monotone,
  network_length_mismatch,
  io_failure,
  trace_too_short,
  insufficient_data,
  all_missing_feature,
  no_eligible_neighbor,
  wrong_task,
  no_positives,
  shape_mismatch,
  invalid_label,
  non_finite_gradient,
  empty_list,
  empty_corpus,
  diverged_training,
  missing_feature,
  empty_forecast_list,
  indivisible_split,
  unknown_packet_id,
  model_feature_mismatch,
  length_mismatch,
  single_class,
  no_valid_pairs,
  empty_series,
  unpaired_outcomes,
  invalid_config,
  usage_error,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace netsel
