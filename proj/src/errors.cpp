#include "netsel/errors.hpp"

namespace netsel {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::missing_column: return "MissingColumn";
    case ErrorCode::timestamp_not_monotone: return "TimestampNotMonotone";
    case ErrorCode::network_length_mismatch: return "NetworkLengthMismatch";
    case ErrorCode::io_failure: return "IoFailure";
    case ErrorCode::trace_too_short: return "TraceTooShort";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::all_missing_feature: return "AllMissingFeature";
    case ErrorCode::no_eligible_neighbor: return "NoEligibleNeighbor";
    case ErrorCode::wrong_task: return "WrongTask";
    case ErrorCode::no_positives: return "NoPositives";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::invalid_label: return "InvalidLabel";
    case ErrorCode::non_finite_gradient: return "NonFiniteGradient";
    case ErrorCode::empty_list: return "EmptyList";
    case ErrorCode::empty_corpus: return "EmptyCorpus";
    case ErrorCode::diverged_training: return "DivergedTraining";
    case ErrorCode::missing_feature: return "MissingFeature";
    case ErrorCode::empty_forecast_list: return "EmptyForecastList";
    case ErrorCode::indivisible_split: return "IndivisibleSplit";
    case ErrorCode::unknown_packet_id: return "UnknownPacketId";
    case ErrorCode::model_feature_mismatch: return "ModelFeatureMismatch";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::single_class: return "SingleClass";
    case ErrorCode::no_valid_pairs: return "NoValidPairs";
    case ErrorCode::empty_series: return "EmptySeries";
    case ErrorCode::unpaired_outcomes: return "UnpairedOutcomes";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::usage_error: return "UsageError";
  }
  return "UnknownError";
}

}  // namespace netsel
