#pragma once

#include <stdexcept>
#include <string>

namespace csi2dig {

enum class Errc {
  // csi-model
  malformed_row,
  non_monotonic_timestamp,
  empty_file,
  version_mismatch,
  corrupt_payload,
  // preprocess
  layout_mismatch,
  empty_sequence,
  too_few_rows,
  non_increasing_timestamps,
  series_too_short,
  // analysis
  length_mismatch,
  too_short,
  width_mismatch,
  empty_input,
  // neural
  shape_mismatch,
  kernel_too_large,
  batch_too_small,
  invalid_one_hot,
  non_deterministic_model,
  // autoencoder / tsnet
  insufficient_pairs,
  wrong_checkpoint_kind,
  empty_dataset,
  single_class,
  bad_n,
  unlabeled_sample,
  weight_constraint_violated,
  // synth
  all_windows_dropped,
  // cross-cutting
  numeric_failure,
  bad_config,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_row: return "MalformedRow";
    case Errc::non_monotonic_timestamp: return "NonMonotonicTimestamp";
    case Errc::empty_file: return "EmptyFile";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::corrupt_payload: return "CorruptPayload";
    case Errc::layout_mismatch: return "LayoutMismatch";
    case Errc::empty_sequence: return "EmptySequence";
    case Errc::too_few_rows: return "TooFewRows";
    case Errc::non_increasing_timestamps: return "NonIncreasingTimestamps";
    case Errc::series_too_short: return "SeriesTooShort";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::too_short: return "TooShort";
    case Errc::width_mismatch: return "WidthMismatch";
    case Errc::empty_input: return "EmptyInput";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::kernel_too_large: return "KernelTooLarge";
    case Errc::batch_too_small: return "BatchTooSmall";
    case Errc::invalid_one_hot: return "InvalidOneHot";
    case Errc::non_deterministic_model: return "NonDeterministicModel";
    case Errc::insufficient_pairs: return "InsufficientPairs";
    case Errc::wrong_checkpoint_kind: return "WrongCheckpointKind";
    case Errc::empty_dataset: return "EmptyDataset";
    case Errc::single_class: return "SingleClass";
    case Errc::bad_n: return "BadN";
    case Errc::unlabeled_sample: return "UnlabeledSample";
    case Errc::weight_constraint_violated: return "WeightConstraintViolated";
    case Errc::all_windows_dropped: return "AllWindowsDropped";
    case Errc::numeric_failure: return "NumericFailure";
    case Errc::bad_config: return "BadConfig";
  }
  return "Unknown";
}

class CsiError : public std::runtime_error {
 public:
  CsiError(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) {
  throw CsiError(code, msg);
}

// CLI exit-code mapping: 1 usage, 2 data, 3 numeric.
inline int exit_code_for(Errc c) {
  switch (c) {
    case Errc::numeric_failure: return 3;
    case Errc::bad_config: return 1;
    default: return 2;
  }
}

}  // namespace csi2dig
