#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "costi/interval_data.hpp"
#include "costi/model_fit.hpp"

namespace costi {

enum class SignalType { kDuration, kLag, kIntensity };

SignalType parse_signal_type(const std::string& name);
std::string to_string(SignalType signal);

struct SynthSpec {
  std::size_t classes = 2;
  std::size_t samples_per_class = 20;
  std::size_t channels = 4;
  double max_duration = 1000.0;
  std::size_t events = 20;  // per sequence
  SignalType signal = SignalType::kDuration;
  double strength = 1.0;  // 0 = no class signal, 1 = strong
  bool integer_timestamps = false;
  std::uint64_t seed = 0;
};

/// Parses "key=value,key=value" (keys match the SynthSpec field names).
SynthSpec parse_synth_spec(const std::string& text);

/// Labeled sequences whose class is carried by channel 0's event duration,
/// the lag between channels 0 and 1, or channel 0's intensity.
Dataset synth(const SynthSpec& spec);

struct CvConfig {
  FitConfig fit;
  std::size_t folds = 10;
  std::size_t repeats = 10;
};

struct FoldResult {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double accuracy = 0.0;
  /// Model t_max and max end over the training rows; equal unless the
  /// model saw test data.
  double model_t_max = 0.0;
  double train_t_max = 0.0;
  std::vector<std::size_t> test_rows;
  double fit_seconds = 0.0;
  double transform_seconds = 0.0;
  double classify_seconds = 0.0;
};

struct CvReport {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  std::uint64_t seed = 0;
  CvConfig config;
  double fit_seconds = 0.0;
  double transform_seconds = 0.0;
  double classify_seconds = 0.0;
};

/// Stratified k-fold assignment for one repeat; fold_of[i] in [0, folds).
std::vector<std::size_t> stratified_folds(const std::vector<std::string>& labels,
                                          std::size_t folds, std::uint64_t seed);

CvReport crossvalidate(const Dataset& ds, const CvConfig& config);

void print_cv_report(std::ostream& out, const CvReport& report);
void write_cv_report_json(std::ostream& out, const CvReport& report);

/// Fraction of equal entries.
double accuracy(const std::vector<std::string>& predicted, const std::vector<std::string>& truth);

/// Returns a copy of ds with labels randomly permuted.
Dataset permute_labels(Dataset ds, std::uint64_t seed);

struct BenchTiming {
  std::string name;
  std::size_t samples = 0;
  double mean_events = 0.0;
  std::size_t features = 0;
  double fit_seconds = 0.0;
  double transform_seconds = 0.0;
  double transform_serial_seconds = 0.0;
};

struct BenchConfig {
  FitConfig fit;
  std::size_t repetitions = 3;  // best-of timings
  bool include_serial = true;
  bool scaling_variants = true;
};

/// Best-of-N wall time of fn() in seconds.
double time_best_of(std::size_t repetitions, const std::function<void()>& fn);

/// Times fit and transform on ds and, when requested, on the 1000x-timestamp,
/// 2x-event and half-feature variants used by the scaling checks. The 2x-event
/// variant duplicates every event in time: each sequence is concatenated with
/// a copy shifted by its own span and the timeline compressed back by 2.
std::vector<BenchTiming> bench(const Dataset& ds, const BenchConfig& config);

/// Each sequence followed by a copy of itself, then squeezed into the
/// original duration: twice the events over the same time range.
Dataset double_events(const Dataset& ds);

void print_bench(std::ostream& out, const std::vector<BenchTiming>& rows);

}  // namespace costi
