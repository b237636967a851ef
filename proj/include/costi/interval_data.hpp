#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace costi {

/// One event on one channel. Active on the half-open range [start, end).
struct Interval {
  double start = 0.0;
  double end = 0.0;
  double value = 1.0;

  bool instantaneous() const { return end == start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// One sample. channels[c] holds the intervals of channel c sorted by start
/// and pairwise non-overlapping (touching endpoints allowed). A channel with
/// no intervals is identically zero.
struct IntervalSequence {
  std::string id;
  std::vector<std::vector<Interval>> channels;

  std::size_t num_events() const;
  /// Largest end timestamp, 0 for an empty sequence.
  double max_end() const;
  friend bool operator==(const IntervalSequence&, const IntervalSequence&) = default;
};

struct Dataset {
  std::vector<IntervalSequence> sequences;
  std::vector<std::string> labels;
  std::size_t num_channels = 0;

  std::size_t size() const { return sequences.size(); }
  /// Distinct labels in order of first appearance.
  std::vector<std::string> classes() const;
  /// Largest end timestamp over all sequences.
  double max_end() const;
  /// Sub-dataset made of the given rows, in the given order.
  Dataset subset(const std::vector<std::size_t>& rows) const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct DatasetStats {
  std::size_t classes = 0;
  std::size_t samples = 0;
  std::size_t channels = 0;
  double max_duration = 0.0;
  double mean_events = 0.0;
};

/// Checks every documented invariant; throws costi::Error naming the first
/// violation. Warns once per sequence containing instantaneous events.
void validate(const Dataset& ds);

/// Reads the interval CSV (`seq_id,channel,start,end[,value]`) and the label
/// CSV (`seq_id,label`). Sample order follows the label file.
Dataset parse_dataset(std::istream& intervals, std::istream& labels);
Dataset load_dataset(const std::string& intervals_path, const std::string& labels_path);

/// Writes both CSV files with round-trip precision.
void write_dataset(const Dataset& ds, std::ostream& intervals, std::ostream& labels);
void save_dataset(const Dataset& ds, const std::string& intervals_path,
                  const std::string& labels_path);

/// Sets every interval's value to 1 (the constrained, presence-only problem).
Dataset binarize_values(Dataset ds);

DatasetStats dataset_stats(const Dataset& ds);

/// Multiplies every timestamp by factor (factor > 0).
Dataset scale_timestamps(Dataset ds, double factor);

/// True when every timestamp is an integer exactly representable in a double.
bool all_timestamps_integral(const Dataset& ds);

}  // namespace costi
