#include "costi/interval_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "costi/error.hpp"

namespace costi {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

[[noreturn]] void fail(const char* file, std::size_t line, const std::string& what) {
  throw Error(std::string(file) + " line " + std::to_string(line) + ": " + what);
}

double parse_real(std::string_view text, const char* file, std::size_t line, const char* column) {
  // strtod accepts hexadecimal floats; from_chars in libstdc++ 11 needs chars_format::hex.
  std::string buf(text);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    fail(file, line, std::string("malformed ") + column + " '" + buf + "'");
  }
  if (!std::isfinite(v)) fail(file, line, std::string(column) + " is not finite");
  return v;
}

std::size_t parse_channel(std::string_view text, std::size_t line) {
  std::size_t v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last) {
    fail("intervals", line, "malformed channel '" + std::string(text) + "'");
  }
  if (v > std::numeric_limits<std::uint32_t>::max()) fail("intervals", line, "channel id too large");
  return v;
}

bool next_data_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) return true;
  }
  return false;
}

std::string describe(const IntervalSequence& seq, std::size_t channel) {
  return "sequence '" + seq.id + "' channel " + std::to_string(channel);
}

}  // namespace

std::size_t IntervalSequence::num_events() const {
  std::size_t n = 0;
  for (const auto& ch : channels) n += ch.size();
  return n;
}

double IntervalSequence::max_end() const {
  double t = 0.0;
  for (const auto& ch : channels) {
    for (const auto& iv : ch) t = std::max(t, iv.end);
  }
  return t;
}

std::vector<std::string> Dataset::classes() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (seen.insert(l).second) out.push_back(l);
  }
  return out;
}

double Dataset::max_end() const {
  double t = 0.0;
  for (const auto& s : sequences) t = std::max(t, s.max_end());
  return t;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.num_channels = num_channels;
  out.sequences.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    out.sequences.push_back(sequences.at(r));
    out.labels.push_back(labels.at(r));
  }
  return out;
}

void validate(const Dataset& ds) {
  if (ds.labels.size() != ds.sequences.size()) {
    throw Error("dataset has " + std::to_string(ds.sequences.size()) + " sequences but " +
                std::to_string(ds.labels.size()) + " labels");
  }
  for (const auto& seq : ds.sequences) {
    if (seq.channels.size() > ds.num_channels) {
      throw Error("sequence '" + seq.id + "' uses channel ids beyond num_channels");
    }
    bool has_instantaneous = false;
    for (std::size_t c = 0; c < seq.channels.size(); ++c) {
      const auto& ivs = seq.channels[c];
      for (std::size_t i = 0; i < ivs.size(); ++i) {
        const Interval& iv = ivs[i];
        if (!std::isfinite(iv.start) || !std::isfinite(iv.end) || !std::isfinite(iv.value)) {
          throw Error(describe(seq, c) + ": non-finite interval field");
        }
        if (iv.start < 0.0) throw Error(describe(seq, c) + ": negative timestamp");
        if (iv.end < iv.start) throw Error(describe(seq, c) + ": end before start");
        has_instantaneous = has_instantaneous || iv.instantaneous();
        if (i > 0) {
          const Interval& prev = ivs[i - 1];
          if (iv.start < prev.start) throw Error(describe(seq, c) + ": intervals not sorted");
          if (prev.end > iv.start) {
            std::ostringstream msg;
            msg << describe(seq, c) << ": overlapping intervals [" << prev.start << ", " << prev.end
                << ") and [" << iv.start << ", " << iv.end << ")";
            throw Error(msg.str());
          }
        }
      }
    }
    if (has_instantaneous) {
      warn("sequence '" + seq.id + "' contains instantaneous events; they do not affect features");
    }
  }
}

Dataset parse_dataset(std::istream& intervals, std::istream& labels) {
  Dataset ds;
  std::unordered_map<std::string, std::size_t> row_of;

  std::string line;
  std::size_t line_no = 0;
  if (!next_data_line(labels, line, line_no)) throw Error("labels: missing header");
  {
    const auto header = split_row(line);
    if (header.size() != 2 || header[0] != "seq_id" || header[1] != "label") {
      fail("labels", line_no, "expected header 'seq_id,label'");
    }
  }
  while (next_data_line(labels, line, line_no)) {
    const auto fields = split_row(line);
    if (fields.size() != 2 || fields[0].empty()) fail("labels", line_no, "expected 'seq_id,label'");
    std::string id(fields[0]);
    if (row_of.contains(id)) fail("labels", line_no, "duplicate label for sequence '" + id + "'");
    row_of.emplace(id, ds.sequences.size());
    ds.sequences.push_back(IntervalSequence{std::move(id), {}});
    ds.labels.emplace_back(fields[1]);
  }
  if (ds.sequences.empty()) throw Error("labels: no samples");

  line_no = 0;
  if (next_data_line(intervals, line, line_no)) {
    const auto header = split_row(line);
    const bool with_value = header.size() == 5 && header[4] == "value";
    if (!(header.size() == 4 || with_value) || header[0] != "seq_id" || header[1] != "channel" ||
        header[2] != "start" || header[3] != "end") {
      fail("intervals", line_no, "expected header 'seq_id,channel,start,end[,value]'");
    }
    const std::size_t width = header.size();
    while (next_data_line(intervals, line, line_no)) {
      const auto f = split_row(line);
      if (f.size() != width) {
        fail("intervals", line_no, "expected " + std::to_string(width) + " fields, got " +
                                       std::to_string(f.size()));
      }
      const auto it = row_of.find(std::string(f[0]));
      if (it == row_of.end()) {
        fail("intervals", line_no, "sequence '" + std::string(f[0]) + "' has no label");
      }
      const std::size_t channel = parse_channel(f[1], line_no);
      Interval iv;
      iv.start = parse_real(f[2], "intervals", line_no, "start");
      iv.end = parse_real(f[3], "intervals", line_no, "end");
      iv.value = with_value ? parse_real(f[4], "intervals", line_no, "value") : 1.0;
      if (iv.start < 0.0) fail("intervals", line_no, "negative timestamp");
      if (iv.end < iv.start) fail("intervals", line_no, "end before start");
      auto& channels = ds.sequences[it->second].channels;
      if (channels.size() <= channel) channels.resize(channel + 1);
      channels[channel].push_back(iv);
      ds.num_channels = std::max(ds.num_channels, channel + 1);
    }
  }

  for (auto& seq : ds.sequences) {
    seq.channels.resize(ds.num_channels);
    for (auto& ch : seq.channels) {
      std::stable_sort(ch.begin(), ch.end(), [](const Interval& a, const Interval& b) {
        return a.start < b.start || (a.start == b.start && a.end < b.end);
      });
    }
  }
  validate(ds);
  return ds;
}

Dataset load_dataset(const std::string& intervals_path, const std::string& labels_path) {
  std::ifstream iv(intervals_path);
  if (!iv) throw Error("cannot open " + intervals_path);
  std::ifstream lb(labels_path);
  if (!lb) throw Error("cannot open " + labels_path);
  return parse_dataset(iv, lb);
}

void write_dataset(const Dataset& ds, std::ostream& intervals, std::ostream& labels) {
  const auto old_precision = intervals.precision(std::numeric_limits<double>::max_digits10);
  intervals << "seq_id,channel,start,end,value\n";
  for (const auto& seq : ds.sequences) {
    for (std::size_t c = 0; c < seq.channels.size(); ++c) {
      for (const auto& iv : seq.channels[c]) {
        intervals << seq.id << ',' << c << ',' << iv.start << ',' << iv.end << ',' << iv.value << '\n';
      }
    }
  }
  intervals.precision(old_precision);
  labels << "seq_id,label\n";
  for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
    labels << ds.sequences[i].id << ',' << ds.labels[i] << '\n';
  }
}

void save_dataset(const Dataset& ds, const std::string& intervals_path,
                  const std::string& labels_path) {
  std::ofstream iv(intervals_path);
  std::ofstream lb(labels_path);
  if (!iv || !lb) throw Error("cannot write dataset to " + intervals_path + " / " + labels_path);
  write_dataset(ds, iv, lb);
}

Dataset binarize_values(Dataset ds) {
  for (auto& seq : ds.sequences) {
    for (auto& ch : seq.channels) {
      for (auto& iv : ch) iv.value = 1.0;
    }
  }
  return ds;
}

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats st;
  st.classes = ds.classes().size();
  st.samples = ds.size();
  st.channels = ds.num_channels;
  st.max_duration = ds.max_end();
  std::size_t events = 0;
  for (const auto& seq : ds.sequences) events += seq.num_events();
  st.mean_events = ds.size() == 0 ? 0.0 : static_cast<double>(events) / static_cast<double>(ds.size());
  return st;
}

Dataset scale_timestamps(Dataset ds, double factor) {
  if (!(factor > 0.0)) throw Error("timestamp scale factor must be positive");
  for (auto& seq : ds.sequences) {
    for (auto& ch : seq.channels) {
      for (auto& iv : ch) {
        iv.start *= factor;
        iv.end *= factor;
      }
    }
  }
  return ds;
}

bool all_timestamps_integral(const Dataset& ds) {
  constexpr double kExactLimit = 0x1.0p53;
  for (const auto& seq : ds.sequences) {
    for (const auto& ch : seq.channels) {
      for (const auto& iv : ch) {
        if (iv.start != std::floor(iv.start) || iv.end != std::floor(iv.end) || iv.end > kExactLimit) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace costi
