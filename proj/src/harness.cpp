#include "costi/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "costi/error.hpp"
#include "costi/featurizer.hpp"
#include "costi/ridge.hpp"
#include "costi/rng.hpp"

namespace costi {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Intensities are multiples of 1/64 so kernel sums stay exact.
double quantize_value(double v) { return std::max(1.0, std::nearbyint(v * 64.0)) / 64.0; }

double class_position(std::size_t label, std::size_t classes) {
  return (static_cast<double>(label) + 0.5) / static_cast<double>(classes);
}

struct Placed {
  double start;
  double end;
};

// Snaps to integers inside [slot_start, slot_end]; returns false when the slot
// is too short to hold a unit interval.
bool to_integer(Placed& p, double slot_start, double slot_end) {
  const double lo = std::ceil(slot_start);
  const double hi = std::floor(slot_end);
  double s = std::clamp(std::nearbyint(p.start), lo, hi);
  double e = std::clamp(std::nearbyint(p.end), lo, hi);
  if (e <= s) e = s + 1.0;
  if (e > hi) {
    s = hi - 1.0;
    e = hi;
  }
  if (s < lo) return false;
  p = {s, e};
  return true;
}

}  // namespace

SignalType parse_signal_type(const std::string& name) {
  if (name == "duration") return SignalType::kDuration;
  if (name == "lag") return SignalType::kLag;
  if (name == "intensity") return SignalType::kIntensity;
  throw Error("unknown signal type '" + name + "' (expected duration, lag or intensity)");
}

std::string to_string(SignalType signal) {
  switch (signal) {
    case SignalType::kDuration: return "duration";
    case SignalType::kLag: return "lag";
    case SignalType::kIntensity: return "intensity";
  }
  return "?";
}

SynthSpec parse_synth_spec(const std::string& text) {
  SynthSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("synth spec: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "classes") spec.classes = std::stoul(value);
      else if (key == "samples_per_class" || key == "samples") spec.samples_per_class = std::stoul(value);
      else if (key == "channels") spec.channels = std::stoul(value);
      else if (key == "max_duration") spec.max_duration = std::stod(value);
      else if (key == "events") spec.events = std::stoul(value);
      else if (key == "signal") spec.signal = parse_signal_type(value);
      else if (key == "strength") spec.strength = std::stod(value);
      else if (key == "integer" || key == "integer_timestamps") spec.integer_timestamps = value == "1" || value == "true";
      else if (key == "seed") spec.seed = std::stoull(value);
      else throw Error("synth spec: unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw Error("synth spec: bad value for '" + key + "'");
    }
  }
  return spec;
}

Dataset synth(const SynthSpec& spec) {
  if (spec.classes == 0 || spec.samples_per_class == 0 || spec.channels == 0 || spec.events == 0 ||
      !(spec.max_duration > 0.0)) {
    throw Error("synth: sizes must be positive");
  }
  if (spec.signal == SignalType::kLag && spec.channels < 2) throw Error("synth: lag signal needs 2 channels");
  const double s = std::clamp(spec.strength, 0.0, 1.0);

  Dataset ds;
  ds.num_channels = spec.channels;
  const std::size_t n = spec.classes * spec.samples_per_class;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % spec.classes;
    const double pos = class_position(label, spec.classes);
    Rng rng(spec.seed, Stream::kSynth, i);

    std::vector<std::size_t> counts(spec.channels, spec.events / spec.channels);
    for (std::size_t c = 0; c < spec.events % spec.channels; ++c) ++counts[c];
    if (spec.signal == SignalType::kLag) counts[1] = counts[0] = std::max<std::size_t>(counts[0], 1);

    IntervalSequence seq;
    seq.id = "s" + std::to_string(i);
    seq.channels.resize(spec.channels);
    std::vector<Placed> lead;  // channel 0 placements, for the lag signal
    for (std::size_t c = 0; c < spec.channels; ++c) {
      const std::size_t k = counts[c];
      if (k == 0) continue;
      const double slot = spec.max_duration / static_cast<double>(k);
      for (std::size_t j = 0; j < k; ++j) {
        const double slot_start = slot * static_cast<double>(j);
        const double slot_end = slot * static_cast<double>(j + 1);
        Placed p{};
        double value = rng.uniform(0.5, 1.5);
        if (spec.signal == SignalType::kLag && c <= 1) {
          if (c == 0) {
            p.start = slot_start + rng.uniform(0.0, 0.3) * slot;
          } else {
            const double lag = (1.0 - s) * rng.uniform(0.05, 0.35) + s * (0.05 + 0.3 * pos);
            p.start = lead[j].start + lag * slot;
          }
          p.end = p.start + rng.uniform(0.1, 0.3) * slot;
        } else {
          double frac = rng.uniform(0.1, 0.6);
          if (spec.signal == SignalType::kDuration && c == 0) {
            frac = (1.0 - s) * frac + s * (0.1 + 0.5 * pos + rng.uniform(-0.02, 0.02));
          }
          const double dur = frac * slot;
          p.start = slot_start + rng.uniform(0.0, 0.98) * (slot - dur);
          p.end = p.start + dur;
          if (spec.signal == SignalType::kIntensity && c == 0) {
            value = (1.0 - s) * value + s * (0.5 + pos);
          }
        }
        // Strength also removes the class-free intensity jitter of the
        // channels carrying a timing signal.
        if ((spec.signal == SignalType::kDuration && c == 0) || (spec.signal == SignalType::kLag && c <= 1)) {
          value = (1.0 - s) * value + s;
        }
        p.end = std::min(p.end, slot_end);
        if (c == 0) lead.push_back(p);
        if (spec.integer_timestamps && !to_integer(p, slot_start, slot_end)) continue;
        seq.channels[c].push_back({p.start, p.end, quantize_value(value)});
      }
    }
    ds.sequences.push_back(std::move(seq));
    ds.labels.push_back("c" + std::to_string(label));
  }
  validate(ds);
  return ds;
}

double accuracy(const std::vector<std::string>& predicted, const std::vector<std::string>& truth) {
  if (predicted.size() != truth.size()) throw Error("accuracy: size mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

Dataset permute_labels(Dataset ds, std::uint64_t seed) {
  Rng rng(seed, Stream::kFold, std::numeric_limits<std::uint64_t>::max());
  rng.shuffle(ds.labels);
  return ds;
}

std::vector<std::size_t> stratified_folds(const std::vector<std::string>& labels,
                                          std::size_t folds, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (folds < 2) throw Error("cross-validation needs at least 2 folds");
  if (n < folds) throw Error("fewer samples (" + std::to_string(n) + ") than folds (" + std::to_string(folds) + ")");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) {
    auto& m = members[labels[i]];
    if (m.empty()) order.push_back(labels[i]);
    m.push_back(i);
  }
  bool stratify = true;
  for (const auto& cls : order) stratify = stratify && members[cls].size() >= folds;

  std::vector<std::size_t> fold_of(n);
  if (!stratify) {
    warn("some class has fewer members than folds; using unstratified shuffled folds");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng(seed, Stream::kFold, order.size()).shuffle(idx);
    for (std::size_t t = 0; t < n; ++t) fold_of[idx[t]] = t % folds;
    return fold_of;
  }
  std::size_t next = 0;
  for (std::size_t c = 0; c < order.size(); ++c) {
    auto idx = members[order[c]];
    Rng(seed, Stream::kFold, c).shuffle(idx);
    for (std::size_t i : idx) fold_of[i] = next++ % folds;
  }
  return fold_of;
}

CvReport crossvalidate(const Dataset& ds, const CvConfig& config) {
  if (config.repeats == 0) throw Error("cross-validation needs at least one repeat");
  CvReport report;
  report.seed = config.fit.seed;
  report.config = config;

  for (std::size_t r = 0; r < config.repeats; ++r) {
    const std::uint64_t repeat_seed = Rng(config.fit.seed, Stream::kRepeat, r).next();
    const auto fold_of = stratified_folds(ds.labels, config.folds, repeat_seed);
    for (std::size_t f = 0; f < config.folds; ++f) {
      FoldResult res;
      res.repeat = r;
      res.fold = f;
      std::vector<std::size_t> train_rows;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        (fold_of[i] == f ? res.test_rows : train_rows).push_back(i);
      }
      const Dataset train = ds.subset(train_rows);
      const Dataset test = ds.subset(res.test_rows);
      res.train_size = train.size();
      res.test_size = test.size();
      res.train_t_max = train.max_end();

      FitConfig fit_cfg = config.fit;
      fit_cfg.seed = repeat_seed;
      auto t0 = Clock::now();
      const FeatureModel model = fit(train, fit_cfg);
      res.fit_seconds = seconds_since(t0);
      res.model_t_max = model.t_max;

      t0 = Clock::now();
      const FeatureMatrix x_train = transform(train, model);
      const FeatureMatrix x_test = transform(test, model);
      res.transform_seconds = seconds_since(t0);

      t0 = Clock::now();
      const RidgeModel ridge = ridge_fit(x_train, train.labels);
      res.accuracy = accuracy(ridge_predict(ridge, x_test), test.labels);
      res.classify_seconds = seconds_since(t0);

      report.fit_seconds += res.fit_seconds;
      report.transform_seconds += res.transform_seconds;
      report.classify_seconds += res.classify_seconds;
      report.folds.push_back(std::move(res));
    }
  }
  double sum = 0.0;
  for (const auto& f : report.folds) sum += f.accuracy;
  report.mean_accuracy = sum / static_cast<double>(report.folds.size());
  return report;
}

void print_cv_report(std::ostream& out, const CvReport& report) {
  const auto flags = out.flags();
  out << std::left << std::setw(8) << "repeat" << std::setw(6) << "fold" << std::right << std::setw(7)
      << "train" << std::setw(6) << "test" << std::setw(10) << "accuracy" << std::setw(10) << "fit[s]"
      << std::setw(12) << "transf[s]" << std::setw(11) << "class[s]" << '\n';
  out << std::fixed;
  for (const auto& f : report.folds) {
    out << std::left << std::setw(8) << f.repeat << std::setw(6) << f.fold << std::right << std::setw(7)
        << f.train_size << std::setw(6) << f.test_size << std::setprecision(4) << std::setw(10)
        << f.accuracy << std::setprecision(3) << std::setw(10) << f.fit_seconds << std::setw(12)
        << f.transform_seconds << std::setw(11) << f.classify_seconds << '\n';
  }
  out << "mean accuracy " << std::setprecision(4) << report.mean_accuracy << " over "
      << report.folds.size() << " folds (seed " << report.seed << ", features "
      << report.config.fit.num_features << ", dilations " << report.config.fit.num_dilations << ")\n";
  out << "total time: fit " << std::setprecision(3) << report.fit_seconds << " s, transform "
      << report.transform_seconds << " s, classify " << report.classify_seconds << " s\n";
  out.flags(flags);
}

void write_cv_report_json(std::ostream& out, const CvReport& report) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["config"] = {{"features", report.config.fit.num_features},
                 {"dilations", report.config.fit.num_dilations},
                 {"folds", report.config.folds},
                 {"repeats", report.config.repeats}};
  j["mean_accuracy"] = report.mean_accuracy;
  j["seconds"] = {{"fit", report.fit_seconds},
                  {"transform", report.transform_seconds},
                  {"classify", report.classify_seconds}};
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : report.folds) {
    folds.push_back({{"repeat", f.repeat},
                     {"fold", f.fold},
                     {"accuracy", f.accuracy},
                     {"train_size", f.train_size},
                     {"test_rows", f.test_rows},
                     {"fit_seconds", f.fit_seconds},
                     {"transform_seconds", f.transform_seconds},
                     {"classify_seconds", f.classify_seconds}});
  }
  j["folds"] = std::move(folds);
  out << j.dump(2) << '\n';
}

double time_best_of(std::size_t repetitions, const std::function<void()>& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(repetitions, 1); ++r) {
    const auto t0 = Clock::now();
    fn();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

Dataset double_events(const Dataset& ds) {
  Dataset out = ds;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double span = ds.sequences[i].max_end();
    auto& channels = out.sequences[i].channels;
    for (std::size_t c = 0; c < channels.size(); ++c) {
      std::vector<Interval> doubled;
      for (const Interval& iv : ds.sequences[i].channels[c]) doubled.push_back({iv.start / 2, iv.end / 2, iv.value});
      for (const Interval& iv : ds.sequences[i].channels[c]) {
        doubled.push_back({(iv.start + span) / 2, (iv.end + span) / 2, iv.value});
      }
      channels[c] = std::move(doubled);
    }
  }
  return out;
}

std::vector<BenchTiming> bench(const Dataset& ds, const BenchConfig& config) {
  auto run = [&](const std::string& name, const Dataset& data, std::size_t features) {
    BenchTiming t;
    t.name = name;
    t.samples = data.size();
    t.mean_events = dataset_stats(data).mean_events;
    FitConfig cfg = config.fit;
    cfg.num_features = features;
    FeatureModel model;
    t.fit_seconds = time_best_of(config.repetitions, [&] { model = fit(data, cfg); });
    t.features = model.num_features();
    t.transform_seconds = time_best_of(config.repetitions, [&] { (void)transform(data, model); });
    if (config.include_serial) {
      t.transform_serial_seconds = time_best_of(1, [&] { (void)transform_serial(data, model); });
    }
    return t;
  };

  std::vector<BenchTiming> rows;
  rows.push_back(run("base", ds, config.fit.num_features));
  if (config.scaling_variants) {
    rows.push_back(run("timestamps x1000", scale_timestamps(ds, 1000.0), config.fit.num_features));
    rows.push_back(run("events x2", double_events(ds), config.fit.num_features));
    rows.push_back(run("features /2", ds, config.fit.num_features / 2));
  }
  return rows;
}

void print_bench(std::ostream& out, const std::vector<BenchTiming>& rows) {
  const auto flags = out.flags();
  out << std::left << std::setw(18) << "dataset" << std::right << std::setw(8) << "samples"
      << std::setw(9) << "events" << std::setw(10) << "features" << std::setw(10) << "fit[s]"
      << std::setw(13) << "transform[s]" << std::setw(11) << "serial[s]" << std::setw(9) << "ratio" << '\n';
  out << std::fixed;
  const double base = rows.empty() ? 0.0 : rows.front().transform_seconds;
  for (const auto& r : rows) {
    out << std::left << std::setw(18) << r.name << std::right << std::setw(8) << r.samples
        << std::setprecision(1) << std::setw(9) << r.mean_events << std::setw(10) << r.features
        << std::setprecision(4) << std::setw(10) << r.fit_seconds << std::setw(13) << r.transform_seconds
        << std::setw(11) << r.transform_serial_seconds << std::setprecision(3) << std::setw(9)
        << (base > 0.0 ? r.transform_seconds / base : 0.0) << '\n';
  }
  out.flags(flags);
}

}  // namespace costi
