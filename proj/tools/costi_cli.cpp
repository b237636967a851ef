// costi: fit, apply and evaluate interval-sequence classifiers from the shell.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include "costi/error.hpp"
#include "costi/featurizer.hpp"
#include "costi/harness.hpp"
#include "costi/interval_data.hpp"
#include "costi/model_fit.hpp"
#include "costi/model_io.hpp"
#include "costi/raster_oracle.hpp"
#include "costi/ridge.hpp"

namespace {

using namespace costi;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Loads intervals with labels, or, without a label file, with a placeholder
// label per sequence id in order of first appearance.
Dataset load(const std::string& intervals_path, const std::string& labels_path) {
  if (!labels_path.empty()) return load_dataset(intervals_path, labels_path);
  const std::string text = read_file(intervals_path);
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  std::ostringstream labels;
  labels << "seq_id,label\n";
  std::unordered_set<std::string> seen;
  while (std::getline(lines, line)) {
    const std::string id = line.substr(0, line.find(','));
    if (!id.empty() && id != "\r" && seen.insert(id).second) labels << id << ",?\n";
  }
  if (seen.empty()) throw Error(intervals_path + ": no sequences (pass --labels to declare empty ones)");
  std::istringstream iv(text);
  std::istringstream lb(labels.str());
  return parse_dataset(iv, lb);
}

struct DataOptions {
  std::string intervals;
  std::string labels;
  bool binarize = false;
};

struct FitOptions {
  std::size_t features = 10000;
  std::size_t dilations = 32;
  std::uint64_t seed = 0;
};

void add_fit_options(CLI::App* cmd, FitOptions& f) {
  cmd->add_option("--features", f.features, "Number of features")->capture_default_str();
  cmd->add_option("--dilations", f.dilations, "Number of dilations")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
}

FitConfig to_config(const FitOptions& f) { return FitConfig{f.features, f.dilations, f.seed}; }

int run_fit(const DataOptions& d, const FitOptions& f, const std::string& out_path) {
  Dataset ds = load_dataset(d.intervals, d.labels);
  if (d.binarize) ds = binarize_values(std::move(ds));
  SavedModel saved;
  saved.binarize = d.binarize;
  saved.features = fit(ds, to_config(f));
  const FeatureMatrix x = transform(ds, saved.features);
  saved.classifier = ridge_fit(x, ds.labels);
  save_model(out_path, saved);
  std::cout << "fitted " << saved.features.num_features() << " features on " << ds.size()
            << " sequences (integer mode " << (saved.features.integer_mode ? "on" : "off")
            << ", alpha " << saved.classifier->alpha << ")\n";
  return 0;
}

int run_predict(const std::string& model_path, const DataOptions& d) {
  const SavedModel saved = load_model(model_path);
  if (!saved.classifier) throw Error("model file has no classifier");
  Dataset ds = load(d.intervals, d.labels);
  if (saved.binarize) ds = binarize_values(std::move(ds));
  const auto predicted = ridge_predict(*saved.classifier, transform(ds, saved.features));
  std::cout << "seq_id,predicted\n";
  for (std::size_t i = 0; i < ds.size(); ++i) std::cout << ds.sequences[i].id << ',' << predicted[i] << '\n';
  if (!d.labels.empty()) std::cout << "accuracy " << accuracy(predicted, ds.labels) << '\n';
  return 0;
}

int run_transform(const std::string& model_path, const DataOptions& d, const std::string& out_path) {
  const SavedModel saved = load_model(model_path);
  Dataset ds = load(d.intervals, d.labels);
  if (saved.binarize) ds = binarize_values(std::move(ds));
  const FeatureMatrix x = transform(ds, saved.features);
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write " + out_path);
  write_feature_matrix(out, x);
  return 0;
}

int run_cv(const DataOptions& d, const FitOptions& f, std::size_t folds, std::size_t repeats,
           const std::string& json_path) {
  Dataset ds = load_dataset(d.intervals, d.labels);
  if (d.binarize) ds = binarize_values(std::move(ds));
  CvConfig cfg{to_config(f), folds, repeats};
  const CvReport report = crossvalidate(ds, cfg);
  print_cv_report(std::cout, report);
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) throw Error("cannot write " + json_path);
    write_cv_report_json(out, report);
  }
  return 0;
}

int run_synth(const std::string& spec_text, const std::string& prefix) {
  const SynthSpec spec = parse_synth_spec(spec_text);
  const Dataset ds = synth(spec);
  save_dataset(ds, prefix + "_intervals.csv", prefix + "_labels.csv");
  const DatasetStats st = dataset_stats(ds);
  std::cout << "wrote " << st.samples << " sequences, " << st.classes << " classes, " << st.channels
            << " channels to " << prefix << "_{intervals,labels}.csv\n";
  return 0;
}

int run_rasterize(const DataOptions& d, double step, const std::string& out_dir) {
  const Dataset ds = load(d.intervals, d.labels);
  const std::size_t rows = raster_rows(ds.max_end(), step);
  std::filesystem::create_directories(out_dir);
  for (const auto& seq : ds.sequences) {
    const RasterMatrix m = rasterize(seq, step, rows, ds.num_channels);
    const auto path = std::filesystem::path(out_dir) / (seq.id + ".csv");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "t";
    for (std::size_t c = 0; c < m.channels; ++c) out << ",c" << c;
    out << '\n' << std::setprecision(17);
    for (std::size_t r = 0; r < m.rows; ++r) {
      out << static_cast<double>(r) * step;
      for (std::size_t c = 0; c < m.channels; ++c) out << ',' << m.at(r, c);
      out << '\n';
    }
  }
  std::cout << "wrote " << ds.size() << " matrices of " << rows << " rows to " << out_dir << '\n';
  return 0;
}

int run_oracle(const DataOptions& d, const FitOptions& f, double step) {
  Dataset ds = load_dataset(d.intervals, d.labels);
  if (d.binarize) ds = binarize_values(std::move(ds));
  const FeatureModel model = fit(ds, to_config(f));
  if (!model.integer_mode) {
    std::cout << "note: timestamps are not all integers; expect O(step) discrepancies\n";
  }
  const OracleReport rep = oracle_compare(ds, model, step);
  std::cout << "features compared " << rep.features_compared << "\nmax discrepancy "
            << std::setprecision(17) << rep.max_discrepancy << " (sequence " << rep.worst_row
            << ", feature " << rep.worst_feature << ")\n";
  return 0;
}

int run_bench(const DataOptions& d, const std::string& spec_text, const FitOptions& f,
              std::size_t repetitions, bool serial) {
  Dataset ds = d.intervals.empty() ? synth(parse_synth_spec(spec_text)) : load_dataset(d.intervals, d.labels);
  if (d.binarize) ds = binarize_values(std::move(ds));
  BenchConfig cfg;
  cfg.fit = to_config(f);
  cfg.repetitions = repetitions;
  cfg.include_serial = serial;
  print_bench(std::cout, bench(ds, cfg));
  return 0;
}

int run_stats(const DataOptions& d) {
  const DatasetStats st = dataset_stats(load_dataset(d.intervals, d.labels));
  std::cout << "classes " << st.classes << "\nsamples " << st.samples << "\nchannels " << st.channels
            << "\nmax duration " << st.max_duration << "\nmean events " << st.mean_events << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-kernel classifier for sequences of temporal intervals"};
  app.require_subcommand(1);

  DataOptions data;
  FitOptions fit_opts;
  std::string model_path, out_path, spec_text, json_path;
  std::size_t folds = 10, repeats = 10, bench_reps = 3;
  double step = 1.0;
  bool no_serial = false;

  auto data_opts = [&](CLI::App* cmd, bool labels_required) {
    cmd->add_option("--intervals", data.intervals, "Interval CSV")->required();
    auto* lb = cmd->add_option("--labels", data.labels, "Label CSV");
    if (labels_required) lb->required();
  };

  auto* fit_cmd = app.add_subcommand("fit", "Fit features and classifier, write a model file");
  data_opts(fit_cmd, true);
  add_fit_options(fit_cmd, fit_opts);
  fit_cmd->add_flag("--binarize", data.binarize, "Replace intensities by 1");
  fit_cmd->add_option("--out", out_path, "Model file")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Predict labels with a fitted model");
  predict_cmd->add_option("--model", model_path, "Model file")->required();
  data_opts(predict_cmd, false);

  auto* transform_cmd = app.add_subcommand("transform", "Export the feature matrix as CSV");
  transform_cmd->add_option("--model", model_path, "Model file")->required();
  data_opts(transform_cmd, false);
  transform_cmd->add_option("--out", out_path, "Feature CSV")->required();

  auto* cv_cmd = app.add_subcommand("cv", "Repeated stratified k-fold cross-validation");
  data_opts(cv_cmd, true);
  add_fit_options(cv_cmd, fit_opts);
  cv_cmd->add_flag("--binarize", data.binarize, "Replace intensities by 1");
  cv_cmd->add_option("--folds", folds, "Folds")->capture_default_str();
  cv_cmd->add_option("--repeats", repeats, "Repeats")->capture_default_str();
  cv_cmd->add_option("--json", json_path, "Also write the report as JSON");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
  synth_cmd->add_option("--spec", spec_text,
                        "key=value list: classes, samples, channels, max_duration, events, "
                        "signal (duration|lag|intensity), strength, integer, seed");
  synth_cmd->add_option("--out-prefix", out_path, "Output prefix")->required();

  auto* raster_cmd = app.add_subcommand("rasterize", "Sample sequences into matrices (one CSV each)");
  data_opts(raster_cmd, false);
  raster_cmd->add_option("--step", step, "Sampling step")->required()->check(CLI::PositiveNumber);
  raster_cmd->add_option("--out", out_path, "Output directory")->required();

  auto* oracle_cmd = app.add_subcommand("oracle", "Compare continuous features with the raster path");
  data_opts(oracle_cmd, true);
  add_fit_options(oracle_cmd, fit_opts);
  oracle_cmd->add_flag("--binarize", data.binarize, "Replace intensities by 1");
  oracle_cmd->add_option("--step", step, "Sampling step")->capture_default_str()->check(CLI::PositiveNumber);

  auto* bench_cmd = app.add_subcommand("bench", "Time fit/transform and the scaling variants");
  bench_cmd->add_option("--intervals", data.intervals, "Interval CSV (default: synthetic data)");
  bench_cmd->add_option("--labels", data.labels, "Label CSV");
  bench_cmd->add_option("--spec", spec_text, "Synthetic spec when no files are given");
  add_fit_options(bench_cmd, fit_opts);
  bench_cmd->add_flag("--binarize", data.binarize, "Replace intensities by 1");
  bench_cmd->add_option("--repetitions", bench_reps, "Best-of repetitions")->capture_default_str();
  bench_cmd->add_flag("--no-serial", no_serial, "Skip the serial reference timing");

  auto* stats_cmd = app.add_subcommand("stats", "Summarize a dataset");
  data_opts(stats_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*fit_cmd) return run_fit(data, fit_opts, out_path);
    if (*predict_cmd) return run_predict(model_path, data);
    if (*transform_cmd) return run_transform(model_path, data, out_path);
    if (*cv_cmd) return run_cv(data, fit_opts, folds, repeats, json_path);
    if (*synth_cmd) return run_synth(spec_text, out_path);
    if (*raster_cmd) return run_rasterize(data, step, out_path);
    if (*oracle_cmd) return run_oracle(data, fit_opts, step);
    if (*bench_cmd) {
      if (!data.intervals.empty() && data.labels.empty()) throw Error("bench needs --labels with --intervals");
      return run_bench(data, spec_text, fit_opts, bench_reps, !no_serial);
    }
    if (*stats_cmd) return run_stats(data);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
