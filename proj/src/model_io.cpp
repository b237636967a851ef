#include "costi/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <ostream>

#include "costi/error.hpp"
#include "costi/model_fit.hpp"

namespace costi {
namespace {

using nlohmann::json;

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double unhex(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw Error("model: malformed real '" + s + "'");
  return v;
}

json hex_array(const std::vector<double>& values) {
  json a = json::array();
  for (double v : values) a.push_back(hex(v));
  return a;
}

std::vector<double> unhex_array(const json& a) {
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& v : a) out.push_back(unhex(v));
  return out;
}

json features_to_json(const FeatureModel& m) {
  json j;
  j["seed"] = m.seed;
  j["t_max"] = hex(m.t_max);
  j["d_min"] = hex(m.d_min);
  j["integer_mode"] = m.integer_mode;
  j["time_base"] = {{"tick", hex(m.time_base.tick)}, {"quantized", m.time_base.quantized}};
  j["num_channels"] = m.num_channels;
  j["taps"] = kKernelLength;
  j["dilations"] = hex_array(m.dilations);
  json combos = json::array();
  for (const Combo& c : m.combos) {
    combos.push_back({{"kernel", c.kernel},
                      {"dilation", c.dilation},
                      {"channels", c.channels},
                      {"padding", c.padding},
                      {"biases", hex_array(c.biases)}});
  }
  j["combos"] = std::move(combos);
  return j;
}

FeatureModel features_from_json(const json& j) {
  if (j.at("taps").get<std::size_t>() != kKernelLength) throw Error("model: unsupported kernel length");
  FeatureModel m;
  m.kernels = enumerate_kernels();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.t_max = unhex(j.at("t_max"));
  m.d_min = unhex(j.at("d_min"));
  m.integer_mode = j.at("integer_mode").get<bool>();
  m.time_base.tick = unhex(j.at("time_base").at("tick"));
  m.time_base.quantized = j.at("time_base").at("quantized").get<bool>();
  m.num_channels = j.at("num_channels").get<std::size_t>();
  m.dilations = unhex_array(j.at("dilations"));
  for (const auto& c : j.at("combos")) {
    Combo combo;
    combo.kernel = c.at("kernel").get<std::uint32_t>();
    combo.dilation = c.at("dilation").get<std::uint32_t>();
    combo.channels = c.at("channels").get<std::vector<std::uint32_t>>();
    combo.padding = c.at("padding").get<bool>();
    combo.biases = unhex_array(c.at("biases"));
    if (combo.kernel >= m.kernels.size() || combo.dilation >= m.dilations.size() ||
        combo.channels.empty()) {
      throw Error("model: combo references an unknown kernel, dilation or channel set");
    }
    for (auto ch : combo.channels) {
      if (ch >= m.num_channels) throw Error("model: combo channel out of range");
    }
    m.combos.push_back(std::move(combo));
  }
  return m;
}

json ridge_to_json(const RidgeModel& r) {
  return {{"alpha", hex(r.alpha)},
          {"classes", r.classes},
          {"mean", hex_array(r.mean)},
          {"scale", hex_array(r.scale)},
          {"weights", hex_array(r.weights)},
          {"intercepts", hex_array(r.intercepts)}};
}

RidgeModel ridge_from_json(const json& j) {
  RidgeModel r;
  r.alpha = unhex(j.at("alpha"));
  r.classes = j.at("classes").get<std::vector<std::string>>();
  r.mean = unhex_array(j.at("mean"));
  r.scale = unhex_array(j.at("scale"));
  r.weights = unhex_array(j.at("weights"));
  r.intercepts = unhex_array(j.at("intercepts"));
  if (r.scale.size() != r.mean.size() || r.intercepts.size() != r.classes.size() ||
      r.weights.size() != r.mean.size() * r.classes.size()) {
    throw Error("model: inconsistent classifier dimensions");
  }
  return r;
}

}  // namespace

void write_model(std::ostream& out, const SavedModel& model) {
  json j;
  j["format"] = "costi-model";
  j["version"] = kModelFormatVersion;
  j["features"] = features_to_json(model.features);
  j["binarize"] = model.binarize;
  if (model.classifier) j["classifier"] = ridge_to_json(*model.classifier);
  out << j.dump(1) << '\n';
}

SavedModel read_model(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(std::string("model: ") + e.what());
  }
  if (j.value("format", "") != "costi-model") throw Error("model: not a costi model file");
  if (j.value("version", 0) != kModelFormatVersion) {
    throw Error("model: unsupported format version " + std::to_string(j.value("version", 0)));
  }
  try {
    SavedModel m;
    m.features = features_from_json(j.at("features"));
    m.binarize = j.value("binarize", false);
    if (j.contains("classifier")) {
      m.classifier = ridge_from_json(j.at("classifier"));
      if (m.classifier->num_features() != m.features.num_features()) {
        throw Error("model: classifier width does not match feature count");
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(std::string("model: ") + e.what());
  }
}

void save_model(const std::string& path, const SavedModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_model(out, model);
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_model(in);
}

void write_feature_matrix(std::ostream& out, const FeatureMatrix& x) {
  const std::size_t m = x.empty() ? 0 : x.front().size();
  for (std::size_t j = 0; j < m; ++j) out << (j ? "," : "") << j;
  out << '\n';
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& row : x) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  }
  out.precision(old);
}

}  // namespace costi
