#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <random>
#include <set>

#include "costi/change_list.hpp"
#include "costi/error.hpp"
#include "costi/featurizer.hpp"
#include "costi/model_fit.hpp"
#include "test_support.hpp"

using namespace costi;

namespace {

Dataset one_channel(const std::vector<std::vector<Interval>>& per_sequence) {
  Dataset ds;
  ds.num_channels = 1;
  for (std::size_t i = 0; i < per_sequence.size(); ++i) {
    IntervalSequence s;
    s.id = "s" + std::to_string(i);
    s.channels = {per_sequence[i]};
    ds.sequences.push_back(s);
    ds.labels.push_back(i % 2 ? "a" : "b");
  }
  return ds;
}

}  // namespace

TEST_CASE("84 distinct zero-sum kernels in lexicographic order") {
  const auto kernels = enumerate_kernels();
  REQUIRE(kernels.size() == 84);
  CHECK(kernels.front().weights == std::array<double, 9>{-2, -2, -2, 1, 1, 1, 1, 1, 1});
  CHECK(kernels.back().weights == std::array<double, 9>{1, 1, 1, 1, 1, 1, -2, -2, -2});
  std::set<std::array<double, 9>> distinct;
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    double sum = 0.0;
    int negatives = 0;
    for (double w : kernels[i].weights) {
      sum += w;
      negatives += w == -2.0;
    }
    CHECK(sum == 0.0);
    CHECK(negatives == 3);
    distinct.insert(kernels[i].weights);
    if (i > 0) CHECK(kernels[i - 1].negative < kernels[i].negative);
  }
  CHECK(distinct.size() == 84);
}

TEST_CASE("dilation grid for d_min = 1, t_max = 80") {
  // Change times 0, 1, 10, 80: smallest gap 1.
  const Dataset ds = one_channel({{{0, 1, 1}, {10, 80, 1}}, {{5, 7, 1}}});
  const DilationFit fit = fit_dilations(ds, 32);
  CHECK(fit.integer_mode);
  CHECK(fit.d_min == 1.0);
  CHECK(fit.t_max == 80.0);
  REQUIRE(fit.grid.size() == 32);
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(fit.grid[i] == doctest::Approx(std::pow(10.0, double(i) / 31.0)).epsilon(1e-12));
    if (i > 0) CHECK(fit.grid[i - 1] <= fit.grid[i]);
  }
  CHECK(fit.grid.front() == 1.0);
  CHECK(fit.grid.back() == 10.0);
  CHECK(fit.grid[16] == doctest::Approx(3.28).epsilon(1e-3));
  // Rounded grid keeps duplicates.
  CHECK(fit.dilations[0] == 1.0);
  CHECK(fit.dilations[1] == 1.0);
  CHECK(fit.dilations[2] == 1.0);
  CHECK(fit.dilations[31] == 10.0);
  for (double d : fit.dilations) CHECK(d == std::floor(d));
}

TEST_CASE("dilation grid scales with the timestamps") {
  const Dataset base = test::random_dataset(17, 6, 2, 10, 100.0, false);
  const DilationFit a = fit_dilations(base, 32);
  for (double lambda : {3.7, 0.37, 5.0}) {
    const DilationFit b = fit_dilations(scale_timestamps(base, lambda), 32);
    CHECK_FALSE(b.integer_mode);
    CHECK(b.t_max == doctest::Approx(lambda * a.t_max).epsilon(1e-14));
    CHECK(b.d_min == doctest::Approx(lambda * a.d_min).epsilon(1e-12));
    REQUIRE(b.grid.size() == a.grid.size());
    for (std::size_t i = 0; i < a.grid.size(); ++i) {
      CHECK(b.time_base.to_time(b.grid[i]) == doctest::Approx(lambda * a.time_base.to_time(a.grid[i])).epsilon(1e-12));
    }
    CHECK(b.dilations == a.dilations);
  }
}

TEST_CASE("dilation fitting edge cases") {
  CHECK_THROWS_AS(fit_dilations(one_channel({{}, {}}), 32), Error);
  // Gap 50 >= t_max / 8: single dilation.
  const DilationFit f = fit_dilations(one_channel({{{0, 50, 1}}, {{0, 50, 1}}}), 32);
  CHECK(f.grid.size() == 1);
  CHECK(f.dilations == std::vector<double>{50.0});
}

TEST_CASE("combo bookkeeping for 10 000 features") {
  const auto combos = assign_combos(10000, 32, 5, 42);
  REQUIRE(combos.size() == 2688);
  std::size_t four = 0, three = 0, total = 0, padded = 0;
  for (std::size_t j = 0; j < combos.size(); ++j) {
    const Combo& c = combos[j];
    four += c.biases.size() == 4;
    three += c.biases.size() == 3;
    total += c.biases.size();
    padded += c.padding;
    CHECK(c.dilation == j / 84);
    CHECK(c.kernel == j % 84);
    REQUIRE_FALSE(c.channels.empty());
    CHECK(c.channels.size() <= 5);
    CHECK(std::is_sorted(c.channels.begin(), c.channels.end()));
    CHECK(std::adjacent_find(c.channels.begin(), c.channels.end()) == c.channels.end());
    CHECK(c.channels.back() < 5);
  }
  CHECK(four == 1936);
  CHECK(three == 752);
  CHECK(total == 10000);
  CHECK(padded == 1344);
}

TEST_CASE("channel subsets") {
  for (const auto& c : assign_combos(3000, 32, 1, 1)) CHECK(c.channels == std::vector<std::uint32_t>{0});
  // Sizes range over 1..9 for many channels, smaller sizes more frequent.
  std::vector<std::size_t> hist(10, 0);
  for (const auto& c : assign_combos(2688, 32, 40, 9)) ++hist.at(c.channels.size());
  CHECK(hist[0] == 0);
  CHECK(hist[1] > hist[9]);
  CHECK(hist[9] > 0);
  CHECK(assign_combos(500, 32, 7, 5) == assign_combos(500, 32, 7, 5));
  CHECK_FALSE(assign_combos(500, 32, 7, 5) == assign_combos(500, 32, 7, 6));
}

TEST_CASE("fewer features than combos spreads them out") {
  const auto combos = assign_combos(500, 32, 3, 0);
  std::size_t total = 0;
  std::set<std::uint32_t> dilations;
  for (const auto& c : combos) {
    CHECK(c.biases.size() <= 1);
    total += c.biases.size();
    if (!c.biases.empty()) dilations.insert(c.dilation);
  }
  CHECK(total == 500);
  CHECK(dilations.size() == 32);
}

TEST_CASE("weighted_quantile") {
  const std::vector<double> v{1, 3};
  const std::vector<double> d{9, 1};
  CHECK(weighted_quantile(v, d, 0.5) == 1.0);
  CHECK(weighted_quantile(v, d, 0.95) == 3.0);
  CHECK(weighted_quantile(v, d, 0.0) == 1.0);
  CHECK(weighted_quantile(v, d, 1.0) == 3.0);
  const std::vector<double> c{2, 2, 2};
  CHECK(weighted_quantile(c, std::vector<double>{0.1, 5, 3}, 0.37) == 2.0);
  CHECK_THROWS_AS(weighted_quantile(std::vector<double>{}, std::vector<double>{}, 0.5), Error);
  CHECK_THROWS_AS(weighted_quantile(v, std::vector<double>{1}, 0.5), Error);
  CHECK_THROWS_AS(weighted_quantile(v, d, 1.5), Error);
}

TEST_CASE("weighted_quantile properties") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 17;
    std::vector<double> values(n), durations(n);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = std::floor(u(gen) * 10.0) - 5.0;
      durations[i] = 0.01 + u(gen) * 3.0;
    }
    const double lo = *std::min_element(values.begin(), values.end());
    const double hi = *std::max_element(values.begin(), values.end());
    CHECK(weighted_quantile(values, durations, 0.0) == lo);
    CHECK(weighted_quantile(values, durations, 1.0) == hi);
    double prev = lo;
    for (double q = 0.0; q <= 1.0; q += 0.01) {
      const double x = weighted_quantile(values, durations, q);
      CHECK(x >= prev);
      prev = x;
    }
    for (double scale : {0.25, 8.0}) {
      std::vector<double> scaled = durations;
      for (double& s : scaled) s *= scale;
      const double q = u(gen);
      CHECK(weighted_quantile(values, scaled, q) == weighted_quantile(values, durations, q));
    }
  }
}

TEST_CASE("toy trace maximum becomes the q = 1 bias") {
  // Two taps with unit weights over the no-padding window [d, t_max].
  const DilatedList l = dilate_and_merge(build_change_list(test::two_channel_example()), 20.0, 2);
  const std::vector<double> w{1.0, 1.0};
  const std::vector<std::uint32_t> both{0, 1};
  const Window window{20.0, 1000.0};
  const Trace t = sweep_trace(l, w, ChannelMask(both), 0.0, window);
  // Oracle: response sampled at the midpoint of every piece.
  double oracle_max = -1e300;
  double start = window.start;
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    const double mid = start + t.durations[i] / 2;
    const double r = test::direct_response(test::two_channel_example(), w, 20.0, both, mid);
    CHECK(t.values[i] == doctest::Approx(r).epsilon(1e-12));
    oracle_max = std::max(oracle_max, r);
    start += t.durations[i];
  }
  CHECK(weighted_quantile(t.values, t.durations, 1.0) == doctest::Approx(oracle_max));
  // Both taps see channel 1 and one still sees channel 0 on [823.88, 835.40).
  CHECK(oracle_max == doctest::Approx(0.73 + 2 * 1.58).epsilon(1e-12));
}

TEST_CASE("biases from an all-zero sequence are zero") {
  const Dataset ds = test::random_dataset(3, 6, 2, 10, 100.0, true);
  FeatureModel model = fit(ds, FitConfig{400, 8, 1});
  Dataset zeros = ds;
  for (auto& s : zeros.sequences) {
    for (auto& ch : s.channels) ch.clear();
  }
  fit_biases(zeros, model);
  for (const auto& c : model.combos) {
    for (double b : c.biases) CHECK(b == 0.0);
  }
}

TEST_CASE("fit composes the pieces") {
  const Dataset ds = test::random_dataset(8, 10, 3, 12, 300.0, true);
  const FeatureModel model = fit(ds, FitConfig{10000, 32, 4});
  CHECK(model.num_features() == 10000);
  CHECK(model.integer_mode);
  CHECK(model.combos.size() == 84 * model.dilations.size());
  CHECK(model.t_max == ds.max_end());
  for (double d : model.dilations) {
    CHECK(d >= 1.0);
    CHECK(d <= std::max(1.0, std::nearbyint(model.t_max / 8.0)));
  }

  Dataset single = ds;
  for (auto& l : single.labels) l = "only";
  CHECK_THROWS_AS(fit(single, FitConfig{}), Error);
  CHECK_FALSE(fit(scale_timestamps(ds, 0.37), FitConfig{100, 32, 4}).integer_mode);
}

TEST_CASE("fit is deterministic and independent of the thread count") {
  const Dataset ds = test::random_dataset(21, 12, 4, 15, 250.0, false);
  omp_set_num_threads(1);
  const FeatureModel a = fit(ds, FitConfig{3000, 32, 99});
  omp_set_num_threads(4);
  const FeatureModel b = fit(ds, FitConfig{3000, 32, 99});
  CHECK(a == b);
  CHECK_FALSE(a == fit(ds, FitConfig{3000, 32, 100}));
}

TEST_CASE("fit is scale-equivariant in float mode") {
  const Dataset ds = test::random_dataset(31, 10, 3, 14, 640.0, false);
  const FeatureModel a = fit(ds, FitConfig{2688, 32, 5});
  for (double lambda : {0.37, 5.0, 1000.0}) {
    const FeatureModel b = fit(scale_timestamps(ds, lambda), FitConfig{2688, 32, 5});
    CHECK(b.t_max == doctest::Approx(lambda * a.t_max).epsilon(1e-14));
    CHECK(b.d_min == doctest::Approx(lambda * a.d_min).epsilon(1e-12));
    CHECK(b.dilations == a.dilations);
    CHECK(b.combos == a.combos);
  }
}
