#include <doctest.h>

#include <random>
#include <sstream>

#include "costi/error.hpp"
#include "costi/interval_data.hpp"
#include "test_support.hpp"

using namespace costi;
using costi::test::dataset_from_csv;

namespace {

struct CaptureWarnings {
  std::vector<std::string> messages;
  WarningSink previous;
  CaptureWarnings() {
    previous = set_warning_sink([this](const std::string& m) { messages.push_back(m); });
  }
  ~CaptureWarnings() { set_warning_sink(previous); }
};

}  // namespace

TEST_CASE("parse reads the two-event example") {
  const Dataset ds = dataset_from_csv(
      "seq_id,channel,start,end,value\ns1,0,10.33,815.40,0.73\ns1,1,803.88,1000.0,1.58\n",
      "seq_id,label\ns1,A\n");
  REQUIRE(ds.size() == 1);
  CHECK(ds.num_channels == 2);
  CHECK(ds.sequences[0] == test::two_channel_example());
  CHECK(ds.labels == std::vector<std::string>{"A"});
}

TEST_CASE("empty interval file gives all-zero sequences") {
  const Dataset ds = dataset_from_csv("seq_id,channel,start,end,value\n", "seq_id,label\ns1,x\ns2,y\n");
  REQUIRE(ds.size() == 2);
  CHECK(ds.sequences[0].num_events() == 0);
  CHECK(ds.sequences[1].num_events() == 0);
  CHECK(ds.sequences[1].id == "s2");
}

TEST_CASE("value column is optional and defaults to 1") {
  const Dataset ds = dataset_from_csv("seq_id,channel,start,end\na,2,1,3\n", "seq_id,label\na,k\n");
  CHECK(ds.num_channels == 3);
  REQUIRE(ds.sequences[0].channels[2].size() == 1);
  CHECK(ds.sequences[0].channels[2][0].value == 1.0);
  CHECK(ds.sequences[0].channels[0].empty());
}

TEST_CASE("sample order follows the label file and rows may come unsorted") {
  const Dataset ds = dataset_from_csv("seq_id,channel,start,end,value\nb,0,5,6,1\na,0,7,9,2\na,0,1,2,3\n",
                                      "seq_id,label\na,1\nb,2\n");
  CHECK(ds.sequences[0].id == "a");
  REQUIRE(ds.sequences[0].channels[0].size() == 2);
  CHECK(ds.sequences[0].channels[0][0].start == 1.0);
  CHECK(ds.sequences[0].channels[0][1].start == 7.0);
}

TEST_CASE("validation errors") {
  const std::string labels = "seq_id,label\ns1,A\n";
  const std::string header = "seq_id,channel,start,end,value\n";
  SUBCASE("overlap") { CHECK_THROWS_AS(dataset_from_csv(header + "s1,0,0,5,1\ns1,0,3,8,1\n", labels), Error); }
  SUBCASE("negative timestamp") { CHECK_THROWS_AS(dataset_from_csv(header + "s1,0,-1,5,1\n", labels), Error); }
  SUBCASE("end before start") { CHECK_THROWS_AS(dataset_from_csv(header + "s1,0,5,4,1\n", labels), Error); }
  SUBCASE("malformed number") { CHECK_THROWS_AS(dataset_from_csv(header + "s1,0,a,4,1\n", labels), Error); }
  SUBCASE("wrong field count") { CHECK_THROWS_AS(dataset_from_csv(header + "s1,0,1,4\n", labels), Error); }
  SUBCASE("bad channel") { CHECK_THROWS_AS(dataset_from_csv(header + "s1,-2,1,4,1\n", labels), Error); }
  SUBCASE("non-finite value") { CHECK_THROWS_AS(dataset_from_csv(header + "s1,0,1,4,nan\n", labels), Error); }
  SUBCASE("sequence without label") { CHECK_THROWS_AS(dataset_from_csv(header + "s2,0,1,4,1\n", labels), Error); }
  SUBCASE("duplicate label") { CHECK_THROWS_AS(dataset_from_csv(header, labels + "s1,B\n"), Error); }
  SUBCASE("bad header") { CHECK_THROWS_AS(dataset_from_csv("id,ch,s,e\n", labels), Error); }
  SUBCASE("no samples") { CHECK_THROWS_AS(dataset_from_csv(header, "seq_id,label\n"), Error); }
}

TEST_CASE("touching intervals are accepted, instantaneous events warn") {
  CaptureWarnings warnings;
  const Dataset ds = dataset_from_csv("seq_id,channel,start,end,value\ns1,0,0,5,1\ns1,0,5,9,1\ns1,1,3,3,2\n",
                                      "seq_id,label\ns1,A\n");
  CHECK(ds.sequences[0].channels[0].size() == 2);
  CHECK(warnings.messages.size() == 1);
}

TEST_CASE("binarize_values") {
  Dataset ds;
  ds.num_channels = 2;
  ds.sequences.push_back(test::two_channel_example());
  ds.labels.push_back("A");
  const Dataset b = binarize_values(ds);
  CHECK(b.sequences[0].channels[0][0].value == 1.0);
  CHECK(b.sequences[0].channels[1][0].value == 1.0);
  CHECK(b.sequences[0].channels[0][0].start == 10.33);

  Dataset empty = dataset_from_csv("seq_id,channel,start,end,value\n", "seq_id,label\ns1,x\n");
  CHECK(binarize_values(empty) == empty);
}

TEST_CASE("dataset_stats") {
  Dataset ds;
  ds.num_channels = 2;
  ds.sequences.push_back(test::two_channel_example());
  ds.labels.push_back("A");
  DatasetStats st = dataset_stats(ds);
  CHECK(st.samples == 1);
  CHECK(st.channels == 2);
  CHECK(st.max_duration == 1000.0);
  CHECK(st.mean_events == 2.0);

  Dataset three;
  three.num_channels = 1;
  for (int events : {2, 4, 6}) {
    IntervalSequence s;
    s.id = std::to_string(events);
    s.channels.resize(1);
    for (int e = 0; e < events; ++e) s.channels[0].push_back({double(2 * e), double(2 * e + 1), 1.0});
    three.sequences.push_back(s);
    three.labels.push_back(events == 4 ? "x" : "y");
  }
  st = dataset_stats(three);
  CHECK(st.mean_events == 4.0);
  CHECK(st.classes == 2);

  const Dataset empty = dataset_from_csv("seq_id,channel,start,end,value\n", "seq_id,label\ns1,x\n");
  CHECK(dataset_stats(empty).mean_events == 0.0);
}

TEST_CASE("stats agree with a naive count on generated data") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset ds = test::random_dataset(seed, 7, 3, 15, 100.0, seed % 2 == 0);
    std::size_t events = 0;
    double max_end = 0.0;
    for (const auto& s : ds.sequences) {
      for (const auto& ch : s.channels) {
        for (const auto& iv : ch) {
          ++events;
          if (iv.end > max_end) max_end = iv.end;
        }
      }
    }
    const DatasetStats st = dataset_stats(ds);
    CHECK(st.mean_events == doctest::Approx(double(events) / 7.0));
    CHECK(st.max_duration == max_end);
  }
}

TEST_CASE("parse -> write -> parse round-trips") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Dataset ds = test::random_dataset(seed, 5, 4, 12, 1000.0 / 3.0, seed % 3 == 0);
    std::ostringstream iv, lb;
    write_dataset(ds, iv, lb);
    const Dataset again = dataset_from_csv(iv.str(), lb.str());
    std::ostringstream iv2, lb2;
    write_dataset(again, iv2, lb2);
    const Dataset third = dataset_from_csv(iv2.str(), lb2.str());
    CHECK(again == third);
    // Trailing empty channels are not recorded in the file.
    for (std::size_t i = 0; i < ds.size(); ++i) {
      for (std::size_t c = 0; c < again.num_channels; ++c) {
        CHECK(again.sequences[i].channels[c] == ds.sequences[i].channels[c]);
      }
    }
  }
}

TEST_CASE("scale_timestamps and integrality") {
  Dataset ds;
  ds.num_channels = 1;
  IntervalSequence s;
  s.id = "a";
  s.channels = {{{1.0, 4.0, 1.0}}};
  ds.sequences.push_back(s);
  ds.labels.push_back("x");
  CHECK(all_timestamps_integral(ds));
  const Dataset scaled = scale_timestamps(ds, 0.5);
  CHECK(scaled.sequences[0].channels[0][0].start == 0.5);
  CHECK_FALSE(all_timestamps_integral(scaled));
  CHECK_THROWS_AS(scale_timestamps(ds, 0.0), Error);
}
