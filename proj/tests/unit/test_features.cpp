#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "avdelay/error.hpp"
#include "avdelay/features.hpp"
#include "oracles/counting.hpp"
#include "oracles/stats.hpp"
#include "support/generators.hpp"

using namespace avdelay;
using namespace avdelay::features;

namespace {

Timestamp at(int h, int m, int s = 0) { return gen::kDay0 + Seconds{h * 3600 + m * 60 + s}; }

FeatureFrame frame_of(std::size_t rows) {
  FeatureFrame f;
  for (std::size_t i = 0; i < rows; ++i) f.timestamps.push_back(gen::kDay0 + Seconds{static_cast<long>(60 * i)});
  return f;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

}  // namespace

TEST(Pearson, HandComputedCases) {
  EXPECT_NEAR(*pearson_corr(std::vector{1.0, 2.0, 3.0}, std::vector{2.0, 4.0, 6.0}), 1.0, 1e-15);
  EXPECT_NEAR(*pearson_corr(std::vector{1.0, 2.0, 3.0}, std::vector{3.0, 2.0, 1.0}), -1.0, 1e-15);
  // cov = 1, sx = sy = sqrt(2) with the n-1 convention cancelling
  EXPECT_NEAR(*pearson_corr(std::vector{1.0, 2.0, 3.0}, std::vector{1.0, 3.0, 2.0}), 0.5, 1e-15);
}

TEST(Pearson, ZeroVarianceAndBadInput) {
  EXPECT_FALSE(pearson_corr(std::vector{1.0, 1.0, 1.0}, std::vector{1.0, 2.0, 3.0}).has_value());
  EXPECT_THROW(pearson_corr(std::vector{1.0, 2.0}, std::vector{1.0}), InvalidInput);
  EXPECT_THROW(pearson_corr(std::vector{1.0, kMissing}, std::vector{1.0, 2.0}), InvalidInput);
}

TEST(PearsonProperty, MatchesTwoPassOracleSkippingMissing) {
  gen::Engine e(31);
  for (int k = 0; k < 200; ++k) {
    const auto n = static_cast<std::size_t>(gen::integer(e, 3, 60));
    std::vector<double> x(n), y(n), cx, cy;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = gen::uniform(e, -5, 5);
      y[i] = 0.3 * x[i] + gen::uniform(e, -5, 5);
      if (gen::integer(e, 0, 9) == 0 && i > 2) x[i] = NAN;
      if (!std::isnan(x[i])) {
        cx.push_back(x[i]);
        cy.push_back(y[i]);
      }
    }
    EXPECT_NEAR(*pearson_corr(x, y), oracle::pearson(cx, cy), 1e-12);
  }
}

TEST(Selection, DropsMostlyMissingColumn) {
  auto f = frame_of(100);
  std::vector<double> sparse(100, kMissing), dense(100);
  for (int i = 0; i < 19; ++i) sparse[i] = i;
  std::iota(dense.begin(), dense.end(), 0.0);
  f.add_numeric("sparse", sparse);
  f.add_numeric("dense", dense);
  const auto r = select_features(f);
  EXPECT_EQ(r.frame.column_names(), std::vector<std::string>{"dense"});
  EXPECT_EQ(r.report[0].reason, "missing");
  EXPECT_NEAR(r.report[0].statistic, 0.81, 1e-12);
}

TEST(Selection, ExactlyEightyPercentMissingIsKept) {
  auto f = frame_of(10);
  std::vector<double> v(10, kMissing);
  v[0] = 1;
  v[1] = 2;
  f.add_numeric("edge", v);
  EXPECT_EQ(select_features(f).frame.width(), 1u);
}

TEST(Selection, IdenticalColumnsDropTheLaterOne) {
  auto f = frame_of(20);
  std::vector<double> v(20);
  gen::Engine e(32);
  for (auto& x : v) x = gen::uniform(e, 0, 1);
  f.add_numeric("a", v);
  f.add_numeric("b", v);
  const auto r = select_features(f);
  EXPECT_EQ(r.frame.column_names(), std::vector<std::string>{"a"});
  EXPECT_EQ(r.report[1].reason, "correlated");
  EXPECT_EQ(r.report[1].partner, "a");
}

TEST(Selection, KeepListProtectsAndValidates) {
  auto f = frame_of(20);
  std::vector<double> v(20);
  std::iota(v.begin(), v.end(), 0.0);
  f.add_numeric("a", v);
  f.add_numeric("b", v);
  // the protected column survives; its unprotected twin goes instead
  const auto r = select_features(f, {0.8, 0.8, {"b"}});
  EXPECT_EQ(r.frame.column_names(), std::vector<std::string>{"b"});
  EXPECT_EQ(r.report[0].reason, "correlated");
  EXPECT_THROW(select_features(f, {0.8, 0.8, {"zzz"}}), InvalidInput);
}

TEST(SelectionProperty, IndependentColumnsUnchangedAndIdempotent) {
  gen::Engine e(33);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = frame_of(200);
    std::vector<std::vector<double>> cols;
    for (int c = 0; c < 8; ++c) {
      std::vector<double> v(200);
      for (auto& x : v) x = gen::uniform(e, -1, 1);
      cols.push_back(v);
      f.add_numeric("c" + std::to_string(c), v);
    }
    bool independent = true;
    for (std::size_t i = 0; i < cols.size(); ++i)
      for (std::size_t j = i + 1; j < cols.size(); ++j) independent &= std::abs(oracle::pearson(cols[i], cols[j])) < 0.8;
    ASSERT_TRUE(independent);
    const auto once = select_features(f);
    EXPECT_EQ(once.frame.column_names(), f.column_names());
    // a correlated copy gets dropped, and a second pass changes nothing
    auto g = f;
    std::vector<double> copy = cols[3];
    for (auto& x : copy) x = 2 * x + 0.01 * gen::uniform(e, -1, 1);
    g.add_numeric("copy", copy);
    const auto first = select_features(g);
    const auto second = select_features(first.frame);
    EXPECT_EQ(first.frame.column_names(), f.column_names());
    EXPECT_EQ(second.frame.column_names(), first.frame.column_names());
  }
}

TEST(GroundCongestion, CountsWithinTheBin) {
  EXPECT_TRUE(ground_congestion({}, "ATL").arrivals.counts.empty());
  std::vector<FlightRecord> flights;
  for (int m : {1, 5, 9}) {
    FlightRecord f;
    f.origin = "AAA";
    f.dest = "ATL";
    f.sched_arr = at(12, m);
    f.actual_arr = at(12, m);
    flights.push_back(f);
  }
  const auto g = ground_congestion(flights, "ATL", TimeRange{at(11, 0), at(13, 0)});
  EXPECT_EQ(g.arrivals.at(at(12, 0)), 3);
  EXPECT_EQ(g.arrivals.at(at(12, 10)), 0);
  EXPECT_EQ(g.departures.at(at(12, 0)), 0);
  EXPECT_EQ(std::accumulate(g.arrivals.counts.begin(), g.arrivals.counts.end(), 0L), 3);
  EXPECT_EQ(g.arrivals.last_completed(at(12, 10)), 3);
  EXPECT_EQ(g.arrivals.last_completed(at(12, 9, 59)), 0);
}

TEST(GroundCongestionProperty, MatchesBruteForceRecount) {
  gen::Engine e(34);
  for (int trial = 0; trial < 5; ++trial) {
    const auto flights = gen::flights(e, "ATL", 500);
    const auto g = ground_congestion(flights, "ATL", TimeRange{gen::kDay0, gen::kDay0 + Seconds{2 * 86400}});
    for (std::size_t b = 0; b < g.arrivals.counts.size(); ++b) {
      const auto bin = g.arrivals.bin_start(b);
      ASSERT_EQ(g.arrivals.counts[b], oracle::ground_count(flights, "ATL", epoch_seconds(bin), false));
      ASSERT_EQ(g.departures.counts[b], oracle::ground_count(flights, "ATL", epoch_seconds(bin), true));
    }
  }
}

TEST(TerminalCongestion, DistinctAircraftAndAltitudeFilter) {
  const geo::GeoPoint atl{33.64, -84.43};
  std::vector<TrajectoryPoint> pts;
  for (int k = 0; k < 20; ++k) pts.push_back({"N1", at(12, 0, 25 * k), {33.7, -84.4}, 5000.0, 200.0, {}, {}});
  auto s = terminal_airspace_congestion(pts, atl);
  EXPECT_EQ(s.at(at(12, 0)), 1);
  std::vector<TrajectoryPoint> high{{"N2", at(12, 0), {33.72, -84.43}, 11000.0, 250.0, {}, {}}};
  EXPECT_EQ(terminal_airspace_congestion(high, atl, TimeRange{at(12, 0), at(12, 10)}).at(at(12, 0)), 0);
}

TEST(TerminalCongestionProperty, MatchesSetRecount) {
  gen::Engine e(35);
  const geo::GeoPoint atl{33.64, -84.43};
  for (int trial = 0; trial < 5; ++trial) {
    const auto pts = gen::swarm(e, atl, 50, 20, 300.0);
    const auto s = terminal_airspace_congestion(pts, atl, TimeRange{at(11, 0), at(14, 0)});
    for (std::size_t b = 0; b < s.counts.size(); ++b)
      ASSERT_EQ(s.counts[b], oracle::terminal_count(pts, atl.lat_deg, atl.lon_deg, epoch_seconds(s.bin_start(b))));
  }
}

TEST(EnrouteCongestion, FloorAndCellCrossing) {
  const geo::SectorGrid grid;
  std::vector<TrajectoryPoint> low{{"N1", at(12, 0), {33, -84}, 17999.0, 400.0, {}, {}}};
  EXPECT_TRUE(enroute_congestion(low, grid).empty());
  std::vector<TrajectoryPoint> cross{{"N1", at(12, 1), {39.9, -84}, 30000.0, 400.0, {}, {}},
                                     {"N1", at(12, 2), {40.1, -84}, 30000.0, 400.0, {}, {}},
                                     {"N1", at(12, 3), {40.2, -84}, 30000.0, 400.0, {}, {}}};
  const auto m = enroute_congestion(cross, grid);
  ASSERT_EQ(m.size(), 2u);
  for (const auto& [id, series] : m) EXPECT_EQ(series.at(at(12, 0)), 1);
}

TEST(EnrouteCongestionProperty, MatchesSetRecountAndCoversDistinctAircraft) {
  gen::Engine e(36);
  const geo::SectorGrid grid{2.0, 2.0, 18000.0};
  for (int trial = 0; trial < 5; ++trial) {
    const auto pts = gen::swarm(e, {35.0, -90.0}, 40, 25, 600.0);
    const auto got = enroute_congestion(pts, grid);
    const auto hits = oracle::enroute_hits(pts, 2.0, 2.0, 18000.0);
    std::map<std::tuple<int, int, std::int64_t>, std::int64_t> want;
    std::map<std::int64_t, std::set<std::string>> distinct;
    for (const auto& [r, c, bin, tail] : hits) {
      ++want[{r, c, bin}];
      distinct[bin].insert(tail);
    }
    std::int64_t total = 0;
    for (const auto& [id, series] : got) {
      for (std::size_t b = 0; b < series.counts.size(); ++b) {
        const auto bin = epoch_seconds(series.bin_start(b));
        auto it = want.find({id.row, id.col, bin});
        ASSERT_EQ(series.counts[b], it == want.end() ? 0 : it->second);
        total += series.counts[b];
      }
    }
    EXPECT_EQ(total, static_cast<std::int64_t>(hits.size()));
    for (const auto& [bin, tails] : distinct) {
      std::int64_t sum = 0;
      for (const auto& [id, series] : got) sum += series.at(from_epoch(bin));
      EXPECT_GE(sum, static_cast<std::int64_t>(tails.size()));
    }
  }
}

TEST(Encoder, OneHotWithUnknownColumn) {
  auto f = frame_of(4);
  f.add_categorical("sky", {"A", "B", "C", "D"});
  CategoricalEncoder enc;
  EXPECT_THROW(enc.transform(f), StateError);
  enc.fit(f, std::vector<std::size_t>{0, 1, 2});
  const auto out = enc.transform(f);
  EXPECT_EQ(out.column_names(), (std::vector<std::string>{"sky=A", "sky=B", "sky=C", "sky=<unknown>"}));
  EXPECT_EQ(out.at("sky=B").numeric, (std::vector<double>{0, 1, 0, 0}));
  EXPECT_EQ(out.at("sky=<unknown>").numeric, (std::vector<double>{0, 0, 0, 1}));
}

TEST(Encoder, FrequencyCountsAboveThreshold) {
  auto f = frame_of(6);
  f.add_categorical("tail", {"A", "A", "B", "C", "A", "B"});
  CategoricalEncoder enc(2);
  enc.fit(f, all_rows(6));
  EXPECT_EQ(enc.transform(f).at("tail#freq").numeric, (std::vector<double>{3, 3, 2, 1, 3, 2}));
}

TEST(EncoderProperty, OneHotRowsSumToOneAndFrequencyPreservesOrder) {
  gen::Engine e(37);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(gen::integer(e, 5, 80));
    const int card = static_cast<int>(gen::integer(e, 1, 12));
    auto f = frame_of(n);
    std::vector<std::string> v(n);
    for (auto& s : v) s = gen::integer(e, 0, 15) == 0 ? "" : "v" + std::to_string(gen::integer(e, 0, card - 1));
    f.add_categorical("c", v);
    auto train = all_rows(n);
    train.resize(n * 3 / 4);
    CategoricalEncoder hot(50), freq(0);
    hot.fit(f, train);
    freq.fit(f, train);
    const auto h = hot.transform(f);
    for (std::size_t r = 0; r < n; ++r) {
      double sum = 0;
      for (const auto& col : h.columns) sum += col.numeric[r];
      ASSERT_EQ(sum, 1.0);
    }
    std::map<std::string, int> counts;
    for (auto r : train)
      if (!v[r].empty()) ++counts[v[r]];
    const auto fz = freq.transform(f).at("c#freq").numeric;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (counts[v[a]] > counts[v[b]]) {
          ASSERT_GT(fz[a], fz[b]);
        }
  }
}

TEST(Imputer, ForwardFillWithinDayThenTrainMean) {
  FeatureFrame f;
  for (int k = 0; k < 4; ++k) f.timestamps.push_back(gen::kDay0 + Seconds{3600 * k});
  f.timestamps.push_back(gen::kDay0 + Seconds{86400});
  f.add_numeric("x", {kMissing, 2.0, kMissing, 6.0, kMissing});
  f.add_numeric("y", {1.0, kMissing, 3.0, kMissing, kMissing}, FeatureGroup::Temporal, Imputation::TrainMean);
  Imputer imp;
  EXPECT_THROW(imp.transform(f), StateError);
  imp.fit(f, std::vector<std::size_t>{0, 1, 2, 3});
  const auto out = imp.transform(f);
  EXPECT_EQ(out.at("x").numeric, (std::vector<double>{4.0, 2.0, 2.0, 6.0, 4.0}));
  EXPECT_EQ(out.at("y").numeric, (std::vector<double>{1.0, 2.0, 3.0, 2.0, 2.0}));
}
