#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "avdelay/error.hpp"
#include "avdelay/sequencing.hpp"
#include "support/generators.hpp"

using namespace avdelay;
using namespace avdelay::seq;

namespace {

// One day of L rows, one minute apart, features {row index, day, noise}.
DayFrame make_day(std::size_t L, int day, gen::Engine* e = nullptr, double p_missing = 0.0) {
  DayFrame d;
  for (std::size_t i = 0; i < L; ++i) {
    LabeledRow r;
    r.ts = gen::kDay0 + Seconds{day * 86400 + 3600 + static_cast<long>(i) * 60};
    r.features = {static_cast<double>(i), static_cast<double>(day), e ? gen::uniform(*e, -3, 9) : 0.5};
    r.target_available = !(e && gen::uniform(*e, 0, 1) < p_missing);
    r.target_delay_min = static_cast<double>(i) + 1000.0 * day;
    d.push_back(r);
  }
  return d;
}

std::size_t oracle_windows(const DayFrame& day, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t last = 0; last < day.size(); ++last) count += last + 1 >= n && day[last].target_available;
  return count;
}

}  // namespace

TEST(SliceDay, CountsFollowDayLength) {
  EXPECT_EQ(slice_day(make_day(150, 0), 120).size(), 31u);
  const auto one = slice_day(make_day(120, 0), 120);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].target, 119.0);
  EXPECT_TRUE(slice_day(make_day(119, 0), 120).empty());
  EXPECT_THROW(slice_day(make_day(5, 0), 0), InvalidInput);
}

TEST(SliceDay, DropsWindowsWhoseLastRowHasNoTarget) {
  auto day = make_day(10, 0);
  day[6].target_available = false;
  const auto w = slice_day(day, 3);
  EXPECT_EQ(w.size(), 7u);
  for (const auto& x : w) EXPECT_NE(x.first + 2, 6u);
}

TEST(BuildDataset, EightTwoChronologicalSplit) {
  const std::vector<DayFrame> days{make_day(12, 0)};
  const auto split = build_dataset(days, 3, 0.8);
  ASSERT_EQ(split.train.size(), 8u);
  ASSERT_EQ(split.test.size(), 2u);
  const auto max_train = *std::max_element(split.train.last_ts.begin(), split.train.last_ts.end());
  for (auto t : split.test.last_ts) EXPECT_GT(t, max_train);
}

TEST(BuildDataset, StandardizedTrainColumns) {
  gen::Engine e(51);
  std::vector<DayFrame> days{make_day(40, 0, &e), make_day(35, 1, &e)};
  const auto split = build_dataset(days, 5);
  const auto& tr = split.train;
  const std::size_t rows = tr.size() * tr.n;
  for (std::size_t c = 0; c < tr.m; ++c) {
    double mean = 0, var = 0;
    for (std::size_t r = 0; r < rows; ++r) mean += tr.x[r * tr.m + c];
    mean /= rows;
    for (std::size_t r = 0; r < rows; ++r) var += (tr.x[r * tr.m + c] - mean) * (tr.x[r * tr.m + c] - mean);
    EXPECT_LT(std::abs(mean), 1e-9) << c;
    EXPECT_NEAR(std::sqrt(var / rows), 1.0, 1e-9) << c;
  }
}

TEST(BuildDataset, ConstantColumnKeepsUnitScale) {
  std::vector<DayFrame> days{make_day(20, 0)};
  const auto split = build_dataset(days, 4);
  EXPECT_EQ(split.train.standardization.scale[2], 1.0);
  for (std::size_t i = 2; i < split.train.x.size(); i += split.train.m) EXPECT_EQ(split.train.x[i], 0.0);
}

TEST(BuildDatasetProperty, WindowTotalsMatchPerDayOracle) {
  gen::Engine e(52);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DayFrame> days;
    std::size_t want = 0, want_train = 0;
    const auto n = static_cast<std::size_t>(gen::integer(e, 1, 30));
    for (int d = 0; d < 8; ++d) {
      days.push_back(make_day(static_cast<std::size_t>(gen::integer(e, 0, 60)), d, &e, 0.2));
      const auto w = oracle_windows(days.back(), n);
      want += w;
      want_train += static_cast<std::size_t>(std::ceil(0.8 * w - 1e-9));
    }
    if (want_train == 0) {
      EXPECT_THROW(build_dataset(days, n), InvalidInput);
      continue;
    }
    const auto split = build_dataset(days, n);
    EXPECT_EQ(split.train.size() + split.test.size(), want);
    EXPECT_EQ(split.train.size(), want_train);

    // every window stays inside one day, ends on its target row, and is labelled
    for (const auto* ds : {&split.train, &split.test}) {
      for (std::size_t s = 0; s < ds->size(); ++s) {
        const auto seqv = ds->sequence(s);
        const auto& st = ds->standardization;
        auto raw = [&](std::size_t row, std::size_t c) { return seqv[row * ds->m + c] * st.scale[c] + st.mean[c]; };
        const double day = std::round(raw(0, 1));
        EXPECT_NEAR(raw(n - 1, 1), day, 1e-9);
        const double last_row = std::round(raw(n - 1, 0));
        EXPECT_NEAR(ds->y[s], last_row + 1000.0 * day, 1e-9);
        for (std::size_t r = 1; r < n; ++r) EXPECT_NEAR(raw(r, 0) - raw(r - 1, 0), 1.0, 1e-9);
      }
    }

    // chronological split inside each day
    std::map<std::int64_t, std::int64_t> max_train;
    for (auto t : split.train.last_ts) max_train[t / 86400] = std::max(max_train[t / 86400], t);
    for (auto t : split.test.last_ts) {
      if (max_train.count(t / 86400)) {
        EXPECT_GT(t, max_train[t / 86400]);
      }
    }
  }
}

TEST(BuildDataset, EmptyDaysAreSkippedWithWarning) {
  std::vector<DayFrame> days{make_day(3, 0), make_day(30, 1)};
  const auto split = build_dataset(days, 10);
  EXPECT_EQ(split.warnings.size(), 1u);
  EXPECT_EQ(split.train.size() + split.test.size(), 21u);
  EXPECT_THROW(build_dataset(std::vector<DayFrame>{}, 3), InvalidInput);
  EXPECT_THROW(build_dataset(days, 3, 1.0), InvalidInput);
}

TEST(SplitDays, GroupsByUtcDayAndSelectsColumns) {
  std::vector<LabeledRow> rows;
  for (const auto& d : {make_day(3, 0), make_day(2, 1)}) rows.insert(rows.end(), d.begin(), d.end());
  const std::vector<std::size_t> cols{2, 0};
  const auto days = split_days(rows, cols);
  ASSERT_EQ(days.size(), 2u);
  EXPECT_EQ(days[0].size(), 3u);
  EXPECT_EQ(days[1][1].features, (std::vector<double>{0.5, 1.0}));
}

TEST(Shuffle, PermutesWholeSequences) {
  gen::Engine e(53);
  std::vector<DayFrame> days{make_day(40, 0, &e)};
  const auto ds = build_dataset(days, 4).train;
  const auto a = shuffle_sequences(ds, 9), b = shuffle_sequences(ds, 9);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.y, ds.y);
  std::multiset<std::vector<double>> before, after;
  for (std::size_t s = 0; s < ds.size(); ++s) {
    auto seqv = ds.sequence(s);
    std::vector<double> v(seqv.begin(), seqv.end());
    v.push_back(ds.y[s]);
    before.insert(v);
    auto seqa = a.sequence(s);
    std::vector<double> w(seqa.begin(), seqa.end());
    w.push_back(a.y[s]);
    after.insert(w);
  }
  EXPECT_EQ(before, after);

  std::vector<DayFrame> single{make_day(4, 0)};
  const auto one = build_dataset(single, 4, 0.5).train;
  EXPECT_EQ(shuffle_sequences(one, 3).x, one.x);
}

TEST(DatasetContainer, RoundTripIsBitExact) {
  gen::Engine e(54);
  std::vector<DayFrame> days{make_day(50, 0, &e), make_day(50, 1, &e)};
  auto ds = build_dataset(days, 6).test;
  ds.x[0] = 0.1 + 0.2;  // not representable in short decimal
  ds.extra = {{"mode", "ST"}};
  std::stringstream buf;
  write_dataset(buf, ds);
  const auto back = read_dataset(buf);
  EXPECT_EQ(back, ds);
  std::stringstream bad("NOTADATASET");
  EXPECT_THROW(read_dataset(bad), SchemaError);
  EXPECT_THROW(read_dataset(std::filesystem::path("/nonexistent/x.avds")), FileNotFound);
}
