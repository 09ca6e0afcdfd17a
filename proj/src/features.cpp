#include "avdelay/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <unordered_map>

#include "avdelay/error.hpp"

namespace avdelay::features {
namespace {

struct Bins {
  Timestamp start{};
  std::size_t count = 0;

  std::optional<std::size_t> index(Timestamp ts) const {
    if (ts < start) return std::nullopt;
    const auto i = static_cast<std::size_t>((epoch_seconds(ts) - epoch_seconds(start)) / kBinSeconds);
    if (i >= count) return std::nullopt;
    return i;
  }
};

Bins make_bins(std::optional<TimeRange> range, const std::vector<Timestamp>& events) {
  Bins b;
  if (range) {
    if (range->end < range->begin) throw InvalidInput("time range end precedes begin");
    b.start = bin_floor(range->begin);
    const auto span = epoch_seconds(range->end) - epoch_seconds(b.start);
    b.count = static_cast<std::size_t>((span + kBinSeconds - 1) / kBinSeconds);
    return b;
  }
  if (events.empty()) return b;
  const auto [lo, hi] = std::minmax_element(events.begin(), events.end());
  b.start = bin_floor(*lo);
  b.count = static_cast<std::size_t>((epoch_seconds(bin_floor(*hi)) - epoch_seconds(b.start)) / kBinSeconds + 1);
  return b;
}

bool is_kept(const std::vector<std::string>& keep, const std::string& name) {
  return std::find(keep.begin(), keep.end(), name) != keep.end();
}

// Interns tail ids so distinct-count sets hold integers.
class TailIndex {
 public:
  int operator()(const std::string& tail) {
    auto [it, inserted] = ids_.try_emplace(tail, static_cast<int>(ids_.size()));
    return it->second;
  }

 private:
  std::unordered_map<std::string, int> ids_;
};

}  // namespace

std::optional<double> pearson_corr(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("pearson_corr: length mismatch");
  double n = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) continue;
    n += 1.0;
    mx += x[i];
    my += y[i];
  }
  if (n < 2.0) throw InvalidInput("pearson_corr: fewer than two complete observations");
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) continue;
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

SelectionResult select_features(const FeatureFrame& input, const SelectionConfig& cfg) {
  if (!(cfg.missing_thresh > 0.0 && cfg.missing_thresh <= 1.0) || !(cfg.corr_thresh > 0.0 && cfg.corr_thresh <= 1.0)) {
    throw InvalidInput("selection thresholds must lie in (0, 1]");
  }
  for (const auto& name : cfg.keep_list) {
    if (!input.find(name)) throw InvalidInput("keep_list names unknown column: " + name);
  }
  FeatureFrame frame = input;
  frame.refresh_meta();
  const std::size_t w = frame.width();
  std::vector<SelectionEntry> entries(w);
  std::vector<bool> dropped(w, false);
  for (std::size_t i = 0; i < w; ++i) {
    const auto& c = frame.columns[i];
    entries[i] = {c.name, "kept", "", c.meta.missing_rate, ""};
    if (c.meta.missing_rate > cfg.missing_thresh && !is_kept(cfg.keep_list, c.name)) {
      dropped[i] = true;
      entries[i].action = "dropped";
      entries[i].reason = "missing";
    }
  }

  auto corr = [&](std::size_t a, std::size_t b) {
    const auto& ca = frame.columns[a].numeric;
    const auto& cb = frame.columns[b].numeric;
    std::size_t complete = 0;
    for (std::size_t r = 0; r < ca.size() && complete < 2; ++r) {
      complete += (!std::isnan(ca[r]) && !std::isnan(cb[r])) ? 1 : 0;
    }
    if (complete < 2) return 0.0;
    return std::abs(pearson_corr(ca, cb).value_or(0.0));
  };

  for (std::size_t i = 0; i < w; ++i) {
    if (dropped[i] || frame.columns[i].kind != ColumnKind::Numeric) continue;
    const bool keep_i = is_kept(cfg.keep_list, frame.columns[i].name);
    for (std::size_t j = i + 1; j < w; ++j) {
      if (dropped[j] || frame.columns[j].kind != ColumnKind::Numeric) continue;
      const double r = corr(i, j);
      if (!(r > cfg.corr_thresh)) continue;
      const bool keep_j = is_kept(cfg.keep_list, frame.columns[j].name);
      if (keep_j && keep_i) continue;
      const std::size_t victim = keep_j ? i : j;
      const std::size_t partner = keep_j ? j : i;
      dropped[victim] = true;
      entries[victim].action = "dropped";
      entries[victim].reason = "correlated";
      entries[victim].statistic = r;
      entries[victim].partner = frame.columns[partner].name;
      if (victim == i) break;
    }
  }

  SelectionResult out;
  out.frame.timestamps = frame.timestamps;
  for (std::size_t i = 0; i < w; ++i) {
    if (!dropped[i]) out.frame.columns.push_back(frame.columns[i]);
  }
  out.report = std::move(entries);
  return out;
}

nlohmann::json to_json(const std::vector<SelectionEntry>& report) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : report) {
    nlohmann::json j{{"column", e.column}, {"action", e.action}, {"reason", e.reason}, {"statistic", e.statistic}};
    if (!e.partner.empty()) j["partner"] = e.partner;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::int64_t CongestionSeries::at(Timestamp bin) const {
  if (bin < start) return 0;
  const auto i = (epoch_seconds(bin) - epoch_seconds(start)) / kBinSeconds;
  if (i < 0 || static_cast<std::size_t>(i) >= counts.size()) return 0;
  return counts[static_cast<std::size_t>(i)];
}

GroundCongestion ground_congestion(std::span<const FlightRecord> flights, const std::string& airport,
                                   std::optional<TimeRange> range) {
  std::vector<Timestamp> deps, arrs;
  for (const auto& f : flights) {
    if (f.origin == airport && f.actual_dep) deps.push_back(*f.actual_dep);
    if (f.dest == airport && f.actual_arr) arrs.push_back(*f.actual_arr);
  }
  std::vector<Timestamp> all = deps;
  all.insert(all.end(), arrs.begin(), arrs.end());
  const Bins bins = make_bins(range, all);
  GroundCongestion out;
  out.departures = {bins.start, std::vector<std::int64_t>(bins.count, 0)};
  out.arrivals = {bins.start, std::vector<std::int64_t>(bins.count, 0)};
  for (auto ts : deps) {
    if (auto i = bins.index(ts)) ++out.departures.counts[*i];
  }
  for (auto ts : arrs) {
    if (auto i = bins.index(ts)) ++out.arrivals.counts[*i];
  }
  return out;
}

CongestionSeries terminal_airspace_congestion(std::span<const TrajectoryPoint> traj, const geo::GeoPoint& airport,
                                              std::optional<TimeRange> range, const geo::TerminalAirspace& zone) {
  TailIndex tails;
  std::vector<Timestamp> times;
  std::vector<std::pair<Timestamp, int>> hits;
  for (const auto& p : traj) {
    if (!geo::in_terminal_airspace(p, airport, zone)) continue;
    hits.emplace_back(bin_floor(p.ts), tails(p.tail_id));
    times.push_back(p.ts);
  }
  const Bins bins = make_bins(range, times);
  CongestionSeries out{bins.start, std::vector<std::int64_t>(bins.count, 0)};
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  for (const auto& [bin, tail] : hits) {
    if (auto i = bins.index(bin)) ++out.counts[*i];
  }
  return out;
}

std::map<geo::SectorId, CongestionSeries> enroute_congestion(std::span<const TrajectoryPoint> traj,
                                                             const geo::SectorGrid& grid,
                                                             std::optional<TimeRange> range) {
  grid.validate();
  TailIndex tails;
  std::vector<Timestamp> times;
  std::vector<std::tuple<geo::SectorId, Timestamp, int>> hits;
  for (const auto& p : traj) {
    if (!p.alt_ft || *p.alt_ft < grid.floor_alt_ft) continue;
    hits.emplace_back(geo::sector_index(p.pos, grid), bin_floor(p.ts), tails(p.tail_id));
    times.push_back(p.ts);
  }
  const Bins bins = make_bins(range, times);
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  std::map<geo::SectorId, CongestionSeries> out;
  for (const auto& [sector, bin, tail] : hits) {
    auto i = bins.index(bin);
    if (!i) continue;
    auto [it, inserted] = out.try_emplace(sector);
    if (inserted) it->second = {bins.start, std::vector<std::int64_t>(bins.count, 0)};
    ++it->second.counts[*i];
  }
  return out;
}

void CategoricalEncoder::fit(const FeatureFrame& frame, std::span<const std::size_t> train_rows) {
  codes_.clear();
  for (const auto& c : frame.columns) {
    if (c.kind != ColumnKind::Categorical) continue;
    ColumnCode code;
    code.column = c.name;
    std::map<std::string, double> counts;
    for (std::size_t r : train_rows) {
      if (r >= c.size()) throw InvalidInput("encoder training row out of range");
      if (!c.categorical[r].empty()) counts[c.categorical[r]] += 1.0;
    }
    if (static_cast<int>(counts.size()) <= thresh_) {
      code.encoding = Encoding::OneHot;
      for (const auto& [cat, n] : counts) code.categories.push_back(cat);
    } else {
      code.encoding = Encoding::Frequency;
      code.counts = std::move(counts);
    }
    codes_.push_back(std::move(code));
  }
  fitted_ = true;
}

FeatureFrame CategoricalEncoder::transform(const FeatureFrame& frame) const {
  if (!fitted_) throw StateError("categorical encoder applied before fit");
  FeatureFrame out;
  out.timestamps = frame.timestamps;
  const std::size_t n = frame.rows();
  for (const auto& c : frame.columns) {
    if (c.kind == ColumnKind::Numeric) {
      out.columns.push_back(c);
      continue;
    }
    auto it = std::find_if(codes_.begin(), codes_.end(), [&](const ColumnCode& k) { return k.column == c.name; });
    if (it == codes_.end()) throw StateError("encoder was not fitted on column " + c.name);
    if (it->encoding == Encoding::OneHot) {
      std::vector<std::vector<double>> hot(it->categories.size() + 1, std::vector<double>(n, 0.0));
      for (std::size_t r = 0; r < n; ++r) {
        const auto& v = c.categorical[r];
        auto pos = std::lower_bound(it->categories.begin(), it->categories.end(), v);
        if (!v.empty() && pos != it->categories.end() && *pos == v) {
          hot[static_cast<std::size_t>(pos - it->categories.begin())][r] = 1.0;
        } else {
          hot.back()[r] = 1.0;
        }
      }
      for (std::size_t k = 0; k <= it->categories.size(); ++k) {
        const std::string cat = k < it->categories.size() ? it->categories[k] : kUnknownCategory;
        auto& col = out.add_numeric(c.name + "=" + cat, std::move(hot[k]), c.meta.group);
        col.meta.encoding = Encoding::OneHot;
        col.meta.source = "onehot(" + c.name + ")";
      }
    } else {
      std::vector<double> codes(n, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        auto f = it->counts.find(c.categorical[r]);
        if (f != it->counts.end()) codes[r] = f->second;
      }
      auto& col = out.add_numeric(c.name + "#freq", std::move(codes), c.meta.group);
      col.meta.encoding = Encoding::Frequency;
      col.meta.source = "frequency(" + c.name + ")";
    }
  }
  out.refresh_meta();
  return out;
}

nlohmann::json CategoricalEncoder::provenance() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : codes_) {
    nlohmann::json j{{"column", c.column}};
    if (c.encoding == Encoding::OneHot) {
      j["encoding"] = "onehot";
      j["categories"] = c.categories;
    } else {
      j["encoding"] = "frequency";
      j["counts"] = c.counts;
    }
    arr.push_back(std::move(j));
  }
  return {{"cardinality_threshold", thresh_}, {"columns", arr}};
}

void Imputer::fit(const FeatureFrame& frame, std::span<const std::size_t> train_rows) {
  means_.clear();
  for (const auto& c : frame.columns) {
    if (c.kind != ColumnKind::Numeric) continue;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r : train_rows) {
      if (r >= c.size()) throw InvalidInput("imputer training row out of range");
      if (!std::isnan(c.numeric[r])) {
        sum += c.numeric[r];
        ++n;
      }
    }
    means_[c.name] = n == 0 ? 0.0 : sum / static_cast<double>(n);
  }
  fitted_ = true;
}

FeatureFrame Imputer::transform(const FeatureFrame& frame) const {
  if (!fitted_) throw StateError("imputer applied before fit");
  FeatureFrame out = frame;
  for (auto& c : out.columns) {
    if (c.kind != ColumnKind::Numeric) continue;
    auto m = means_.find(c.name);
    if (m == means_.end()) throw StateError("imputer was not fitted on column " + c.name);
    if (c.meta.imputation == Imputation::ForwardFillThenMean) {
      for (std::size_t r = 1; r < c.numeric.size(); ++r) {
        if (std::isnan(c.numeric[r]) && day_index(out.timestamps[r]) == day_index(out.timestamps[r - 1])) {
          c.numeric[r] = c.numeric[r - 1];
        }
      }
    }
    for (double& v : c.numeric) {
      if (std::isnan(v)) v = m->second;
    }
  }
  out.refresh_meta();
  return out;
}

}  // namespace avdelay::features
