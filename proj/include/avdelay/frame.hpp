#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avdelay/time.hpp"

namespace avdelay::features {

enum class ColumnKind { Numeric, Categorical };
enum class Encoding { Raw, OneHot, Frequency };

// Temporal columns describe the airport itself; spatial columns carry the
// succeeding-flight (in-flight), en-route and ATC information. The T feature
// set is the temporal group; ST is both.
enum class FeatureGroup { Temporal, Spatial };

enum class Imputation { ForwardFillThenMean, TrainMean };

struct ColumnMeta {
  double missing_rate = 0.0;
  std::optional<int> cardinality;  // categorical columns only
  Encoding encoding = Encoding::Raw;
  FeatureGroup group = FeatureGroup::Temporal;
  Imputation imputation = Imputation::ForwardFillThenMean;
  std::string source;  // encoder provenance, e.g. "onehot(airline)"
};

// A numeric cell is missing when NaN; a categorical cell when empty.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<double> numeric;
  std::vector<std::string> categorical;
  ColumnMeta meta;

  std::size_t size() const { return kind == ColumnKind::Numeric ? numeric.size() : categorical.size(); }
  bool is_missing(std::size_t i) const {
    return kind == ColumnKind::Numeric ? std::isnan(numeric[i]) : categorical[i].empty();
  }
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct FeatureFrame {
  std::vector<Timestamp> timestamps;
  std::vector<Column> columns;

  std::size_t rows() const { return timestamps.size(); }
  std::size_t width() const { return columns.size(); }

  const Column* find(std::string_view name) const;
  Column* find(std::string_view name);
  const Column& at(std::string_view name) const;  // throws InvalidInput

  Column& add_numeric(std::string name, std::vector<double> values, FeatureGroup group = FeatureGroup::Temporal,
                      Imputation imputation = Imputation::ForwardFillThenMean);
  Column& add_categorical(std::string name, std::vector<std::string> values,
                          FeatureGroup group = FeatureGroup::Temporal);

  // Recomputes missing rates and categorical cardinalities.
  void refresh_meta();

  // Throws InvalidInput if column lengths disagree or timestamps decrease.
  void validate() const;

  std::vector<std::string> column_names() const;
};

}  // namespace avdelay::features
