#include "avdelay/frame.hpp"

#include <set>

#include "avdelay/error.hpp"

namespace avdelay::features {

const Column* FeatureFrame::find(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

Column* FeatureFrame::find(std::string_view name) {
  for (auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const Column& FeatureFrame::at(std::string_view name) const {
  const Column* c = find(name);
  if (!c) throw InvalidInput("no such column: " + std::string(name));
  return *c;
}

Column& FeatureFrame::add_numeric(std::string name, std::vector<double> values, FeatureGroup group,
                                  Imputation imputation) {
  if (find(name)) throw InvalidInput("duplicate column: " + name);
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::Numeric;
  c.numeric = std::move(values);
  c.meta.group = group;
  c.meta.imputation = imputation;
  columns.push_back(std::move(c));
  return columns.back();
}

Column& FeatureFrame::add_categorical(std::string name, std::vector<std::string> values, FeatureGroup group) {
  if (find(name)) throw InvalidInput("duplicate column: " + name);
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::Categorical;
  c.categorical = std::move(values);
  c.meta.group = group;
  columns.push_back(std::move(c));
  return columns.back();
}

void FeatureFrame::refresh_meta() {
  for (auto& c : columns) {
    const std::size_t n = c.size();
    std::size_t missing = 0;
    for (std::size_t i = 0; i < n; ++i) missing += c.is_missing(i) ? 1 : 0;
    c.meta.missing_rate = n == 0 ? 0.0 : static_cast<double>(missing) / static_cast<double>(n);
    if (c.kind == ColumnKind::Categorical) {
      std::set<std::string_view> distinct;
      for (const auto& v : c.categorical) {
        if (!v.empty()) distinct.insert(v);
      }
      c.meta.cardinality = static_cast<int>(distinct.size());
    }
  }
}

void FeatureFrame::validate() const {
  for (const auto& c : columns) {
    if (c.size() != rows()) throw InvalidInput("column " + c.name + " has mismatched length");
  }
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (timestamps[i] < timestamps[i - 1]) throw InvalidInput("frame timestamps decrease");
  }
}

std::vector<std::string> FeatureFrame::column_names() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

}  // namespace avdelay::features
