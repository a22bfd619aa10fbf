// Licensed to the Apache Software Foundation (ASF) under one
// or more contributor license agreements.  See the NOTICE file
// distributed with this work for additional information
// regarding copyright ownership.  The ASF licenses this file
// to you under the Apache License, Version 2.0 (the
// "License"); you may not use this file except in compliance
// with the License.  You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing,
// software distributed under the License is distributed on an
// "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, either express or implied.  See the License for the
// specific language governing permissions and limitations
// under the License.

#include "dgf/query_types.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "dgf/date.hpp"
#include "dgf/text.hpp"

namespace dgf {

using nlohmann::json;

const FieldCondition* RangePredicate::find(std::string_view name) const {
  for (const auto& [field, cond] : fields) {
    if (field == name) return &cond;
  }
  return nullptr;
}

namespace {

double bound_value(const json& v, FieldKind kind, const std::string& field) {
  if (kind == FieldKind::kDate) {
    if (!v.is_string()) throw DataError("date field '" + field + "' takes ISO date strings");
    return static_cast<double>(parse_iso_date(v.get<std::string>(), "predicate on '" + field + "'"));
  }
  if (!v.is_number()) throw DataError("field '" + field + "' takes numeric bounds");
  return v.get<double>();
}

// [v, v + natural granularity): one day for dates, one for integral
// numerics, one ulp otherwise.
FieldCondition point_condition(const json& v, FieldKind kind, const std::string& field) {
  FieldCondition cond;
  if (kind == FieldKind::kText) {
    if (!v.is_string()) throw DataError("text field '" + field + "' takes string equality");
    cond.eq_text = v.get<std::string>();
    return cond;
  }
  double val = bound_value(v, kind, field);
  cond.lo = val;
  if (kind == FieldKind::kDate || val == std::floor(val)) {
    cond.hi = val + 1;
  } else {
    cond.hi = std::nextafter(val, std::numeric_limits<double>::infinity());
  }
  return cond;
}

}  // namespace

RangePredicate RangePredicate::from_json_text(const std::string& text, const Schema& schema) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("predicate is not valid JSON");
  if (!j.is_object()) throw DataError("predicate must be a JSON object of field conditions");
  RangePredicate pred;
  for (const auto& [field, body] : j.items()) {
    auto idx = schema.find(field);
    if (!idx) throw DataError("predicate references unknown field '" + field + "'");
    FieldKind kind = schema.field(*idx).kind;
    if (!body.is_object()) throw DataError("condition on '" + field + "' must be an object");
    FieldCondition cond;
    if (body.contains("eq")) {
      if (body.size() != 1) throw DataError("condition on '" + field + "' mixes eq with bounds");
      cond = point_condition(body["eq"], kind, field);
    } else {
      if (kind == FieldKind::kText) {
        throw DataError("text field '" + field + "' supports only eq conditions");
      }
      if (body.contains("lo")) cond.lo = bound_value(body["lo"], kind, field);
      if (body.contains("hi")) cond.hi = bound_value(body["hi"], kind, field);
      if (!cond.lo && !cond.hi) throw DataError("condition on '" + field + "' is empty");
      // lo == hi is the canonical empty range and matches nothing
      if (cond.lo && cond.hi && *cond.lo > *cond.hi) {
        throw DataError("condition on '" + field + "' has lo > hi (ranges are half-open [lo, hi))");
      }
    }
    pred.fields.emplace_back(field, std::move(cond));
  }
  return pred;
}

PredicateMatcher::PredicateMatcher(const RangePredicate& pred, const Schema& schema) : schema_(&schema) {
  for (const auto& [field, cond] : pred.fields) {
    Slot slot;
    slot.field = schema.require(field);
    slot.kind = schema.field(slot.field).kind;
    slot.cond = cond;
    if (slot.kind == FieldKind::kText && !cond.eq_text) {
      throw DataError("text field '" + field + "' supports only eq conditions");
    }
    slots_.push_back(std::move(slot));
  }
}

bool PredicateMatcher::matches(const RecordView& rec) const {
  for (const auto& slot : slots_) {
    if (slot.cond.eq_text) {
      if (rec.field(slot.field) != *slot.cond.eq_text) return false;
      continue;
    }
    double v = rec.numeric(slot.field, *schema_);
    if (slot.cond.lo && v < *slot.cond.lo) return false;
    if (slot.cond.hi && v >= *slot.cond.hi) return false;
  }
  return true;
}

Selection Selection::from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("selection is not valid JSON");
  Selection sel;
  if (j.is_null() || (j.is_object() && j.empty()) || j.contains("filter")) {
    sel.kind = Kind::kFilter;
    return sel;
  }
  if (j.contains("aggregates")) {
    sel.kind = Kind::kAggregate;
    for (const auto& a : j["aggregates"]) {
      sel.aggregates.push_back(AggRequest::parse(a.get<std::string>()));
    }
    if (sel.aggregates.empty()) throw DataError("selection lists no aggregates");
    return sel;
  }
  if (j.contains("group_by")) {
    sel.kind = Kind::kGroupBy;
    sel.group_field = j["group_by"].get<std::string>();
    if (!j.contains("aggregate")) throw DataError("group_by selection needs an aggregate");
    sel.group_aggregate = AggRequest::parse(j["aggregate"].get<std::string>());
    return sel;
  }
  if (j.contains("join")) {
    sel.kind = Kind::kJoin;
    const json& join = j["join"];
    sel.join.file = join.at("file").get<std::string>();
    sel.join.on = join.at("on").get<std::string>();
    if (join.contains("schema")) {
      sel.join.schema_file = join["schema"].get<std::string>();
    } else {
      sel.join.schema_file = sel.join.file;
      sel.join.schema_file += ".schema";
    }
    if (join.contains("delimiter")) {
      std::string d = join["delimiter"].get<std::string>();
      if (d.size() != 1) throw DataError("join delimiter must be one character");
      sel.join.delimiter = d[0];
    }
    return sel;
  }
  throw DataError("selection must contain aggregates, group_by, join or filter");
}

namespace {

json value_or_null(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

std::string QueryResult::to_json_text(int indent) const {
  json result;
  switch (kind) {
    case Selection::Kind::kAggregate: {
      json aggs = json::object();
      for (const auto& [name, value] : aggregates) aggs[name] = value_or_null(value);
      result["aggregates"] = aggs;
      break;
    }
    case Selection::Kind::kGroupBy: {
      json g = json::object();
      for (const auto& [key, value] : groups) g[key] = value_or_null(value);
      result["groups"] = g;
      break;
    }
    case Selection::Kind::kFilter:
    case Selection::Kind::kJoin:
      result["rows"] = rows;
      result["row_count"] = rows.size();
      break;
  }
  json out;
  out["result"] = result;
  out["metrics"] = {{"splits_chosen", metrics.splits_chosen}, {"slices_read", metrics.slices_read},
                    {"records_read", metrics.records_read},   {"bytes_read", metrics.bytes_read},
                    {"inner_cells", metrics.inner_cells},     {"boundary_cells", metrics.boundary_cells}};
  return out.dump(indent);
}

std::string QueryResult::to_text() const {
  std::string out;
  switch (kind) {
    case Selection::Kind::kAggregate:
      for (const auto& [name, value] : aggregates) {
        out += name + " = " + (value ? format_double(*value) : "null") + "\n";
      }
      break;
    case Selection::Kind::kGroupBy:
      for (const auto& [key, value] : groups) {
        out += key + "\t" + (value ? format_double(*value) : "null") + "\n";
      }
      break;
    case Selection::Kind::kFilter:
    case Selection::Kind::kJoin:
      for (const auto& row : rows) out += row + "\n";
      break;
  }
  out += "# splits_chosen=" + std::to_string(metrics.splits_chosen) +
         " slices_read=" + std::to_string(metrics.slices_read) +
         " records_read=" + std::to_string(metrics.records_read) +
         " bytes_read=" + std::to_string(metrics.bytes_read) +
         " inner_cells=" + std::to_string(metrics.inner_cells) +
         " boundary_cells=" + std::to_string(metrics.boundary_cells) + "\n";
  return out;
}

}  // namespace dgf
