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

#include "dgf/workload.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dgf/baseline.hpp"
#include "dgf/date.hpp"
#include "dgf/query.hpp"
#include "dgf/text.hpp"

namespace dgf {

using nlohmann::json;

namespace {
constexpr size_t kMeasureSample = 1 << 16;
}

PredicateSynthesizer::PredicateSynthesizer(const std::vector<std::filesystem::path>& files,
                                           const Schema& schema, char delimiter,
                                           const std::vector<std::string>& dims)
    : schema_(schema), dims_(dims) {
  std::vector<size_t> slots;
  for (const auto& dim : dims_) {
    size_t idx = schema_.require(dim);
    kinds_.push_back(schema_.field(idx).kind);
    if (kinds_.back() == FieldKind::kText) {
      throw DataError("cannot synthesize ranges over text field '" + dim + "'");
    }
    slots.push_back(idx);
  }
  columns_.resize(dims_.size());
  for_each_record(files, [&](std::string_view line) {
    RecordView rec(line, delimiter);
    for (size_t d = 0; d < slots.size(); ++d) {
      columns_[d].push_back(rec.numeric(slots[d], schema_));
    }
    ++count_;
  });
  if (count_ == 0) throw DataError("predicate synthesis needs a non-empty table");
  lo_.resize(dims_.size());
  hi_.resize(dims_.size());
  for (size_t d = 0; d < dims_.size(); ++d) {
    auto [mn, mx] = std::minmax_element(columns_[d].begin(), columns_[d].end());
    lo_[d] = *mn;
    hi_[d] = *mx;
  }
  size_t stride = std::max<size_t>(1, count_ / kMeasureSample);
  for (size_t i = 0; i < count_; i += stride) sample_.push_back(i);
}

double PredicateSynthesizer::measure(const std::vector<std::pair<double, double>>& ranges) const {
  size_t hits = 0;
  for (size_t row : sample_) {
    bool ok = true;
    for (size_t d = 0; d < ranges.size() && ok; ++d) {
      double v = columns_[d][row];
      ok = v >= ranges[d].first && v < ranges[d].second;
    }
    hits += ok;
  }
  return static_cast<double>(hits) / static_cast<double>(sample_.size());
}

namespace {

double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

RangePredicate PredicateSynthesizer::point(std::mt19937_64& rng) const {
  size_t row = static_cast<size_t>(unit_draw(rng) * static_cast<double>(count_));
  row = std::min(row, count_ - 1);
  RangePredicate pred;
  for (size_t d = 0; d < dims_.size(); ++d) {
    double v = columns_[d][row];
    FieldCondition cond;
    cond.lo = v;
    // natural granularity: a day for dates, 1 for integral values, one ulp
    cond.hi = (kinds_[d] == FieldKind::kDate || v == std::floor(v))
                  ? v + 1
                  : std::nextafter(v, std::numeric_limits<double>::infinity());
    pred.fields.emplace_back(dims_[d], cond);
  }
  return pred;
}

RangePredicate PredicateSynthesizer::range(double target, double tolerance, std::mt19937_64& rng,
                                           double* measured) const {
  size_t row = static_cast<size_t>(unit_draw(rng) * static_cast<double>(count_));
  row = std::min(row, count_ - 1);
  std::vector<double> center(dims_.size());
  for (size_t d = 0; d < dims_.size(); ++d) center[d] = columns_[d][row];

  auto ranges_at = [&](double scale) {
    std::vector<std::pair<double, double>> ranges(dims_.size());
    for (size_t d = 0; d < dims_.size(); ++d) {
      double span = hi_[d] - lo_[d];
      double width = std::max(scale * span, 1e-9);
      double a = std::max(center[d] - width / 2, lo_[d]);
      double b = a + width;
      // keep bounds inside the stored span: queries must not reach past the
      // data (appends beyond the current time bound stay invisible to them)
      if (kinds_[d] == FieldKind::kDate) {
        a = std::floor(a);
        b = std::min(std::ceil(b), hi_[d] + 1);
        if (b <= a) b = a + 1;
      } else {
        b = std::min(b, std::nextafter(hi_[d], std::numeric_limits<double>::infinity()));
        if (b <= a) b = std::nextafter(a, std::numeric_limits<double>::infinity());
      }
      ranges[d] = {a, b};
    }
    return ranges;
  };

  double lo_scale = 0, hi_scale = 2.0, best_scale = 1.0;
  double best_err = std::numeric_limits<double>::infinity();
  double best_measured = 0;
  for (int iter = 0; iter < 40; ++iter) {
    double scale = (lo_scale + hi_scale) / 2;
    double got = measure(ranges_at(scale));
    double err = std::abs(got - target);
    if (err < best_err) {
      best_err = err;
      best_scale = scale;
      best_measured = got;
    }
    if (err <= tolerance) break;
    if (got < target) lo_scale = scale;
    else hi_scale = scale;
  }
  if (measured) *measured = best_measured;

  auto ranges = ranges_at(best_scale);
  RangePredicate pred;
  for (size_t d = 0; d < dims_.size(); ++d) {
    FieldCondition cond;
    cond.lo = ranges[d].first;
    cond.hi = ranges[d].second;
    pred.fields.emplace_back(dims_[d], cond);
  }
  return pred;
}

namespace {

std::string render_predicate(const RangePredicate& pred, const Schema& schema) {
  json j = json::object();
  for (const auto& [field, cond] : pred.fields) {
    json c = json::object();
    FieldKind kind = schema.field(schema.require(field)).kind;
    auto render = [&](double v) -> json {
      if (kind == FieldKind::kDate) return format_iso_date(static_cast<int64_t>(v));
      return v;
    };
    if (cond.eq_text) {
      c["eq"] = *cond.eq_text;
    } else {
      if (cond.lo) c["lo"] = render(*cond.lo);
      if (cond.hi) c["hi"] = render(*cond.hi);
    }
    j[field] = c;
  }
  return j.dump();
}

bool close(double a, double b) {
  double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) <= 1e-9 * scale;
}

bool results_agree(const QueryResult& a, const QueryResult& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Selection::Kind::kAggregate: {
      if (a.aggregates.size() != b.aggregates.size()) return false;
      for (size_t i = 0; i < a.aggregates.size(); ++i) {
        const auto& [an, av] = a.aggregates[i];
        const auto& [bn, bv] = b.aggregates[i];
        if (an != bn || av.has_value() != bv.has_value()) return false;
        if (av && !close(*av, *bv)) return false;
      }
      return true;
    }
    case Selection::Kind::kGroupBy: {
      if (a.groups.size() != b.groups.size()) return false;
      for (auto ita = a.groups.begin(), itb = b.groups.begin(); ita != a.groups.end(); ++ita, ++itb) {
        if (ita->first != itb->first || ita->second.has_value() != itb->second.has_value()) return false;
        if (ita->second && !close(*ita->second, *itb->second)) return false;
      }
      return true;
    }
    case Selection::Kind::kFilter:
    case Selection::Kind::kJoin: {
      if (a.rows.size() != b.rows.size()) return false;
      std::vector<std::string> ra = a.rows, rb = b.rows;
      std::sort(ra.begin(), ra.end());
      std::sort(rb.begin(), rb.end());
      return ra == rb;
    }
  }
  return false;
}

}  // namespace

WorkloadReport run_workload(const Table& table, const std::vector<std::filesystem::path>& inputs,
                            const std::string& workload_json, uint64_t split_size, int threads) {
  json j = json::parse(workload_json, nullptr, false);
  if (j.is_discarded()) throw DataError("workload is not valid JSON");

  uint64_t seed = j.value("seed", static_cast<uint64_t>(7));
  double tolerance = j.value("tolerance", 0.005);
  std::vector<std::string> engines = j.value("engines", std::vector<std::string>{"dgf", "compact", "scan"});
  Selection sel = Selection::from_json_text(j.contains("select") ? j["select"].dump() : "{}");
  std::vector<std::string> dims;
  if (j.contains("dims")) {
    dims = j["dims"].get<std::vector<std::string>>();
  } else {
    for (const auto& d : table.index().policy().dims()) dims.push_back(d.name);
  }
  std::vector<json> selectivities =
      j.value("selectivities", std::vector<json>{json("point"), json(0.05), json(0.12)});

  const Schema& schema = table.schema();
  char delim = table.meta().delimiter;
  PredicateSynthesizer synth(inputs, schema, delim, dims);
  QueryEngine engine(table, {split_size, threads});

  WorkloadReport report;
  report.table_records = table.meta().record_count;

  std::mt19937_64 rng(seed);
  for (const json& sel_spec : selectivities) {
    std::string label;
    RangePredicate pred;
    double measured = 0;
    if (sel_spec.is_string() && sel_spec.get<std::string>() == "point") {
      label = "point";
      pred = synth.point(rng);
    } else {
      double target = sel_spec.get<double>();
      std::ostringstream os;
      os << target * 100 << "%";
      label = os.str();
      pred = synth.range(target, tolerance, rng, &measured);
    }

    QueryResult scan_result;
    bool have_scan = false;
    std::vector<WorkloadRow> batch;
    for (const auto& eng : engines) {
      WorkloadRow row;
      row.engine = eng;
      row.selectivity = label;
      row.measured = measured;
      row.predicate = render_predicate(pred, schema);
      if (eng == "dgf") {
        row.result = engine.run(pred, sel);
        row.index_entries = table.index().size();
      } else if (eng == "scan") {
        row.result = scan_query(RecordSource{inputs}, schema, delim, pred, sel);
        row.index_entries = 0;
        scan_result = row.result;
        have_scan = true;
      } else if (eng == "compact") {
        auto compact = CompactIndexTable::build(inputs, schema, delim, dims, split_size);
        row.result = compact.query(pred, sel);
        row.index_entries = compact.row_count();
      } else {
        throw DataError("unknown engine '" + eng + "' in workload");
      }
      batch.push_back(std::move(row));
    }
    if (have_scan) {
      for (auto& row : batch) row.agrees = results_agree(row.result, scan_result);
    }
    for (auto& row : batch) report.rows.push_back(std::move(row));
  }

  for (const auto& row : report.rows) {
    if (!row.agrees) {
      throw ConsistencyError("engine '" + row.engine + "' disagrees with the scan result at " +
                             row.selectivity + " selectivity");
    }
  }
  return report;
}

std::string WorkloadReport::to_json_text() const {
  json out;
  out["table_records"] = table_records;
  json jr = json::array();
  for (const auto& row : rows) {
    json r;
    r["engine"] = row.engine;
    r["selectivity"] = row.selectivity;
    r["measured"] = row.measured;
    r["predicate"] = json::parse(row.predicate);
    r["records_read"] = row.result.metrics.records_read;
    r["bytes_read"] = row.result.metrics.bytes_read;
    r["splits_chosen"] = row.result.metrics.splits_chosen;
    r["entries"] = row.index_entries;
    r["agrees"] = row.agrees;
    json res = json::parse(row.result.to_json_text());
    r["result"] = res["result"];
    jr.push_back(std::move(r));
  }
  out["rows"] = jr;
  return out.dump(2) + "\n";
}

std::string WorkloadReport::to_text() const {
  std::ostringstream os;
  os << "engine\tselectivity\trecords_read\tbytes_read\tsplits_chosen\tentries\tagrees\n";
  for (const auto& row : rows) {
    os << row.engine << '\t' << row.selectivity << '\t' << row.result.metrics.records_read << '\t'
       << row.result.metrics.bytes_read << '\t' << row.result.metrics.splits_chosen << '\t'
       << row.index_entries << '\t' << (row.agrees ? "yes" : "no") << '\n';
  }
  return os.str();
}

}  // namespace dgf
