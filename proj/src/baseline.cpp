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

#include "dgf/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace dgf {

void RecordSource::scan(const std::function<void(std::string_view)>& fn) const {
  if (lines) {
    for (const auto& line : *lines) fn(line);
    return;
  }
  for_each_record(files, fn);
}

namespace {

// Straightforward single-pass accumulation, deliberately independent of the
// header algebra the engine uses.
struct DirectAggregate {
  double sum = 0;
  int64_t count = 0;
  double min = 0;
  double max = 0;
  bool seen = false;

  void add(double v) {
    sum += v;
    count += 1;
    min = seen ? std::min(min, v) : v;
    max = seen ? std::max(max, v) : v;
    seen = true;
  }

  std::optional<double> get(RequestFn fn) const {
    switch (fn) {
      case RequestFn::kSum: return sum;
      case RequestFn::kCount: return static_cast<double>(count);
      case RequestFn::kAvg: return count == 0 ? 0.0 : sum / static_cast<double>(count);
      case RequestFn::kMin:
      case RequestFn::kMax:
        if (!seen) return std::nullopt;
        return fn == RequestFn::kMin ? min : max;
    }
    return std::nullopt;
  }
};

// Resolved argument of one requested aggregate: field index (and optional
// product partner), looked up once instead of per record.
struct ArgSlot {
  size_t field_a = SIZE_MAX;
  size_t field_b = SIZE_MAX;

  ArgSlot() = default;
  ArgSlot(const AggRequest& req, const Schema& schema) {
    if (req.fn == RequestFn::kCount) return;
    field_a = schema.require(req.field_a);
    if (!req.field_b.empty()) field_b = schema.require(req.field_b);
  }

  double eval(const RecordView& rec, const Schema& schema) const {
    if (field_a == SIZE_MAX) return 0;
    double v = rec.numeric(field_a, schema);
    if (field_b != SIZE_MAX) v *= rec.numeric(field_b, schema);
    return v;
  }
};

// Shared by scan_query and compact_query: evaluates the selection over a
// stream of already-chosen records.
struct SelectionFold {
  const Schema& schema;
  char delimiter;
  const Selection& sel;

  std::vector<DirectAggregate> aggs;
  std::vector<ArgSlot> agg_slots;
  std::map<std::string, DirectAggregate> groups;
  ArgSlot group_slot;
  std::vector<std::string> rows;
  size_t group_field = 0;
  size_t join_key = 0;
  std::unordered_multimap<std::string, std::string> join_rows;

  SelectionFold(const Schema& s, char delim, const Selection& selection)
      : schema(s), delimiter(delim), sel(selection) {
    switch (sel.kind) {
      case Selection::Kind::kAggregate:
        aggs.resize(sel.aggregates.size());
        for (const auto& req : sel.aggregates) agg_slots.emplace_back(req, schema);
        break;
      case Selection::Kind::kGroupBy:
        group_field = schema.require(sel.group_field);
        group_slot = ArgSlot(sel.group_aggregate, schema);
        break;
      case Selection::Kind::kJoin: {
        join_key = schema.require(sel.join.on);
        Schema dim_schema = Schema::load(sel.join.schema_file);
        size_t dim_key = dim_schema.require(sel.join.on);
        for_each_record({sel.join.file}, [&](std::string_view line) {
          RecordView rec(line, sel.join.delimiter);
          join_rows.emplace(std::string(rec.field(dim_key)), std::string(line));
        });
        break;
      }
      case Selection::Kind::kFilter:
        break;
    }
  }

  void add(const RecordView& rec, std::string_view line) {
    switch (sel.kind) {
      case Selection::Kind::kAggregate:
        for (size_t i = 0; i < sel.aggregates.size(); ++i) {
          aggs[i].add(agg_slots[i].eval(rec, schema));
        }
        break;
      case Selection::Kind::kGroupBy:
        groups[std::string(rec.field(group_field))].add(group_slot.eval(rec, schema));
        break;
      case Selection::Kind::kFilter:
        rows.emplace_back(line);
        break;
      case Selection::Kind::kJoin: {
        auto [from, to] = join_rows.equal_range(std::string(rec.field(join_key)));
        for (auto it = from; it != to; ++it) {
          std::string joined(line);
          joined += sel.join.delimiter;
          joined += it->second;
          rows.push_back(std::move(joined));
        }
        break;
      }
    }
  }

  void finish(QueryResult& result) {
    result.kind = sel.kind;
    switch (sel.kind) {
      case Selection::Kind::kAggregate:
        for (size_t i = 0; i < sel.aggregates.size(); ++i) {
          result.aggregates.emplace_back(sel.aggregates[i].to_string(), aggs[i].get(sel.aggregates[i].fn));
        }
        break;
      case Selection::Kind::kGroupBy:
        for (const auto& [key, agg] : groups) {
          result.groups.emplace(key, agg.get(sel.group_aggregate.fn));
        }
        break;
      case Selection::Kind::kFilter:
      case Selection::Kind::kJoin:
        result.rows = std::move(rows);
        break;
    }
  }
};

}  // namespace

QueryResult scan_query(const RecordSource& source, const Schema& schema, char delimiter,
                       const RangePredicate& pred, const Selection& sel) {
  PredicateMatcher matcher(pred, schema);
  SelectionFold fold(schema, delimiter, sel);
  QueryResult result;
  source.scan([&](std::string_view line) {
    result.metrics.records_read += 1;
    result.metrics.bytes_read += line.size() + 1;
    RecordView rec(line, delimiter);
    if (!matcher.matches(rec)) return;
    fold.add(rec, line);
  });
  fold.finish(result);
  return result;
}

CompactIndexTable CompactIndexTable::build(const std::vector<std::filesystem::path>& files,
                                           const Schema& schema, char delimiter,
                                           const std::vector<std::string>& dims, uint64_t split_size) {
  if (split_size == 0) throw DataError("compact index: split size must be positive");
  CompactIndexTable t;
  t.files_ = files;
  t.schema_ = schema;
  t.delimiter_ = delimiter;
  t.dims_ = dims;
  t.split_size_ = split_size;
  for (const auto& dim : dims) {
    size_t idx = schema.require(dim);
    if (schema.field(idx).kind == FieldKind::kText) {
      throw DataError("compact index dimension '" + dim + "' must be numeric or date");
    }
    t.dim_fields_.push_back(idx);
  }

  for (uint32_t f = 0; f < files.size(); ++f) {
    uint64_t offset = 0;
    for_each_record({files[f]}, [&](std::string_view line) {
      RecordView rec(line, delimiter);
      Entry e;
      e.combo.reserve(t.dim_fields_.size());
      for (size_t idx : t.dim_fields_) e.combo.push_back(rec.numeric(idx, schema));
      e.file = f;
      e.split_start = (offset / split_size) * split_size;
      t.entries_.push_back(std::move(e));
      offset += line.size() + 1;
    });
  }
  std::sort(t.entries_.begin(), t.entries_.end());
  t.entries_.erase(std::unique(t.entries_.begin(), t.entries_.end()), t.entries_.end());

  // Rows in the emulated index table: distinct (combination, file) pairs.
  for (size_t i = 0; i < t.entries_.size(); ++i) {
    if (i == 0 || t.entries_[i].combo != t.entries_[i - 1].combo ||
        t.entries_[i].file != t.entries_[i - 1].file) {
      ++t.row_count_;
    }
  }
  return t;
}

QueryResult CompactIndexTable::query(const RangePredicate& pred, const Selection& sel) const {
  // Conditions on indexed dims prune rows; everything else is checked
  // during the split scan.
  std::vector<const FieldCondition*> dim_conds(dims_.size(), nullptr);
  for (size_t d = 0; d < dims_.size(); ++d) dim_conds[d] = pred.find(dims_[d]);

  std::set<std::pair<uint32_t, uint64_t>> chosen;
  for (const auto& e : entries_) {
    bool match = true;
    for (size_t d = 0; d < dims_.size() && match; ++d) {
      if (!dim_conds[d]) continue;
      double v = e.combo[d];
      if (dim_conds[d]->lo && v < *dim_conds[d]->lo) match = false;
      if (dim_conds[d]->hi && v >= *dim_conds[d]->hi) match = false;
    }
    if (match) chosen.emplace(e.file, e.split_start);
  }

  PredicateMatcher matcher(pred, schema_);
  SelectionFold fold(schema_, delimiter_, sel);
  QueryResult result;
  result.metrics.splits_chosen = chosen.size();
  for (uint32_t f = 0; f < files_.size(); ++f) {
    uint64_t offset = 0;
    for_each_record({files_[f]}, [&](std::string_view line) {
      uint64_t split_start = (offset / split_size_) * split_size_;
      offset += line.size() + 1;
      if (!chosen.count({f, split_start})) return;
      result.metrics.records_read += 1;
      result.metrics.bytes_read += line.size() + 1;
      RecordView rec(line, delimiter_);
      if (!matcher.matches(rec)) return;
      fold.add(rec, line);
    });
  }
  fold.finish(result);
  return result;
}

}  // namespace dgf
