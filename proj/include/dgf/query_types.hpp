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

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgf/aggregates.hpp"
#include "dgf/schema.hpp"
#include "dgf/segstore.hpp"

namespace dgf {

/// One field's constraint: a half-open numeric/date range [lo, hi) with
/// either side optional, or an exact text match. Point predicates are
/// widened to ranges at parse time using the value's natural granularity
/// (one day for dates, one for integral numerics, one ulp otherwise).
struct FieldCondition {
  std::optional<double> lo;
  std::optional<double> hi;
  std::optional<std::string> eq_text;

  bool operator==(const FieldCondition&) const = default;
};

/// Conjunctive per-field conditions, possibly partial, possibly touching
/// non-indexed fields.
struct RangePredicate {
  std::vector<std::pair<std::string, FieldCondition>> fields;

  const FieldCondition* find(std::string_view name) const;
  bool operator==(const RangePredicate&) const = default;

  /// Parses {"field": {"lo":x,"hi":y} | {"eq":v}, ...}. Date fields take ISO
  /// strings. Rejects lo >= hi and conditions on unknown fields.
  static RangePredicate from_json_text(const std::string& text, const Schema& schema);
};

/// Resolved, fast path for re-checking records against the exact predicate.
class PredicateMatcher {
 public:
  PredicateMatcher(const RangePredicate& pred, const Schema& schema);

  bool matches(const RecordView& rec) const;

 private:
  struct Slot {
    size_t field;
    FieldKind kind;
    FieldCondition cond;
  };
  const Schema* schema_;
  std::vector<Slot> slots_;
};

struct JoinSpec {
  std::filesystem::path file;
  std::filesystem::path schema_file;  // defaults to <file>.schema
  std::string on;
  char delimiter = ',';
};

/// What the query computes over the matching records.
struct Selection {
  enum class Kind { kAggregate, kGroupBy, kFilter, kJoin };
  Kind kind = Kind::kFilter;
  std::vector<AggRequest> aggregates;  // kAggregate
  std::string group_field;             // kGroupBy
  AggRequest group_aggregate;          // kGroupBy
  JoinSpec join;                       // kJoin

  static Selection from_json_text(const std::string& text);
};

struct QueryMetrics {
  uint64_t splits_chosen = 0;
  uint64_t slices_read = 0;
  uint64_t records_read = 0;
  uint64_t bytes_read = 0;
  uint64_t inner_cells = 0;
  uint64_t boundary_cells = 0;
};

/// Result rows plus read accounting, emitted in one JSON shape by the DGF
/// engine, the full scan and the compact emulation so runs can be diffed.
struct QueryResult {
  Selection::Kind kind = Selection::Kind::kFilter;
  std::vector<std::pair<std::string, std::optional<double>>> aggregates;
  std::map<std::string, std::optional<double>> groups;
  std::vector<std::string> rows;  // filter: matching records; join: fact + delim + dim line
  QueryMetrics metrics;
  /// Every byte range the engine surfaced, for read-avoidance audits.
  /// Not part of the serialized result.
  std::vector<std::pair<std::string, Fragment>> fragments_read;

  std::string to_json_text(int indent = -1) const;
  std::string to_text() const;
};

}  // namespace dgf
