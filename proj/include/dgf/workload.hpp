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

#include <random>
#include <string>
#include <vector>

#include "dgf/query_types.hpp"
#include "dgf/table.hpp"

namespace dgf {

/// Builds predicates that hit a requested selectivity: a random record is
/// the center and per-dimension ranges widen (binary search on a shared
/// scale) until the measured matching fraction is within the tolerance.
/// Measurement runs on a deterministic subsample of the loaded records.
class PredicateSynthesizer {
 public:
  PredicateSynthesizer(const std::vector<std::filesystem::path>& files, const Schema& schema,
                       char delimiter, const std::vector<std::string>& dims);

  size_t record_count() const { return count_; }
  const std::vector<std::string>& dims() const { return dims_; }

  /// Equality on every dimension of a randomly drawn record.
  RangePredicate point(std::mt19937_64& rng) const;

  /// Ranges reaching the target fraction within +-tolerance (absolute).
  /// Returns the measured fraction through `measured` when non-null.
  RangePredicate range(double target, double tolerance, std::mt19937_64& rng,
                       double* measured = nullptr) const;

 private:
  double measure(const std::vector<std::pair<double, double>>& ranges) const;

  Schema schema_;
  std::vector<std::string> dims_;
  std::vector<FieldKind> kinds_;
  std::vector<std::vector<double>> columns_;  // per dim, all records
  std::vector<size_t> sample_;                // row indexes used for measuring
  std::vector<double> lo_, hi_;               // per dim value span
  size_t count_ = 0;
};

struct WorkloadRow {
  std::string engine;
  std::string selectivity;  // "point", "5%", ...
  double measured = 0;      // fraction the predicate actually selects
  std::string predicate;    // rendered JSON
  QueryResult result;
  uint64_t index_entries = 0;  // DGF entries or compact rows
  bool agrees = true;          // result values match the scan reference
};

struct WorkloadReport {
  std::vector<WorkloadRow> rows;
  uint64_t table_records = 0;

  std::string to_json_text() const;
  std::string to_text() const;
};

/// Runs the workload file over the requested engines. The raw input files
/// must hold the same records the table was built from; scan results are the
/// reference and any disagreement raises ConsistencyError after the report
/// is assembled.
///
/// Workload JSON:
///   {"seed": 7, "selectivities": ["point", 0.05, 0.12],
///    "engines": ["dgf", "compact", "scan"],
///    "select": {"aggregates": ["sum(powerConsumed)"]},
///    "dims": [...optional, default = policy dims...],
///    "tolerance": 0.005}
WorkloadReport run_workload(const Table& table, const std::vector<std::filesystem::path>& inputs,
                            const std::string& workload_json, uint64_t split_size, int threads);

}  // namespace dgf
