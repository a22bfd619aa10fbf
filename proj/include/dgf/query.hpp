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

#include <vector>

#include "dgf/query_types.hpp"
#include "dgf/table.hpp"

namespace dgf {

/// Missing indexed dimensions completed from the stored bounds, plus the
/// conditions that are not on indexed dimensions (re-checked per record).
struct CompletedPredicate {
  std::vector<Range> grid;  // one per policy dimension, policy order
  RangePredicate residual;  // non-indexed conditions
  bool empty = false;       // some dimension has no data and no condition
};

/// The resolved read set of one query.
///
/// Header-assisted plans (pure aggregation over indexed dimensions, all
/// requests derivable from stored specs) answer inner cells from merged
/// headers and list only boundary slices for reading. Region-scan plans
/// list every slice in the read region.
struct QueryPlan {
  CellBox box;
  bool header_assisted = false;
  Header inner_subresult;                   // merged inner headers
  std::vector<SliceLocation> read_slices;   // what execution scans
  std::vector<SliceLocation> inner_slices;  // never read when header-assisted
  RangePredicate exact;                     // full original predicate
  uint64_t inner_cells = 0;
  uint64_t boundary_cells = 0;

  /// Materialized geometric key sets (enumeration-capped; intended for
  /// inspection and tests, execution never needs them).
  std::vector<GFUKey> inner_keys(const SplittingPolicy& policy) const;
  std::vector<GFUKey> boundary_keys(const SplittingPolicy& policy) const;
};

struct EngineOptions {
  uint64_t split_size = 1u << 20;
  int threads = 1;
};

/// Plans and executes queries against one built table. Read-only; many
/// engines may query one table concurrently.
class QueryEngine {
 public:
  explicit QueryEngine(const Table& table, EngineOptions opts = {});

  /// Fills in missing indexed dimensions from the stored bounds:
  /// [min_std, max_std + interval). Conditions on non-indexed fields are
  /// preserved as the residual predicate.
  CompletedPredicate complete_predicate(const RangePredicate& pred) const;

  QueryPlan plan(const RangePredicate& pred, const Selection& sel) const;

  QueryResult execute(const QueryPlan& plan, const Selection& sel) const;

  QueryResult run(const RangePredicate& pred, const Selection& sel) const;

  /// JSON dump of a plan for inspection: cell counts, the slices to read,
  /// and the per-split fragment lists the readers would skip to.
  std::string explain(const QueryPlan& plan) const;

 private:
  const Table& table_;
  EngineOptions opts_;
};

}  // namespace dgf
