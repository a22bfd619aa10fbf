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
#include <string>
#include <vector>

#include "dgf/query_types.hpp"

namespace dgf {

/// Record source for the baselines: files on disk or an in-memory line
/// buffer (same evaluation path either way).
struct RecordSource {
  std::vector<std::filesystem::path> files;
  const std::vector<std::string>* lines = nullptr;

  void scan(const std::function<void(std::string_view)>& fn) const;
};

/// Ground truth for every query shape: reads every record, applies the
/// predicate exactly, and computes the selection directly (no grid, no
/// index, no pre-computed headers). records_read counts every record.
QueryResult scan_query(const RecordSource& source, const Schema& schema, char delimiter,
                       const RangePredicate& pred, const Selection& sel);

/// Warehouse-style compact index emulated at split granularity: one row per
/// distinct indexed-value combination per file, carrying the start offsets
/// of the splits that contain matching records. Prunes splits; cannot skip
/// inside a split.
class CompactIndexTable {
 public:
  static CompactIndexTable build(const std::vector<std::filesystem::path>& files, const Schema& schema,
                                 char delimiter, const std::vector<std::string>& dims,
                                 uint64_t split_size);

  /// Distinct (combination, file) pairs, the emulated index table's size.
  uint64_t row_count() const { return row_count_; }

  /// Scans the splits whose offset lists intersect the matching rows, fully,
  /// with the exact predicate. records_read counts every record in a chosen
  /// split.
  QueryResult query(const RangePredicate& pred, const Selection& sel) const;

 private:
  struct Entry {
    std::vector<double> combo;
    uint32_t file = 0;
    uint64_t split_start = 0;

    auto operator<=>(const Entry&) const = default;
  };

  std::vector<std::filesystem::path> files_;
  Schema schema_;
  char delimiter_ = ',';
  std::vector<std::string> dims_;
  std::vector<size_t> dim_fields_;
  uint64_t split_size_ = 0;
  std::vector<Entry> entries_;  // sorted, unique (combo, file, split)
  uint64_t row_count_ = 0;
};

}  // namespace dgf
