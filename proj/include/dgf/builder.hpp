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
#include <span>
#include <string>
#include <vector>

#include "dgf/aggregates.hpp"
#include "dgf/grid.hpp"
#include "dgf/schema.hpp"
#include "dgf/table.hpp"

namespace dgf {

struct BuildConfig {
  SplittingPolicy policy;
  SpecListPtr precompute;
  Schema schema;
  char delimiter = ',';
  /// Segment files roll over once they reach this size. A slice never spans
  /// two segment files.
  uint64_t segment_target_bytes = 8ull << 20;
  /// Build fails when more than this fraction of input records quarantine.
  double quarantine_max_fraction = 0.05;
  /// Dimension the append path extends. Empty selects the last date
  /// dimension of the policy, falling back to the last dimension.
  std::string append_dim;
  /// Shuffle spill threshold.
  size_t sort_budget_bytes = 256u << 20;
  /// Worker threads for the map phase. 0 picks hardware concurrency.
  int threads = 1;
};

struct BuildStats {
  uint64_t records_in = 0;
  uint64_t quarantined = 0;
  uint64_t slices = 0;
  uint64_t entries = 0;
  uint64_t segment_bytes = 0;
};

/// Standardizes a record's indexed values into its cell key (the map side of
/// construction). Throws DataError for missing/unparseable indexed fields or
/// values below a dimension minimum; the build pipeline turns those into
/// quarantined records.
GFUKey map_assign(const RecordView& record, const SplittingPolicy& policy, const Schema& schema);

/// Rolling writer over `<table>/segments`. Slices are written contiguously
/// in call order; the writer starts a fresh file when the current one has
/// reached the target size.
class SegmentWriter {
 public:
  SegmentWriter(std::filesystem::path dir, uint64_t target_bytes, uint32_t first_file_index);

  /// Writes one slice (records joined by newlines, newline-terminated) and
  /// returns its inclusive byte range.
  SliceLocation write_slice(std::span<const std::string> lines);

  /// Offset the next byte would land at in the current file.
  uint64_t current_offset() const { return offset_; }

  /// Flushes and returns (name, bytes) of every file written.
  std::vector<std::pair<std::string, uint64_t>> finish();

 private:
  void roll();

  std::filesystem::path dir_;
  uint64_t target_ = 0;
  uint32_t next_index_ = 0;
  std::string current_name_;
  uint64_t offset_ = 0;
  int fd_ = -1;
  std::vector<std::pair<std::string, uint64_t>> files_;
};

/// Reduces one cell's records into a slice: writes them contiguously and
/// folds the pre-computed header over them. The returned location spans
/// exactly the written bytes.
GFUValue reduce_slice(const GFUKey& key, std::span<const std::string> lines, SegmentWriter& writer,
                      const ArgEvaluator& eval, const Schema& schema, char delimiter);

/// Reorganizes the input record files into grid-clustered slices under
/// `table_dir` and builds the index over them. The directory must not
/// already contain a table.
Table build_index(const std::vector<std::filesystem::path>& inputs, const BuildConfig& cfg,
                  const std::filesystem::path& table_dir, BuildStats* stats = nullptr);

/// Appends a new batch whose append-dimension cells lie strictly beyond the
/// existing bounds. Existing segment files and index entries are untouched;
/// new slices go to new segment files and the index is swapped atomically.
/// A record at or below the current maximum append-dimension cell aborts the
/// whole batch.
Table append_batch(const std::vector<std::filesystem::path>& inputs, const Table& table,
                   BuildStats* stats = nullptr, size_t sort_budget_bytes = 256u << 20,
                   int threads = 1, uint64_t segment_target_bytes = 8ull << 20);

/// Recomputes every entry's header under a new spec list by rescanning the
/// slices in place. Slice data and locations never move; only headers (and
/// the index file) change. This is how aggregates are added to an already
/// built table.
Table rebuild_headers(const Table& table, SpecListPtr new_specs);

}  // namespace dgf
