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
#include <span>
#include <string>
#include <vector>

#include "dgf/aggregates.hpp"
#include "dgf/grid.hpp"

namespace dgf {

/// Byte range of one slice: [start, end] inclusive, within one segment file.
struct SliceLocation {
  std::string file;
  uint64_t start = 0;
  uint64_t end = 0;

  uint64_t length() const { return end - start + 1; }
  bool operator==(const SliceLocation&) const = default;
};

/// The index entry for one nonempty cell: pre-computed header plus where the
/// cell's records live.
struct GFUValue {
  Header header;
  SliceLocation location;

  bool operator==(const GFUValue&) const = default;
};

/// Standardized value span of one dimension over all ingested records.
struct DimensionBounds {
  std::string dim;
  double min_std = 0;
  double max_std = 0;
};

/// Key-value store of GFUKey -> GFUValue plus per-dimension bounds,
/// persisted as a single sorted flat file. Empty cells have no entry.
///
/// File format (byte-exact):
///   dgfidx v1 <policy-spec>\n
///   #bounds <dim> <min> <max>\n      (one per dimension, policy order)
///   <GFUKey>\t<serialized Header>\t<file>:<start>:<end>\n   (sorted by key)
///
/// Thread-safety: const access is safe from any number of threads. Mutation
/// follows the one-exclusive-writer contract enforced at the table level.
class IndexStore {
 public:
  IndexStore() = default;
  IndexStore(SplittingPolicy policy, SpecListPtr specs);

  const SplittingPolicy& policy() const { return policy_; }
  const SpecListPtr& specs() const { return specs_; }

  /// Adds an entry. A duplicate key during one build signals a shuffle bug
  /// and throws ConsistencyError.
  void put(const GFUKey& key, GFUValue value);

  const GFUValue* get(const GFUKey& key) const;

  /// Entries for exactly the present keys; absent keys are silently omitted
  /// (an empty cell is a normal outcome, not an error).
  std::map<GFUKey, const GFUValue*> multi_get(std::span<const GFUKey> keys) const;

  /// Widening merge: bounds reflect all records ingested so far.
  void put_bounds(const DimensionBounds& b);
  std::optional<DimensionBounds> get_bounds(std::string_view dim) const;

  const std::map<GFUKey, GFUValue>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

  /// Writes the sorted flat file via a temp file and atomic rename, so a
  /// reader never observes a partially written index.
  void persist(const std::filesystem::path& path) const;

  /// Rejects version mismatches and truncated files with position info.
  static IndexStore load(const std::filesystem::path& path);

 private:
  SplittingPolicy policy_;
  SpecListPtr specs_;
  std::map<GFUKey, GFUValue> entries_;
  std::map<std::string, std::pair<int64_t, int64_t>> bounds_;  // dim -> [min_k, max_k]
};

}  // namespace dgf
