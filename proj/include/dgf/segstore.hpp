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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dgf/index_store.hpp"

namespace dgf {

/// Fixed-size processing window over one segment file: byte range
/// [start, end), the unit of parallel scanning.
struct Split {
  std::string file;
  uint64_t start = 0;
  uint64_t end = 0;
  uint32_t index = 0;  // sequence within the file

  bool operator==(const Split&) const = default;
};

/// Immutable set of segment files (raw concatenations of newline-terminated
/// records). Files never change after build/append, so readers need no locks.
class SegmentSet {
 public:
  SegmentSet() = default;
  SegmentSet(std::filesystem::path dir, std::vector<std::string> files);

  /// Size lookup; names not in the set raise ConsistencyError (an index
  /// entry pointing at an unknown file means index and data disagree).
  uint64_t file_size(const std::string& name) const;
  std::filesystem::path path_of(const std::string& name) const;
  const std::vector<std::string>& files() const { return files_; }
  uint64_t total_bytes() const;

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
  std::map<std::string, uint64_t> sizes_;
};

/// Covering, contiguous, deterministic split list: all but the last split of
/// each file have length split_size.
std::vector<Split> enumerate_splits(const SegmentSet& segments, uint64_t split_size);

/// Byte range [begin, end) of one slice clipped to one split, always aligned
/// to record boundaries.
struct Fragment {
  uint64_t begin = 0;
  uint64_t end = 0;

  uint64_t length() const { return end - begin; }
  bool operator==(const Fragment&) const = default;
};

struct SplitPlan {
  Split split;
  std::vector<Fragment> fragments;  // sorted by begin, pairwise disjoint
};

/// The read plan of a query: which splits to visit and which byte ranges to
/// surface inside each. A slice straddling a split boundary appears as one
/// fragment in each split, cut at a record boundary.
struct SlicePlan {
  std::vector<SplitPlan> chosen;
  uint64_t slice_count = 0;  // distinct slices contributing fragments
};

/// Chooses the splits overlapping at least one slice and clips each slice to
/// the chosen splits. Split boundaries are snapped forward to the next record
/// start, so every record belongs to exactly one split.
SlicePlan filter_splits(const SegmentSet& segments, std::span<const SliceLocation> slices,
                        std::span<const Split> splits);

/// Read accounting. bytes_read counts surfaced payload bytes (the sum of
/// fragment lengths); fragments_read records every byte range touched so
/// callers can audit what was and was not read.
struct ReadStats {
  uint64_t splits_chosen = 0;
  uint64_t slices_read = 0;
  uint64_t records_read = 0;
  uint64_t bytes_read = 0;
  std::vector<std::pair<std::string, Fragment>> fragments_read;

  void add(const ReadStats& o);
};

/// Streams the records of one split plan, skipping the margins between
/// fragments. Bytes outside the fragments are never surfaced. Fragments not
/// aligned to record boundaries raise ConsistencyError naming the file and
/// offset.
void read_split(const SegmentSet& segments, const SplitPlan& plan,
                const std::function<void(std::string_view line)>& fn, ReadStats& stats);

}  // namespace dgf
