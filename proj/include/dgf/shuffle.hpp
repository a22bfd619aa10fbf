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
#include <string>
#include <string_view>
#include <vector>

#include "dgf/grid.hpp"

namespace dgf {

/// Groups (GFUKey, line) pairs by key, keys ascending, lines in input order
/// within each group — the single-node stand-in for the shuffle between map
/// and reduce. Buffers in memory and spills sorted runs to disk past the
/// budget, merging runs on iteration.
class ExternalGroupSorter {
 public:
  ExternalGroupSorter(std::filesystem::path spill_dir, size_t memory_budget_bytes);
  ~ExternalGroupSorter();

  ExternalGroupSorter(const ExternalGroupSorter&) = delete;
  ExternalGroupSorter& operator=(const ExternalGroupSorter&) = delete;

  void add(const GFUKey& key, std::string_view line);

  uint64_t record_count() const { return seq_; }

  /// Single-shot: drains all groups in ascending key order.
  void for_each_group(const std::function<void(const GFUKey&, std::vector<std::string>& lines)>& fn);

 private:
  void spill();

  std::filesystem::path spill_dir_;
  size_t budget_;
  size_t buffered_bytes_ = 0;
  uint64_t seq_ = 0;
  size_t key_width_ = 0;
  // Entry = order-preserving hex encoding of (key, seq) + '\t' + line.
  std::vector<std::string> buffer_;
  std::vector<std::filesystem::path> runs_;
};

}  // namespace dgf
