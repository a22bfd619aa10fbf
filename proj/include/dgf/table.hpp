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

#include "dgf/index_store.hpp"
#include "dgf/schema.hpp"
#include "dgf/segstore.hpp"

namespace dgf {

/// On-disk layout of a built table directory:
///   index.dgf       sorted key-value index (see IndexStore)
///   meta.json       table metadata: policy, precompute list, segment list
///   schema.txt      record schema sidecar copy
///   segments/       seg-NNNNN.dat record files
///   quarantine.txt  rejected records (input line + reason column), if any
struct TableMeta {
  std::string policy_spec;
  std::vector<std::string> precompute;
  char delimiter = ',';
  std::string append_dim;
  uint64_t record_count = 0;
  uint64_t quarantined_count = 0;
  std::vector<std::pair<std::string, uint64_t>> segments;  // name -> bytes

  std::string to_json() const;
  static TableMeta from_json(const std::string& text);
};

/// A built table: segment files plus the index over them. Immutable from the
/// reader side; builds and appends go through builder functions which stage
/// and atomically swap the index.
class Table {
 public:
  static Table open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const TableMeta& meta() const { return meta_; }
  const Schema& schema() const { return schema_; }
  const IndexStore& index() const { return index_; }
  const SegmentSet& segments() const { return segments_; }

  static std::filesystem::path index_path(const std::filesystem::path& dir) { return dir / "index.dgf"; }
  static std::filesystem::path meta_path(const std::filesystem::path& dir) { return dir / "meta.json"; }
  static std::filesystem::path schema_path(const std::filesystem::path& dir) { return dir / "schema.txt"; }
  static std::filesystem::path segments_dir(const std::filesystem::path& dir) { return dir / "segments"; }
  static std::filesystem::path quarantine_path(const std::filesystem::path& dir) { return dir / "quarantine.txt"; }

 private:
  friend class TableBuilder;
  Table() = default;

  std::filesystem::path dir_;
  TableMeta meta_;
  Schema schema_;
  IndexStore index_;
  SegmentSet segments_;
};

/// Holds `<dir>/.lock` for the duration of a build or append. One exclusive
/// writer per table directory.
class BuildLock {
 public:
  explicit BuildLock(const std::filesystem::path& table_dir);
  ~BuildLock();

  BuildLock(const BuildLock&) = delete;
  BuildLock& operator=(const BuildLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace dgf
