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

#include "dgf/table.hpp"

#include <fstream>

#include <json.hpp>

namespace dgf {

using nlohmann::json;

std::string TableMeta::to_json() const {
  json j;
  j["version"] = 1;
  j["policy"] = policy_spec;
  j["precompute"] = precompute;
  j["delimiter"] = std::string(1, delimiter);
  j["append_dim"] = append_dim;
  j["records"] = record_count;
  j["quarantined"] = quarantined_count;
  json segs = json::array();
  for (const auto& [name, bytes] : segments) {
    segs.push_back({{"name", name}, {"bytes", bytes}});
  }
  j["segments"] = segs;
  return j.dump(2) + "\n";
}

TableMeta TableMeta::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConsistencyError("meta.json is not valid JSON");
  TableMeta m;
  try {
    if (j.at("version").get<int>() != 1) throw ConsistencyError("meta.json has unsupported version");
    m.policy_spec = j.at("policy").get<std::string>();
    m.precompute = j.at("precompute").get<std::vector<std::string>>();
    std::string delim = j.at("delimiter").get<std::string>();
    if (delim.size() != 1) throw ConsistencyError("meta.json delimiter must be one character");
    m.delimiter = delim[0];
    m.append_dim = j.at("append_dim").get<std::string>();
    m.record_count = j.at("records").get<uint64_t>();
    m.quarantined_count = j.at("quarantined").get<uint64_t>();
    for (const auto& seg : j.at("segments")) {
      m.segments.emplace_back(seg.at("name").get<std::string>(), seg.at("bytes").get<uint64_t>());
    }
  } catch (const json::exception& e) {
    throw ConsistencyError(std::string("meta.json is malformed: ") + e.what());
  }
  return m;
}

Table Table::open(const std::filesystem::path& dir) {
  Table t;
  t.dir_ = dir;
  std::ifstream meta_in(meta_path(dir));
  if (!meta_in) throw DataError("no table at " + dir.string() + " (missing meta.json)");
  std::string meta_text((std::istreambuf_iterator<char>(meta_in)), std::istreambuf_iterator<char>());
  t.meta_ = TableMeta::from_json(meta_text);
  t.schema_ = Schema::load(schema_path(dir));
  t.index_ = IndexStore::load(index_path(dir));
  if (t.index_.policy().spec_string() != SplittingPolicy::parse(t.meta_.policy_spec).spec_string()) {
    throw ConsistencyError("policy in index.dgf disagrees with meta.json at " + dir.string());
  }
  std::vector<std::string> names;
  names.reserve(t.meta_.segments.size());
  for (const auto& [name, bytes] : t.meta_.segments) names.push_back(name);
  t.segments_ = SegmentSet(segments_dir(dir), names);
  for (const auto& [name, bytes] : t.meta_.segments) {
    if (t.segments_.file_size(name) != bytes) {
      throw ConsistencyError("segment file '" + name + "' size differs from meta.json at " + dir.string());
    }
  }
  return t;
}

BuildLock::BuildLock(const std::filesystem::path& table_dir) : path_(table_dir / ".lock") {
  std::filesystem::create_directories(table_dir);
  FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    throw DataError("table " + table_dir.string() + " is locked by another writer (stale " +
                    path_.string() + "?)");
  }
  std::fclose(f);
}

BuildLock::~BuildLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

}  // namespace dgf
