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

#include "dgf/index_store.hpp"

#include <fstream>

#include "dgf/text.hpp"

namespace dgf {

namespace {
constexpr std::string_view kMagic = "dgfidx";
constexpr std::string_view kVersion = "v1";
}  // namespace

IndexStore::IndexStore(SplittingPolicy policy, SpecListPtr specs)
    : policy_(std::move(policy)), specs_(std::move(specs)) {
  if (!specs_) specs_ = std::make_shared<const SpecList>();
}

void IndexStore::put(const GFUKey& key, GFUValue value) {
  auto [it, inserted] = entries_.emplace(key, std::move(value));
  if (!inserted) {
    throw ConsistencyError("duplicate index entry for key '" + render_key(key, policy_) +
                           "' (shuffle produced two slices for one cell)");
  }
}

const GFUValue* IndexStore::get(const GFUKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::map<GFUKey, const GFUValue*> IndexStore::multi_get(std::span<const GFUKey> keys) const {
  std::map<GFUKey, const GFUValue*> out;
  for (const auto& key : keys) {
    if (const GFUValue* v = get(key)) out.emplace(key, v);
  }
  return out;
}

void IndexStore::put_bounds(const DimensionBounds& b) {
  auto idx = policy_.find(b.dim);
  if (!idx) throw DataError("bounds for unknown dimension '" + b.dim + "'");
  const DimensionPolicy& dim = policy_.dim(*idx);
  int64_t min_k = standardize_k(b.min_std, dim);
  int64_t max_k = standardize_k(b.max_std, dim);
  if (min_k > max_k) throw DataError("bounds for dimension '" + b.dim + "' have min above max");
  auto it = bounds_.find(b.dim);
  if (it == bounds_.end()) {
    bounds_.emplace(b.dim, std::make_pair(min_k, max_k));
  } else {
    it->second.first = std::min(it->second.first, min_k);
    it->second.second = std::max(it->second.second, max_k);
  }
}

std::optional<DimensionBounds> IndexStore::get_bounds(std::string_view dim) const {
  auto it = bounds_.find(std::string(dim));
  if (it == bounds_.end()) return std::nullopt;
  auto idx = policy_.find(dim);
  if (!idx) return std::nullopt;
  const DimensionPolicy& d = policy_.dim(*idx);
  DimensionBounds b;
  b.dim = std::string(dim);
  b.min_std = coord_value(d, it->second.first);
  b.max_std = coord_value(d, it->second.second);
  return b;
}

void IndexStore::persist(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write index file " + tmp.string());
    out << kMagic << ' ' << kVersion << ' ' << policy_.spec_string() << '\n';
    for (const auto& dim : policy_.dims()) {
      auto it = bounds_.find(dim.name);
      if (it == bounds_.end()) continue;
      out << "#bounds " << dim.name << ' ' << render_coord(dim, it->second.first) << ' '
          << render_coord(dim, it->second.second) << '\n';
    }
    for (const auto& [key, value] : entries_) {
      out << render_key(key, policy_) << '\t' << serialize_header(value.header) << '\t'
          << value.location.file << ':' << value.location.start << ':' << value.location.end << '\n';
    }
    out.flush();
    if (!out) throw DataError("write failure on index file " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

IndexStore IndexStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open index file " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  size_t line_no = 0;
  size_t pos = 0;
  auto next_line = [&](std::string_view& line) -> bool {
    if (pos >= content.size()) return false;
    size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) {
      throw ConsistencyError("index file " + path.string() + " truncated at line " +
                             std::to_string(line_no + 1) + " (byte " + std::to_string(pos) + ")");
    }
    line = std::string_view(content).substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    return true;
  };

  std::string_view header;
  if (!next_line(header)) throw ConsistencyError("index file " + path.string() + " is empty");
  auto head_parts = split(header, ' ');
  if (head_parts.size() != 3 || head_parts[0] != kMagic) {
    throw ConsistencyError("index file " + path.string() + " has no dgfidx header line");
  }
  if (head_parts[1] != kVersion) {
    throw ConsistencyError("index file " + path.string() + " has unsupported version '" +
                           std::string(head_parts[1]) + "' (want " + std::string(kVersion) + ")");
  }
  SplittingPolicy policy = SplittingPolicy::parse(head_parts[2]);

  IndexStore store(policy, nullptr);
  SpecListPtr shared_specs;
  std::string_view line;
  while (next_line(line)) {
    if (line.rfind("#bounds ", 0) == 0) {
      auto parts = split(line, ' ');
      if (parts.size() != 4) {
        throw ConsistencyError("index file " + path.string() + " line " + std::to_string(line_no) +
                               ": malformed bounds line");
      }
      auto idx = policy.find(parts[1]);
      if (!idx) {
        throw ConsistencyError("index file " + path.string() + " line " + std::to_string(line_no) +
                               ": bounds for unknown dimension");
      }
      const DimensionPolicy& dim = policy.dim(*idx);
      DimensionBounds b;
      b.dim = std::string(parts[1]);
      b.min_std = coord_value(dim, parse_coord(dim, parts[2]));
      b.max_std = coord_value(dim, parse_coord(dim, parts[3]));
      store.put_bounds(b);
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 3) {
      throw ConsistencyError("index file " + path.string() + " line " + std::to_string(line_no) +
                             ": want key\\theader\\tlocation");
    }
    GFUKey key;
    GFUValue value;
    try {
      key = parse_key(cols[0], policy);
      if (!shared_specs) {
        Header first = dgf::parse_header(cols[1]);
        shared_specs = first.specs();
        value.header = std::move(first);
      } else {
        value.header = dgf::parse_header(cols[1], shared_specs);
      }
    } catch (const DataError& e) {
      throw ConsistencyError("index file " + path.string() + " line " + std::to_string(line_no) + ": " +
                             e.what());
    }
    auto loc = split(cols[2], ':');
    if (loc.size() != 3) {
      throw ConsistencyError("index file " + path.string() + " line " + std::to_string(line_no) +
                             ": malformed location");
    }
    value.location.file = std::string(loc[0]);
    value.location.start = static_cast<uint64_t>(parse_int(loc[1], "location start"));
    value.location.end = static_cast<uint64_t>(parse_int(loc[2], "location end"));
    if (value.location.end < value.location.start) {
      throw ConsistencyError("index file " + path.string() + " line " + std::to_string(line_no) +
                             ": slice end before start");
    }
    store.put(key, std::move(value));
  }
  if (shared_specs) store.specs_ = shared_specs;
  return store;
}

}  // namespace dgf
