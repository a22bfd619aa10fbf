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

#include "dgf/shuffle.hpp"

#include <algorithm>
#include <fstream>
#include <queue>

#include "dgf/error.hpp"

namespace dgf {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

// Order-preserving encoding of an int64: flip the sign bit so unsigned
// (and therefore hex-string) order matches signed order.
void append_hex64(std::string& out, int64_t v) {
  uint64_t u = static_cast<uint64_t>(v) ^ (uint64_t(1) << 63);
  for (int shift = 60; shift >= 0; shift -= 4) {
    out.push_back(kHexDigits[(u >> shift) & 0xF]);
  }
}

int64_t parse_hex64(std::string_view s) {
  uint64_t u = 0;
  for (char c : s) {
    u <<= 4;
    if (c >= '0' && c <= '9') u |= static_cast<uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') u |= static_cast<uint64_t>(c - 'a' + 10);
    else throw ConsistencyError("corrupt shuffle run entry");
  }
  return static_cast<int64_t>(u ^ (uint64_t(1) << 63));
}

}  // namespace

ExternalGroupSorter::ExternalGroupSorter(std::filesystem::path spill_dir, size_t memory_budget_bytes)
    : spill_dir_(std::move(spill_dir)), budget_(std::max<size_t>(memory_budget_bytes, 1 << 16)) {}

ExternalGroupSorter::~ExternalGroupSorter() {
  for (const auto& run : runs_) {
    std::error_code ec;
    std::filesystem::remove(run, ec);
  }
}

void ExternalGroupSorter::add(const GFUKey& key, std::string_view line) {
  if (key_width_ == 0) {
    key_width_ = key.cells.size() * 16;
  } else if (key.cells.size() * 16 != key_width_) {
    throw DataError("shuffle: inconsistent key dimensionality");
  }
  std::string entry;
  entry.reserve(key_width_ + 16 + 1 + line.size());
  for (int64_t k : key.cells) append_hex64(entry, k);
  append_hex64(entry, static_cast<int64_t>(seq_++));
  entry.push_back('\t');
  entry.append(line);
  buffered_bytes_ += entry.size() + 32;
  buffer_.push_back(std::move(entry));
  if (buffered_bytes_ >= budget_) spill();
}

void ExternalGroupSorter::spill() {
  if (buffer_.empty()) return;
  std::sort(buffer_.begin(), buffer_.end());
  std::filesystem::create_directories(spill_dir_);
  std::filesystem::path run = spill_dir_ / ("run-" + std::to_string(runs_.size()) + ".tmp");
  std::ofstream out(run, std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot write shuffle run " + run.string());
  for (const auto& entry : buffer_) out << entry << '\n';
  out.flush();
  if (!out) throw DataError("write failure on shuffle run " + run.string());
  runs_.push_back(run);
  buffer_.clear();
  buffered_bytes_ = 0;
}

void ExternalGroupSorter::for_each_group(
    const std::function<void(const GFUKey&, std::vector<std::string>& lines)>& fn) {
  std::sort(buffer_.begin(), buffer_.end());

  // Merge the in-memory buffer with the spilled runs. Entries sort as plain
  // strings because the (key, seq) prefix is fixed-width and order-preserving.
  struct RunReader {
    std::ifstream in;
    std::string current;
    bool done = false;

    bool advance() {
      if (!std::getline(in, current)) {
        done = true;
        current.clear();
      }
      return !done;
    }
  };

  std::vector<RunReader> readers(runs_.size());
  for (size_t i = 0; i < runs_.size(); ++i) {
    readers[i].in.open(runs_[i], std::ios::binary);
    if (!readers[i].in) throw DataError("cannot reopen shuffle run " + runs_[i].string());
    readers[i].advance();
  }

  using HeapItem = std::pair<std::string_view, size_t>;  // entry view, source (runs then buffer)
  auto cmp = [](const HeapItem& a, const HeapItem& b) { return a.first > b.first; };
  std::priority_queue<HeapItem, std::vector<HeapItem>, decltype(cmp)> heap(cmp);
  size_t buffer_pos = 0;
  for (size_t i = 0; i < readers.size(); ++i) {
    if (!readers[i].done) heap.emplace(readers[i].current, i);
  }
  if (buffer_pos < buffer_.size()) heap.emplace(buffer_[buffer_pos], readers.size());

  GFUKey group_key;
  std::string group_prefix;
  std::vector<std::string> lines;
  auto flush_group = [&]() {
    if (!group_prefix.empty()) {
      fn(group_key, lines);
      lines.clear();
      group_prefix.clear();
    }
  };

  while (!heap.empty()) {
    auto [entry, source] = heap.top();
    heap.pop();
    std::string_view key_part = entry.substr(0, key_width_);
    std::string_view line = entry.substr(key_width_ + 16 + 1);
    if (key_part != group_prefix) {
      flush_group();
      group_prefix = std::string(key_part);
      group_key.cells.clear();
      for (size_t off = 0; off < key_width_; off += 16) {
        group_key.cells.push_back(parse_hex64(key_part.substr(off, 16)));
      }
    }
    lines.emplace_back(line);
    if (source < readers.size()) {
      if (readers[source].advance()) heap.emplace(readers[source].current, source);
    } else {
      ++buffer_pos;
      if (buffer_pos < buffer_.size()) heap.emplace(buffer_[buffer_pos], readers.size());
    }
  }
  flush_group();

  buffer_.clear();
  buffered_bytes_ = 0;
}

}  // namespace dgf
