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

#include "dgf/segstore.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace dgf {

SegmentSet::SegmentSet(std::filesystem::path dir, std::vector<std::string> files)
    : dir_(std::move(dir)), files_(std::move(files)) {
  for (const auto& f : files_) {
    std::filesystem::path p = dir_ / f;
    std::error_code ec;
    uint64_t size = std::filesystem::file_size(p, ec);
    if (ec) throw ConsistencyError("segment file " + p.string() + " is missing");
    sizes_[f] = size;
  }
}

uint64_t SegmentSet::file_size(const std::string& name) const {
  auto it = sizes_.find(name);
  if (it == sizes_.end()) {
    throw ConsistencyError("index references unknown segment file '" + name + "'");
  }
  return it->second;
}

std::filesystem::path SegmentSet::path_of(const std::string& name) const {
  file_size(name);  // existence check
  return dir_ / name;
}

uint64_t SegmentSet::total_bytes() const {
  uint64_t n = 0;
  for (const auto& [_, size] : sizes_) n += size;
  return n;
}

std::vector<Split> enumerate_splits(const SegmentSet& segments, uint64_t split_size) {
  if (split_size == 0) throw DataError("split size must be positive");
  std::vector<Split> out;
  for (const auto& file : segments.files()) {
    uint64_t size = segments.file_size(file);
    uint32_t index = 0;
    for (uint64_t off = 0; off < size; off += split_size) {
      Split s;
      s.file = file;
      s.start = off;
      s.end = std::min(off + split_size, size);
      s.index = index++;
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

// First record start at or after `off`: 0, or the byte after the previous
// newline. Scans forward from off-1 for a newline.
uint64_t snap_to_record_start(std::ifstream& in, uint64_t off, uint64_t file_size) {
  if (off == 0) return 0;
  if (off >= file_size) return file_size;
  uint64_t probe = off - 1;
  in.clear();
  in.seekg(static_cast<std::streamoff>(probe));
  char buf[4096];
  while (probe < file_size) {
    uint64_t want = std::min<uint64_t>(sizeof(buf), file_size - probe);
    in.read(buf, static_cast<std::streamsize>(want));
    std::streamsize got = in.gcount();
    if (got <= 0) break;
    for (std::streamsize i = 0; i < got; ++i) {
      if (buf[i] == '\n') return probe + static_cast<uint64_t>(i) + 1;
    }
    probe += static_cast<uint64_t>(got);
  }
  return file_size;
}

}  // namespace

SlicePlan filter_splits(const SegmentSet& segments, std::span<const SliceLocation> slices,
                        std::span<const Split> splits) {
  // Group and sort slices per file, validating disjointness.
  std::map<std::string, std::vector<const SliceLocation*>> by_file;
  for (const auto& s : slices) {
    segments.file_size(s.file);  // unknown file -> ConsistencyError
    by_file[s.file].push_back(&s);
  }
  for (auto& [file, list] : by_file) {
    std::sort(list.begin(), list.end(),
              [](const SliceLocation* a, const SliceLocation* b) { return a->start < b->start; });
    for (size_t i = 1; i < list.size(); ++i) {
      if (list[i]->start <= list[i - 1]->end) {
        throw ConsistencyError("overlapping slices in segment file '" + file + "' at offset " +
                               std::to_string(list[i]->start));
      }
    }
  }

  SlicePlan plan;
  std::set<const SliceLocation*> touched;
  for (const auto& split : splits) {
    auto it = by_file.find(split.file);
    if (it == by_file.end()) continue;

    uint64_t size = segments.file_size(split.file);
    std::ifstream in(segments.path_of(split.file), std::ios::binary);
    if (!in) throw ConsistencyError("cannot open segment file '" + split.file + "'");
    // Snapped window: records starting in [begin, end) belong to this split.
    uint64_t win_begin = snap_to_record_start(in, split.start, size);
    uint64_t win_end = snap_to_record_start(in, split.end, size);
    if (win_begin >= win_end) continue;

    SplitPlan sp;
    sp.split = split;
    for (const SliceLocation* slice : it->second) {
      uint64_t begin = std::max(slice->start, win_begin);
      uint64_t end = std::min(slice->end + 1, win_end);
      if (begin < end) {
        sp.fragments.push_back(Fragment{begin, end});
        touched.insert(slice);
      }
    }
    if (!sp.fragments.empty()) plan.chosen.push_back(std::move(sp));
  }
  plan.slice_count = touched.size();
  return plan;
}

void ReadStats::add(const ReadStats& o) {
  splits_chosen += o.splits_chosen;
  slices_read += o.slices_read;
  records_read += o.records_read;
  bytes_read += o.bytes_read;
  fragments_read.insert(fragments_read.end(), o.fragments_read.begin(), o.fragments_read.end());
}

void read_split(const SegmentSet& segments, const SplitPlan& plan,
                const std::function<void(std::string_view line)>& fn, ReadStats& stats) {
  if (plan.fragments.empty()) return;
  uint64_t size = segments.file_size(plan.split.file);
  std::ifstream in(segments.path_of(plan.split.file), std::ios::binary);
  if (!in) throw ConsistencyError("cannot open segment file '" + plan.split.file + "'");

  stats.splits_chosen += 1;
  std::string buf;
  char probe = 0;
  for (const Fragment& frag : plan.fragments) {
    if (frag.end > size || frag.begin >= frag.end) {
      throw ConsistencyError("fragment [" + std::to_string(frag.begin) + "," + std::to_string(frag.end) +
                             ") outside segment file '" + plan.split.file + "'");
    }
    // Record alignment: the byte before the fragment and the last byte of the
    // fragment must both be newlines (or the file edge).
    if (frag.begin > 0) {
      in.seekg(static_cast<std::streamoff>(frag.begin - 1));
      in.get(probe);
      if (probe != '\n') {
        throw ConsistencyError("slice fragment not aligned to a record start in '" + plan.split.file +
                               "' at offset " + std::to_string(frag.begin));
      }
    }
    buf.resize(frag.length());
    in.seekg(static_cast<std::streamoff>(frag.begin));
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
      throw ConsistencyError("short read in segment file '" + plan.split.file + "' at offset " +
                             std::to_string(frag.begin));
    }
    if (buf.back() != '\n' && frag.end != size) {
      throw ConsistencyError("slice fragment not aligned to a record end in '" + plan.split.file +
                             "' at offset " + std::to_string(frag.end));
    }
    stats.bytes_read += frag.length();
    stats.fragments_read.emplace_back(plan.split.file, frag);

    std::string_view data = buf;
    size_t pos = 0;
    while (pos < data.size()) {
      size_t nl = data.find('\n', pos);
      std::string_view line =
          nl == std::string_view::npos ? data.substr(pos) : data.substr(pos, nl - pos);
      fn(line);
      stats.records_read += 1;
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
  }
}

}  // namespace dgf
