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

#include "dgf/builder.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>
#include <future>
#include <optional>
#include <thread>

#include "dgf/shuffle.hpp"
#include "dgf/text.hpp"

namespace dgf {

namespace {

std::string segment_name(uint32_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "seg-%05u.dat", index);
  return buf;
}

// Field indexes of the policy dimensions, resolved once.
std::vector<size_t> policy_field_slots(const SplittingPolicy& policy, const Schema& schema) {
  std::vector<size_t> slots;
  slots.reserve(policy.size());
  for (const auto& dim : policy.dims()) {
    size_t idx = schema.require(dim.name);
    FieldKind kind = schema.field(idx).kind;
    if (dim.kind == DimKind::kDate && kind != FieldKind::kDate) {
      throw DataError("policy dimension '" + dim.name + "' is a date but the field is not");
    }
    if (dim.kind == DimKind::kNumeric && kind != FieldKind::kNumeric) {
      throw DataError("policy dimension '" + dim.name + "' must be a numeric field");
    }
    slots.push_back(idx);
  }
  return slots;
}

struct Quarantine {
  std::ofstream out;
  std::filesystem::path path;
  char delimiter = ',';
  uint64_t count = 0;

  void reject(std::string_view line, std::string_view reason) {
    if (!out.is_open()) {
      out.open(path, std::ios::app | std::ios::binary);
      if (!out) throw DataError("cannot open quarantine file " + path.string());
    }
    out << line << delimiter << reason << '\n';
    ++count;
  }
};

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

// Map phase: keys every input record and feeds the shuffle in input order,
// quarantining records that fail to key. Returns per-dimension [min_k,max_k]
// over accepted records. Keying is farmed out to worker chunks; the shuffle
// ingest stays sequential so record order (and with it the build output) is
// deterministic regardless of thread count.
struct MapResult {
  uint64_t records_in = 0;
  std::vector<std::pair<int64_t, int64_t>> bounds;  // per policy dim
  bool any = false;
};

MapResult run_map_phase(const std::vector<std::filesystem::path>& inputs, const SplittingPolicy& policy,
                        const Schema& schema, char delimiter, int threads, ExternalGroupSorter& sorter,
                        Quarantine& quarantine,
                        const std::function<void(const GFUKey&, std::string_view)>& inspect_key) {
  std::vector<size_t> slots = policy_field_slots(policy, schema);
  MapResult result;
  result.bounds.assign(policy.size(), {0, 0});

  struct Keyed {
    std::optional<GFUKey> key;
    std::string reason;
  };
  auto key_one = [&](std::string_view line) -> Keyed {
    Keyed out;
    try {
      RecordView rec(line, delimiter);
      GFUKey key;
      key.cells.reserve(slots.size());
      for (size_t d = 0; d < slots.size(); ++d) {
        key.cells.push_back(standardize_k(rec.numeric(slots[d], schema), policy.dim(d)));
      }
      out.key = std::move(key);
    } catch (const DataError& e) {
      out.reason = e.what();
    }
    return out;
  };

  auto ingest = [&](std::string_view line, Keyed&& keyed) {
    ++result.records_in;
    if (!keyed.key) {
      quarantine.reject(line, keyed.reason);
      return;
    }
    const GFUKey& key = *keyed.key;
    if (inspect_key) inspect_key(key, line);
    for (size_t d = 0; d < key.cells.size(); ++d) {
      auto& [lo, hi] = result.bounds[d];
      if (!result.any) {
        lo = hi = key.cells[d];
      } else {
        lo = std::min(lo, key.cells[d]);
        hi = std::max(hi, key.cells[d]);
      }
    }
    result.any = true;
    sorter.add(key, line);
  };

  int workers = resolve_threads(threads);
  if (workers <= 1) {
    for_each_record(inputs, [&](std::string_view line) { ingest(line, key_one(line)); });
    return result;
  }

  constexpr size_t kChunk = 8192;
  std::vector<std::string> chunk;
  chunk.reserve(kChunk);
  using Lines = std::shared_ptr<std::vector<std::string>>;
  std::deque<std::pair<Lines, std::future<std::vector<Keyed>>>> in_flight;

  auto submit = [&](std::vector<std::string>&& lines) {
    auto shared = std::make_shared<std::vector<std::string>>(std::move(lines));
    auto fut = std::async(std::launch::async, [shared, &key_one] {
      std::vector<Keyed> keyed;
      keyed.reserve(shared->size());
      for (const auto& line : *shared) keyed.push_back(key_one(line));
      return keyed;
    });
    in_flight.emplace_back(shared, std::move(fut));
  };

  auto drain_one = [&]() {
    auto& [lines, fut] = in_flight.front();
    std::vector<Keyed> keyed = fut.get();
    for (size_t i = 0; i < lines->size(); ++i) ingest((*lines)[i], std::move(keyed[i]));
    in_flight.pop_front();
  };

  for_each_record(inputs, [&](std::string_view line) {
    chunk.emplace_back(line);
    if (chunk.size() >= kChunk) {
      submit(std::move(chunk));
      chunk = {};
      chunk.reserve(kChunk);
      if (in_flight.size() >= static_cast<size_t>(workers)) drain_one();
    }
  });
  if (!chunk.empty()) submit(std::move(chunk));
  while (!in_flight.empty()) drain_one();
  return result;
}

}  // namespace

GFUKey map_assign(const RecordView& record, const SplittingPolicy& policy, const Schema& schema) {
  std::vector<size_t> slots = policy_field_slots(policy, schema);
  GFUKey key;
  key.cells.reserve(slots.size());
  for (size_t d = 0; d < slots.size(); ++d) {
    key.cells.push_back(standardize_k(record.numeric(slots[d], schema), policy.dim(d)));
  }
  return key;
}

SegmentWriter::SegmentWriter(std::filesystem::path dir, uint64_t target_bytes, uint32_t first_file_index)
    : dir_(std::move(dir)), target_(std::max<uint64_t>(target_bytes, 1)), next_index_(first_file_index) {
  std::filesystem::create_directories(dir_);
}

void SegmentWriter::roll() {
  if (fd_ >= 0) {
    files_.emplace_back(current_name_, offset_);
    ::close(fd_);
    fd_ = -1;
  }
  current_name_ = segment_name(next_index_++);
  std::filesystem::path p = dir_ / current_name_;
  fd_ = ::open(p.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd_ < 0) throw DataError("cannot create segment file " + p.string());
  offset_ = 0;
}

SliceLocation SegmentWriter::write_slice(std::span<const std::string> lines) {
  if (fd_ < 0 || (offset_ >= target_ && offset_ > 0)) roll();
  SliceLocation loc;
  loc.file = current_name_;
  loc.start = offset_;
  std::string payload;
  for (const auto& line : lines) {
    payload.append(line);
    payload.push_back('\n');
  }
  if (payload.empty()) throw DataError("refusing to write an empty slice");
  const char* data = payload.data();
  size_t left = payload.size();
  while (left > 0) {
    ssize_t n = ::write(fd_, data, left);
    if (n < 0) throw DataError(std::string("segment write failure: ") + std::strerror(errno));
    data += n;
    left -= static_cast<size_t>(n);
  }
  offset_ += payload.size();
  loc.end = offset_ - 1;
  return loc;
}

std::vector<std::pair<std::string, uint64_t>> SegmentWriter::finish() {
  if (fd_ >= 0) {
    files_.emplace_back(current_name_, offset_);
    if (::fsync(fd_) != 0) throw DataError("segment fsync failure");
    ::close(fd_);
    fd_ = -1;
  }
  return files_;
}

GFUValue reduce_slice(const GFUKey& /*key*/, std::span<const std::string> lines, SegmentWriter& writer,
                      const ArgEvaluator& eval, const Schema& schema, char delimiter) {
  GFUValue value;
  value.header = Header(eval.specs());
  std::vector<double> args;
  for (const auto& line : lines) {
    RecordView rec(line, delimiter);
    eval.eval(rec, schema, args);
    value.header.accumulate(args);
  }
  value.location = writer.write_slice(lines);
  return value;
}

namespace {

std::string default_append_dim(const SplittingPolicy& policy) {
  for (size_t i = policy.size(); i > 0; --i) {
    if (policy.dim(i - 1).kind == DimKind::kDate) return policy.dim(i - 1).name;
  }
  return policy.dim(policy.size() - 1).name;
}

void finalize_table(const std::filesystem::path& table_dir, const TableMeta& meta, const Schema& schema,
                    const IndexStore& index) {
  schema.save(Table::schema_path(table_dir));
  // meta before index: a reader racing the swap sees new segments listed but
  // still the old index, which references only old files.
  std::filesystem::path meta_tmp = Table::meta_path(table_dir);
  meta_tmp += ".tmp";
  {
    std::ofstream out(meta_tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + meta_tmp.string());
    out << meta.to_json();
    out.flush();
    if (!out) throw DataError("write failure on " + meta_tmp.string());
  }
  std::filesystem::rename(meta_tmp, Table::meta_path(table_dir));
  index.persist(Table::index_path(table_dir));
}

}  // namespace

Table build_index(const std::vector<std::filesystem::path>& inputs, const BuildConfig& cfg,
                  const std::filesystem::path& table_dir, BuildStats* stats) {
  if (cfg.policy.size() == 0) throw DataError("build needs a splitting policy with at least one dimension");
  if (!cfg.precompute) throw DataError("build needs a precompute spec list (may be empty)");
  if (std::filesystem::exists(Table::meta_path(table_dir))) {
    throw DataError("table directory " + table_dir.string() + " already holds a table");
  }
  BuildLock lock(table_dir);
  ArgEvaluator eval(cfg.precompute, cfg.schema);  // validates specs against schema up front

  Quarantine quarantine;
  quarantine.path = Table::quarantine_path(table_dir);
  quarantine.delimiter = cfg.delimiter;

  ExternalGroupSorter sorter(table_dir / ".spill", cfg.sort_budget_bytes);
  MapResult mapped = run_map_phase(inputs, cfg.policy, cfg.schema, cfg.delimiter, cfg.threads, sorter,
                                   quarantine, nullptr);

  if (mapped.records_in > 0 &&
      static_cast<double>(quarantine.count) >
          cfg.quarantine_max_fraction * static_cast<double>(mapped.records_in)) {
    throw DataError("build aborted: " + std::to_string(quarantine.count) + " of " +
                    std::to_string(mapped.records_in) + " records quarantined (threshold " +
                    format_double(cfg.quarantine_max_fraction) + ")");
  }

  IndexStore index(cfg.policy, cfg.precompute);
  SegmentWriter writer(Table::segments_dir(table_dir), cfg.segment_target_bytes, 0);
  uint64_t slices = 0;
  uint64_t written_records = 0;
  sorter.for_each_group([&](const GFUKey& key, std::vector<std::string>& lines) {
    index.put(key, reduce_slice(key, lines, writer, eval, cfg.schema, cfg.delimiter));
    ++slices;
    written_records += lines.size();
  });
  if (mapped.any) {
    for (size_t d = 0; d < cfg.policy.size(); ++d) {
      const DimensionPolicy& dim = cfg.policy.dim(d);
      index.put_bounds(DimensionBounds{dim.name, coord_value(dim, mapped.bounds[d].first),
                                       coord_value(dim, mapped.bounds[d].second)});
    }
  }

  TableMeta meta;
  meta.policy_spec = cfg.policy.spec_string();
  for (const auto& spec : *cfg.precompute) meta.precompute.push_back(spec.to_string());
  meta.delimiter = cfg.delimiter;
  meta.append_dim = cfg.append_dim.empty() ? default_append_dim(cfg.policy) : cfg.append_dim;
  if (!cfg.policy.find(meta.append_dim)) {
    throw DataError("append dimension '" + meta.append_dim + "' is not a policy dimension");
  }
  meta.record_count = written_records;
  meta.quarantined_count = quarantine.count;
  meta.segments = writer.finish();
  for (const auto& [name, bytes] : meta.segments) {
    if (stats) stats->segment_bytes += bytes;
  }
  finalize_table(table_dir, meta, cfg.schema, index);

  if (stats) {
    stats->records_in = mapped.records_in;
    stats->quarantined = quarantine.count;
    stats->slices = slices;
    stats->entries = index.size();
  }
  std::error_code ec;
  std::filesystem::remove_all(table_dir / ".spill", ec);
  return Table::open(table_dir);
}

Table append_batch(const std::vector<std::filesystem::path>& inputs, const Table& table,
                   BuildStats* stats, size_t sort_budget_bytes, int threads,
                   uint64_t segment_target_bytes) {
  const std::filesystem::path& dir = table.dir();
  BuildLock lock(dir);
  SplittingPolicy policy = table.index().policy();
  const Schema& schema = table.schema();
  SpecListPtr specs = table.index().specs();
  ArgEvaluator eval(specs, schema);

  const std::string& append_dim = table.meta().append_dim;
  auto dim_idx = policy.find(append_dim);
  if (!dim_idx) throw ConsistencyError("table has no append dimension '" + append_dim + "'");
  const DimensionPolicy& adim = policy.dim(*dim_idx);
  std::optional<int64_t> old_max_k;
  if (auto b = table.index().get_bounds(append_dim)) {
    old_max_k = standardize_k(b->max_std, adim);
  }

  Quarantine quarantine;
  quarantine.path = Table::quarantine_path(dir);
  quarantine.delimiter = table.meta().delimiter;

  // Stale or already-indexed append cells abort the whole batch: appended
  // data is verified-then-persisted, so an out-of-order record is a batch
  // defect, not something to skip.
  auto check_fresh = [&](const GFUKey& key, std::string_view line) {
    int64_t k = key.cells[*dim_idx];
    if (old_max_k && k <= *old_max_k) {
      throw DataError("append rejected: record '" + std::string(line) + "' has " + append_dim + " cell " +
                      render_coord(adim, k) + " at or below the existing maximum " +
                      render_coord(adim, *old_max_k));
    }
    if (table.index().get(key)) {
      throw DataError("append rejected: cell " + render_key(key, policy) + " already has an index entry");
    }
  };

  ExternalGroupSorter sorter(dir / ".spill", sort_budget_bytes);
  MapResult mapped;
  try {
    mapped = run_map_phase(inputs, policy, schema, table.meta().delimiter, threads, sorter, quarantine,
                           check_fresh);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove_all(dir / ".spill", ec);
    throw;
  }

  IndexStore index = IndexStore::load(Table::index_path(dir));
  SegmentWriter writer(Table::segments_dir(dir), segment_target_bytes,
                       static_cast<uint32_t>(table.meta().segments.size()));
  uint64_t slices = 0;
  uint64_t written_records = 0;
  sorter.for_each_group([&](const GFUKey& key, std::vector<std::string>& lines) {
    index.put(key, reduce_slice(key, lines, writer, eval, schema, table.meta().delimiter));
    ++slices;
    written_records += lines.size();
  });
  if (mapped.any) {
    for (size_t d = 0; d < policy.size(); ++d) {
      const DimensionPolicy& dim = policy.dim(d);
      index.put_bounds(DimensionBounds{dim.name, coord_value(dim, mapped.bounds[d].first),
                                       coord_value(dim, mapped.bounds[d].second)});
    }
  }

  TableMeta meta = table.meta();
  meta.record_count += written_records;
  meta.quarantined_count += quarantine.count;
  auto new_files = writer.finish();
  meta.segments.insert(meta.segments.end(), new_files.begin(), new_files.end());
  finalize_table(dir, meta, schema, index);

  if (stats) {
    stats->records_in = mapped.records_in;
    stats->quarantined = quarantine.count;
    stats->slices = slices;
    stats->entries = index.size();
    for (const auto& [name, bytes] : new_files) stats->segment_bytes += bytes;
  }
  std::error_code ec;
  std::filesystem::remove_all(dir / ".spill", ec);
  return Table::open(dir);
}

Table rebuild_headers(const Table& table, SpecListPtr new_specs) {
  const std::filesystem::path& dir = table.dir();
  BuildLock lock(dir);
  if (!new_specs) throw DataError("rebuild_headers needs a spec list");
  ArgEvaluator eval(new_specs, table.schema());

  IndexStore rebuilt(table.index().policy(), new_specs);
  std::vector<Split> splits = enumerate_splits(table.segments(), std::numeric_limits<uint64_t>::max());
  std::vector<double> args;
  for (const auto& [key, value] : table.index().entries()) {
    Header header(new_specs);
    std::vector<SliceLocation> one = {value.location};
    SlicePlan plan = filter_splits(table.segments(), one, splits);
    ReadStats stats;
    for (const auto& sp : plan.chosen) {
      read_split(table.segments(), sp, [&](std::string_view line) {
        eval.eval(RecordView(line, table.meta().delimiter), table.schema(), args);
        header.accumulate(args);
      }, stats);
    }
    rebuilt.put(key, GFUValue{std::move(header), value.location});
  }
  for (const auto& dim : table.index().policy().dims()) {
    if (auto b = table.index().get_bounds(dim.name)) rebuilt.put_bounds(*b);
  }

  TableMeta meta = table.meta();
  meta.precompute.clear();
  for (const auto& spec : *new_specs) meta.precompute.push_back(spec.to_string());
  finalize_table(dir, meta, table.schema(), rebuilt);
  return Table::open(dir);
}

}  // namespace dgf
