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

#include "dgf/grid.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "dgf/date.hpp"
#include "dgf/text.hpp"

namespace dgf {

namespace {

// Largest interval index we ever compute. Query upper bounds can be
// arbitrarily far above the data; counts saturate instead of overflowing.
constexpr int64_t kMaxK = int64_t(1) << 53;

constexpr double kMinNumericInterval = 1e-5;

int64_t clamp_k(double frac) {
  if (frac >= static_cast<double>(kMaxK)) return kMaxK;
  if (frac <= 0) return 0;
  return static_cast<int64_t>(frac);
}

}  // namespace

SplittingPolicy::SplittingPolicy(std::vector<DimensionPolicy> dims) : dims_(std::move(dims)) {
  std::set<std::string> seen;
  for (const auto& d : dims_) {
    if (d.name.empty()) throw DataError("splitting policy: empty dimension name");
    if (!(d.interval > 0)) {
      throw DataError("splitting policy: non-positive interval for dimension '" + d.name + "'");
    }
    if (d.kind == DimKind::kNumeric && d.interval < kMinNumericInterval) {
      throw DataError("splitting policy: interval below 1e-5 for dimension '" + d.name +
                      "' cannot be rendered losslessly at six decimals");
    }
    if (d.kind == DimKind::kDate && d.interval < 1) {
      throw DataError("splitting policy: date interval below one day for dimension '" + d.name + "'");
    }
    if (!seen.insert(d.name).second) {
      throw DataError("splitting policy: duplicate dimension name '" + d.name + "'");
    }
  }
}

SplittingPolicy SplittingPolicy::parse(std::string_view spec) {
  std::vector<DimensionPolicy> dims;
  for (std::string_view entry : split(spec, ',')) {
    entry = trim(entry);
    if (entry.empty()) throw DataError("splitting policy: empty entry in '" + std::string(spec) + "'");
    size_t eq = entry.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw DataError("splitting policy: malformed entry '" + std::string(entry) + "' (want name=min_interval)");
    }
    DimensionPolicy d;
    d.name = std::string(trim(entry.substr(0, eq)));
    std::string_view rest = trim(entry.substr(eq + 1));
    size_t us = rest.rfind('_');
    if (us == std::string_view::npos || us == 0 || us + 1 == rest.size()) {
      throw DataError("splitting policy: malformed entry '" + std::string(entry) + "' (want name=min_interval)");
    }
    std::string_view min_part = rest.substr(0, us);
    std::string_view interval_part = rest.substr(us + 1);
    if (auto day = try_parse_iso_date(min_part)) {
      d.kind = DimKind::kDate;
      d.min = static_cast<double>(*day);
      if (interval_part.back() != 'd') {
        throw DataError("splitting policy: date entry '" + std::string(entry) + "' needs a day-unit interval like 30d");
      }
      d.interval = static_cast<double>(
          parse_int(interval_part.substr(0, interval_part.size() - 1), "policy entry '" + std::string(entry) + "'"));
    } else {
      d.kind = DimKind::kNumeric;
      d.min = parse_double(min_part, "policy entry '" + std::string(entry) + "'");
      d.interval = parse_double(interval_part, "policy entry '" + std::string(entry) + "'");
    }
    if (!(d.interval > 0)) {
      throw DataError("splitting policy: non-positive interval in entry '" + std::string(entry) + "'");
    }
    dims.push_back(std::move(d));
  }
  return SplittingPolicy(std::move(dims));
}

std::string SplittingPolicy::spec_string() const {
  std::string out;
  for (size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    if (i) out += ',';
    out += d.name;
    out += '=';
    if (d.kind == DimKind::kDate) {
      out += format_iso_date(static_cast<int64_t>(d.min));
      out += '_';
      out += std::to_string(static_cast<int64_t>(d.interval));
      out += 'd';
    } else {
      out += format_double(d.min);
      out += '_';
      out += format_double(d.interval);
    }
  }
  return out;
}

std::optional<size_t> SplittingPolicy::find(std::string_view name) const {
  for (size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i].name == name) return i;
  }
  return std::nullopt;
}

int64_t standardize_k(double value, const DimensionPolicy& dim) {
  if (!(value >= dim.min)) {
    throw DataError("value " + format_double(value) + " below grid minimum " + format_double(dim.min) +
                    " on dimension '" + dim.name + "'");
  }
  double frac = std::floor((value - dim.min) / dim.interval);
  int64_t k = clamp_k(frac);
  // Guard the float division against landing one cell off on exact edges.
  while (k > 0 && coord_value(dim, k) > value) --k;
  while (coord_value(dim, k + 1) <= value && k < kMaxK) ++k;
  return k;
}

double standardize(double value, const DimensionPolicy& dim) {
  return coord_value(dim, standardize_k(value, dim));
}

std::string render_coord(const DimensionPolicy& dim, int64_t k) {
  double v = coord_value(dim, k);
  if (dim.kind == DimKind::kDate) return format_iso_date(static_cast<int64_t>(v));
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<int64_t>(v));
  }
  return format_fixed(v, 6);
}

int64_t parse_coord(const DimensionPolicy& dim, std::string_view text) {
  double v;
  if (dim.kind == DimKind::kDate) {
    v = static_cast<double>(parse_iso_date(text, "coordinate on '" + dim.name + "'"));
  } else {
    v = parse_double(text, "coordinate on '" + dim.name + "'");
  }
  // Nearest grid point; a rendered coordinate must sit on the grid up to
  // rendering precision (six decimals plus float noise).
  int64_t k = std::llround((v - dim.min) / dim.interval);
  if (k < 0) {
    throw DataError("coordinate '" + std::string(text) + "' below minimum on dimension '" + dim.name + "'");
  }
  double err = std::abs(coord_value(dim, k) - v);
  double tol = dim.kind == DimKind::kDate ? 0.0 : std::max(1e-6, std::abs(v) * 1e-9);
  if (err > tol) {
    throw DataError("'" + std::string(text) + "' is not a grid coordinate of dimension '" + dim.name + "'");
  }
  return k;
}

GFUKey gfu_key(std::span<const double> values, const SplittingPolicy& policy) {
  if (values.size() != policy.size()) {
    throw DataError("gfu_key: got " + std::to_string(values.size()) + " values for " +
                    std::to_string(policy.size()) + " policy dimensions");
  }
  GFUKey key;
  key.cells.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    key.cells.push_back(standardize_k(values[i], policy.dim(i)));
  }
  return key;
}

std::string render_key(const GFUKey& key, const SplittingPolicy& policy) {
  if (key.cells.size() != policy.size()) throw DataError("render_key: dimension count mismatch");
  std::string out;
  for (size_t i = 0; i < key.cells.size(); ++i) {
    if (i) out += '_';
    out += render_coord(policy.dim(i), key.cells[i]);
  }
  return out;
}

GFUKey parse_key(std::string_view text, const SplittingPolicy& policy) {
  // ISO date coordinates contain '-' but never '_', so '_' splits safely.
  auto parts = split(text, '_');
  if (parts.size() != policy.size()) {
    throw DataError("key '" + std::string(text) + "' has " + std::to_string(parts.size()) +
                    " coordinates, policy has " + std::to_string(policy.size()));
  }
  GFUKey key;
  key.cells.reserve(parts.size());
  for (size_t i = 0; i < parts.size(); ++i) {
    key.cells.push_back(parse_coord(policy.dim(i), parts[i]));
  }
  return key;
}

uint64_t CellBox::cell_count() const {
  if (empty) return 0;
  uint64_t n = 1;
  for (const auto& a : axes) {
    uint64_t w = static_cast<uint64_t>(a.hi_ex - a.lo);
    if (w != 0 && n > std::numeric_limits<uint64_t>::max() / w) return std::numeric_limits<uint64_t>::max();
    n *= w;
  }
  return n;
}

uint64_t CellBox::inner_count() const {
  if (empty) return 0;
  uint64_t n = 1;
  for (const auto& a : axes) {
    if (a.inner_hi_ex <= a.inner_lo) return 0;
    uint64_t w = static_cast<uint64_t>(a.inner_hi_ex - a.inner_lo);
    if (n > std::numeric_limits<uint64_t>::max() / w) return std::numeric_limits<uint64_t>::max();
    n *= w;
  }
  return n;
}

uint64_t CellBox::boundary_count() const {
  uint64_t total = cell_count();
  uint64_t inner = inner_count();
  return total == std::numeric_limits<uint64_t>::max() ? total : total - inner;
}

CellBox decompose_box(std::span<const Range> ranges, const SplittingPolicy& policy) {
  if (ranges.size() != policy.size()) {
    throw DataError("decompose: got " + std::to_string(ranges.size()) + " ranges for " +
                    std::to_string(policy.size()) + " policy dimensions");
  }
  CellBox box;
  box.axes.resize(policy.size());
  box.empty = false;
  for (size_t i = 0; i < policy.size(); ++i) {
    const DimensionPolicy& dim = policy.dim(i);
    double lo = std::max(ranges[i].lo, dim.min);  // query-time clamp
    double hi = ranges[i].hi;
    if (!(hi > lo)) {
      box.empty = true;
      return box;
    }
    CellBox::Axis& ax = box.axes[i];
    ax.lo = standardize_k(lo, dim);
    int64_t kh = standardize_k(hi, dim);
    bool hi_on_grid = coord_value(dim, kh) == hi;
    ax.hi_ex = hi_on_grid ? kh : kh + 1;
    ax.inner_lo = coord_value(dim, ax.lo) == lo ? ax.lo : ax.lo + 1;
    ax.inner_hi_ex = hi_on_grid ? ax.hi_ex : ax.hi_ex - 1;
  }
  return box;
}

CellClass classify(const GFUKey& key, const CellBox& box) {
  if (box.empty || key.cells.size() != box.axes.size()) return CellClass::kOutside;
  bool inner = true;
  for (size_t i = 0; i < key.cells.size(); ++i) {
    const auto& a = box.axes[i];
    int64_t k = key.cells[i];
    if (k < a.lo || k >= a.hi_ex) return CellClass::kOutside;
    if (k < a.inner_lo || k >= a.inner_hi_ex) inner = false;
  }
  return inner ? CellClass::kInner : CellClass::kBoundary;
}

Decomposition decompose(std::span<const Range> ranges, const SplittingPolicy& policy, uint64_t max_cells) {
  CellBox box = decompose_box(ranges, policy);
  Decomposition out;
  if (box.empty) return out;
  if (box.cell_count() > max_cells) {
    throw DataError("decompose: region spans " + std::to_string(box.cell_count()) +
                    " cells, enumeration cap is " + std::to_string(max_cells));
  }
  GFUKey key;
  key.cells.resize(box.axes.size());
  for (auto& a : box.axes) {
    if (a.hi_ex <= a.lo) return out;  // unreachable once non-empty, kept for safety
  }
  std::vector<int64_t> cur;
  cur.reserve(box.axes.size());
  for (const auto& a : box.axes) cur.push_back(a.lo);
  while (true) {
    key.cells = cur;
    if (classify(key, box) == CellClass::kInner) {
      out.inner.push_back(key);
    } else {
      out.boundary.push_back(key);
    }
    size_t i = box.axes.size();
    while (i > 0) {
      --i;
      if (++cur[i] < box.axes[i].hi_ex) break;
      cur[i] = box.axes[i].lo;
      if (i == 0) return out;
    }
  }
}

}  // namespace dgf
