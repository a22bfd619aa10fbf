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

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgf/error.hpp"

namespace dgf {

enum class DimKind { kNumeric, kDate };

/// One axis of the grid: values at or above `min`, divided into uniform
/// half-open intervals [min + k*interval, min + (k+1)*interval).
/// Date dimensions are measured in epoch days; `interval` is a whole number
/// of days there.
struct DimensionPolicy {
  std::string name;
  DimKind kind = DimKind::kNumeric;
  double min = 0;
  double interval = 1;
};

/// Ordered per-dimension grid definitions. The dimension order is fixed at
/// creation and used everywhere a key is rendered or compared.
class SplittingPolicy {
 public:
  SplittingPolicy() = default;
  explicit SplittingPolicy(std::vector<DimensionPolicy> dims);

  /// Parses `name=min_interval(,name=min_interval)*`.
  /// Date dimensions use `name=YYYY-MM-DD_Nd` with N in days.
  static SplittingPolicy parse(std::string_view spec);

  /// Inverse of parse(); round-trips byte-exactly.
  std::string spec_string() const;

  size_t size() const { return dims_.size(); }
  const DimensionPolicy& dim(size_t i) const { return dims_[i]; }
  const std::vector<DimensionPolicy>& dims() const { return dims_; }
  std::optional<size_t> find(std::string_view name) const;

 private:
  std::vector<DimensionPolicy> dims_;
};

/// Cell coordinate: per-dimension interval index k, so the standardized
/// coordinate on dimension i is dims[i].min + cells[i]*dims[i].interval.
/// Keeping the integer index rather than the float coordinate makes
/// comparisons and neighbor arithmetic exact.
struct GFUKey {
  std::vector<int64_t> cells;

  auto operator<=>(const GFUKey&) const = default;
};

/// Interval index of the cell containing `value`. Throws DataError when the
/// value lies below the grid minimum (builds reject such records; queries
/// clamp before they get here).
int64_t standardize_k(double value, const DimensionPolicy& dim);

/// Lower coordinate of the cell containing `value`: min + k*interval.
/// Satisfies standardize(v) <= v < standardize(v) + interval.
double standardize(double value, const DimensionPolicy& dim);

/// Coordinate value of interval index k.
inline double coord_value(const DimensionPolicy& dim, int64_t k) {
  return dim.min + static_cast<double>(k) * dim.interval;
}

/// Rendering used in keys, bounds and the index file: integers without a
/// decimal point, other numerics with fixed six decimals, dates as ISO dates.
std::string render_coord(const DimensionPolicy& dim, int64_t k);

/// Inverse of render_coord. Rejects text that is not a grid coordinate.
int64_t parse_coord(const DimensionPolicy& dim, std::string_view text);

/// Key for one record's indexed values, in policy order.
GFUKey gfu_key(std::span<const double> values, const SplittingPolicy& policy);

/// Coordinates joined by underscore, e.g. "7_13".
std::string render_key(const GFUKey& key, const SplittingPolicy& policy);
GFUKey parse_key(std::string_view text, const SplittingPolicy& policy);

/// Half-open query interval [lo, hi) in dimension units. hi <= lo is empty.
struct Range {
  double lo = 0;
  double hi = 0;
};

/// Per-dimension cell index ranges of a query region. [lo, hi_ex) are the
/// cells whose ranges intersect the query; [inner_lo, inner_hi_ex) the cells
/// fully contained in it. The nine cells of a 3x3 read region live here as
/// three ranges, not as 9 materialized keys, so arbitrarily wide regions
/// stay O(dims).
struct CellBox {
  struct Axis {
    int64_t lo = 0;
    int64_t hi_ex = 0;
    int64_t inner_lo = 0;
    int64_t inner_hi_ex = 0;
  };
  std::vector<Axis> axes;
  bool empty = true;

  uint64_t cell_count() const;
  uint64_t inner_count() const;
  uint64_t boundary_count() const;
};

/// Cell ranges touched by a complete predicate (one Range per policy
/// dimension, policy order). Bounds below a dimension minimum are clamped.
CellBox decompose_box(std::span<const Range> ranges, const SplittingPolicy& policy);

enum class CellClass { kOutside, kInner, kBoundary };

CellClass classify(const GFUKey& key, const CellBox& box);

struct Decomposition {
  std::vector<GFUKey> inner;
  std::vector<GFUKey> boundary;
};

/// Materializes the inner and boundary cell sets of a query region. The two
/// sets partition the cells intersecting the region. Enumeration is capped;
/// use decompose_box/classify for planner-sized regions.
Decomposition decompose(std::span<const Range> ranges, const SplittingPolicy& policy,
                        uint64_t max_cells = 1u << 22);

}  // namespace dgf
