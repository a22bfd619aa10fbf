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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgf/error.hpp"

namespace dgf {

/// The additive functions a header can pre-compute. Only additive functions
/// merge without re-reading records, which is what makes inner cells
/// answerable from the index alone.
enum class AggFn { kSum, kCount, kMin, kMax };

/// One pre-computed aggregate: a function over a field or over the product
/// of two fields, e.g. sum(C), count, sum(num*price).
struct AggregateSpec {
  AggFn fn = AggFn::kCount;
  std::string field_a;  // empty for count
  std::string field_b;  // set only for product arguments

  static AggregateSpec parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const AggregateSpec&) const = default;
};

using SpecList = std::vector<AggregateSpec>;
using SpecListPtr = std::shared_ptr<const SpecList>;

SpecListPtr parse_spec_list(std::string_view comma_separated);

/// One accumulator slot. `has_value` distinguishes an empty min/max from a
/// real extremum; sums and counts start at zero.
struct AggCell {
  double num = 0;
  int64_t count = 0;
  bool has_value = false;

  bool operator==(const AggCell&) const = default;
};

/// The pre-computed aggregate accumulators of one slice (or of any record
/// multiset). A default-constructed Header is the merge identity for every
/// spec list. Headers are value types; accumulate and merge are pure over
/// the record stream, so parallel reductions may merge in any order.
class Header {
 public:
  Header() = default;  // identity
  explicit Header(SpecListPtr specs);

  bool is_identity() const { return specs_ == nullptr; }
  const SpecListPtr& specs() const { return specs_; }
  std::span<const AggCell> cells() const { return cells_; }
  int64_t record_count() const;

  /// Folds one record in: args[i] is the evaluated argument of spec i
  /// (ignored for count).
  void accumulate(std::span<const double> args);

  bool operator==(const Header&) const;

 private:
  friend Header merge(const Header&, const Header&);
  friend Header parse_header(std::string_view, const SpecListPtr&);

  SpecListPtr specs_;
  std::vector<AggCell> cells_;
};

/// Combines two partial headers built from the same spec list. Sums and
/// counts add, min/max take the extremum. Commutative and associative;
/// the identity header passes through.
Header merge(const Header& a, const Header& b);

/// What a query may ask of a header: the stored functions plus avg, which is
/// derived as sum/count.
enum class RequestFn { kSum, kCount, kMin, kMax, kAvg };

struct AggRequest {
  RequestFn fn = RequestFn::kCount;
  std::string field_a;
  std::string field_b;

  static AggRequest parse(std::string_view text);
  std::string to_string() const;

  /// Stored specs this request needs (avg needs sum + count).
  SpecList required_specs() const;

  bool operator==(const AggRequest&) const = default;
};

/// Extracts the requested scalar. Empty min/max yields nullopt; avg of an
/// empty header is 0 by convention (matching the scan result format).
/// Throws NotCoveredError when the header's spec list cannot answer.
std::optional<double> finalize(const Header& h, const AggRequest& req);

/// Serialized form used in the index file: ordered `fn(arg)=value` pairs
/// joined by ';'. Doubles use shortest round-trip rendering, counts are
/// plain integers and an empty min/max renders as the word `empty`.
std::string serialize_header(const Header& h);

/// Inverse of serialize_header. The spec list parsed from the text must
/// match `expected` when provided; otherwise a list is derived from the text.
Header parse_header(std::string_view text, const SpecListPtr& expected = nullptr);

}  // namespace dgf
