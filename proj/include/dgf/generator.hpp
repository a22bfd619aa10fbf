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
#include <string>
#include <vector>

#include "dgf/schema.hpp"

namespace dgf {

/// Synthetic meter-style data. The same seed always produces byte-identical
/// output (the generator rolls its own value draws on top of mt19937_64, so
/// no standard-library distribution details leak into the bytes).
struct FieldGen {
  enum class Dist {
    kUniformInt,   // integers in [lo, hi]
    kUniformReal,  // reals in [lo, hi), fixed decimals
    kZipf,         // integers in [1, n], frequency ~ 1/rank^s
    kDateRange,    // days in [start, start + days)
    kTag,          // text: prefix + uniform integer in [lo, hi]
  };

  std::string name;
  FieldKind kind = FieldKind::kNumeric;
  Dist dist = Dist::kUniformInt;
  double lo = 0;
  double hi = 0;
  int decimals = 2;
  int64_t zipf_n = 0;
  double zipf_s = 1.0;
  int64_t date_start = 0;  // epoch days
  int64_t date_days = 1;
  std::string prefix;
};

struct GeneratorSpec {
  uint64_t count = 0;
  uint64_t seed = 0;
  char delimiter = ',';
  /// by_time generates the date field day-major (records of one day stored
  /// together, matching how meter feeds arrive); shuffled draws dates
  /// uniformly at random.
  bool by_time = true;
  std::string time_field;  // defaults to the first date field
  std::vector<FieldGen> fields;

  static GeneratorSpec from_json_text(const std::string& text);
  Schema schema() const;
};

/// Writes `count` records plus the `<out>.schema` sidecar.
void generate_records(const GeneratorSpec& spec, const std::filesystem::path& out);

}  // namespace dgf
