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

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgf/aggregates.hpp"
#include "dgf/error.hpp"

namespace dgf {

enum class FieldKind { kNumeric, kDate, kText };

struct Field {
  std::string name;
  FieldKind kind = FieldKind::kText;
};

/// Declared record layout. The sidecar format is one `name:kind` line per
/// field with kind in {numeric, date, text}.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Field> fields);

  static Schema parse(std::string_view text);
  static Schema load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
  std::string to_string() const;

  size_t size() const { return fields_.size(); }
  const Field& field(size_t i) const { return fields_[i]; }
  std::optional<size_t> find(std::string_view name) const;
  size_t require(std::string_view name) const;

 private:
  std::vector<Field> fields_;
};

/// One delimited record line, split into fields. Does not own the text.
/// Field views live inline up to kInline fields, so scanning millions of
/// records does not allocate.
class RecordView {
 public:
  RecordView(std::string_view line, char delim);

  std::string_view raw() const { return line_; }
  size_t size() const { return count_; }
  std::string_view field(size_t i) const;

  /// Numeric value of field i: plain number for numeric kinds, epoch days
  /// for dates. Throws DataError on a malformed value.
  double numeric(size_t i, const Schema& schema) const;

 private:
  static constexpr size_t kInline = 12;

  std::string_view line_;
  size_t count_ = 0;
  std::array<std::string_view, kInline> fields_;
  std::vector<std::string_view> extra_;
};

/// Streams newline-terminated records from a set of files. A final line
/// without a trailing newline still counts as a record.
void for_each_record(const std::vector<std::filesystem::path>& files,
                     const std::function<void(std::string_view line)>& fn);

/// Evaluates the argument of each aggregate spec against a record, resolving
/// field indexes once up front. Count specs evaluate to 0.
class ArgEvaluator {
 public:
  ArgEvaluator(SpecListPtr specs, const Schema& schema);

  const SpecListPtr& specs() const { return specs_; }

  /// args_out is resized to the spec count.
  void eval(const RecordView& rec, const Schema& schema, std::vector<double>& args_out) const;

 private:
  struct Slot {
    size_t field_a = SIZE_MAX;
    size_t field_b = SIZE_MAX;
  };
  SpecListPtr specs_;
  std::vector<Slot> slots_;
};

}  // namespace dgf
