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

#include "dgf/schema.hpp"

#include <fstream>
#include <set>

#include "dgf/date.hpp"
#include "dgf/text.hpp"

namespace dgf {

Schema::Schema(std::vector<Field> fields) : fields_(std::move(fields)) {
  std::set<std::string> seen;
  for (const auto& f : fields_) {
    if (f.name.empty()) throw DataError("schema: empty field name");
    if (!seen.insert(f.name).second) throw DataError("schema: duplicate field '" + f.name + "'");
  }
}

Schema Schema::parse(std::string_view text) {
  std::vector<Field> fields;
  for (std::string_view line : split(text, '\n')) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    size_t colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw DataError("schema line '" + std::string(line) + "' is not name:kind");
    }
    Field f;
    f.name = std::string(trim(line.substr(0, colon)));
    std::string_view kind = trim(line.substr(colon + 1));
    if (kind == "numeric") f.kind = FieldKind::kNumeric;
    else if (kind == "date") f.kind = FieldKind::kDate;
    else if (kind == "text") f.kind = FieldKind::kText;
    else throw DataError("schema field '" + f.name + "' has unknown kind '" + std::string(kind) + "'");
    fields.push_back(std::move(f));
  }
  if (fields.empty()) throw DataError("schema: no fields");
  return Schema(std::move(fields));
}

Schema Schema::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open schema file " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text);
}

void Schema::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw DataError("cannot write schema file " + file.string());
  out << to_string();
}

std::string Schema::to_string() const {
  std::string out;
  for (const auto& f : fields_) {
    out += f.name;
    out += ':';
    switch (f.kind) {
      case FieldKind::kNumeric: out += "numeric"; break;
      case FieldKind::kDate: out += "date"; break;
      case FieldKind::kText: out += "text"; break;
    }
    out += '\n';
  }
  return out;
}

std::optional<size_t> Schema::find(std::string_view name) const {
  for (size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i].name == name) return i;
  }
  return std::nullopt;
}

size_t Schema::require(std::string_view name) const {
  auto i = find(name);
  if (!i) throw DataError("unknown field '" + std::string(name) + "'");
  return *i;
}

RecordView::RecordView(std::string_view line, char delim) : line_(line) {
  size_t pos = 0;
  while (true) {
    size_t next = line.find(delim, pos);
    std::string_view piece =
        next == std::string_view::npos ? line.substr(pos) : line.substr(pos, next - pos);
    if (count_ < kInline) {
      fields_[count_] = piece;
    } else {
      extra_.push_back(piece);
    }
    ++count_;
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
}

std::string_view RecordView::field(size_t i) const {
  if (i >= count_) {
    throw DataError("record '" + std::string(line_) + "' is missing field #" + std::to_string(i + 1));
  }
  return i < kInline ? fields_[i] : extra_[i - kInline];
}

double RecordView::numeric(size_t i, const Schema& schema) const {
  std::string_view text = field(i);
  const Field& f = schema.field(i);
  switch (f.kind) {
    case FieldKind::kNumeric:
      return parse_double(text, "field '" + f.name + "'");
    case FieldKind::kDate:
      return static_cast<double>(parse_iso_date(text, "field '" + f.name + "'"));
    case FieldKind::kText:
      throw DataError("field '" + f.name + "' is text, not numeric");
  }
  return 0;
}

void for_each_record(const std::vector<std::filesystem::path>& files,
                     const std::function<void(std::string_view line)>& fn) {
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open record file " + file.string());
    char chunk[1 << 16];
    std::string carry;
    while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
      std::string_view data(chunk, static_cast<size_t>(in.gcount()));
      size_t pos = 0;
      while (true) {
        size_t nl = data.find('\n', pos);
        if (nl == std::string_view::npos) {
          carry.append(data.substr(pos));
          break;
        }
        if (carry.empty()) {
          fn(data.substr(pos, nl - pos));
        } else {
          carry.append(data.substr(pos, nl - pos));
          fn(carry);
          carry.clear();
        }
        pos = nl + 1;
      }
      if (in.gcount() < static_cast<std::streamsize>(sizeof(chunk))) break;
    }
    if (!carry.empty()) fn(carry);
  }
}

ArgEvaluator::ArgEvaluator(SpecListPtr specs, const Schema& schema) : specs_(std::move(specs)) {
  if (!specs_) throw DataError("ArgEvaluator needs a spec list");
  slots_.reserve(specs_->size());
  for (const auto& spec : *specs_) {
    Slot slot;
    if (spec.fn != AggFn::kCount) {
      slot.field_a = schema.require(spec.field_a);
      if (schema.field(slot.field_a).kind == FieldKind::kText) {
        throw DataError("aggregate argument '" + spec.field_a + "' must be numeric");
      }
      if (!spec.field_b.empty()) {
        slot.field_b = schema.require(spec.field_b);
        if (schema.field(slot.field_b).kind == FieldKind::kText) {
          throw DataError("aggregate argument '" + spec.field_b + "' must be numeric");
        }
      }
    }
    slots_.push_back(slot);
  }
}

void ArgEvaluator::eval(const RecordView& rec, const Schema& schema, std::vector<double>& args_out) const {
  args_out.resize(slots_.size());
  for (size_t i = 0; i < slots_.size(); ++i) {
    const Slot& s = slots_[i];
    if (s.field_a == SIZE_MAX) {
      args_out[i] = 0;
      continue;
    }
    double v = rec.numeric(s.field_a, schema);
    if (s.field_b != SIZE_MAX) v *= rec.numeric(s.field_b, schema);
    args_out[i] = v;
  }
}

}  // namespace dgf
