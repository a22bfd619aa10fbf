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

#include "dgf/aggregates.hpp"

#include <algorithm>

#include "dgf/text.hpp"

namespace dgf {

namespace {

std::string_view fn_name(AggFn fn) {
  switch (fn) {
    case AggFn::kSum: return "sum";
    case AggFn::kCount: return "count";
    case AggFn::kMin: return "min";
    case AggFn::kMax: return "max";
  }
  return "?";
}

// Splits "fn(arg)" / "fn" into pieces; arg may be "a" or "a*b".
struct ParsedCall {
  std::string_view fn;
  std::string_view arg_a;
  std::string_view arg_b;
};

ParsedCall parse_call(std::string_view text) {
  text = trim(text);
  ParsedCall out;
  size_t open = text.find('(');
  if (open == std::string_view::npos) {
    out.fn = text;
    return out;
  }
  if (text.back() != ')') throw DataError("malformed aggregate '" + std::string(text) + "'");
  out.fn = trim(text.substr(0, open));
  std::string_view arg = trim(text.substr(open + 1, text.size() - open - 2));
  size_t star = arg.find('*');
  if (star == std::string_view::npos) {
    out.arg_a = trim(arg);
  } else {
    out.arg_a = trim(arg.substr(0, star));
    out.arg_b = trim(arg.substr(star + 1));
    if (out.arg_b.empty()) throw DataError("malformed aggregate argument '" + std::string(arg) + "'");
  }
  if (out.arg_a.empty()) throw DataError("malformed aggregate '" + std::string(text) + "'");
  return out;
}

}  // namespace

AggregateSpec AggregateSpec::parse(std::string_view text) {
  ParsedCall c = parse_call(text);
  AggregateSpec spec;
  if (c.fn == "sum") spec.fn = AggFn::kSum;
  else if (c.fn == "count") spec.fn = AggFn::kCount;
  else if (c.fn == "min") spec.fn = AggFn::kMin;
  else if (c.fn == "max") spec.fn = AggFn::kMax;
  else throw DataError("unsupported aggregate function '" + std::string(c.fn) + "' (additive functions only)");
  spec.field_a = std::string(c.arg_a);
  spec.field_b = std::string(c.arg_b);
  if (spec.fn == AggFn::kCount) {
    if (!spec.field_a.empty()) throw DataError("count takes no argument, got '" + std::string(text) + "'");
  } else {
    if (spec.field_a.empty()) throw DataError("aggregate '" + std::string(text) + "' needs an argument");
    if (spec.fn != AggFn::kSum && !spec.field_b.empty()) {
      throw DataError("product arguments are only supported under sum, got '" + std::string(text) + "'");
    }
  }
  return spec;
}

std::string AggregateSpec::to_string() const {
  std::string out(fn_name(fn));
  if (fn == AggFn::kCount) return out;
  out += '(';
  out += field_a;
  if (!field_b.empty()) {
    out += '*';
    out += field_b;
  }
  out += ')';
  return out;
}

SpecListPtr parse_spec_list(std::string_view comma_separated) {
  auto list = std::make_shared<SpecList>();
  for (std::string_view part : split(comma_separated, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    AggregateSpec spec = AggregateSpec::parse(part);
    if (std::find(list->begin(), list->end(), spec) != list->end()) {
      throw DataError("duplicate aggregate spec '" + spec.to_string() + "'");
    }
    list->push_back(std::move(spec));
  }
  return list;
}

Header::Header(SpecListPtr specs) : specs_(std::move(specs)) {
  if (!specs_) throw DataError("header needs a spec list");
  cells_.resize(specs_->size());
}

int64_t Header::record_count() const {
  if (!specs_) return 0;
  for (size_t i = 0; i < specs_->size(); ++i) {
    if ((*specs_)[i].fn == AggFn::kCount) return cells_[i].count;
  }
  return -1;  // no count spec stored
}

void Header::accumulate(std::span<const double> args) {
  if (!specs_) throw DataError("cannot accumulate into the identity header");
  if (args.size() != cells_.size()) throw DataError("accumulate: argument count mismatch");
  for (size_t i = 0; i < cells_.size(); ++i) {
    AggCell& c = cells_[i];
    // has_value only distinguishes an empty min/max; sums and counts have a
    // natural zero identity.
    switch ((*specs_)[i].fn) {
      case AggFn::kSum:
        c.num += args[i];
        break;
      case AggFn::kCount:
        c.count += 1;
        break;
      case AggFn::kMin:
        c.num = c.has_value ? std::min(c.num, args[i]) : args[i];
        c.has_value = true;
        break;
      case AggFn::kMax:
        c.num = c.has_value ? std::max(c.num, args[i]) : args[i];
        c.has_value = true;
        break;
    }
  }
}

bool Header::operator==(const Header& o) const {
  if (is_identity() != o.is_identity()) return false;
  if (is_identity()) return true;
  return *specs_ == *o.specs_ && cells_ == o.cells_;
}

Header merge(const Header& a, const Header& b) {
  if (a.is_identity()) return b;
  if (b.is_identity()) return a;
  if (a.specs_ != b.specs_ && !(*a.specs_ == *b.specs_)) {
    throw DataError("merge: headers built from different spec lists");
  }
  Header out = a;
  for (size_t i = 0; i < out.cells_.size(); ++i) {
    AggCell& c = out.cells_[i];
    const AggCell& d = b.cells_[i];
    switch ((*a.specs_)[i].fn) {
      case AggFn::kSum:
        c.num += d.num;
        break;
      case AggFn::kCount:
        c.count += d.count;
        break;
      case AggFn::kMin:
        if (d.has_value) c.num = c.has_value ? std::min(c.num, d.num) : d.num;
        c.has_value = c.has_value || d.has_value;
        break;
      case AggFn::kMax:
        if (d.has_value) c.num = c.has_value ? std::max(c.num, d.num) : d.num;
        c.has_value = c.has_value || d.has_value;
        break;
    }
  }
  return out;
}

AggRequest AggRequest::parse(std::string_view text) {
  ParsedCall c = parse_call(text);
  AggRequest req;
  if (c.fn == "avg") {
    req.fn = RequestFn::kAvg;
    if (c.arg_a.empty() || !c.arg_b.empty()) {
      throw DataError("avg takes a single field, got '" + std::string(text) + "'");
    }
    req.field_a = std::string(c.arg_a);
    return req;
  }
  AggregateSpec spec = AggregateSpec::parse(text);
  switch (spec.fn) {
    case AggFn::kSum: req.fn = RequestFn::kSum; break;
    case AggFn::kCount: req.fn = RequestFn::kCount; break;
    case AggFn::kMin: req.fn = RequestFn::kMin; break;
    case AggFn::kMax: req.fn = RequestFn::kMax; break;
  }
  req.field_a = spec.field_a;
  req.field_b = spec.field_b;
  return req;
}

std::string AggRequest::to_string() const {
  if (fn == RequestFn::kAvg) return "avg(" + field_a + ")";
  AggregateSpec spec;
  switch (fn) {
    case RequestFn::kSum: spec.fn = AggFn::kSum; break;
    case RequestFn::kCount: spec.fn = AggFn::kCount; break;
    case RequestFn::kMin: spec.fn = AggFn::kMin; break;
    case RequestFn::kMax: spec.fn = AggFn::kMax; break;
    case RequestFn::kAvg: break;
  }
  spec.field_a = field_a;
  spec.field_b = field_b;
  return spec.to_string();
}

SpecList AggRequest::required_specs() const {
  if (fn == RequestFn::kAvg) {
    return {AggregateSpec{AggFn::kSum, field_a, ""}, AggregateSpec{AggFn::kCount, "", ""}};
  }
  AggregateSpec spec;
  switch (fn) {
    case RequestFn::kSum: spec.fn = AggFn::kSum; break;
    case RequestFn::kCount: spec.fn = AggFn::kCount; break;
    case RequestFn::kMin: spec.fn = AggFn::kMin; break;
    case RequestFn::kMax: spec.fn = AggFn::kMax; break;
    case RequestFn::kAvg: break;
  }
  spec.field_a = field_a;
  spec.field_b = field_b;
  return {spec};
}

namespace {

std::optional<size_t> find_spec(const Header& h, const AggregateSpec& want) {
  if (h.is_identity()) return std::nullopt;
  const SpecList& specs = *h.specs();
  for (size_t i = 0; i < specs.size(); ++i) {
    if (specs[i] == want) return i;
  }
  return std::nullopt;
}

}  // namespace

std::optional<double> finalize(const Header& h, const AggRequest& req) {
  auto cell_of = [&](const AggregateSpec& spec) -> const AggCell& {
    auto idx = find_spec(h, spec);
    if (!idx) {
      throw NotCoveredError("aggregate " + req.to_string() + " is not derivable from stored specs");
    }
    return h.cells()[*idx];
  };
  if (req.fn == RequestFn::kAvg) {
    const AggCell& sum = cell_of({AggFn::kSum, req.field_a, ""});
    const AggCell& cnt = cell_of({AggFn::kCount, "", ""});
    if (cnt.count == 0) return 0.0;
    return sum.num / static_cast<double>(cnt.count);
  }
  SpecList needed = req.required_specs();
  const AggCell& c = cell_of(needed.front());
  switch (req.fn) {
    case RequestFn::kSum: return c.num;
    case RequestFn::kCount: return static_cast<double>(c.count);
    case RequestFn::kMin:
    case RequestFn::kMax:
      if (!c.has_value) return std::nullopt;
      return c.num;
    case RequestFn::kAvg: break;
  }
  return std::nullopt;
}

std::string serialize_header(const Header& h) {
  if (h.is_identity()) return "";
  std::string out;
  const SpecList& specs = *h.specs();
  for (size_t i = 0; i < specs.size(); ++i) {
    if (i) out += ';';
    out += specs[i].to_string();
    out += '=';
    const AggCell& c = h.cells()[i];
    switch (specs[i].fn) {
      case AggFn::kCount:
        out += std::to_string(c.count);
        break;
      case AggFn::kSum:
        out += format_double(c.num);
        break;
      case AggFn::kMin:
      case AggFn::kMax:
        out += c.has_value ? format_double(c.num) : "empty";
        break;
    }
  }
  return out;
}

Header parse_header(std::string_view text, const SpecListPtr& expected) {
  SpecList specs;
  std::vector<AggCell> cells;
  if (!trim(text).empty()) {
    for (std::string_view part : split(text, ';')) {
      size_t eq = part.rfind('=');
      if (eq == std::string_view::npos) {
        throw DataError("malformed header entry '" + std::string(part) + "'");
      }
      AggregateSpec spec = AggregateSpec::parse(part.substr(0, eq));
      std::string_view value = part.substr(eq + 1);
      AggCell cell;
      if (spec.fn == AggFn::kCount) {
        cell.count = parse_int(value, "header count");
      } else if (value == "empty") {
        cell.has_value = false;
      } else {
        cell.num = parse_double(value, "header value");
        cell.has_value = spec.fn == AggFn::kMin || spec.fn == AggFn::kMax;
      }
      specs.push_back(std::move(spec));
      cells.push_back(cell);
    }
  }
  Header h;
  if (expected) {
    if (*expected != specs) throw DataError("header '" + std::string(text) + "' does not match the table's spec list");
    h.specs_ = expected;
  } else {
    h.specs_ = std::make_shared<const SpecList>(std::move(specs));
  }
  h.cells_ = std::move(cells);
  return h;
}

}  // namespace dgf
