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

#include "dgf/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>

#include <json.hpp>

#include "dgf/date.hpp"
#include "dgf/text.hpp"

namespace dgf {

using nlohmann::json;

namespace {

double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int64_t uniform_int(std::mt19937_64& rng, int64_t lo, int64_t hi) {
  return lo + static_cast<int64_t>(next_unit(rng) * static_cast<double>(hi - lo + 1));
}

struct ZipfSampler {
  std::vector<double> cdf;

  explicit ZipfSampler(int64_t n, double s) {
    cdf.resize(static_cast<size_t>(n));
    double total = 0;
    for (int64_t k = 1; k <= n; ++k) {
      total += 1.0 / std::pow(static_cast<double>(k), s);
      cdf[static_cast<size_t>(k - 1)] = total;
    }
    for (double& c : cdf) c /= total;
  }

  int64_t draw(std::mt19937_64& rng) const {
    double u = next_unit(rng);
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    return static_cast<int64_t>(it - cdf.begin()) + 1;
  }
};

}  // namespace

GeneratorSpec GeneratorSpec::from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("generator spec is not valid JSON");
  GeneratorSpec spec;
  try {
    spec.count = j.at("count").get<uint64_t>();
    spec.seed = j.at("seed").get<uint64_t>();
    if (j.contains("delimiter")) {
      std::string d = j["delimiter"].get<std::string>();
      if (d.size() != 1) throw DataError("generator delimiter must be one character");
      spec.delimiter = d[0];
    }
    if (j.contains("order")) {
      std::string order = j["order"].get<std::string>();
      if (order == "by_time") spec.by_time = true;
      else if (order == "shuffled") spec.by_time = false;
      else throw DataError("generator order must be by_time or shuffled");
    }
    if (j.contains("time_field")) spec.time_field = j["time_field"].get<std::string>();
    for (const auto& f : j.at("fields")) {
      FieldGen g;
      g.name = f.at("name").get<std::string>();
      std::string dist = f.at("dist").get<std::string>();
      if (dist == "uniform_int") {
        g.dist = FieldGen::Dist::kUniformInt;
        g.kind = FieldKind::kNumeric;
        g.lo = f.at("lo").get<double>();
        g.hi = f.at("hi").get<double>();
      } else if (dist == "uniform_real") {
        g.dist = FieldGen::Dist::kUniformReal;
        g.kind = FieldKind::kNumeric;
        g.lo = f.at("lo").get<double>();
        g.hi = f.at("hi").get<double>();
        if (f.contains("decimals")) g.decimals = f["decimals"].get<int>();
      } else if (dist == "zipf") {
        g.dist = FieldGen::Dist::kZipf;
        g.kind = FieldKind::kNumeric;
        g.zipf_n = f.at("n").get<int64_t>();
        if (f.contains("s")) g.zipf_s = f["s"].get<double>();
      } else if (dist == "date_range") {
        g.dist = FieldGen::Dist::kDateRange;
        g.kind = FieldKind::kDate;
        g.date_start = parse_iso_date(f.at("start").get<std::string>(), "generator field " + g.name);
        g.date_days = f.at("days").get<int64_t>();
        if (g.date_days < 1) throw DataError("generator field '" + g.name + "' needs days >= 1");
      } else if (dist == "tag") {
        g.dist = FieldGen::Dist::kTag;
        g.kind = FieldKind::kText;
        g.prefix = f.contains("prefix") ? f["prefix"].get<std::string>() : g.name;
        g.lo = f.at("lo").get<double>();
        g.hi = f.at("hi").get<double>();
      } else {
        throw DataError("generator field '" + g.name + "' has unknown dist '" + dist + "'");
      }
      spec.fields.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("generator spec is malformed: ") + e.what());
  }
  if (spec.fields.empty()) throw DataError("generator spec lists no fields");
  return spec;
}

Schema GeneratorSpec::schema() const {
  std::vector<Field> out;
  out.reserve(fields.size());
  for (const auto& g : fields) out.push_back(Field{g.name, g.kind});
  return Schema(std::move(out));
}

void generate_records(const GeneratorSpec& spec, const std::filesystem::path& out_path) {
  const FieldGen* time_field = nullptr;
  for (const auto& g : spec.fields) {
    if (!spec.time_field.empty() ? g.name == spec.time_field : g.dist == FieldGen::Dist::kDateRange) {
      time_field = &g;
      break;
    }
  }
  if (spec.by_time && !time_field) {
    throw DataError("generator order by_time needs a date_range field");
  }

  std::vector<std::unique_ptr<ZipfSampler>> zipfs(spec.fields.size());
  for (size_t i = 0; i < spec.fields.size(); ++i) {
    if (spec.fields[i].dist == FieldGen::Dist::kZipf) {
      if (spec.fields[i].zipf_n < 1) throw DataError("zipf field needs n >= 1");
      zipfs[i] = std::make_unique<ZipfSampler>(spec.fields[i].zipf_n, spec.fields[i].zipf_s);
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::ofstream out(out_path, std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot write " + out_path.string());

  std::string line;
  for (uint64_t i = 0; i < spec.count; ++i) {
    line.clear();
    for (size_t f = 0; f < spec.fields.size(); ++f) {
      const FieldGen& g = spec.fields[f];
      if (f) line += spec.delimiter;
      switch (g.dist) {
        case FieldGen::Dist::kUniformInt:
          line += std::to_string(uniform_int(rng, static_cast<int64_t>(g.lo), static_cast<int64_t>(g.hi)));
          break;
        case FieldGen::Dist::kUniformReal:
          line += format_fixed(g.lo + next_unit(rng) * (g.hi - g.lo), g.decimals);
          break;
        case FieldGen::Dist::kZipf:
          line += std::to_string(zipfs[f]->draw(rng));
          break;
        case FieldGen::Dist::kDateRange: {
          int64_t day;
          if (spec.by_time && &g == time_field) {
            day = g.date_start + static_cast<int64_t>((i * static_cast<uint64_t>(g.date_days)) / spec.count);
          } else {
            day = g.date_start + uniform_int(rng, 0, g.date_days - 1);
          }
          line += format_iso_date(day);
          break;
        }
        case FieldGen::Dist::kTag:
          line += g.prefix;
          line += std::to_string(uniform_int(rng, static_cast<int64_t>(g.lo), static_cast<int64_t>(g.hi)));
          break;
      }
    }
    line += '\n';
    out << line;
  }
  out.flush();
  if (!out) throw DataError("write failure on " + out_path.string());

  std::filesystem::path schema_path = out_path;
  schema_path += ".schema";
  spec.schema().save(schema_path);
}

}  // namespace dgf
