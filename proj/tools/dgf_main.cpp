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

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dgf/baseline.hpp"
#include "dgf/builder.hpp"
#include "dgf/date.hpp"
#include "dgf/generator.hpp"
#include "dgf/query.hpp"
#include "dgf/text.hpp"
#include "dgf/workload.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInconsistency = 4;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dgf::DataError("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

dgf::Schema schema_for_input(const std::filesystem::path& input, const std::string& explicit_schema) {
  if (!explicit_schema.empty()) return dgf::Schema::load(explicit_schema);
  std::filesystem::path sidecar = input;
  sidecar += ".schema";
  if (!std::filesystem::exists(sidecar)) {
    throw dgf::DataError("no schema: pass --schema or provide sidecar " + sidecar.string());
  }
  return dgf::Schema::load(sidecar);
}

struct GlobalOpts {
  std::string table_dir;
  uint64_t split_size = 1u << 20;  // desk-scale analog of the 64 MiB block
  int threads = 1;
  std::string format = "text";
};

void print_kv(const GlobalOpts& g, const std::vector<std::pair<std::string, std::string>>& kv) {
  if (g.format == "json") {
    nlohmann::json j;
    for (const auto& [k, v] : kv) {
      if (auto n = dgf::try_parse_int(v)) j[k] = *n;
      else j[k] = v;
    }
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& [k, v] : kv) std::cout << k << ": " << v << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DGF grid-file index engine"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--table-dir", g.table_dir, "Table directory");
  app.add_option("--split-size", g.split_size, "Split size in bytes (default 1 MiB)");
  app.add_option("--threads", g.threads, "Worker threads (0 = auto)");
  app.add_option("--format", g.format, "Output format: text|json")
      ->check(CLI::IsMember({"text", "json"}));

  // generate
  auto* gen = app.add_subcommand("generate", "Generate synthetic records from a spec");
  std::string gen_spec, gen_out;
  gen->add_option("--spec", gen_spec, "Generator spec JSON file")->required();
  gen->add_option("--out", gen_out, "Output record file")->required();

  // build
  auto* build = app.add_subcommand("build", "Build a table from record files");
  std::vector<std::string> build_inputs;
  std::string build_policy, build_precompute, build_schema, build_append_dim;
  uint64_t build_segment_bytes = 8ull << 20;
  double build_quarantine_max = 0.05;
  build->add_option("--input", build_inputs, "Input record file(s)")->required();
  build->add_option("--policy", build_policy, "Splitting policy, e.g. A=1_3,B=11_2")->required();
  build->add_option("--precompute", build_precompute, "Aggregates to pre-compute, e.g. sum(C),count");
  build->add_option("--schema", build_schema, "Schema sidecar (default <input>.schema)");
  build->add_option("--append-dim", build_append_dim, "Dimension the append path extends");
  build->add_option("--segment-size", build_segment_bytes, "Segment file roll-over size");
  build->add_option("--quarantine-max", build_quarantine_max, "Max quarantined fraction before abort");

  // append
  auto* append = app.add_subcommand("append", "Append a new time partition to a table");
  std::vector<std::string> append_inputs;
  append->add_option("--input", append_inputs, "Input record file(s)")->required();

  // query
  auto* query = app.add_subcommand("query", "Run a query against a table");
  std::string query_json, query_file, query_engine = "dgf";
  std::vector<std::string> query_scan_input;
  bool query_explain = false;
  query->add_option("--query", query_json, "Query JSON: {\"where\":{...},\"select\":{...}}");
  query->add_option("--query-file", query_file, "File holding the query JSON");
  query->add_option("--engine", query_engine, "dgf|scan|compact (scan/compact need --input)")
      ->check(CLI::IsMember({"dgf", "scan", "compact"}));
  query->add_option("--input", query_scan_input, "Raw record files for scan/compact engines");
  query->add_flag("--explain", query_explain, "Print the read plan instead of executing (dgf only)");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a selectivity workload across engines");
  std::string bench_workload;
  std::vector<std::string> bench_inputs;
  bench->add_option("--workload", bench_workload, "Workload JSON file")->required();
  bench->add_option("--input", bench_inputs, "Raw record files for compact/scan baselines")->required();

  // stats
  app.add_subcommand("stats", "Show table statistics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      dgf::GeneratorSpec spec = dgf::GeneratorSpec::from_json_text(slurp(gen_spec));
      dgf::generate_records(spec, gen_out);
      print_kv(g, {{"records", std::to_string(spec.count)}, {"out", gen_out}});
      return kExitOk;
    }

    if (build->parsed()) {
      if (g.table_dir.empty()) throw dgf::DataError("build needs --table-dir");
      dgf::BuildConfig cfg;
      cfg.policy = dgf::SplittingPolicy::parse(build_policy);
      cfg.precompute = dgf::parse_spec_list(build_precompute);
      cfg.schema = schema_for_input(build_inputs.front(), build_schema);
      cfg.segment_target_bytes = build_segment_bytes;
      cfg.quarantine_max_fraction = build_quarantine_max;
      cfg.append_dim = build_append_dim;
      cfg.threads = g.threads;
      dgf::BuildStats stats;
      std::vector<std::filesystem::path> inputs(build_inputs.begin(), build_inputs.end());
      dgf::build_index(inputs, cfg, g.table_dir, &stats);
      print_kv(g, {{"records_in", std::to_string(stats.records_in)},
                   {"quarantined", std::to_string(stats.quarantined)},
                   {"slices", std::to_string(stats.slices)},
                   {"entries", std::to_string(stats.entries)},
                   {"segment_bytes", std::to_string(stats.segment_bytes)}});
      return kExitOk;
    }

    if (append->parsed()) {
      if (g.table_dir.empty()) throw dgf::DataError("append needs --table-dir");
      dgf::Table table = dgf::Table::open(g.table_dir);
      dgf::BuildStats stats;
      std::vector<std::filesystem::path> inputs(append_inputs.begin(), append_inputs.end());
      dgf::append_batch(inputs, table, &stats, 256u << 20, g.threads);
      print_kv(g, {{"records_in", std::to_string(stats.records_in)},
                   {"quarantined", std::to_string(stats.quarantined)},
                   {"new_slices", std::to_string(stats.slices)},
                   {"entries", std::to_string(stats.entries)}});
      return kExitOk;
    }

    if (query->parsed()) {
      if (g.table_dir.empty() && query_engine == "dgf") throw dgf::DataError("query needs --table-dir");
      std::string text = !query_file.empty() ? slurp(query_file) : query_json;
      if (text.empty()) throw dgf::DataError("query needs --query or --query-file");
      nlohmann::json q = nlohmann::json::parse(text, nullptr, false);
      if (q.is_discarded() || !q.is_object()) throw dgf::DataError("query must be a JSON object");
      std::string where = q.contains("where") ? q["where"].dump() : "{}";
      std::string select = q.contains("select") ? q["select"].dump() : "{}";
      dgf::Selection sel = dgf::Selection::from_json_text(select);

      dgf::QueryResult result;
      if (query_engine == "dgf") {
        dgf::Table table = dgf::Table::open(g.table_dir);
        dgf::RangePredicate pred = dgf::RangePredicate::from_json_text(where, table.schema());
        dgf::QueryEngine engine(table, {g.split_size, g.threads});
        if (query_explain) {
          std::cout << engine.explain(engine.plan(pred, sel)) << "\n";
          return kExitOk;
        }
        result = engine.run(pred, sel);
      } else {
        if (query_scan_input.empty()) throw dgf::DataError(query_engine + " engine needs --input");
        dgf::Schema schema = schema_for_input(query_scan_input.front(), "");
        dgf::RangePredicate pred = dgf::RangePredicate::from_json_text(where, schema);
        std::vector<std::filesystem::path> files(query_scan_input.begin(), query_scan_input.end());
        if (query_engine == "scan") {
          result = dgf::scan_query(dgf::RecordSource{files}, schema, ',', pred, sel);
        } else {
          std::vector<std::string> dims;
          for (const auto& [field, cond] : pred.fields) dims.push_back(field);
          auto compact = dgf::CompactIndexTable::build(files, schema, ',', dims, g.split_size);
          result = compact.query(pred, sel);
        }
      }
      std::cout << (g.format == "json" ? result.to_json_text(2) + "\n" : result.to_text());
      return kExitOk;
    }

    if (bench->parsed()) {
      if (g.table_dir.empty()) throw dgf::DataError("bench needs --table-dir");
      dgf::Table table = dgf::Table::open(g.table_dir);
      std::vector<std::filesystem::path> inputs(bench_inputs.begin(), bench_inputs.end());
      dgf::WorkloadReport report =
          dgf::run_workload(table, inputs, slurp(bench_workload), g.split_size, g.threads);
      std::cout << (g.format == "json" ? report.to_json_text() : report.to_text());
      return kExitOk;
    }

    // stats
    if (g.table_dir.empty()) throw dgf::DataError("stats needs --table-dir");
    dgf::Table table = dgf::Table::open(g.table_dir);
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("policy", table.meta().policy_spec);
    kv.emplace_back("entries", std::to_string(table.index().size()));
    kv.emplace_back("records", std::to_string(table.meta().record_count));
    kv.emplace_back("quarantined", std::to_string(table.meta().quarantined_count));
    kv.emplace_back("segments", std::to_string(table.meta().segments.size()));
    kv.emplace_back("segment_bytes", std::to_string(table.segments().total_bytes()));
    kv.emplace_back("append_dim", table.meta().append_dim);
    for (const auto& dim : table.index().policy().dims()) {
      if (auto b = table.index().get_bounds(dim.name)) {
        auto show = [&](double v) {
          return dim.kind == dgf::DimKind::kDate ? dgf::format_iso_date(static_cast<int64_t>(v))
                                                 : dgf::format_double(v);
        };
        kv.emplace_back("bounds." + dim.name, show(b->min_std) + ".." + show(b->max_std));
      }
    }
    print_kv(g, kv);
    return kExitOk;
  } catch (const dgf::ConsistencyError& e) {
    std::cerr << "error (index/data inconsistency): " << e.what() << "\n";
    return kExitInconsistency;
  } catch (const dgf::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
