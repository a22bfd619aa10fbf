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

#include "dgf/query.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <future>

#include <json.hpp>
#include <unordered_map>

#include "dgf/text.hpp"

namespace dgf {

namespace {

// Requests are answerable from headers when every base spec they need is in
// the stored list.
bool derivable(const std::vector<AggRequest>& requests, const SpecList& stored) {
  for (const auto& req : requests) {
    for (const auto& need : req.required_specs()) {
      if (std::find(stored.begin(), stored.end(), need) == stored.end()) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<GFUKey> QueryPlan::inner_keys(const SplittingPolicy& policy) const {
  std::vector<GFUKey> out;
  if (box.empty) return out;
  std::vector<Range> ranges;
  for (const auto& ax : box.axes) {
    if (ax.inner_hi_ex <= ax.inner_lo) return out;
    ranges.push_back(Range{coord_value(policy.dim(ranges.size()), ax.inner_lo),
                           coord_value(policy.dim(ranges.size()), ax.inner_hi_ex)});
  }
  Decomposition d = decompose(ranges, policy);
  out = std::move(d.inner);
  return out;
}

std::vector<GFUKey> QueryPlan::boundary_keys(const SplittingPolicy& policy) const {
  std::vector<GFUKey> out;
  if (box.empty) return out;
  std::vector<Range> ranges;
  for (size_t i = 0; i < box.axes.size(); ++i) {
    ranges.push_back(Range{coord_value(policy.dim(i), box.axes[i].lo),
                           coord_value(policy.dim(i), box.axes[i].hi_ex)});
  }
  // All cells of the read region, reclassified against this plan's box.
  Decomposition d = decompose(ranges, policy);
  for (auto& key : d.inner) {
    if (classify(key, box) == CellClass::kBoundary) out.push_back(std::move(key));
  }
  for (auto& key : d.boundary) {
    if (classify(key, box) == CellClass::kBoundary) out.push_back(std::move(key));
  }
  std::sort(out.begin(), out.end());
  return out;
}

QueryEngine::QueryEngine(const Table& table, EngineOptions opts) : table_(table), opts_(opts) {
  if (opts_.split_size == 0) throw DataError("split size must be positive");
}

CompletedPredicate QueryEngine::complete_predicate(const RangePredicate& pred) const {
  const SplittingPolicy& policy = table_.index().policy();
  CompletedPredicate out;
  out.grid.resize(policy.size());

  std::vector<bool> used(pred.fields.size(), false);
  for (size_t d = 0; d < policy.size(); ++d) {
    const DimensionPolicy& dim = policy.dim(d);
    const FieldCondition* cond = nullptr;
    for (size_t i = 0; i < pred.fields.size(); ++i) {
      if (pred.fields[i].first == dim.name) {
        cond = &pred.fields[i].second;
        used[i] = true;
        break;
      }
    }
    if (cond && cond->eq_text) {
      throw DataError("indexed dimension '" + dim.name + "' cannot take a text condition");
    }
    auto bounds = table_.index().get_bounds(dim.name);
    double lo, hi;
    if (cond && cond->lo) {
      lo = *cond->lo;
    } else if (bounds) {
      lo = bounds->min_std;
    } else if (cond) {
      lo = dim.min;  // open lower side on an empty-bounds table: clamp to grid
    } else {
      out.empty = true;  // nothing stored and no condition: nothing to read
      return out;
    }
    if (cond && cond->hi) {
      hi = *cond->hi;
    } else if (bounds) {
      hi = bounds->max_std + dim.interval;
    } else {
      out.empty = true;
      return out;
    }
    out.grid[d] = Range{lo, hi};
  }
  for (size_t i = 0; i < pred.fields.size(); ++i) {
    if (!used[i]) out.residual.fields.push_back(pred.fields[i]);
  }
  return out;
}

QueryPlan QueryEngine::plan(const RangePredicate& pred, const Selection& sel) const {
  const IndexStore& index = table_.index();
  const SplittingPolicy& policy = index.policy();

  QueryPlan plan;
  plan.exact = pred;
  CompletedPredicate completed = complete_predicate(pred);
  if (completed.empty) {
    plan.box.empty = true;
    return plan;
  }
  plan.box = decompose_box(completed.grid, policy);
  plan.inner_cells = plan.box.inner_count();
  plan.boundary_cells = plan.box.boundary_count();
  if (plan.box.empty) return plan;

  // Headers answer inner cells only for pure aggregations over indexed
  // dimensions whose requests the stored specs cover; anything else (group
  // by, join, filter, residual conditions, underivable aggregates) scans the
  // whole read region.
  plan.header_assisted = sel.kind == Selection::Kind::kAggregate && completed.residual.fields.empty() &&
                         derivable(sel.aggregates, *index.specs());

  // Walk only the key slab intersecting the first axis.
  GFUKey slab_lo, slab_hi;
  slab_lo.cells = {plan.box.axes[0].lo};
  slab_hi.cells = {plan.box.axes[0].hi_ex};
  auto begin = index.entries().lower_bound(slab_lo);
  auto end = index.entries().lower_bound(slab_hi);
  for (auto it = begin; it != end; ++it) {
    switch (classify(it->first, plan.box)) {
      case CellClass::kOutside:
        break;
      case CellClass::kInner:
        plan.inner_slices.push_back(it->second.location);
        if (plan.header_assisted) {
          plan.inner_subresult = merge(plan.inner_subresult, it->second.header);
        } else {
          plan.read_slices.push_back(it->second.location);
        }
        break;
      case CellClass::kBoundary:
        plan.read_slices.push_back(it->second.location);
        break;
    }
  }
  return plan;
}

namespace {

// Per-split partial result, folded in split order so results do not depend
// on the thread count.
struct SplitResult {
  ReadStats stats;
  Header header;                                  // aggregation
  std::vector<std::string> rows;                  // filter/join
  std::map<std::string, Header> groups;           // group by
};

struct JoinTable {
  Schema schema;
  std::unordered_multimap<std::string, std::string> rows;
};

JoinTable load_join_table(const JoinSpec& spec) {
  JoinTable t;
  t.schema = Schema::load(spec.schema_file);
  size_t key_idx = t.schema.require(spec.on);
  for_each_record({spec.file}, [&](std::string_view line) {
    RecordView rec(line, spec.delimiter);
    t.rows.emplace(std::string(rec.field(key_idx)), std::string(line));
  });
  return t;
}

}  // namespace

QueryResult QueryEngine::execute(const QueryPlan& plan, const Selection& sel) const {
  const Schema& schema = table_.schema();
  char delim = table_.meta().delimiter;
  SpecListPtr stored_specs = table_.index().specs();

  QueryResult result;
  result.kind = sel.kind;
  result.metrics.inner_cells = plan.inner_cells;
  result.metrics.boundary_cells = plan.boundary_cells;

  PredicateMatcher matcher(plan.exact, schema);

  // Header-assisted aggregation accumulates boundary records into the stored
  // spec list so the merged inner sub-result and the scan side stay
  // mergeable. A demoted (region-scan) aggregation instead accumulates
  // exactly what the requests need, which may not be stored at all.
  SpecListPtr agg_specs;
  std::optional<ArgEvaluator> agg_eval;
  std::optional<ArgEvaluator> group_eval;
  SpecListPtr group_specs;
  size_t group_field_idx = 0;
  std::optional<JoinTable> join_table;
  size_t join_key_idx = 0;

  switch (sel.kind) {
    case Selection::Kind::kAggregate: {
      if (plan.header_assisted) {
        agg_specs = stored_specs;
      } else {
        SpecList needed;
        for (const auto& req : sel.aggregates) {
          for (const auto& spec : req.required_specs()) {
            if (std::find(needed.begin(), needed.end(), spec) == needed.end()) needed.push_back(spec);
          }
        }
        agg_specs = std::make_shared<const SpecList>(std::move(needed));
      }
      agg_eval.emplace(agg_specs, schema);
      break;
    }
    case Selection::Kind::kGroupBy: {
      group_field_idx = schema.require(sel.group_field);
      group_specs = std::make_shared<const SpecList>(sel.group_aggregate.required_specs());
      group_eval.emplace(group_specs, schema);
      break;
    }
    case Selection::Kind::kJoin:
      join_table = load_join_table(sel.join);
      join_key_idx = schema.require(sel.join.on);
      break;
    case Selection::Kind::kFilter:
      break;
  }

  auto scan_one = [&](const SplitPlan& sp, SplitResult& out) {
    std::vector<double> args;
    if (sel.kind == Selection::Kind::kAggregate) out.header = Header(agg_specs);
    read_split(table_.segments(), sp, [&](std::string_view line) {
      RecordView rec(line, delim);
      if (!matcher.matches(rec)) return;
      switch (sel.kind) {
        case Selection::Kind::kAggregate:
          agg_eval->eval(rec, schema, args);
          out.header.accumulate(args);
          break;
        case Selection::Kind::kGroupBy: {
          auto [it, inserted] = out.groups.try_emplace(std::string(rec.field(group_field_idx)));
          if (inserted) it->second = Header(group_specs);
          group_eval->eval(rec, schema, args);
          it->second.accumulate(args);
          break;
        }
        case Selection::Kind::kFilter:
          out.rows.emplace_back(line);
          break;
        case Selection::Kind::kJoin: {
          auto [from, to] = join_table->rows.equal_range(std::string(rec.field(join_key_idx)));
          for (auto it = from; it != to; ++it) {
            std::string joined(line);
            joined += sel.join.delimiter;
            joined += it->second;
            out.rows.push_back(std::move(joined));
          }
          break;
        }
      }
    }, out.stats);
  };

  std::vector<Split> splits = enumerate_splits(table_.segments(), opts_.split_size);
  SlicePlan slice_plan = filter_splits(table_.segments(), plan.read_slices, splits);

  std::vector<SplitResult> partials(slice_plan.chosen.size());
  int workers = opts_.threads > 0 ? opts_.threads : 4;
  if (workers <= 1 || slice_plan.chosen.size() <= 1) {
    for (size_t i = 0; i < slice_plan.chosen.size(); ++i) scan_one(slice_plan.chosen[i], partials[i]);
  } else {
    std::deque<std::pair<size_t, std::future<void>>> in_flight;
    for (size_t i = 0; i < slice_plan.chosen.size(); ++i) {
      in_flight.emplace_back(i, std::async(std::launch::async, [&, i] {
        scan_one(slice_plan.chosen[i], partials[i]);
      }));
      if (in_flight.size() >= static_cast<size_t>(workers)) {
        in_flight.front().second.get();
        in_flight.pop_front();
      }
    }
    while (!in_flight.empty()) {
      in_flight.front().second.get();
      in_flight.pop_front();
    }
  }

  Header merged = plan.inner_subresult;
  std::map<std::string, Header> group_headers;
  for (auto& partial : partials) {
    result.metrics.splits_chosen += partial.stats.splits_chosen;
    result.metrics.records_read += partial.stats.records_read;
    result.metrics.bytes_read += partial.stats.bytes_read;
    result.fragments_read.insert(result.fragments_read.end(), partial.stats.fragments_read.begin(),
                                 partial.stats.fragments_read.end());
    switch (sel.kind) {
      case Selection::Kind::kAggregate:
        merged = merge(merged, partial.header);
        break;
      case Selection::Kind::kGroupBy:
        for (auto& [key, header] : partial.groups) {
          auto [it, inserted] = group_headers.try_emplace(key, header);
          if (!inserted) it->second = merge(it->second, header);
        }
        break;
      case Selection::Kind::kFilter:
      case Selection::Kind::kJoin:
        result.rows.insert(result.rows.end(), std::make_move_iterator(partial.rows.begin()),
                           std::make_move_iterator(partial.rows.end()));
        break;
    }
  }
  result.metrics.slices_read = slice_plan.slice_count;

  if (sel.kind == Selection::Kind::kAggregate) {
    if (merged.is_identity()) merged = Header(agg_specs);  // empty region
    for (const auto& req : sel.aggregates) {
      result.aggregates.emplace_back(req.to_string(), finalize(merged, req));
    }
  } else if (sel.kind == Selection::Kind::kGroupBy) {
    for (const auto& [key, header] : group_headers) {
      result.groups.emplace(key, finalize(header, sel.group_aggregate));
    }
  }
  return result;
}

QueryResult QueryEngine::run(const RangePredicate& pred, const Selection& sel) const {
  return execute(plan(pred, sel), sel);
}

std::string QueryEngine::explain(const QueryPlan& plan) const {
  nlohmann::json j;
  j["header_assisted"] = plan.header_assisted;
  j["inner_cells"] = plan.inner_cells;
  j["boundary_cells"] = plan.boundary_cells;
  auto slice_json = [](const SliceLocation& s) {
    return nlohmann::json{{"file", s.file}, {"start", s.start}, {"end", s.end}};
  };
  nlohmann::json reads = nlohmann::json::array();
  for (const auto& s : plan.read_slices) reads.push_back(slice_json(s));
  j["read_slices"] = reads;
  nlohmann::json inner = nlohmann::json::array();
  for (const auto& s : plan.inner_slices) inner.push_back(slice_json(s));
  j["inner_slices"] = inner;

  std::vector<Split> splits = enumerate_splits(table_.segments(), opts_.split_size);
  SlicePlan slice_plan = filter_splits(table_.segments(), plan.read_slices, splits);
  nlohmann::json chosen = nlohmann::json::array();
  for (const auto& sp : slice_plan.chosen) {
    nlohmann::json frags = nlohmann::json::array();
    for (const auto& f : sp.fragments) frags.push_back({{"begin", f.begin}, {"end", f.end}});
    chosen.push_back({{"file", sp.split.file},
                      {"split_start", sp.split.start},
                      {"split_end", sp.split.end},
                      {"fragments", frags}});
  }
  j["splits"] = chosen;
  return j.dump(2);
}

}  // namespace dgf
