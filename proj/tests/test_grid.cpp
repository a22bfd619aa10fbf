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

#include <doctest.h>

#include <random>
#include <set>

#include "dgf/date.hpp"
#include "dgf/grid.hpp"

using namespace dgf;

namespace {

std::set<std::string> rendered(const std::vector<GFUKey>& keys, const SplittingPolicy& p) {
  std::set<std::string> out;
  for (const auto& k : keys) out.insert(render_key(k, p));
  return out;
}

}  // namespace

TEST_CASE("parse_policy accepts the two-dimension example") {
  auto p = SplittingPolicy::parse("A=1_3,B=11_2");
  REQUIRE(p.size() == 2);
  CHECK(p.dim(0).name == "A");
  CHECK(p.dim(0).min == 1);
  CHECK(p.dim(0).interval == 3);
  CHECK(p.dim(1).name == "B");
  CHECK(p.dim(1).min == 11);
  CHECK(p.dim(1).interval == 2);
  CHECK(p.spec_string() == "A=1_3,B=11_2");
}

TEST_CASE("parse_policy unit grid") {
  auto p = SplittingPolicy::parse("X=0_1");
  REQUIRE(p.size() == 1);
  CHECK(p.dim(0).min == 0);
  CHECK(p.dim(0).interval == 1);
}

TEST_CASE("parse_policy rejects bad entries naming the offender") {
  CHECK_THROWS_WITH_AS(SplittingPolicy::parse("A=1_0"), doctest::Contains("A=1_0"), DataError);
  CHECK_THROWS_AS(SplittingPolicy::parse("A=1_3,A=2_4"), DataError);
  CHECK_THROWS_WITH_AS(SplittingPolicy::parse("B=nope"), doctest::Contains("B=nope"), DataError);
  CHECK_THROWS_AS(SplittingPolicy::parse(""), DataError);
  CHECK_THROWS_AS(SplittingPolicy::parse("A=1_-3"), DataError);
}

TEST_CASE("parse_policy date dimensions") {
  auto p = SplittingPolicy::parse("time=2012-12-01_30d,A=1_3");
  REQUIRE(p.size() == 2);
  CHECK(p.dim(0).kind == DimKind::kDate);
  CHECK(p.dim(0).min == static_cast<double>(parse_iso_date("2012-12-01", "test")));
  CHECK(p.dim(0).interval == 30);
  CHECK(p.spec_string() == "time=2012-12-01_30d,A=1_3");
  CHECK_THROWS_AS(SplittingPolicy::parse("time=2012-12-01_30"), DataError);
}

TEST_CASE("standardize returns the previous grid coordinate") {
  DimensionPolicy b{"B", DimKind::kNumeric, 11, 2};
  CHECK(standardize(14, b) == 13);  // the <1,14,0.1> record sits in 13<=B<15
  DimensionPolicy a{"A", DimKind::kNumeric, 1, 3};
  CHECK(standardize(1, a) == 1);
  CHECK(standardize(5, a) == 4);
  CHECK(standardize(4, a) == 4);  // left-closed edge
  CHECK(standardize(3.999, a) == 1);
  CHECK_THROWS_AS(standardize(0.5, a), DataError);
}

TEST_CASE("standardize bracketing and idempotence on random values") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 2000; ++i) {
    DimensionPolicy dim{"x", DimKind::kNumeric, -50 + 100 * (double(rng() >> 11) * 0x1.0p-53),
                        0.01 + 10 * (double(rng() >> 11) * 0x1.0p-53)};
    double v = dim.min + 1000 * (double(rng() >> 11) * 0x1.0p-53);
    double s = standardize(v, dim);
    CHECK(s <= v);
    CHECK(v < s + dim.interval);
    CHECK(standardize(s, dim) == s);
  }
}

TEST_CASE("gfu_key renders underscore-joined cell corners") {
  auto p = SplittingPolicy::parse("A=1_3,B=11_2");
  std::vector<double> first = {1, 14};
  CHECK(render_key(gfu_key(first, p), p) == "1_13");
  std::vector<double> mid = {7, 13};
  CHECK(render_key(gfu_key(mid, p), p) == "7_13");
  std::vector<double> derived = {12, 16};
  CHECK(render_key(gfu_key(derived, p), p) == "10_15");
  std::vector<double> wrong_count = {1};
  CHECK_THROWS_AS(gfu_key(wrong_count, p), DataError);
  std::vector<double> below = {0, 14};
  CHECK_THROWS_AS(gfu_key(below, p), DataError);
}

TEST_CASE("epoch day arithmetic against known dates") {
  CHECK(parse_iso_date("1970-01-01", "t") == 0);
  CHECK(parse_iso_date("1970-01-02", "t") == 1);
  CHECK(parse_iso_date("1992-03-01", "t") == 8095);   // 22*365 + 5 leaps + 31 + 29
  CHECK(parse_iso_date("2013-01-01", "t") == 15706);  // 43*365 + 11 leaps
  CHECK(format_iso_date(15706) == "2013-01-01");
  CHECK(format_iso_date(0) == "1970-01-01");
  CHECK(!try_parse_iso_date("2013-1-1"));
  CHECK(!try_parse_iso_date("2013-13-01"));
}

TEST_CASE("key rendering round-trips for numeric, fractional and date coordinates") {
  auto p = SplittingPolicy::parse("d=0_0.01,q=1_1,ship=1992-01-01_100d");
  std::vector<double> vals = {0.0734, 26, static_cast<double>(parse_iso_date("1993-06-05", "t"))};
  GFUKey key = gfu_key(vals, p);
  std::string text = render_key(key, p);
  // 1993-06-05 is day 521 past the minimum, so cell 5 starts at day 500.
  CHECK(text == "0.070000_26_" + format_iso_date(parse_iso_date("1992-01-01", "t") + 500));
  CHECK(parse_key(text, p) == key);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> v = {double(rng() % 10000) / 100.0, double(1 + rng() % 50),
                             static_cast<double>(parse_iso_date("1992-01-01", "t") + int64_t(rng() % 2500))};
    GFUKey k = gfu_key(v, p);
    CHECK(parse_key(render_key(k, p), p) == k);
  }
}

TEST_CASE("decompose splits the worked-example region into inner and boundary") {
  auto p = SplittingPolicy::parse("A=1_3,B=11_2");
  std::vector<Range> q = {{5, 12}, {12, 16}};
  Decomposition d = decompose(q, p);
  CHECK(rendered(d.inner, p) == std::set<std::string>{"7_13"});
  CHECK(rendered(d.boundary, p) ==
        std::set<std::string>{"4_11", "4_13", "4_15", "7_11", "7_15", "10_11", "10_13", "10_15"});

  CellBox box = decompose_box(q, p);
  CHECK(box.cell_count() == 9);
  CHECK(box.inner_count() == 1);
  CHECK(box.boundary_count() == 8);
  // read region {4 <= A < 13, 11 <= B < 17}
  CHECK(coord_value(p.dim(0), box.axes[0].lo) == 4);
  CHECK(coord_value(p.dim(0), box.axes[0].hi_ex) == 13);
  CHECK(coord_value(p.dim(1), box.axes[1].lo) == 11);
  CHECK(coord_value(p.dim(1), box.axes[1].hi_ex) == 17);
}

TEST_CASE("decompose of one exact cell is pure inner") {
  auto p = SplittingPolicy::parse("A=1_3,B=11_2");
  std::vector<Range> q = {{1, 4}, {11, 13}};
  Decomposition d = decompose(q, p);
  CHECK(rendered(d.inner, p) == std::set<std::string>{"1_11"});
  CHECK(d.boundary.empty());
}

TEST_CASE("decompose of a strictly interior sub-cell region is pure boundary") {
  auto p = SplittingPolicy::parse("A=1_3,B=11_2");
  std::vector<Range> q = {{2, 3}, {11, 13}};
  Decomposition d = decompose(q, p);
  CHECK(d.inner.empty());
  CHECK(rendered(d.boundary, p) == std::set<std::string>{"1_11"});
}

TEST_CASE("decompose of an empty range is empty") {
  auto p = SplittingPolicy::parse("A=1_3,B=11_2");
  std::vector<Range> q = {{5, 5}, {12, 16}};
  Decomposition d = decompose(q, p);
  CHECK(d.inner.empty());
  CHECK(d.boundary.empty());
}

// Brute-force partition oracle: every cell intersecting the region is in
// exactly one of inner/boundary, non-intersecting cells in neither, and
// inner cells are exactly the fully contained ones.
TEST_CASE("decompose partition matches brute-force cell enumeration") {
  std::mt19937_64 rng(123);
  auto draw = [&](double lo, double hi) { return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53); };
  for (int trial = 0; trial < 300; ++trial) {
    double min_a = std::floor(draw(-5, 5));
    double min_b = std::floor(draw(-5, 5));
    double int_a = 1 + double(rng() % 4);
    double int_b = 1 + double(rng() % 3);
    SplittingPolicy p({{"a", DimKind::kNumeric, min_a, int_a}, {"b", DimKind::kNumeric, min_b, int_b}});
    double lo_a = draw(min_a, min_a + 20), hi_a = draw(min_a, min_a + 20);
    double lo_b = draw(min_b, min_b + 20), hi_b = draw(min_b, min_b + 20);
    std::vector<Range> q = {{lo_a, hi_a}, {lo_b, hi_b}};
    Decomposition d = decompose(q, p);

    std::set<GFUKey> inner(d.inner.begin(), d.inner.end());
    std::set<GFUKey> boundary(d.boundary.begin(), d.boundary.end());
    for (const auto& k : inner) CHECK(!boundary.count(k));

    bool empty_query = !(hi_a > lo_a) || !(hi_b > lo_b);
    std::set<GFUKey> expect_inner, expect_boundary;
    if (!empty_query) {
      for (int64_t ka = 0; ka < 30; ++ka) {
        for (int64_t kb = 0; kb < 30; ++kb) {
          double a0 = min_a + double(ka) * int_a, a1 = a0 + int_a;
          double b0 = min_b + double(kb) * int_b, b1 = b0 + int_b;
          bool intersects = a0 < hi_a && a1 > lo_a && b0 < hi_b && b1 > lo_b;
          bool contained = a0 >= lo_a && a1 <= hi_a && b0 >= lo_b && b1 <= hi_b;
          if (!intersects) continue;
          GFUKey k{{ka, kb}};
          if (contained) expect_inner.insert(k);
          else expect_boundary.insert(k);
        }
      }
    }
    CHECK(inner == expect_inner);
    CHECK(boundary == expect_boundary);
  }
}

// Containment oracle on random records: records matching the predicate land
// in inner-or-boundary cells, and every record keyed to an inner cell
// matches the predicate.
TEST_CASE("decompose containment on random records") {
  auto p = SplittingPolicy::parse("a=0_3,b=0_2");
  std::mt19937_64 rng(9);
  std::vector<Range> q = {{4, 19}, {3, 11}};
  CellBox box = decompose_box(q, p);
  for (int i = 0; i < 5000; ++i) {
    double a = double(rng() % 3000) / 100.0;
    double b = double(rng() % 2000) / 100.0;
    std::vector<double> vals = {a, b};
    GFUKey key = gfu_key(vals, p);
    bool matches = a >= 4 && a < 19 && b >= 3 && b < 11;
    CellClass cls = classify(key, box);
    if (matches) CHECK(cls != CellClass::kOutside);
    if (cls == CellClass::kInner) CHECK(matches);
  }
}

TEST_CASE("classify agrees with materialized decompose") {
  auto p = SplittingPolicy::parse("A=1_3,B=11_2");
  std::vector<Range> q = {{5, 12}, {12, 16}};
  CellBox box = decompose_box(q, p);
  Decomposition d = decompose(q, p);
  for (const auto& k : d.inner) CHECK(classify(k, box) == CellClass::kInner);
  for (const auto& k : d.boundary) CHECK(classify(k, box) == CellClass::kBoundary);
  GFUKey outside{{0, 0}};
  CHECK(classify(outside, box) == CellClass::kOutside);
}

TEST_CASE("query-side clamp of a lower bound below the grid minimum") {
  auto p = SplittingPolicy::parse("A=1_3");
  std::vector<Range> q = {{-100, 5}};
  CellBox box = decompose_box(q, p);
  CHECK(!box.empty);
  CHECK(coord_value(p.dim(0), box.axes[0].lo) == 1);
  CHECK(box.cell_count() == 2);  // [1,4) and [4,7)
}
