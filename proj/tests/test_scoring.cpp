#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <random>

#include "oracles.hpp"
#include "scout/scoring.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

using namespace scout;

namespace {

std::array<double, kCriterionCount> weights_of(std::initializer_list<std::pair<CriterionId, double>> w) {
  std::array<double, kCriterionCount> out{};
  for (auto [c, v] : w) out[static_cast<std::size_t>(c)] = v;
  return out;
}

GeoPoint north_of(const GeoPoint& p, double meters) {
  return GeoPoint(p.lat() + meters / kEarthRadiusMeters * 180.0 / std::numbers::pi, p.lon());
}

GeoPoint east_of(const GeoPoint& p, double meters) {
  const double k = std::numbers::pi / 180.0;
  return GeoPoint(p.lat(), p.lon() + meters / (kEarthRadiusMeters * std::cos(p.lat() * k)) / k);
}

// Three-group fixture (est costs 900, 1500, 2800) and a few places.
synthetic::World three_group_world(std::vector<Place> places = {}) {
  return synthetic::World(Catalog(std::move(places),
                                  parse_blockgroups_csv(test::read_fixture("blockgroups_3.csv")),
                                  GeoPoint(33.75, -84.35)));
}

}  // namespace

TEST_CASE("hazen percentiles") {
  const std::vector<double> v = {100, 200, 300};
  const auto p = hazen_percentiles(v);
  CHECK(p[0] == doctest::Approx(1.0 / 6));
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK(p[2] == doctest::Approx(5.0 / 6));

  for (double s : hazen_percentiles(std::vector<double>{7, 7, 7})) CHECK(s == 0.5);
  CHECK(hazen_percentiles(std::vector<double>{42})[0] == 0.5);
  CHECK_THROWS_AS(hazen_percentiles(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(hazen_percentiles(std::vector<double>{1, std::nan("")}), std::invalid_argument);

  std::vector<std::pair<std::string, double>> keyed = {{"a", 300}, {"b", 100}, {"c", 200}};
  const auto m1 = percentile_scores(keyed);
  std::reverse(keyed.begin(), keyed.end());
  CHECK(percentile_scores(keyed) == m1);
  std::rotate(keyed.begin(), keyed.begin() + 1, keyed.end());
  CHECK(percentile_scores(keyed) == m1);
  CHECK(m1.at("b") == doctest::Approx(1.0 / 6));

  keyed.push_back({"a", 5});
  CHECK_THROWS_AS(percentile_scores(keyed), std::invalid_argument);
}

TEST_CASE("hazen percentiles match the brute-force oracle and depend only on rank") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(1, 200), value(0, 40);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(len(rng)));
    for (auto& x : v) x = value(rng);
    const auto got = hazen_percentiles(v);
    REQUIRE(got == oracle::percentiles(v));
    for (double s : got) CHECK((s > 0.0 && s < 1.0));

    std::vector<double> transformed;
    for (double x : v) transformed.push_back(std::exp(x / 7.0) * 3.0 - 11.0);
    CHECK(hazen_percentiles(transformed) == got);
  }
}

TEST_CASE("WeightVector validation") {
  CHECK_THROWS_AS(WeightVector(std::array<double, kCriterionCount>{}), WeightError);
  auto w = weights_of({{CriterionId::jobs, -1}, {CriterionId::retail, 2}});
  try {
    WeightVector bad(w);
    FAIL("negative weight accepted");
  } catch (const WeightError& e) {
    CHECK(e.field() == "jobs");
  }
  w = weights_of({{CriterionId::crime, std::numeric_limits<double>::infinity()}});
  CHECK_THROWS_AS(WeightVector bad(w), WeightError);

  const WeightVector ok(weights_of({{CriterionId::jobs, 1}, {CriterionId::retail, 3}}));
  CHECK(ok.raw(CriterionId::retail) == 3);
  CHECK(ok.resolved(CriterionId::retail) == 4294967296.0);
}

TEST_CASE("proximity decay") {
  CHECK(proximity_score(0, kMileMeters) == 1.0);
  CHECK(proximity_score(kMileMeters, kMileMeters) == 0.0);
  CHECK(proximity_score(5 * kMileMeters, kMileMeters) == 0.0);
  CHECK(proximity_score(kMileMeters / 2, kMileMeters) == doctest::Approx(0.5));

  ProximityConfig cfg;
  CHECK(cfg.d_max(CriterionId::prox_transit) == 1609.34);
  CHECK(cfg.d_max(CriterionId::prox_schools) == 1609.34);
  CHECK(cfg.d_max(CriterionId::prox_markets) == 3218.68);
  CHECK(cfg.d_max(CriterionId::prox_anchor) == doctest::Approx(16093.4));
  cfg.markets = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("criterion_score") {
  const GeoPoint stop(33.75, -84.35);
  auto world = three_group_world(
      {synthetic::make_place("s1", "Stop", PlaceCategory::transit_stop, stop)});
  const auto ctx = world.ctx();

  CHECK(criterion_score(ctx, stop, CriterionId::prox_transit) == 1.0);
  const auto mile_away = north_of(stop, kMileMeters);
  CHECK(haversine_distance(stop, mile_away) == doctest::Approx(kMileMeters).epsilon(1e-12));
  CHECK(*criterion_score(ctx, mile_away, CriterionId::prox_transit) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(criterion_score(ctx, north_of(stop, 2 * kMileMeters), CriterionId::prox_transit) == 0.0);
  CHECK_FALSE(criterion_score(ctx, stop, CriterionId::prox_markets).has_value());
  CHECK(criterion_score(ctx, GeoPoint(33.75, -84.35), CriterionId::prox_anchor) == 1.0);

  // Costs 900 / 1500 / 2800: negated, the cheapest ranks highest.
  const GeoPoint in_cheap(33.75, -84.45), in_mid(33.75, -84.35), in_dear(33.75, -84.25);
  CHECK(*criterion_score(ctx, in_cheap, CriterionId::affordability) == doctest::Approx(5.0 / 6));
  CHECK(*criterion_score(ctx, in_mid, CriterionId::affordability) == doctest::Approx(0.5));
  CHECK(*criterion_score(ctx, in_dear, CriterionId::affordability) == doctest::Approx(1.0 / 6));
  CHECK(*criterion_score(ctx, in_cheap, CriterionId::jobs) == doctest::Approx(1.0 / 6));
  CHECK(*criterion_score(ctx, in_dear, CriterionId::retail) == doctest::Approx(5.0 / 6));
  // Crime 3.5 vs 1.2 (middle group has none): safer scores higher.
  CHECK(*criterion_score(ctx, in_cheap, CriterionId::crime) == doctest::Approx(0.25));
  CHECK(*criterion_score(ctx, in_dear, CriterionId::crime) == doctest::Approx(0.75));
  CHECK_FALSE(criterion_score(ctx, in_mid, CriterionId::crime).has_value());

  const GeoPoint outside(34.5, -84.35);
  for (auto c : {CriterionId::affordability, CriterionId::jobs, CriterionId::retail,
                 CriterionId::crime}) {
    CHECK_FALSE(criterion_score(ctx, outside, c).has_value());
  }
}

TEST_CASE("composite_score") {
  const GeoPoint stop(33.75, -84.35);
  auto world = three_group_world(
      {synthetic::make_place("s1", "Stop", PlaceCategory::transit_stop, stop)});
  const auto ctx = world.ctx();
  const auto p = north_of(stop, 400);

  const auto one_hot = composite_score(ctx, p, WeightVector::one_hot(CriterionId::prox_transit));
  CHECK(one_hot.composite == criterion_score(ctx, p, CriterionId::prox_transit));
  CHECK(one_hot.completeness == 1.0);
  CHECK(one_hot[CriterionId::prox_transit].effective_weight == 1.0);

  // Equal weights on two criteria scoring 0.2 and 0.8.
  CriterionScores scores{};
  scores[0] = 0.2;
  scores[1] = 0.8;
  const auto even = combine_scores(scores, WeightVector(weights_of({{CriterionId::affordability, 1},
                                                                    {CriterionId::jobs, 1}})));
  CHECK(*even.composite == doctest::Approx(0.5).epsilon(1e-15));

  // Missing criteria drop out and are reported through completeness.
  const WeightVector mixed(weights_of({{CriterionId::crime, 1}, {CriterionId::jobs, 3}}));
  const auto b = composite_score(ctx, GeoPoint(33.75, -84.35), mixed);
  CHECK_FALSE(b[CriterionId::crime].score.has_value());
  CHECK(b[CriterionId::crime].effective_weight == 0.0);
  CHECK(b[CriterionId::jobs].effective_weight == 1.0);
  CHECK(b.completeness == doctest::Approx(0.75));
  CHECK(*b.composite == doctest::Approx(0.5));

  const auto nothing = composite_score(ctx, GeoPoint(34.5, -84.35),
                                       WeightVector::one_hot(CriterionId::jobs));
  CHECK_FALSE(nothing.composite.has_value());
  CHECK(nothing.completeness == 0.0);
}

TEST_CASE("breakdown invariants and scale invariance on the complete fixture") {
  const auto world = synthetic::complete_world();
  const auto ctx = world.ctx();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> w(0.0, 10.0);
  std::uniform_real_distribution<double> lat(33.69, 33.81), lon(-84.46, -84.34);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, kCriterionCount> raw{};
    for (auto& x : raw) x = std::round(w(rng));
    raw[trial % kCriterionCount] += 1.0;
    const GeoPoint p(lat(rng), lon(rng));
    const auto b = composite_score(ctx, p, WeightVector(raw));
    if (b.composite) {
      CHECK((*b.composite >= 0.0 && *b.composite <= 1.0));
      double sum = 0.0, comp = 0.0;
      for (auto c : kAllCriteria) {
        sum += b[c].effective_weight;
        if (b[c].score) {
          CHECK((*b[c].score >= 0.0 && *b[c].score <= 1.0));
          comp += *b[c].score * b[c].effective_weight;
        }
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(*b.composite == doctest::Approx(comp).epsilon(1e-12));
    }
    for (double scale : {7.0, 0.1, 3.0, 10.0, 1e-3}) {
      auto scaled = raw;
      for (auto& x : scaled) x *= scale;
      CHECK(composite_score(ctx, p, WeightVector(scaled)) == b);
    }
  }
}

TEST_CASE("score_raster") {
  const auto world = three_group_world(
      {synthetic::make_place("s1", "Stop", PlaceCategory::transit_stop, GeoPoint(33.75, -84.35))});
  const auto ctx = world.ctx();

  const auto single = grid_from_bbox(BoundingBox::make(33.7, 33.8, -84.5, -84.4), 1.0);
  const WeightVector w(weights_of({{CriterionId::prox_transit, 2}, {CriterionId::jobs, 1}}));
  const auto one = score_raster(ctx, single, w);
  CHECK(one.values().size() == 1);
  CHECK(one.at(0, 0) == *composite_score(ctx, cell_center(single, 0, 0), w).composite);

  // Affordability only: each cell carries its block group's percentile.
  const auto spec = grid_from_bbox(BoundingBox::make(33.65, 33.85, -84.55, -84.15), 0.05);
  const auto grid = score_raster(ctx, spec, WeightVector::one_hot(CriterionId::affordability));
  std::size_t missing = 0;
  for (std::size_t r = 0; r < spec.rows; ++r) {
    for (std::size_t c = 0; c < spec.cols; ++c) {
      const auto center = cell_center(spec, r, c);
      const auto* g = block_group_containing(world.catalog, center);
      if (!g) {
        CHECK(RasterGrid::is_missing(grid.at(r, c)));
        ++missing;
      } else {
        CHECK(grid.at(r, c) == world.tables.lookup(CriterionId::affordability, g->id));
      }
    }
  }
  CHECK(missing > 0);
  CHECK(missing < spec.cell_count());
}

TEST_CASE("raster is identical across thread counts") {
  const auto world = synthetic::complete_world();
  const auto spec = grid_from_bbox(BoundingBox::make(33.69, 33.81, -84.46, -84.34), 0.006);
  const WeightVector w(weights_of({{CriterionId::affordability, 5}, {CriterionId::prox_markets, 2},
                                   {CriterionId::crime, 1}}));
  const auto seq = score_raster(world.ctx(), spec, w, 1);
  for (unsigned threads : {2u, 3u, 8u}) {
    const auto par = score_raster(world.ctx(), spec, w, threads);
    REQUIRE(seq.values().size() == par.values().size());
    CHECK(std::memcmp(seq.values().data(), par.values().data(),
                      seq.values().size() * sizeof(double)) == 0);
  }
}

TEST_CASE("rank_apartments") {
  using synthetic::make_apartment;
  const GeoPoint at(33.75, -84.45);
  auto world = three_group_world({make_apartment("a1", "Cheap", at, 800.0),
                                  make_apartment("a2", "Middle", north_of(at, 10), 1200.0),
                                  make_apartment("a3", "Dear", north_of(at, 20), 2000.0)});
  auto apartments = synthetic::apartments_of(world.catalog);
  auto ranked = rank_apartments(world.ctx(), apartments,
                                WeightVector::one_hot(CriterionId::affordability));
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].name == "Cheap");
  CHECK(ranked[1].name == "Middle");
  CHECK(ranked[2].name == "Dear");
  CHECK(ranked[0].rank == 1);
  CHECK(ranked[2].rank == 3);
  // Own-cost percentile replaces the block group's.
  CHECK(*ranked[0].breakdown[CriterionId::affordability].score == doctest::Approx(5.0 / 6));

  // Identical scores fall back to the name.
  world = three_group_world({make_apartment("z", "Bravo", at, std::nullopt),
                             make_apartment("y", "Alpha", at, std::nullopt),
                             make_apartment("x", "Nowhere", GeoPoint(35, -84), std::nullopt)});
  apartments = synthetic::apartments_of(world.catalog);
  ranked = rank_apartments(world.ctx(), apartments, WeightVector::one_hot(CriterionId::jobs));
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].name == "Alpha");
  CHECK(ranked[1].name == "Bravo");
  CHECK(ranked[2].name == "Nowhere");  // missing composite ranks last
  CHECK_FALSE(ranked[2].breakdown.composite.has_value());
}

TEST_CASE("rank_apartments matches a score-and-sort oracle") {
  const auto world = synthetic::complete_world(7);
  const auto ctx = world.ctx();
  const auto apartments = synthetic::apartments_of(world.catalog);
  const WeightVector w(weights_of({{CriterionId::affordability, 40}, {CriterionId::prox_transit, 35},
                                   {CriterionId::prox_schools, 10}, {CriterionId::jobs, 5},
                                   {CriterionId::crime, 10}}));
  const std::array<double, kCriterionCount> raw = {40, 5, 0, 10, 35, 10, 0, 0};

  std::vector<double> neg_costs;
  for (const auto& a : apartments) neg_costs.push_back(-*a.apartment()->monthly_cost);
  const auto own = oracle::percentiles(neg_costs);

  struct Row {
    std::string id, name;
    double score;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < apartments.size(); ++i) {
    double num = 0.0, den = 0.0;
    for (auto c : kAllCriteria) {
      const double wc = raw[static_cast<std::size_t>(c)];
      if (wc == 0.0) continue;
      const double s = c == CriterionId::affordability
                           ? own[i]
                           : *criterion_score(ctx, apartments[i].location, c);
      num += wc * s;
      den += wc;
    }
    rows.push_back({apartments[i].id, apartments[i].name, num / den});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (std::abs(a.score - b.score) > 1e-12) return a.score > b.score;
    return a.name < b.name;
  });

  const auto ranked = rank_apartments(ctx, apartments, w);
  REQUIRE(ranked.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(ranked[i].id == rows[i].id);
    CHECK(*ranked[i].breakdown.composite == doctest::Approx(rows[i].score).epsilon(1e-9));
  }
}

TEST_CASE("raising a weight never demotes that criterion's top apartment") {
  const auto world = synthetic::complete_world(11);
  const auto ctx = world.ctx();
  const auto apartments = synthetic::apartments_of(world.catalog);
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> w(0, 10);
  for (int trial = 0; trial < 40; ++trial) {
    std::array<double, kCriterionCount> raw{};
    for (auto& x : raw) x = w(rng);
    raw[0] += 1;
    const auto base = rank_apartments(ctx, apartments, WeightVector(raw));
    for (auto c : kAllCriteria) {
      // Apartment with the highest score in c (first in ranking order on ties).
      const RankedApartment* top = nullptr;
      for (const auto& r : base) {
        if (!top || *r.breakdown[c].score > *top->breakdown[c].score) top = &r;
      }
      auto boosted = raw;
      boosted[static_cast<std::size_t>(c)] += 5;
      const auto after = rank_apartments(ctx, apartments, WeightVector(boosted));
      const auto it = std::find_if(after.begin(), after.end(),
                                   [&](const RankedApartment& r) { return r.id == top->id; });
      CHECK(it->rank <= top->rank);
    }
  }
}
