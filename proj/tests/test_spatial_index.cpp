#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "scout/spatial_index.hpp"
#include "synthetic.hpp"

using namespace scout;

namespace {

const GeoPoint kAnchor(33.75, -84.39);

// Moves `meters` due north along a meridian.
GeoPoint north_of(const GeoPoint& p, double meters) {
  return GeoPoint(p.lat() + meters / kEarthRadiusMeters * 180.0 / std::numbers::pi, p.lon());
}

}  // namespace

TEST_CASE("empty and single-place indexes") {
  const Catalog empty({}, {}, kAnchor);
  const PlaceIndex index(empty);
  for (auto c : kAllCategories) {
    CHECK_FALSE(index.nearest(kAnchor, c).has_value());
    CHECK(index.within_radius(kAnchor, 1e7, c).empty());
  }

  const Catalog one({synthetic::make_place("only", "Only", PlaceCategory::market, kAnchor)}, {},
                    kAnchor);
  const PlaceIndex single(one);
  for (const GeoPoint q : {GeoPoint(0, 0), GeoPoint(-45, 170), kAnchor}) {
    const auto hit = single.nearest(q, PlaceCategory::market);
    REQUIRE(hit);
    CHECK(hit->id == "only");
    CHECK(hit->distance == haversine_distance(q, kAnchor));
  }
  CHECK_FALSE(single.nearest(kAnchor, PlaceCategory::school).has_value());
}

TEST_CASE("nearest at an indexed location returns it at distance zero") {
  const auto places = synthetic::random_places(500, 3);
  const Catalog catalog(places, {}, kAnchor);
  const PlaceIndex index(catalog);
  for (const auto& p : places) {
    const auto hit = index.nearest(p.location, p.category);
    REQUIRE(hit);
    CHECK(hit->distance == 0.0);
    // Co-located duplicates resolve to the smaller id.
    CHECK(hit->id <= p.id);
  }
}

TEST_CASE("within_radius") {
  const GeoPoint home(33.75, -84.39);
  const auto near_stop = north_of(home, 800);
  const auto far_stop = north_of(home, 3000);
  const Catalog catalog({synthetic::make_place("near", "Near", PlaceCategory::transit_stop, near_stop),
                         synthetic::make_place("far", "Far", PlaceCategory::transit_stop, far_stop),
                         synthetic::make_place("twin", "Twin", PlaceCategory::transit_stop, home),
                         synthetic::make_place("base", "Base", PlaceCategory::transit_stop, home)},
                        {}, kAnchor);
  // Fixture distances checked with the independent formula.
  CHECK(oracle::slc_distance(home, near_stop) == doctest::Approx(800).epsilon(1e-6));
  CHECK(oracle::slc_distance(home, far_stop) == doctest::Approx(3000).epsilon(1e-6));

  const PlaceIndex index(catalog);
  auto hits = index.within_radius(home, 0.0, PlaceCategory::transit_stop);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].id == "base");
  CHECK(hits[1].id == "twin");

  hits = index.within_radius(north_of(home, 1), kMileMeters, PlaceCategory::transit_stop);
  REQUIRE(hits.size() == 3);
  CHECK(hits[2].id == "near");

  const GeoPoint east(33.75, -84.39 + 0.001);
  hits = index.within_radius(east, kMileMeters, PlaceCategory::transit_stop);
  CHECK(hits.size() == 3);
  for (const auto& h : hits) CHECK(h.id != "far");

  CHECK(index.within_radius(home, kMileMeters, PlaceCategory::school).empty());
  CHECK_THROWS_AS(index.within_radius(home, -1.0, PlaceCategory::transit_stop),
                  std::invalid_argument);
}

TEST_CASE("index queries match a linear scan") {
  const auto places = synthetic::random_places(10000, 99);
  const Catalog catalog(places, {}, kAnchor);
  const PlaceIndex index(catalog);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lat(33.30, 34.20), lon(-84.90, -83.80);
  std::uniform_real_distribution<double> radius(0.0, 8000.0);
  std::uniform_int_distribution<std::size_t> cat(0, 4);  // includes one empty category
  for (int i = 0; i < 500; ++i) {
    const GeoPoint q(lat(rng), lon(rng));
    const auto c = kAllCategories[cat(rng)];
    const auto got = index.nearest(q, c);
    const auto want = oracle::nearest(places, q, c);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(got->id == want->id);
      CHECK(got->distance == doctest::Approx(want->distance).epsilon(1e-9));
    }
    const double r = radius(rng);
    const auto in = index.within_radius(q, r, c);
    const auto ref = oracle::within_radius(places, q, r, c);
    REQUIRE(in.size() == ref.size());
    for (std::size_t k = 0; k < in.size(); ++k) CHECK(in[k].id == ref[k].id);
    if (!in.empty()) {
      REQUIRE(got);
      CHECK(got->distance <= in.front().distance);
    }
  }
}

TEST_CASE("pruning is exact at high latitude") {
  // Longitude degrees are short near the pole; a neighbour 1 degree of
  // longitude away is closer than one 0.1 degree of latitude away.
  const GeoPoint q(80.0, 10.0);
  const Catalog catalog(
      {synthetic::make_place("lat", "Lat", PlaceCategory::market, GeoPoint(80.1, 10.0)),
       synthetic::make_place("lon", "Lon", PlaceCategory::market, GeoPoint(80.0, 10.5))},
      {}, kAnchor);
  const PlaceIndex index(catalog);
  const auto hit = index.nearest(q, PlaceCategory::market);
  REQUIRE(hit);
  CHECK(hit->id == oracle::nearest(catalog.places(), q, PlaceCategory::market)->id);
  CHECK(hit->id == "lon");
}

TEST_CASE("index build is deterministic") {
  const auto places = synthetic::random_places(2000, 8);
  const Catalog a(places, {}, kAnchor);
  std::vector<Place> reversed(places.rbegin(), places.rend());
  const Catalog b(reversed, {}, kAnchor);
  const PlaceIndex ia(a), ib(b);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lat(33.4, 34.1), lon(-84.8, -83.9);
  for (int i = 0; i < 200; ++i) {
    const GeoPoint q(lat(rng), lon(rng));
    CHECK(ia.nearest(q, PlaceCategory::school) == ib.nearest(q, PlaceCategory::school));
    CHECK(ia.within_radius(q, 5000, PlaceCategory::market) ==
          ib.within_radius(q, 5000, PlaceCategory::market));
  }
}
