#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "graphgeo/errors.hpp"
#include "graphgeo/geo.hpp"
#include "graphgeo/rng.hpp"

using namespace graphgeo;

TEST_CASE("haversine basics") {
  Coord nyc{40.7128, -74.0060};
  CHECK(haversine_km(nyc, nyc) == 0.0);
  CHECK(haversine_km(nyc, {40.7128, -74.0060}) == doctest::Approx(0.0));

  // NYC to LA, cross-checked against an independent geodesic calculator
  Coord la{34.0522, -118.2437};
  double d = haversine_km(nyc, la);
  CHECK(d == doctest::Approx(3936.0).epsilon(0.01));
}

TEST_CASE("haversine reproduces the documented NYS covering extents") {
  // north-south 40.54 -> 44.75 at fixed longitude: 467.98 km
  double ns = haversine_km({40.54, -75.0}, {44.75, -75.0});
  CHECK(std::abs(ns - 467.98) / 467.98 < 0.02);
  // east-west 72.78W -> 79.30W at latitude 40.54: 550.63 km
  double ew = haversine_km({40.54, -72.78}, {40.54, -79.30});
  CHECK(std::abs(ew - 550.63) / 550.63 < 0.02);
}

TEST_CASE("haversine symmetry and bound") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    Coord a{rng.uniform(-90, 90), rng.uniform(-180, 180)};
    Coord b{rng.uniform(-90, 90), rng.uniform(-180, 180)};
    double ab = haversine_km(a, b);
    CHECK(ab == haversine_km(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 3.14159265358979323846 * 6371.0 + 1e-9);
  }
}

TEST_CASE("error_stats") {
  SUBCASE("documented example {1,2,9}") {
    ErrorStats st = error_stats(std::vector<double>{1, 2, 9});
    CHECK(st.average_km == doctest::Approx(4.0));
    CHECK(st.median_km == doctest::Approx(2.0));
    CHECK(st.max_km == doctest::Approx(9.0));
    CHECK(st.n == 3);
  }
  SUBCASE("perfect predictions") {
    std::vector<Coord> pts{{10, 20}, {30, 40}};
    ErrorStats st = error_stats(std::span<const Coord>(pts), std::span<const Coord>(pts));
    CHECK(st.average_km == 0.0);
    CHECK(st.median_km == 0.0);
    CHECK(st.max_km == 0.0);
  }
  SUBCASE("even count median is the mean of the middles") {
    ErrorStats st = error_stats(std::vector<double>{1, 3});
    CHECK(st.median_km == doctest::Approx(2.0));
  }
  SUBCASE("permutation invariance") {
    std::vector<double> errors{5, 1, 9, 2, 2, 7};
    ErrorStats a = error_stats(errors);
    std::vector<double> shuffled{7, 2, 9, 1, 5, 2};
    ErrorStats b = error_stats(shuffled);
    CHECK(a.average_km == b.average_km);
    CHECK(a.median_km == b.median_km);
    CHECK(a.max_km == b.max_km);
  }
  SUBCASE("length mismatch throws") {
    std::vector<Coord> a{{0, 0}};
    std::vector<Coord> b{{0, 0}, {1, 1}};
    CHECK_THROWS_AS(error_stats(std::span<const Coord>(a), std::span<const Coord>(b)),
                    DimensionError);
  }
}

TEST_CASE("cdf") {
  SUBCASE("two points") {
    auto series = cdf({1, 2});
    REQUIRE(series.size() == 2);
    CHECK(series[0].error_km == 1.0);
    CHECK(series[0].fraction == doctest::Approx(0.5));
    CHECK(series[1].error_km == 2.0);
    CHECK(series[1].fraction == 1.0);
  }
  SUBCASE("single point") {
    auto series = cdf({5});
    REQUIRE(series.size() == 1);
    CHECK(series[0].error_km == 5.0);
    CHECK(series[0].fraction == 1.0);
  }
  SUBCASE("duplicates merge keeping the highest fraction") {
    auto series = cdf({2, 2});
    REQUIRE(series.size() == 1);
    CHECK(series[0].error_km == 2.0);
    CHECK(series[0].fraction == 1.0);
  }
  SUBCASE("monotone, ends at exactly 1") {
    Rng rng(3);
    std::vector<double> errors;
    for (int i = 0; i < 57; ++i) errors.push_back(rng.uniform(0, 100));
    errors.push_back(errors[10]); // force one duplicate
    auto series = cdf(errors);
    for (std::size_t i = 1; i < series.size(); ++i) {
      CHECK(series[i].error_km > series[i - 1].error_km);
      CHECK(series[i].fraction > series[i - 1].fraction);
    }
    CHECK(series.back().fraction == 1.0);
  }
}

TEST_CASE("geo scaler") {
  SUBCASE("documented margin example") {
    std::vector<Coord> train{{30.61, 121.14}, {31.73, 121.86}};
    GeoScaler s = GeoScaler::fit(train);
    CHECK(s.lat_min() == doctest::Approx(30.51));
    CHECK(s.lat_max() == doctest::Approx(31.83));
    CHECK(s.lon_min() == doctest::Approx(121.04));
    CHECK(s.lon_max() == doctest::Approx(121.96));
    CHECK(s.transform({31.17, 121.5}).lat == doctest::Approx(0.5));
  }
  SUBCASE("bounds map to 0 and 1") {
    GeoScaler s(10.0, 20.0, 30.0, 50.0);
    CHECK(s.transform({10, 30}).lat == 0.0);
    CHECK(s.transform({10, 30}).lon == 0.0);
    CHECK(s.transform({20, 50}).lat == 1.0);
    CHECK(s.transform({20, 50}).lon == 1.0);
  }
  SUBCASE("round trip within 1e-9") {
    GeoScaler s(10.0, 20.0, 30.0, 50.0);
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
      Coord c{rng.uniform(10, 20), rng.uniform(30, 50)};
      Coord back = s.inverse(s.transform(c));
      CHECK(std::abs(back.lat - c.lat) < 1e-9);
      CHECK(std::abs(back.lon - c.lon) < 1e-9);
    }
  }
  SUBCASE("out-of-box values pass through unclamped and are flaggable") {
    GeoScaler s(10.0, 20.0, 30.0, 50.0);
    Coord outside{25.0, 60.0};
    CHECK_FALSE(s.inside(outside));
    Coord u = s.transform(outside);
    CHECK(u.lat > 1.0);
    CHECK(u.lon > 1.0);
  }
  SUBCASE("training coords map strictly inside (0,1)") {
    Rng rng(13);
    std::vector<Coord> train;
    for (int i = 0; i < 40; ++i) train.push_back({rng.uniform(-5, 5), rng.uniform(100, 101)});
    GeoScaler s = GeoScaler::fit(train);
    for (const Coord& c : train) {
      Coord u = s.transform(c);
      CHECK(u.lat > 0.0);
      CHECK(u.lat < 1.0);
      CHECK(u.lon > 0.0);
      CHECK(u.lon < 1.0);
    }
  }
}
