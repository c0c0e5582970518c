#include "graphgeo/geo.hpp"

#include <algorithm>
#include <cmath>

#include "graphgeo/errors.hpp"

namespace graphgeo {

namespace {
constexpr double kEarthRadiusKm = 6371.0;
constexpr double kPi = 3.14159265358979323846;

double deg_to_rad(double d) { return d * kPi / 180.0; }
} // namespace

double haversine_km(Coord a, Coord b) {
  double lat1 = deg_to_rad(a.lat);
  double lat2 = deg_to_rad(b.lat);
  double dlat = deg_to_rad(b.lat - a.lat);
  double dlon = deg_to_rad(b.lon - a.lon);
  double s = std::sin(dlat / 2.0) * std::sin(dlat / 2.0) +
             std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2.0) * std::sin(dlon / 2.0);
  s = std::min(1.0, std::max(0.0, s));
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(s));
}

ErrorStats error_stats(std::span<const Coord> pred, std::span<const Coord> truth) {
  if (pred.size() != truth.size())
    throw DimensionError("error_stats: prediction/truth length mismatch");
  std::vector<double> errors;
  errors.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    errors.push_back(haversine_km(pred[i], truth[i]));
  return error_stats(std::move(errors));
}

ErrorStats error_stats(std::vector<double> errors_km) {
  if (errors_km.empty()) throw ValidationError("error_stats: empty error list");
  ErrorStats st;
  st.n = errors_km.size();
  double sum = 0.0;
  for (double e : errors_km) sum += e;
  st.average_km = sum / static_cast<double>(st.n);
  std::sort(errors_km.begin(), errors_km.end());
  st.max_km = errors_km.back();
  if (st.n % 2 == 1) {
    st.median_km = errors_km[st.n / 2];
  } else {
    st.median_km = 0.5 * (errors_km[st.n / 2 - 1] + errors_km[st.n / 2]);
  }
  return st;
}

std::vector<CdfPoint> cdf(std::vector<double> errors_km) {
  if (errors_km.empty()) throw ValidationError("cdf: empty error list");
  std::sort(errors_km.begin(), errors_km.end());
  std::vector<CdfPoint> out;
  const double n = static_cast<double>(errors_km.size());
  for (std::size_t i = 0; i < errors_km.size(); ++i) {
    double frac = static_cast<double>(i + 1) / n;
    if (!out.empty() && out.back().error_km == errors_km[i]) {
      out.back().fraction = frac; // duplicate error: keep the highest fraction
    } else {
      out.push_back({errors_km[i], frac});
    }
  }
  out.back().fraction = 1.0;
  return out;
}

GeoScaler::GeoScaler(double lat_min, double lat_max, double lon_min, double lon_max)
    : lat_min_(lat_min), lat_max_(lat_max), lon_min_(lon_min), lon_max_(lon_max) {
  if (!(lat_max_ > lat_min_) || !(lon_max_ > lon_min_))
    throw ValidationError("GeoScaler: degenerate range");
}

GeoScaler GeoScaler::fit(std::span<const Coord> train_coords, double margin_deg) {
  if (train_coords.size() < 2)
    throw ValidationError("GeoScaler::fit: need at least 2 coordinates");
  double lat_lo = train_coords[0].lat, lat_hi = train_coords[0].lat;
  double lon_lo = train_coords[0].lon, lon_hi = train_coords[0].lon;
  for (const Coord& c : train_coords) {
    lat_lo = std::min(lat_lo, c.lat);
    lat_hi = std::max(lat_hi, c.lat);
    lon_lo = std::min(lon_lo, c.lon);
    lon_hi = std::max(lon_hi, c.lon);
  }
  return GeoScaler(lat_lo - margin_deg, lat_hi + margin_deg,
                   lon_lo - margin_deg, lon_hi + margin_deg);
}

Coord GeoScaler::transform(Coord degrees) const {
  return {(degrees.lat - lat_min_) / (lat_max_ - lat_min_),
          (degrees.lon - lon_min_) / (lon_max_ - lon_min_)};
}

Coord GeoScaler::inverse(Coord unit) const {
  return {lat_min_ + unit.lat * (lat_max_ - lat_min_),
          lon_min_ + unit.lon * (lon_max_ - lon_min_)};
}

bool GeoScaler::inside(Coord degrees) const {
  return degrees.lat >= lat_min_ && degrees.lat <= lat_max_ &&
         degrees.lon >= lon_min_ && degrees.lon <= lon_max_;
}

GeoScaler fit_scaler(std::span<const Coord> train_coords, double margin_deg) {
  return GeoScaler::fit(train_coords, margin_deg);
}

} // namespace graphgeo
