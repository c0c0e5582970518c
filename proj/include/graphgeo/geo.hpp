#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace graphgeo {

struct Coord {
  double lat = 0.0;
  double lon = 0.0;
};

// Great-circle distance on a 6371.0 km sphere.
double haversine_km(Coord a, Coord b);

struct ErrorStats {
  double average_km = 0.0;
  double median_km = 0.0;
  double max_km = 0.0;
  std::size_t n = 0;
};

ErrorStats error_stats(std::span<const Coord> pred, std::span<const Coord> truth);
ErrorStats error_stats(std::vector<double> errors_km);

struct CdfPoint {
  double error_km = 0.0;
  double fraction = 0.0;
};

// Empirical CDF, ascending, duplicates merged to the highest fraction;
// last fraction is exactly 1.
std::vector<CdfPoint> cdf(std::vector<double> errors_km);

// Min-max transform between degrees and the unit square, fitted on training
// coordinates with a fixed margin added to each end of both ranges.
class GeoScaler {
public:
  GeoScaler() = default;
  GeoScaler(double lat_min, double lat_max, double lon_min, double lon_max);

  static GeoScaler fit(std::span<const Coord> train_coords, double margin_deg = 0.1);

  Coord transform(Coord degrees) const;
  Coord inverse(Coord unit) const;

  // Out-of-box inputs transform to values outside [0,1]; callers flag, never clamp.
  bool inside(Coord degrees) const;

  double lat_min() const { return lat_min_; }
  double lat_max() const { return lat_max_; }
  double lon_min() const { return lon_min_; }
  double lon_max() const { return lon_max_; }

private:
  double lat_min_ = 0.0, lat_max_ = 1.0;
  double lon_min_ = 0.0, lon_max_ = 1.0;
};

GeoScaler fit_scaler(std::span<const Coord> train_coords, double margin_deg = 0.1);

} // namespace graphgeo
