#pragma once

// Geospatial operators: Web Mercator projection, reprojection, tiling,
// mosaicking and mask area.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eoscript/raster.hpp"

namespace eoscript {

inline constexpr double kWebMercatorRadius = 6378137.0;
// Authalic sphere used for areas on EPSG:4326 grids.
inline constexpr double kAuthalicRadius = 6371008.8;
inline constexpr double kMaxMercatorLatitude = 85.06;

enum class GeoErrc { UnsupportedCrs, LatitudeOutOfRange, CrsMismatch, GridMisaligned, BandMismatch, InvalidArgument };

class GeoError : public std::runtime_error {
 public:
  GeoError(GeoErrc code, const std::string& message);
  GeoErrc code() const noexcept { return code_; }

 private:
  GeoErrc code_;
};

struct GeoBounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;
  Crs crs = Crs::Epsg4326;

  GeoBounds() = default;
  GeoBounds(double min_x, double min_y, double max_x, double max_y, Crs crs);

  bool intersects(const GeoBounds& other) const;
};

GeoBounds raster_bounds(const Raster& raster);

// Converts the bounds' corners to `dst` and returns their envelope.
GeoBounds transform_bounds(const GeoBounds& bounds, Crs dst);

struct ProjectedPoint {
  double x;
  double y;
};

// Degrees <-> EPSG:3857 metres.
ProjectedPoint lonlat_to_mercator(double lon_deg, double lat_deg);
ProjectedPoint mercator_to_lonlat(double x, double y);

// Nearest-neighbour resampling onto a grid whose pixel size preserves the
// source's ground resolution at the centre pixel. Same-CRS is the identity.
Raster reproject(const Raster& raster, Crs dst);

struct Tile {
  int col0;
  int row0;
  Raster raster;
};

struct TileGrid {
  int tile_w;
  int tile_h;
  int source_width;
  int source_height;
  std::vector<Tile> tiles;  // row-major tile order
};

TileGrid make_tiles(const Raster& raster, int tile_w, int tile_h);
Raster assemble_tiles(const TileGrid& grid);

// Union extent; earliest raster with valid data wins, later rasters fill nodata.
Raster mosaic(std::span<const Raster> rasters);

// Ground area of the pixels equal to `class_id`.
double mask_area_m2(const Mask& mask, const GeoTransform& geotransform, Crs crs, int class_id);

// Ground area of the full grid extent, summed per row with the same earth model.
double grid_area_m2(int width, int height, const GeoTransform& geotransform, Crs crs);

}  // namespace eoscript
