#include "eoscript/geo_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eoscript {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr float kFallbackNodata = -9999.0F;

double mercator_y_to_lat(double y) {
  return (2.0 * std::atan(std::exp(y / kWebMercatorRadius)) - std::numbers::pi / 2.0) * kRadToDeg;
}

bool near_integer(double v, double tol = 1e-6) { return std::fabs(v - std::round(v)) <= tol; }

void check_lat(double lat) {
  if (!(std::fabs(lat) <= kMaxMercatorLatitude)) {
    throw GeoError(GeoErrc::LatitudeOutOfRange,
                   "latitude " + std::to_string(lat) + " outside Web Mercator range +/-85.06");
  }
}

// Maps a point of `from` into `to`.
ProjectedPoint convert_point(double x, double y, Crs from, Crs to) {
  if (from == to) return {x, y};
  if (from == Crs::Epsg4326) return lonlat_to_mercator(x, y);
  return mercator_to_lonlat(x, y);
}

}  // namespace

GeoError::GeoError(GeoErrc code, const std::string& message) : std::runtime_error(message), code_(code) {}

GeoBounds::GeoBounds(double min_x_, double min_y_, double max_x_, double max_y_, Crs crs_)
    : min_x(min_x_), min_y(min_y_), max_x(max_x_), max_y(max_y_), crs(crs_) {
  if (!(min_x < max_x) || !(min_y < max_y)) {
    throw GeoError(GeoErrc::InvalidArgument, "bounds require min_x < max_x and min_y < max_y");
  }
}

bool GeoBounds::intersects(const GeoBounds& other) const {
  const GeoBounds o = other.crs == crs ? other : transform_bounds(other, crs);
  return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
}

GeoBounds raster_bounds(const Raster& raster) {
  const auto& gt = raster.geotransform();
  auto tl = gt.pixel_to_world(0, 0);
  auto br = gt.pixel_to_world(raster.width(), raster.height());
  return GeoBounds(tl[0], br[1], br[0], tl[1], raster.crs());
}

GeoBounds transform_bounds(const GeoBounds& bounds, Crs dst) {
  if (bounds.crs == dst) return bounds;
  GeoBounds b = bounds;
  if (bounds.crs == Crs::Epsg4326) {
    // Clamp to the projectable band so global queries still map.
    b.min_y = std::max(b.min_y, -kMaxMercatorLatitude);
    b.max_y = std::min(b.max_y, kMaxMercatorLatitude);
    b.min_x = std::max(b.min_x, -180.0);
    b.max_x = std::min(b.max_x, 180.0);
  }
  auto lo = convert_point(b.min_x, b.min_y, bounds.crs, dst);
  auto hi = convert_point(b.max_x, b.max_y, bounds.crs, dst);
  return GeoBounds(lo.x, lo.y, hi.x, hi.y, dst);
}

ProjectedPoint lonlat_to_mercator(double lon_deg, double lat_deg) {
  check_lat(lat_deg);
  const double x = kWebMercatorRadius * lon_deg * kDegToRad;
  const double y = kWebMercatorRadius * std::log(std::tan(std::numbers::pi / 4.0 + lat_deg * kDegToRad / 2.0));
  return {x, y};
}

ProjectedPoint mercator_to_lonlat(double x, double y) {
  return {x / kWebMercatorRadius * kRadToDeg, mercator_y_to_lat(y)};
}

Raster reproject(const Raster& raster, Crs dst) {
  if (raster.crs() == dst) return raster;

  const auto& src_gt = raster.geotransform();
  const GeoBounds src_bounds = raster_bounds(raster);
  const double center_y = src_gt.origin_y + 0.5 * raster.height() * src_gt.pixel_h;

  double dst_pw = 0.0;
  double dst_ph = 0.0;
  if (dst == Crs::Epsg3857) {
    check_lat(src_bounds.min_y);
    check_lat(src_bounds.max_y);
    const double lat_c = center_y * kDegToRad;
    dst_pw = kWebMercatorRadius * src_gt.pixel_w * kDegToRad;
    dst_ph = kWebMercatorRadius * src_gt.pixel_h * kDegToRad / std::cos(lat_c);
  } else {
    const double lat_c = mercator_y_to_lat(center_y) * kDegToRad;
    dst_pw = src_gt.pixel_w / kWebMercatorRadius * kRadToDeg;
    dst_ph = src_gt.pixel_h * std::cos(lat_c) / kWebMercatorRadius * kRadToDeg;
  }

  const GeoBounds dst_bounds = transform_bounds(src_bounds, dst);
  const int width = std::max(1, static_cast<int>(std::lround((dst_bounds.max_x - dst_bounds.min_x) / dst_pw)));
  const int height = std::max(1, static_cast<int>(std::lround((dst_bounds.max_y - dst_bounds.min_y) / -dst_ph)));
  const GeoTransform dst_gt{dst_bounds.min_x, dst_pw, 0.0, dst_bounds.max_y, 0.0, dst_ph};

  const float fill = raster.nodata().value_or(kFallbackNodata);
  bool any_unmapped = false;
  std::vector<BandPlane> planes(raster.band_count(), BandPlane(static_cast<std::size_t>(width) * height, fill));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      auto world = dst_gt.pixel_to_world(c + 0.5, r + 0.5);
      auto src = convert_point(world[0], world[1], dst, raster.crs());
      const double fc = std::floor((src.x - src_gt.origin_x) / src_gt.pixel_w);
      const double fr = std::floor((src.y - src_gt.origin_y) / src_gt.pixel_h);
      const std::size_t out = static_cast<std::size_t>(r) * width + c;
      if (fc < 0 || fr < 0 || fc >= raster.width() || fr >= raster.height()) {
        any_unmapped = true;
        continue;
      }
      for (std::size_t b = 0; b < raster.band_count(); ++b) {
        planes[b][out] = raster.at(b, static_cast<int>(fc), static_cast<int>(fr));
      }
    }
  }
  std::optional<float> nodata = raster.nodata();
  if (any_unmapped && !nodata) nodata = kFallbackNodata;
  return Raster(width, height, raster.band_names(), std::move(planes), dst_gt, dst, nodata);
}

TileGrid make_tiles(const Raster& raster, int tile_w, int tile_h) {
  if (tile_w < 1 || tile_h < 1) throw GeoError(GeoErrc::InvalidArgument, "tile size must be at least 1x1");
  TileGrid grid{tile_w, tile_h, raster.width(), raster.height(), {}};
  for (int row0 = 0; row0 < raster.height(); row0 += tile_h) {
    for (int col0 = 0; col0 < raster.width(); col0 += tile_w) {
      const int w = std::min(tile_w, raster.width() - col0);
      const int h = std::min(tile_h, raster.height() - row0);
      grid.tiles.push_back({col0, row0, crop_window(raster, col0, row0, w, h)});
    }
  }
  return grid;
}

Raster assemble_tiles(const TileGrid& grid) {
  if (grid.tiles.empty()) throw GeoError(GeoErrc::InvalidArgument, "tile grid is empty");
  const Tile* anchor = nullptr;
  for (const auto& t : grid.tiles) {
    if (t.col0 == 0 && t.row0 == 0) anchor = &t;
  }
  if (!anchor) throw GeoError(GeoErrc::InvalidArgument, "tile grid has no tile at (0,0)");
  const Raster& first = anchor->raster;
  std::vector<BandPlane> planes(first.band_count(),
                                BandPlane(static_cast<std::size_t>(grid.source_width) * grid.source_height));
  for (const auto& t : grid.tiles) {
    for (std::size_t b = 0; b < first.band_count(); ++b) {
      const auto& src = t.raster.band(b);
      for (int r = 0; r < t.raster.height(); ++r) {
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(r) * t.raster.width(), t.raster.width(),
                    planes[b].begin() + static_cast<std::ptrdiff_t>(t.row0 + r) * grid.source_width + t.col0);
      }
    }
  }
  return Raster(grid.source_width, grid.source_height, first.band_names(), std::move(planes), first.geotransform(),
                first.crs(), first.nodata());
}

Raster mosaic(std::span<const Raster> rasters) {
  if (rasters.empty()) throw GeoError(GeoErrc::InvalidArgument, "mosaic needs at least one raster");
  const Raster& ref = rasters.front();
  const auto& gt0 = ref.geotransform();

  struct Placement {
    long long col;
    long long row;
  };
  std::vector<Placement> place;
  long long min_col = 0, min_row = 0, max_col = ref.width(), max_row = ref.height();
  for (const auto& r : rasters) {
    if (r.crs() != ref.crs()) {
      throw GeoError(GeoErrc::CrsMismatch, "mosaic inputs mix " + crs_code(ref.crs()) + " and " + crs_code(r.crs()));
    }
    const auto& gt = r.geotransform();
    if (std::fabs(gt.pixel_w - gt0.pixel_w) > 1e-12 * std::fabs(gt0.pixel_w) ||
        std::fabs(gt.pixel_h - gt0.pixel_h) > 1e-12 * std::fabs(gt0.pixel_h)) {
      throw GeoError(GeoErrc::GridMisaligned, "mosaic inputs have different pixel sizes");
    }
    if (r.band_names() != ref.band_names()) {
      throw GeoError(GeoErrc::BandMismatch, "mosaic inputs have different band sets");
    }
    const double dc = (gt.origin_x - gt0.origin_x) / gt0.pixel_w;
    const double dr = (gt.origin_y - gt0.origin_y) / gt0.pixel_h;
    if (!near_integer(dc) || !near_integer(dr)) {
      throw GeoError(GeoErrc::GridMisaligned, "mosaic input origins are not congruent modulo the pixel size");
    }
    Placement p{std::llround(dc), std::llround(dr)};
    min_col = std::min(min_col, p.col);
    min_row = std::min(min_row, p.row);
    max_col = std::max(max_col, p.col + r.width());
    max_row = std::max(max_row, p.row + r.height());
    place.push_back(p);
  }

  const int width = static_cast<int>(max_col - min_col);
  const int height = static_cast<int>(max_row - min_row);
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  const float fill = ref.nodata().value_or(kFallbackNodata);
  std::vector<BandPlane> planes(ref.band_count(), BandPlane(pixels, fill));
  std::vector<std::vector<bool>> filled(ref.band_count(), std::vector<bool>(pixels, false));

  for (std::size_t i = 0; i < rasters.size(); ++i) {
    const Raster& r = rasters[i];
    const long long oc = place[i].col - min_col;
    const long long orow = place[i].row - min_row;
    for (std::size_t b = 0; b < r.band_count(); ++b) {
      for (int row = 0; row < r.height(); ++row) {
        for (int col = 0; col < r.width(); ++col) {
          const float v = r.at(b, col, row);
          if (r.is_nodata(v)) continue;
          const std::size_t out = static_cast<std::size_t>(orow + row) * width + static_cast<std::size_t>(oc + col);
          if (filled[b][out]) continue;
          planes[b][out] = v;
          filled[b][out] = true;
        }
      }
    }
  }

  std::optional<float> nodata = ref.nodata();
  if (!nodata) {
    for (const auto& f : filled) {
      if (std::find(f.begin(), f.end(), false) != f.end()) nodata = kFallbackNodata;
    }
  }
  GeoTransform gt = gt0;
  auto origin = gt0.pixel_to_world(static_cast<double>(min_col), static_cast<double>(min_row));
  gt.origin_x = origin[0];
  gt.origin_y = origin[1];
  return Raster(width, height, ref.band_names(), std::move(planes), gt, ref.crs(), nodata);
}

namespace {

template <typename RowCount>
double area_by_rows(int height, const GeoTransform& gt, Crs crs, RowCount&& row_count) {
  double total = 0.0;
  for (int r = 0; r < height; ++r) {
    const std::size_t n = row_count(r);
    if (n == 0) continue;
    if (crs == Crs::Epsg3857) {
      const double lat = mercator_y_to_lat(gt.origin_y + (r + 0.5) * gt.pixel_h) * kDegToRad;
      const double c = std::cos(lat);
      total += static_cast<double>(n) * std::fabs(gt.pixel_w * gt.pixel_h) * c * c;
    } else {
      const double lat_top = (gt.origin_y + r * gt.pixel_h) * kDegToRad;
      const double lat_bottom = (gt.origin_y + (r + 1) * gt.pixel_h) * kDegToRad;
      const double cell = kAuthalicRadius * kAuthalicRadius * std::fabs(gt.pixel_w) * kDegToRad *
                          std::fabs(std::sin(lat_top) - std::sin(lat_bottom));
      total += static_cast<double>(n) * cell;
    }
  }
  return total;
}

}  // namespace

double mask_area_m2(const Mask& mask, const GeoTransform& geotransform, Crs crs, int class_id) {
  if (!geotransform.is_north_up()) throw GeoError(GeoErrc::InvalidArgument, "only north-up geotransforms supported");
  return area_by_rows(mask.height(), geotransform, crs, [&](int r) {
    std::size_t n = 0;
    for (int c = 0; c < mask.width(); ++c) {
      if (mask.at(c, r) == class_id) ++n;
    }
    return n;
  });
}

double grid_area_m2(int width, int height, const GeoTransform& geotransform, Crs crs) {
  return area_by_rows(height, geotransform, crs, [&](int) { return static_cast<std::size_t>(width); });
}

}  // namespace eoscript
