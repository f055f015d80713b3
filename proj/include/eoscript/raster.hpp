#pragma once

// Georeferenced raster and label-mask data model.
//
// Rasters are immutable after construction and validated on entry:
//   - every band plane holds width*height samples
//   - band names are unique
//   - north-up geotransform only (pixel_w > 0, pixel_h < 0, no rotation)

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eoscript {

enum class Crs { Epsg4326, Epsg3857 };

std::string crs_code(Crs crs);
Crs parse_crs(std::string_view code);

enum class RasterErrc {
  MissingFile,
  MalformedHeader,
  SizeMismatch,
  IoFailure,
  InvalidRaster,
  UnknownBand,
  EmptySelection,
  OutOfBounds,
  AllNodata,
  UnsupportedCrs,
  InvalidMask,
};

std::string_view to_string(RasterErrc code);

class RasterError : public std::runtime_error {
 public:
  RasterError(RasterErrc code, const std::string& message);
  RasterErrc code() const noexcept { return code_; }

 private:
  RasterErrc code_;
};

// Affine map from pixel (col, row) to CRS coordinates.
struct GeoTransform {
  double origin_x = 0.0;
  double pixel_w = 1.0;
  double rot_x = 0.0;
  double origin_y = 0.0;
  double rot_y = 0.0;
  double pixel_h = -1.0;

  // World coordinate of the pixel-space point (col, row); pass col+0.5 for centers.
  std::array<double, 2> pixel_to_world(double col, double row) const {
    return {origin_x + col * pixel_w + row * rot_x, origin_y + col * rot_y + row * pixel_h};
  }

  bool is_north_up() const { return pixel_w > 0.0 && pixel_h < 0.0 && rot_x == 0.0 && rot_y == 0.0; }

  std::array<double, 6> as_array() const { return {origin_x, pixel_w, rot_x, origin_y, rot_y, pixel_h}; }

  friend bool operator==(const GeoTransform&, const GeoTransform&) = default;
};

// Row-major samples of one band.
using BandPlane = std::vector<float>;

inline const std::vector<std::string>& canonical_band_names() {
  static const std::vector<std::string> names = {"RED", "GREEN", "BLUE", "NIR", "SWIR1", "SWIR2", "NIR900", "NIR970"};
  return names;
}

class Raster {
 public:
  Raster(int width, int height, std::vector<std::string> band_names, std::vector<BandPlane> bands,
         GeoTransform geotransform, Crs crs, std::optional<float> nodata = std::nullopt);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  std::size_t band_count() const noexcept { return bands_.size(); }

  const std::vector<std::string>& band_names() const noexcept { return band_names_; }
  const std::vector<BandPlane>& bands() const noexcept { return bands_; }
  const BandPlane& band(std::size_t index) const { return bands_.at(index); }
  const BandPlane& band(std::string_view name) const;
  std::optional<std::size_t> band_index(std::string_view name) const;
  bool has_band(std::string_view name) const { return band_index(name).has_value(); }

  const GeoTransform& geotransform() const noexcept { return geotransform_; }
  Crs crs() const noexcept { return crs_; }
  const std::optional<float>& nodata() const noexcept { return nodata_; }

  bool is_nodata(float value) const noexcept { return nodata_.has_value() && value == *nodata_; }

  float at(std::size_t band_index, int col, int row) const {
    return bands_[band_index][static_cast<std::size_t>(row) * width_ + col];
  }

  // Bitwise equality of every field, including the float payload.
  bool identical_to(const Raster& other) const;

 private:
  int width_;
  int height_;
  std::vector<std::string> band_names_;
  std::vector<BandPlane> bands_;
  GeoTransform geotransform_;
  Crs crs_;
  std::optional<float> nodata_;
};

// Georeference attached to a mask produced from a raster.
struct Georef {
  GeoTransform geotransform;
  Crs crs = Crs::Epsg4326;
  friend bool operator==(const Georef&, const Georef&) = default;
};

// Integer class-id or boolean grid, row-major.
class Mask {
 public:
  Mask(int width, int height, std::vector<std::int32_t> values, bool boolean = false,
       std::optional<std::map<int, std::string>> legend = std::nullopt, std::optional<Georef> georef = std::nullopt);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return values_.size(); }
  const std::vector<std::int32_t>& values() const noexcept { return values_; }
  std::int32_t at(int col, int row) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  bool is_boolean() const noexcept { return boolean_; }
  const std::optional<std::map<int, std::string>>& legend() const noexcept { return legend_; }
  const std::optional<Georef>& georef() const noexcept { return georef_; }

  std::size_t count(std::int32_t class_id) const;
  bool contains(std::int32_t class_id) const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::int32_t> values_;
  bool boolean_;
  std::optional<std::map<int, std::string>> legend_;
  std::optional<Georef> georef_;
};

// Returns the bands named in `names`, in that order.
Raster select_bands(const Raster& raster, const std::vector<std::string>& names);

// Sub-window [col0, col0+w) x [row0, row0+h); the origin moves through the affine map.
Raster crop_window(const Raster& raster, int col0, int row0, int w, int h);

struct BandStats {
  float min = 0.0F;
  float max = 0.0F;
  double mean = 0.0;
  std::size_t valid_count = 0;
};

// Statistics over non-nodata pixels of one band.
BandStats raster_stats(const Raster& raster, std::string_view band);

}  // namespace eoscript
