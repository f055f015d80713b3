#include "eoscript/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

namespace eoscript {

std::string crs_code(Crs crs) {
  switch (crs) {
    case Crs::Epsg4326:
      return "EPSG:4326";
    case Crs::Epsg3857:
      return "EPSG:3857";
  }
  return "EPSG:?";
}

Crs parse_crs(std::string_view code) {
  if (code == "EPSG:4326") return Crs::Epsg4326;
  if (code == "EPSG:3857") return Crs::Epsg3857;
  throw RasterError(RasterErrc::UnsupportedCrs, "unsupported CRS '" + std::string(code) + "'");
}

std::string_view to_string(RasterErrc code) {
  switch (code) {
    case RasterErrc::MissingFile: return "MissingFile";
    case RasterErrc::MalformedHeader: return "MalformedHeader";
    case RasterErrc::SizeMismatch: return "SizeMismatch";
    case RasterErrc::IoFailure: return "IoFailure";
    case RasterErrc::InvalidRaster: return "InvalidRaster";
    case RasterErrc::UnknownBand: return "UnknownBand";
    case RasterErrc::EmptySelection: return "EmptySelection";
    case RasterErrc::OutOfBounds: return "OutOfBounds";
    case RasterErrc::AllNodata: return "AllNodata";
    case RasterErrc::UnsupportedCrs: return "UnsupportedCrs";
    case RasterErrc::InvalidMask: return "InvalidMask";
  }
  return "RasterError";
}

RasterError::RasterError(RasterErrc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Raster::Raster(int width, int height, std::vector<std::string> band_names, std::vector<BandPlane> bands,
               GeoTransform geotransform, Crs crs, std::optional<float> nodata)
    : width_(width),
      height_(height),
      band_names_(std::move(band_names)),
      bands_(std::move(bands)),
      geotransform_(geotransform),
      crs_(crs),
      nodata_(nodata) {
  if (width_ <= 0 || height_ <= 0) {
    throw RasterError(RasterErrc::InvalidRaster, "width and height must be positive");
  }
  if (bands_.empty()) throw RasterError(RasterErrc::InvalidRaster, "raster has no bands");
  if (band_names_.size() != bands_.size()) {
    throw RasterError(RasterErrc::InvalidRaster, "band name count differs from band count");
  }
  std::set<std::string_view> seen;
  for (const auto& name : band_names_) {
    if (name.empty()) throw RasterError(RasterErrc::InvalidRaster, "empty band name");
    if (!seen.insert(name).second) throw RasterError(RasterErrc::InvalidRaster, "duplicate band name " + name);
  }
  for (const auto& plane : bands_) {
    if (plane.size() != pixel_count()) {
      throw RasterError(RasterErrc::InvalidRaster, "band plane length differs from width*height");
    }
  }
  if (!geotransform_.is_north_up()) {
    throw RasterError(RasterErrc::InvalidRaster, "only north-up geotransforms are supported");
  }
  if (nodata_ && !std::isfinite(*nodata_)) {
    throw RasterError(RasterErrc::InvalidRaster, "nodata must be finite");
  }
}

const BandPlane& Raster::band(std::string_view name) const {
  auto index = band_index(name);
  if (!index) throw RasterError(RasterErrc::UnknownBand, "band '" + std::string(name) + "' not present");
  return bands_[*index];
}

std::optional<std::size_t> Raster::band_index(std::string_view name) const {
  for (std::size_t i = 0; i < band_names_.size(); ++i) {
    if (band_names_[i] == name) return i;
  }
  return std::nullopt;
}

bool Raster::identical_to(const Raster& other) const {
  if (width_ != other.width_ || height_ != other.height_ || band_names_ != other.band_names_ ||
      crs_ != other.crs_ || nodata_.has_value() != other.nodata_.has_value()) {
    return false;
  }
  if (nodata_ && std::memcmp(&*nodata_, &*other.nodata_, sizeof(float)) != 0) return false;
  auto a = geotransform_.as_array();
  auto b = other.geotransform_.as_array();
  if (std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) != 0) return false;
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    if (std::memcmp(bands_[i].data(), other.bands_[i].data(), bands_[i].size() * sizeof(float)) != 0) return false;
  }
  return true;
}

Mask::Mask(int width, int height, std::vector<std::int32_t> values, bool boolean,
           std::optional<std::map<int, std::string>> legend, std::optional<Georef> georef)
    : width_(width),
      height_(height),
      values_(std::move(values)),
      boolean_(boolean),
      legend_(std::move(legend)),
      georef_(std::move(georef)) {
  if (width_ <= 0 || height_ <= 0) throw RasterError(RasterErrc::InvalidMask, "width and height must be positive");
  if (values_.size() != static_cast<std::size_t>(width_) * height_) {
    throw RasterError(RasterErrc::InvalidMask, "mask value count differs from width*height");
  }
  std::set<std::int32_t> distinct;
  for (auto v : values_) {
    if (v < 0) throw RasterError(RasterErrc::InvalidMask, "mask values must be nonnegative");
    if (boolean_ && v > 1) throw RasterError(RasterErrc::InvalidMask, "boolean mask values must be 0 or 1");
    distinct.insert(v);
  }
  if (legend_) {
    for (auto v : distinct) {
      if (!legend_->contains(v)) {
        throw RasterError(RasterErrc::InvalidMask, "legend has no entry for class " + std::to_string(v));
      }
    }
  }
  if (georef_ && !georef_->geotransform.is_north_up()) {
    throw RasterError(RasterErrc::InvalidMask, "only north-up geotransforms are supported");
  }
}

std::size_t Mask::count(std::int32_t class_id) const {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), class_id));
}

bool Mask::contains(std::int32_t class_id) const {
  return std::find(values_.begin(), values_.end(), class_id) != values_.end();
}

Raster select_bands(const Raster& raster, const std::vector<std::string>& names) {
  if (names.empty()) throw RasterError(RasterErrc::EmptySelection, "no bands selected");
  std::vector<BandPlane> planes;
  planes.reserve(names.size());
  for (const auto& name : names) planes.push_back(raster.band(name));
  return Raster(raster.width(), raster.height(), names, std::move(planes), raster.geotransform(), raster.crs(),
                raster.nodata());
}

Raster crop_window(const Raster& raster, int col0, int row0, int w, int h) {
  if (col0 < 0 || row0 < 0 || w <= 0 || h <= 0 || col0 + w > raster.width() || row0 + h > raster.height()) {
    throw RasterError(RasterErrc::OutOfBounds, "window (" + std::to_string(col0) + "," + std::to_string(row0) + "," +
                                                   std::to_string(w) + "," + std::to_string(h) +
                                                   ") outside raster extent");
  }
  std::vector<BandPlane> planes;
  planes.reserve(raster.band_count());
  for (const auto& src : raster.bands()) {
    BandPlane plane(static_cast<std::size_t>(w) * h);
    for (int r = 0; r < h; ++r) {
      auto begin = src.begin() + static_cast<std::ptrdiff_t>(row0 + r) * raster.width() + col0;
      std::copy(begin, begin + w, plane.begin() + static_cast<std::ptrdiff_t>(r) * w);
    }
    planes.push_back(std::move(plane));
  }
  GeoTransform gt = raster.geotransform();
  auto origin = gt.pixel_to_world(col0, row0);
  gt.origin_x = origin[0];
  gt.origin_y = origin[1];
  return Raster(w, h, raster.band_names(), std::move(planes), gt, raster.crs(), raster.nodata());
}

BandStats raster_stats(const Raster& raster, std::string_view band) {
  const auto& plane = raster.band(band);
  BandStats stats;
  double sum = 0.0;
  for (float v : plane) {
    if (raster.is_nodata(v)) continue;
    if (stats.valid_count == 0) {
      stats.min = stats.max = v;
    } else {
      stats.min = std::min(stats.min, v);
      stats.max = std::max(stats.max, v);
    }
    sum += v;
    ++stats.valid_count;
  }
  if (stats.valid_count == 0) {
    throw RasterError(RasterErrc::AllNodata, "band '" + std::string(band) + "' has no valid pixels");
  }
  stats.mean = sum / static_cast<double>(stats.valid_count);
  return stats;
}

}  // namespace eoscript
