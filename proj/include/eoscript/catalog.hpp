#pragma once

// Scene search and retrieval behind a provider interface. LocalCatalog reads a
// JSON index of sidecar rasters; a remote imagery service can implement the
// same interface.
//
// Index file:
//   {"scenes": [{"id": "S2_...", "sensor": "sentinel-2", "date": "2025-01-14",
//                "bounds": [min_x, min_y, max_x, max_y], "crs": "EPSG:4326",
//                "path": "scenes/S2_....json"}]}
// Relative paths resolve against the index file's directory.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "eoscript/geo_ops.hpp"
#include "eoscript/raster.hpp"

namespace eoscript {

enum class CatalogErrc { UnknownScene, EmptyCatalog, InvalidQuery, MalformedIndex };

class CatalogError : public std::runtime_error {
 public:
  CatalogError(CatalogErrc code, const std::string& message);
  CatalogErrc code() const noexcept { return code_; }

 private:
  CatalogErrc code_;
};

struct DateRange {
  std::string start;  // YYYY-MM-DD, inclusive
  std::string end;    // YYYY-MM-DD, inclusive
};

bool is_iso_date(const std::string& text);

class SceneProvider {
 public:
  virtual ~SceneProvider() = default;
  // Scene ids intersecting `bounds` within `dates` for `sensor` ("" = any), sorted by date then id.
  virtual std::vector<std::string> search(const GeoBounds& bounds, const DateRange& dates,
                                          const std::string& sensor) const = 0;
  virtual Raster fetch(const std::string& scene_id) const = 0;
};

struct SceneEntry {
  std::string id;
  std::string sensor;
  std::string date;
  GeoBounds footprint;
  std::filesystem::path path;
};

class LocalCatalog : public SceneProvider {
 public:
  // Throws CatalogError(EmptyCatalog) when the index is absent or lists no scenes.
  explicit LocalCatalog(const std::filesystem::path& index_path);

  std::vector<std::string> search(const GeoBounds& bounds, const DateRange& dates,
                                  const std::string& sensor) const override;
  Raster fetch(const std::string& scene_id) const override;

  const std::vector<SceneEntry>& scenes() const noexcept { return scenes_; }

 private:
  std::vector<SceneEntry> scenes_;
};

}  // namespace eoscript
