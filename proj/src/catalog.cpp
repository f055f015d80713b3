#include "eoscript/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "eoscript/raster_io.hpp"

namespace eoscript {
namespace fs = std::filesystem;
using nlohmann::json;

CatalogError::CatalogError(CatalogErrc code, const std::string& message) : std::runtime_error(message), code_(code) {}

bool is_iso_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  const int month = std::stoi(text.substr(5, 2));
  const int day = std::stoi(text.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

LocalCatalog::LocalCatalog(const fs::path& index_path) {
  std::ifstream in(index_path);
  if (!in) throw CatalogError(CatalogErrc::EmptyCatalog, "catalog index " + index_path.string() + " not found");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw CatalogError(CatalogErrc::MalformedIndex, index_path.string() + ": " + e.what());
  }
  const fs::path base = index_path.parent_path();
  try {
    for (const auto& s : doc.at("scenes")) {
      SceneEntry e;
      e.id = s.at("id").get<std::string>();
      e.sensor = s.value("sensor", std::string());
      e.date = s.at("date").get<std::string>();
      if (!is_iso_date(e.date)) throw CatalogError(CatalogErrc::MalformedIndex, e.id + ": bad date " + e.date);
      const auto b = s.at("bounds").get<std::vector<double>>();
      if (b.size() != 4) throw CatalogError(CatalogErrc::MalformedIndex, e.id + ": bounds need 4 numbers");
      e.footprint = GeoBounds(b[0], b[1], b[2], b[3], parse_crs(s.value("crs", std::string("EPSG:4326"))));
      e.path = s.at("path").get<std::string>();
      if (e.path.is_relative()) e.path = base / e.path;
      scenes_.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw CatalogError(CatalogErrc::MalformedIndex, index_path.string() + ": " + e.what());
  } catch (const GeoError& e) {
    throw CatalogError(CatalogErrc::MalformedIndex, index_path.string() + ": " + e.what());
  } catch (const RasterError& e) {
    throw CatalogError(CatalogErrc::MalformedIndex, index_path.string() + ": " + e.what());
  }
  if (scenes_.empty()) throw CatalogError(CatalogErrc::EmptyCatalog, "catalog " + index_path.string() + " is empty");
}

std::vector<std::string> LocalCatalog::search(const GeoBounds& bounds, const DateRange& dates,
                                              const std::string& sensor) const {
  if (!is_iso_date(dates.start) || !is_iso_date(dates.end)) {
    throw CatalogError(CatalogErrc::InvalidQuery, "dates must be YYYY-MM-DD");
  }
  std::vector<const SceneEntry*> hits;
  for (const auto& s : scenes_) {
    if (!sensor.empty() && s.sensor != sensor) continue;
    if (s.date < dates.start || s.date > dates.end) continue;
    if (!s.footprint.intersects(bounds)) continue;
    hits.push_back(&s);
  }
  std::sort(hits.begin(), hits.end(), [](const SceneEntry* a, const SceneEntry* b) {
    return a->date != b->date ? a->date < b->date : a->id < b->id;
  });
  std::vector<std::string> ids;
  for (const auto* h : hits) ids.push_back(h->id);
  return ids;
}

Raster LocalCatalog::fetch(const std::string& scene_id) const {
  for (const auto& s : scenes_) {
    if (s.id == scene_id) return load_raster(s.path);
  }
  throw CatalogError(CatalogErrc::UnknownScene, "unknown scene '" + scene_id + "'");
}

}  // namespace eoscript
