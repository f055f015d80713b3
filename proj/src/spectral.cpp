#include "eoscript/spectral.hpp"

#include <cctype>
#include <cmath>

namespace eoscript {

namespace {

struct Formula {
  IndexKind kind;
  const char* name;
  std::vector<std::string> roles;
  const char* description;
};

const std::vector<Formula>& formulas() {
  static const std::vector<Formula> table = {
      {IndexKind::Ndvi, "NDVI", {"NIR", "RED"}, "Normalized Difference Vegetation Index (NIR-RED)/(NIR+RED)."},
      {IndexKind::Savi, "SAVI", {"NIR", "RED"}, "Soil Adjusted Vegetation Index ((NIR-RED)/(NIR+RED+L))(1+L)."},
      {IndexKind::Evi, "EVI", {"NIR", "RED", "BLUE"},
       "Enhanced Vegetation Index G(NIR-RED)/(NIR+C1*RED-C2*BLUE+L)."},
      {IndexKind::Ndwi, "NDWI", {"GREEN", "NIR"}, "Normalized Difference Water Index (GREEN-NIR)/(GREEN+NIR)."},
      {IndexKind::Wbi, "WBI", {"NIR900", "NIR970"}, "Water Band Index NIR900/NIR970 (canopy water content)."},
      {IndexKind::Ndsi, "NDSI", {"GREEN", "SWIR"}, "Normalized Difference Snow Index (GREEN-SWIR)/(GREEN+SWIR)."},
      {IndexKind::Sr, "SR", {"NIR", "RED"}, "Simple Ratio NIR/RED."},
      {IndexKind::Nwi1, "NWI1", {"NIR", "SWIR1"}, "Normalized Water Index 1 (NIR-SWIR1)/(NIR+SWIR1)."},
      {IndexKind::Nwi2, "NWI2", {"NIR", "SWIR2"}, "Normalized Water Index 2 (NIR-SWIR2)/(NIR+SWIR2)."},
  };
  return table;
}

const Formula& formula(IndexKind kind) {
  for (const auto& f : formulas()) {
    if (f.kind == kind) return f;
  }
  throw std::logic_error("unknown index kind");
}

struct Ratio {
  double numerator;
  double denominator;
  double scale = 1.0;
};

// v holds the role samples in formula order.
Ratio evaluate(IndexKind kind, const double* v, const IndexParams& p) {
  switch (kind) {
    case IndexKind::Ndvi:
    case IndexKind::Ndwi:
    case IndexKind::Ndsi:
    case IndexKind::Nwi1:
    case IndexKind::Nwi2:
      return {v[0] - v[1], v[0] + v[1]};
    case IndexKind::Savi:
      return {v[0] - v[1], v[0] + v[1] + p.l_savi, 1.0 + p.l_savi};
    case IndexKind::Evi:
      return {v[0] - v[1], v[0] + p.c1 * v[1] - p.c2 * v[2] + p.l_evi, p.gain};
    case IndexKind::Wbi:
    case IndexKind::Sr:
      return {v[0], v[1]};
  }
  return {0.0, 0.0};
}

struct RoleInput {
  const BandPlane* plane;
  std::optional<float> nodata;
};

Raster compute_planes(IndexKind kind, const std::vector<RoleInput>& inputs, int width, int height,
                      const GeoTransform& gt, Crs crs, std::optional<float> out_nodata_hint,
                      const IndexParams& params) {
  params.validate();
  const float out_nodata = out_nodata_hint.value_or(kDefaultIndexNodata);
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  BandPlane out(pixels);
  double v[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < pixels; ++i) {
    bool missing = false;
    for (std::size_t r = 0; r < inputs.size(); ++r) {
      const float sample = (*inputs[r].plane)[i];
      if (inputs[r].nodata && sample == *inputs[r].nodata) missing = true;
      v[r] = sample;
    }
    if (missing) {
      out[i] = out_nodata;
      continue;
    }
    const Ratio q = evaluate(kind, v, params);
    if (!(std::fabs(q.denominator) >= params.epsilon)) {
      out[i] = out_nodata;
      continue;
    }
    out[i] = static_cast<float>(q.scale * q.numerator / q.denominator);
  }
  return Raster(width, height, {formula(kind).name}, {std::move(out)}, gt, crs, out_nodata);
}

}  // namespace

SpectralError::SpectralError(SpectralErrc code, const std::string& message) : std::runtime_error(message), code_(code) {}

void IndexParams::validate() const {
  for (double x : {l_savi, l_evi, gain, c1, c2, epsilon}) {
    if (!std::isfinite(x)) throw SpectralError(SpectralErrc::InvalidParams, "index parameters must be finite");
  }
  if (epsilon <= 0.0) throw SpectralError(SpectralErrc::InvalidParams, "epsilon must be positive");
}

std::string index_name(IndexKind kind) { return formula(kind).name; }

std::optional<IndexKind> parse_index_kind(std::string_view name) {
  std::string upper;
  for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (upper == "NWI-1") upper = "NWI1";
  if (upper == "NWI-2") upper = "NWI2";
  for (const auto& f : formulas()) {
    if (upper == f.name) return f.kind;
  }
  return std::nullopt;
}

const std::vector<std::string>& required_roles(IndexKind kind) { return formula(kind).roles; }

Raster compute_index(IndexKind kind, const Raster& raster, const BandMap& band_map, const IndexParams& params) {
  const auto& f = formula(kind);
  std::vector<RoleInput> inputs;
  for (const auto& role : f.roles) {
    auto mapped = band_map.find(role);
    const std::string band_name = mapped != band_map.end() ? mapped->second : role;
    auto index = raster.band_index(band_name);
    if (!index) {
      std::string msg = std::string(f.name) + " requires band " + role;
      if (mapped != band_map.end()) msg += " (mapped to '" + band_name + "')";
      if (role == "SWIR") msg += "; map SWIR explicitly to SWIR1 or SWIR2";
      throw SpectralError(SpectralErrc::MissingBand, msg);
    }
    inputs.push_back({&raster.band(*index), raster.nodata()});
  }
  return compute_planes(kind, inputs, raster.width(), raster.height(), raster.geotransform(), raster.crs(),
                        raster.nodata(), params);
}

Raster compute_index(IndexKind kind, const std::map<std::string, const Raster*>& role_rasters,
                     const IndexParams& params) {
  const auto& f = formula(kind);
  std::vector<RoleInput> inputs;
  const Raster* first = nullptr;
  for (const auto& role : f.roles) {
    auto it = role_rasters.find(role);
    if (it == role_rasters.end() || it->second == nullptr) {
      throw SpectralError(SpectralErrc::MissingBand, std::string(f.name) + " requires band " + role);
    }
    const Raster& r = *it->second;
    if (first && (r.width() != first->width() || r.height() != first->height())) {
      throw SpectralError(SpectralErrc::ShapeMismatch, std::string(f.name) + ": band " + role + " is " +
                                                           std::to_string(r.width()) + "x" +
                                                           std::to_string(r.height()) + ", expected " +
                                                           std::to_string(first->width()) + "x" +
                                                           std::to_string(first->height()));
    }
    if (!first) first = &r;
    const std::size_t band = r.band_index(role).value_or(0);
    inputs.push_back({&r.band(band), r.nodata()});
  }
  return compute_planes(kind, inputs, first->width(), first->height(), first->geotransform(), first->crs(),
                        first->nodata(), params);
}

std::vector<IndexInfo> list_indices() {
  const IndexParams defaults;
  std::vector<IndexInfo> out;
  for (const auto& f : formulas()) {
    IndexInfo info{f.kind, f.name, f.roles, {}, f.description};
    info.parameter_defaults["epsilon"] = defaults.epsilon;
    if (f.kind == IndexKind::Savi) info.parameter_defaults["L"] = defaults.l_savi;
    if (f.kind == IndexKind::Evi) {
      info.parameter_defaults["L"] = defaults.l_evi;
      info.parameter_defaults["G"] = defaults.gain;
      info.parameter_defaults["C1"] = defaults.c1;
      info.parameter_defaults["C2"] = defaults.c2;
    }
    out.push_back(std::move(info));
  }
  return out;
}

}  // namespace eoscript
