#pragma once

// Classical spectral indices as pure raster-to-raster operations.
//
// Formulas name spectral roles (NIR, RED, ...). A BandMap binds each role to
// a band of the input raster; roles left unmapped bind to the band with the
// identical name when present. The NDSI "SWIR" role has no such default and
// must be mapped explicitly to SWIR1 or SWIR2.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eoscript/raster.hpp"

namespace eoscript {

enum class IndexKind { Ndvi, Savi, Evi, Ndwi, Wbi, Ndsi, Sr, Nwi1, Nwi2 };

inline constexpr IndexKind kAllIndexKinds[] = {IndexKind::Ndvi, IndexKind::Savi, IndexKind::Evi,
                                               IndexKind::Ndwi, IndexKind::Wbi,  IndexKind::Ndsi,
                                               IndexKind::Sr,   IndexKind::Nwi1, IndexKind::Nwi2};

std::string index_name(IndexKind kind);  // "NDVI", "NWI1", ...
std::optional<IndexKind> parse_index_kind(std::string_view name);

struct IndexParams {
  double l_savi = 0.5;   // soil brightness correction
  double l_evi = 1.0;    // canopy background term
  double gain = 2.5;     // EVI gain G
  double c1 = 6.0;       // aerosol coefficient (red)
  double c2 = 7.5;       // aerosol coefficient (blue)
  double epsilon = 1e-8; // |denominator| below this yields nodata

  void validate() const;
};

// role -> band name in the input raster
using BandMap = std::map<std::string, std::string>;

enum class SpectralErrc { MissingBand, ShapeMismatch, InvalidParams };

class SpectralError : public std::runtime_error {
 public:
  SpectralError(SpectralErrc code, const std::string& message);
  SpectralErrc code() const noexcept { return code_; }

 private:
  SpectralErrc code_;
};

// Roles the formula of `kind` reads, in formula order.
const std::vector<std::string>& required_roles(IndexKind kind);

// Nodata sentinel used on outputs when the input declares none.
inline constexpr float kDefaultIndexNodata = -9999.0F;

// Single-band output named after the index; geotransform and CRS copied from `raster`.
Raster compute_index(IndexKind kind, const Raster& raster, const BandMap& band_map = {},
                     const IndexParams& params = {});

// Each role read from its own raster (one file per band, as many products ship).
// All rasters must share dimensions; geotransform/CRS come from the first role.
Raster compute_index(IndexKind kind, const std::map<std::string, const Raster*>& role_rasters,
                     const IndexParams& params = {});

struct IndexInfo {
  IndexKind kind;
  std::string name;
  std::vector<std::string> required_bands;
  std::map<std::string, double> parameter_defaults;
  std::string description;
};

std::vector<IndexInfo> list_indices();

}  // namespace eoscript
