#pragma once

// Sidecar raster format: `<stem>.json` header + `<stem>.bin` payload of
// little-endian float32 samples, band-sequential, row-major.
// Masks use the same layout with a single "CLASS" band and a "mask" header object.
// 8-bit PNG files load as RED/GREEN/BLUE reflectance scaled by 1/255.

#include <filesystem>
#include <variant>

#include "eoscript/raster.hpp"

namespace eoscript {

// `path` may name the header (.json), the payload (.bin) or a .png image.
Raster load_raster(const std::filesystem::path& path);
Mask load_mask(const std::filesystem::path& path);

// Either a Raster or a Mask, depending on the header.
std::variant<Raster, Mask> load_grid(const std::filesystem::path& path);

// Writes `<stem>.json` and `<stem>.bin`; returns the header path.
std::filesystem::path save_raster(const Raster& raster, const std::filesystem::path& path);
std::filesystem::path save_mask(const Mask& mask, const std::filesystem::path& path);

// True when the file starts with the PNG signature.
bool is_png_file(const std::filesystem::path& path);

}  // namespace eoscript
