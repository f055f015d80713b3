#pragma once

// Deterministic stand-ins for the perception models. Each output is a pure
// function of the input pixels, so end-to-end runs are reproducible. The tools
// run out of process through `eo-mock-tool`, exercising the same wire protocol
// a real model server would.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "eoscript/tool_spec.hpp"

namespace eoscript {

inline constexpr const char* kClassificationTool = "dofa_classification_tool";
inline constexpr const char* kSegmentationTool = "dofa_segmentation_tool";
inline constexpr const char* kDetectionTool = "object_detection_tool";
inline constexpr const char* kBurnScarTool = "burn_scar_tool";

const std::map<int, std::string>& eurosat_taxonomy();
const std::map<int, std::string>& flair2_taxonomy();
const std::map<int, std::string>& nwpu_taxonomy();
const std::map<int, std::string>& burn_scar_taxonomy();

// Class index from the first 8 bytes (big-endian) of the payload digest.
int mock_classify(const Raster& image);
// Per pixel: 1 + floor(mean(RED, GREEN, BLUE) * 13), clamped to [1, 13];
// nodata pixels map to 13. Without RGB bands all bands are averaged.
Mask mock_segment(const Raster& image);

struct MockDetection {
  double cx, cy, w, h, angle;
  int class_id;
  double score;
};
// Empty for constant images; otherwise 0..5 boxes from a SplitMix64 stream
// seeded with the payload digest.
std::vector<MockDetection> mock_detect(const Raster& image);
// Boolean mask: band value >= threshold.
Mask mock_burn_scar(const Raster& image, const std::string& band, double threshold);

// SHA-256 of the band-sequential little-endian float payload.
std::string payload_digest(const Raster& image);

struct MockToolOptions {
  std::filesystem::path executable;
  // tool name -> extra command-line flags, e.g. {"--fail", "message"}.
  std::map<std::string, std::vector<std::string>> extra_args;
  double timeout_s = 30.0;
};

std::vector<ToolSpec> mock_model_tools(const MockToolOptions& options);

// Body of `eo-mock-tool`: one request on `in`, one response on `out`.
// Flags: --tool NAME, --fail MESSAGE (error response, exit 1), --crash
// (exit 3 with a stderr trace), --hang SECONDS, --garbage (non-JSON output),
// --bad-class (segmentation mask with an id outside the taxonomy).
int mock_tool_main(const std::vector<std::string>& argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace eoscript
