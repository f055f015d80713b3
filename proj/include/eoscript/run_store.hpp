#pragma once

// Filesystem run log: one pretty-printed JSON file per run, written atomically.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eoscript/run_record.hpp"

namespace eoscript {

class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir);

  // Writes <dir>/<id>.json via a temporary file and rename. Returns the final path.
  std::filesystem::path save(const RunRecord& record) const;

  // Exact bytes of a stored record; nullopt for unknown or malformed ids.
  std::optional<std::string> load_text(const std::string& id) const;

  // {id, query, started_at, outcome} per run, newest first.
  std::vector<nlohmann::json> summaries() const;

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
};

// Run ids and upload ids: letters, digits, '-' and '_' only.
bool is_safe_id(const std::string& id);

std::string serialize_record(const RunRecord& record);

// Writes through `<path>.tmp.<unique>` then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace eoscript
