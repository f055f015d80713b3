#include "eoscript/run_store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace eoscript {
namespace fs = std::filesystem;
using nlohmann::json;

bool is_safe_id(const std::string& id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
  });
}

std::string serialize_record(const RunRecord& record) { return to_json(record).dump(2) + "\n"; }

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  static std::atomic<unsigned> counter{0};
  std::ostringstream suffix;
  suffix << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "." << counter++;
  const fs::path tmp = path.string() + suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

RunStore::RunStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path RunStore::save(const RunRecord& record) const {
  if (!is_safe_id(record.id)) throw std::invalid_argument("run id '" + record.id + "' is not storable");
  const fs::path path = dir_ / (record.id + ".json");
  write_file_atomic(path, serialize_record(record));
  return path;
}

std::optional<std::string> RunStore::load_text(const std::string& id) const {
  if (!is_safe_id(id)) return std::nullopt;
  std::ifstream in(dir_ / (id + ".json"), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<json> RunStore::summaries() const {
  std::vector<json> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir_, ec)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    std::ifstream in(e.path());
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("id")) continue;
    out.push_back({{"id", doc["id"]},
                   {"query", doc.value("query", "")},
                   {"started_at", doc.value("started_at", "")},
                   {"outcome", doc.value("outcome", json::object()).value("status", "")}});
  }
  std::sort(out.begin(), out.end(), [](const json& a, const json& b) {
    const auto sa = a["started_at"].get<std::string>();
    const auto sb = b["started_at"].get<std::string>();
    if (sa != sb) return sa > sb;
    return a["id"].get<std::string>() > b["id"].get<std::string>();
  });
  return out;
}

}  // namespace eoscript
