#pragma once

#include "mosaic/config.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/version.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace mosaic {

// 12 significant digits, scientific. One fixed format for every numeric CSV
// field keeps reruns byte-identical.
inline std::string format_sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", x);
  return buf;
}

inline std::string csv_join(const std::vector<std::string>& cells) {
  std::string line;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

// One output directory per run. Writers are serialized, every artifact is
// recorded, and the manifest is written last so its presence marks a
// complete run.
class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& path() const { return dir_; }

  void write_file(const std::string& filename, const std::string& content_type,
                  const std::function<void(std::ostream&)>& producer) {
    const std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(dir_ / filename);
    if (!out) throw NumericalError("cannot open output file " + (dir_ / filename).string());
    producer(out);
    artifacts_.emplace_back(filename, content_type);
  }

  void write_text(const std::string& filename, const std::string& content_type,
                  const std::string& body) {
    write_file(filename, content_type, [&](std::ostream& out) { out << body; });
  }

  void write_json(const std::string& filename, const std::string& content_type,
                  const nlohmann::json& j) {
    write_file(filename, content_type, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }

  void add_timing(const std::string& stage, double milliseconds) {
    const std::lock_guard<std::mutex> lock(mutex_);
    timings_.emplace_back(stage, milliseconds);
  }

  // Writes manifest.json; call once, after every other artifact.
  void finalize(const RunConfig& cfg, const std::string& verb) {
    const std::lock_guard<std::mutex> lock(mutex_);
    nlohmann::json manifest;
    manifest["schema_version"] = k_manifest_schema;
    manifest["tool"] = {{"name", "mosaicdyn"},
                        {"version", k_version},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                      std::to_string(EIGEN_MINOR_VERSION)}};
    manifest["command"] = verb;
    manifest["config_name"] = cfg.name;
    nlohmann::json echo = nlohmann::json::object();
    for (const std::string& key : config_schema()) {
      const auto it = cfg.raw.find(key);
      if (it != cfg.raw.end()) echo[key] = it->second;
    }
    manifest["config"] = echo;
    nlohmann::json inventory = nlohmann::json::object();
    for (const auto& [file, type] : artifacts_) inventory[file] = type;
    manifest["artifacts"] = inventory;
    nlohmann::json timings = nlohmann::json::object();
    for (const auto& [stage, ms] : timings_) timings[stage] = ms;
    manifest["timings_ms"] = timings;

    std::ofstream out(dir_ / "manifest.json");
    if (!out) throw NumericalError("cannot write manifest.json");
    out << manifest.dump(2) << '\n';
  }

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  std::vector<std::pair<std::string, std::string>> artifacts_;
  std::vector<std::pair<std::string, double>> timings_;
};

}  // namespace mosaic
