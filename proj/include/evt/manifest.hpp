#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace evt {

/// Snapshot of one CLI run: resolved configuration, seeds, artifact paths
/// and per-stage timings. The flat key=value snapshot written next to it
/// (config.kv) can be fed back through --config to reproduce the run.
struct RunManifest {
  std::string tool = "evtrack";
  std::string version;
  std::string command;
  std::map<std::string, std::string> config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, double> timings_ms;

  void save(const std::filesystem::path& dir) const;  // manifest.json + config.kv
};

/// Flat key=value file, '#' comments, used both for user configs and for
/// the reproducibility snapshot.
std::map<std::string, std::string> load_key_values(const std::filesystem::path& path);

}  // namespace evt
