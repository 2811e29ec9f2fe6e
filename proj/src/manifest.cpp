#include "evt/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "evt/errors.hpp"

namespace evt {

void RunManifest::save(const std::filesystem::path& dir) const {
  nlohmann::json j;
  j["tool"] = tool;
  j["version"] = version;
  j["command"] = command;
  j["config"] = config;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["timings_ms"] = timings_ms;
  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest: " + (dir / "manifest.json").string());
    out << j.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "config.kv");
    if (!out) throw std::runtime_error("cannot write config snapshot: " + (dir / "config.kv").string());
    out << "# evtrack " << command << " configuration snapshot\n";
    for (const auto& [k, v] : config) out << k << "=" << v << "\n";
  }
}

std::map<std::string, std::string> load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace evt
