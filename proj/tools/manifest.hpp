#ifndef STICKY_TOOLS_MANIFEST_HPP_
#define STICKY_TOOLS_MANIFEST_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sticky::cli {

std::string sha256_hex(const std::string& bytes);

// Writes output files into one directory and remembers their digests.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir);

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);

  const std::filesystem::path& path() const { return dir_; }
  const std::map<std::string, std::string>& digests() const { return digests_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> digests_;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string params;  // resolved option values, one key=value per line
  std::vector<std::uint64_t> seeds;
  std::string version;
  std::map<std::string, std::string> outputs;  // file name -> sha256
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

inline constexpr const char* kManifestName = "manifest.json";

}  // namespace sticky::cli

#endif  // STICKY_TOOLS_MANIFEST_HPP_
