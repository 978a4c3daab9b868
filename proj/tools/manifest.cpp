#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace sticky::cli {

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

OutputDir::OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void OutputDir::write(const std::string& name, const std::string& content) {
  std::ofstream out(dir_ / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
  out << content;
  digests_[name] = sha256_hex(content);
}

void OutputDir::write_json(const std::string& name, const nlohmann::json& j) {
  write(name, j.dump(2) + "\n");
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"command", m.command}, {"argv", m.argv},     {"params", m.params},
          {"seeds", m.seeds},     {"version", m.version}, {"outputs", m.outputs}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.params = j.value("params", std::string{});
  m.seeds = j.value("seeds", std::vector<std::uint64_t>{});
  m.version = j.value("version", std::string{});
  m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  return m;
}

}  // namespace sticky::cli
