#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace cdmca::cli {

/// Hex SHA-256 of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

/// Key-value record of one CLI invocation, written as `manifest.txt`.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void config(const std::string& key, const std::string& value);
  void input(const std::filesystem::path& path);
  void output(const std::filesystem::path& path);

  /// Writes <dir>/manifest.txt; output digests are taken at this point.
  void write(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::pair<std::string, std::string>> config_;
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
};

}  // namespace cdmca::cli
