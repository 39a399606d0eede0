#pragma once

// Line-oriented key=value manifests written next to every output file.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tbound::cli {

inline constexpr const char* kArtifactVersion = "1.0.0";

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

struct RunManifest {
  std::string command;
  /// Parameters in the order they are written; keys match the command's
  /// long flag names so the manifest can be fed back through --config.
  std::vector<std::pair<std::string, std::string>> params;
  std::uint64_t seed = 0;
  std::string version = kArtifactVersion;
  double wall_seconds = 0.0;
  std::string checksum;  // fnv1a64 of the output bytes, 16 hex digits

  std::string to_text() const;
  static RunManifest parse(const std::string& text);
  const std::string* find(const std::string& key) const;
};

/// Reads the whole file; throws IoError.
std::string read_file(const std::string& path);
/// Writes atomically enough for our purposes (truncate + write); throws IoError.
void write_file(const std::string& path, const std::string& bytes);

std::string manifest_path(const std::string& output_path);

}  // namespace tbound::cli
