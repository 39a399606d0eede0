#include "tbound/cli/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tbound/errors.hpp"

namespace tbound::cli {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string RunManifest::to_text() const {
  std::ostringstream os;
  os << "command=" << command << "\n";
  os << "version=" << version << "\n";
  for (const auto& [k, v] : params) os << k << "=" << v << "\n";
  os << "seed=" << seed << "\n";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3f", wall_seconds);
  os << "wall_seconds=" << buf << "\n";
  os << "checksum=" << checksum << "\n";
  return os.str();
}

RunManifest RunManifest::parse(const std::string& text) {
  RunManifest m;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("manifest line without '=': " + line);
    const std::string k = line.substr(0, eq);
    const std::string v = line.substr(eq + 1);
    if (k == "command") {
      m.command = v;
    } else if (k == "version") {
      m.version = v;
    } else if (k == "seed") {
      m.seed = std::stoull(v);
    } else if (k == "wall_seconds") {
      m.wall_seconds = std::stod(v);
    } else if (k == "checksum") {
      m.checksum = v;
    } else {
      m.params.emplace_back(k, v);
    }
  }
  return m;
}

const std::string* RunManifest::find(const std::string& key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << bytes;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string manifest_path(const std::string& output_path) { return output_path + ".manifest"; }

}  // namespace tbound::cli
