#include "output.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace ecmtk::cli {

std::vector<std::string> header_lines(const RunConfig& config, std::string_view command) {
  std::vector<std::string> lines;
  lines.push_back("ecmtk " + std::string(kToolVersion) + " " + std::string(command));
  for (const auto& l : config.lines()) lines.push_back("config " + l);
  return lines;
}

std::string config_digest(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& line : config.lines()) {
    for (unsigned char c : line + "\n") {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot write output file '" + path.string() + "'");
  body(out);
  out.flush();
  if (!out) throw FileError("error while writing '" + path.string() + "'");
}

nlohmann::ordered_json report(const RunConfig& config, std::string_view command) {
  nlohmann::ordered_json doc;
  doc["tool_version"] = std::string(kToolVersion);
  doc["command"] = std::string(command);
  doc["resolved_config"] = config.lines();
  return doc;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  write_file(path, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
}

nlohmann::ordered_json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace ecmtk::cli
