#include "cli_common.hpp"

#include <filesystem>

#include "specktrack/error.hpp"
#include "specktrack/io.hpp"
#include "specktrack/version.hpp"

namespace specktrack::cli {

nlohmann::json load_config(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::InvalidConfig, "config '" + path + "' is not valid JSON: " + e.what());
  }
}

void write_run_manifest(const GlobalOptions& global, const std::string& command,
                        const nlohmann::json& resolved_config,
                        const std::vector<std::string>& outputs) {
  nlohmann::json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["command"] = command;
  manifest["seed"] = global.seed;
  manifest["threads"] = global.threads;
  manifest["format"] = global.format;
  manifest["plot"] = global.plot;
  manifest["config"] = resolved_config;
  manifest["outputs"] = outputs;
  write_text_file(output_path(global, "manifest.json"), manifest.dump(2) + "\n");
}

std::string output_path(const GlobalOptions& global, const std::string& filename) {
  std::filesystem::create_directories(global.output_dir);
  return (std::filesystem::path(global.output_dir) / filename).string();
}

}  // namespace specktrack::cli
