#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace specktrack::cli {

struct GlobalOptions {
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;  // 0 = auto
  std::string output_dir = ".";
  std::string format = "csv";  // csv | json
  bool plot = false;
};

/// Loads and parses the subcommand's JSON config file.
nlohmann::json load_config(const std::string& path);

/// Writes <output_dir>/manifest.json with the fully resolved config, seed,
/// artifact version and produced files. Content is deterministic.
void write_run_manifest(const GlobalOptions& global, const std::string& command,
                        const nlohmann::json& resolved_config,
                        const std::vector<std::string>& outputs);

std::string output_path(const GlobalOptions& global, const std::string& filename);

// Subcommand entry points. Each returns the process exit code.
int run_synth(const GlobalOptions& global, const std::string& config_path);
int run_augment(const GlobalOptions& global, const std::string& config_path);
int run_motion(const GlobalOptions& global, const std::string& config_path);
int run_train(const GlobalOptions& global, const std::string& config_path);
int run_track(const GlobalOptions& global, const std::string& config_path);
int run_eval(const GlobalOptions& global, const std::string& config_path);
int run_sweep(const GlobalOptions& global, const std::string& config_path);
int run_gls(const GlobalOptions& global, const std::string& config_path);
int run_gradcheck(const GlobalOptions& global, const std::string& config_path, bool tiny);

}  // namespace specktrack::cli
