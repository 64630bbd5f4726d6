// Copyright 2026 The csmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CSMLAB_EXPERIMENTS_H
#define CSMLAB_EXPERIMENTS_H

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "csmlab/error.h"
#include "json.hpp"

namespace csmlab {

/// Malformed or out-of-range experiment configuration.
class ConfigError : public Error {
   public:
    using Error::Error;
};

/// Output could not be written.
class IoError : public Error {
   public:
    using Error::Error;
};

/// Environment variable naming the default output root.
inline constexpr const char *kOutputDirEnv = "CSMLAB_OUT_DIR";

struct ExperimentConfig {
    std::string experiment;
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 0;
    /// Output directory. Empty means $CSMLAB_OUT_DIR/<experiment>, or results/<experiment>.
    std::filesystem::path output;
};

const std::vector<std::string> &experiment_names();

/// Parses {"experiment": ..., "params": {...}, "seed": ..., "output": ...}.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path &path);
nlohmann::json config_to_json(const ExperimentConfig &config);

/// Checks the experiment name and every parameter (names, types, ranges). Throws ConfigError.
void validate_config(const ExperimentConfig &config);

/// Output directory the run will use.
std::filesystem::path resolve_output_dir(const ExperimentConfig &config);

struct RunOptions {
    unsigned threads = 1;
};

struct RunManifest {
    nlohmann::json config;
    std::string version;
    std::string started_utc;
    double wall_seconds = 0;
    /// File name -> SHA-256 of its contents.
    std::map<std::string, std::string> checksums;
    /// Experiment-specific results (verdicts, derived values).
    nlohmann::json summary = nlohmann::json::object();
    std::filesystem::path directory;

    nlohmann::json to_json() const;
};

/// Runs one experiment, writes `<experiment>.csv` and `manifest.json` into the output directory.
/// The CSV depends only on (config, seed): thread count and scheduling do not change it.
RunManifest run_experiment(const ExperimentConfig &config, const RunOptions &options = {});

/// Process exit status for an exception escaping `run_experiment` or config loading:
/// 2 config, 3 numeric or truncation, 4 I/O.
int exit_status_for(const std::exception &e);

}  // namespace csmlab

#endif
