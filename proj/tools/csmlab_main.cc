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

// Command-line driver: runs bundled or user experiment configs and writes CSV + manifest.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "csmlab/experiments.h"

namespace {

int fail(const std::exception &e) {
    std::cerr << "csmlab: error: " << e.what() << "\n";
    return csmlab::exit_status_for(e);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"csmlab: contexts, systems and modalities numerical laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned threads = 1;

    auto *run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_dir,
                    std::string("Output directory (default: config 'output', then $") +
                        csmlab::kOutputDirEnv + "/<experiment>, then results/<experiment>)");
    run->add_option("--threads", threads, "Worker threads for independent trials")
        ->check(CLI::Range(1u, 1024u));

    auto *list = app.add_subcommand("list-experiments", "Print the known experiment names");

    auto *validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", config_path, "Experiment config (JSON)")->required();
    validate->add_option("--seed", seed, "Override the config seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list->parsed()) {
            for (const std::string &name : csmlab::experiment_names()) {
                std::cout << name << "\n";
            }
            return 0;
        }
        csmlab::ExperimentConfig config = csmlab::load_config(config_path);
        if (seed) {
            config.seed = *seed;
        }
        if (validate->parsed()) {
            csmlab::validate_config(config);
            std::cout << config_path << ": ok (" << config.experiment << ")\n";
            return 0;
        }
        if (!out_dir.empty()) {
            config.output = out_dir;
        }
        csmlab::RunManifest m = csmlab::run_experiment(config, csmlab::RunOptions{threads});
        std::cout << "experiment " << config.experiment << " -> " << m.directory.string() << "\n";
        for (const auto &[file, sum] : m.checksums) {
            std::cout << "  " << file << "  sha256:" << sum << "\n";
        }
        if (!m.summary.empty()) {
            nlohmann::json brief = m.summary;
            brief.erase("certificate");
            std::cout << "  summary: " << brief.dump() << "\n";
        }
        (void)run;
        return 0;
    } catch (const std::exception &e) {
        return fail(e);
    }
}
