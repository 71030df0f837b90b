// Copyright 2026 the qfsru authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "qfsru/synthetic.hpp"
#include "qfsru/trainer.hpp"

namespace qfsru {

// Everything a CLI run can be told, with defaults for all but data paths.
struct RunConfig {
    train::TrainConfig train;
    SyntheticConfig synth;
    std::string data;        // dataset JSONL
    std::string kb;          // knowledge base JSONL
    std::string checkpoint;  // model checkpoint JSON
    std::string queries;     // retrieval queries JSONL
    std::string out_dir = ".";
    std::size_t workers = 1;
    std::size_t fold = 0;        // eval: which fold is held out
    std::size_t fold_limit = 0;  // train/ablate: 0 runs every fold
    std::size_t max_samples = 0; // spectrum: 0 exports all
};

// One config key. Names use underscores in files and dashes on the command
// line (max_epochs <-> --max-epochs).
struct ConfigKey {
    std::string name;
    std::string help;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<ConfigKey>& config_keys();

// Throws ConfigError for an unknown key or an unparsable value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// "key = value" lines; '#' starts a comment. Unknown keys are errors
// (ParseError carries the line number).
void parse_config_text(RunConfig& config, const std::string& text);
void load_config_file(RunConfig& config, const std::filesystem::path& path);

// Every key in config_keys() order; parse_config_text(serialize) round-trips.
std::string serialize_config(const RunConfig& config);

}  // namespace qfsru
