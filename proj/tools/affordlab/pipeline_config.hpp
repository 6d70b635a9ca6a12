// Copyright 2026 The Affordlab Authors.
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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "affordlab/clients.hpp"
#include "affordlab/datagen.hpp"
#include "affordlab/metrics.hpp"
#include "affordlab/sampler.hpp"
#include "affordlab/trainer.hpp"
#include "affordlab/util.hpp"

namespace affordlab::cli {

struct Paths {
  std::filesystem::path ontology;
  std::filesystem::path embeddings;
  std::filesystem::path catalog;   // optional; synthetic catalog when empty
  std::filesystem::path fixtures;  // optional recorded client replies
  std::filesystem::path out = "out";
};

struct EvalSettings {
  int parse_retries = 3;
  double temperature = 0.0;
  bool swap_and_rejudge = false;
  std::size_t max_concurrency = 4;
  std::string model_name = "affordlab";
  std::filesystem::path items;  // optional EvalItem JSONL
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  bool mock = false;
  std::size_t parallelism = 1;
  std::size_t extremes_k = 10;
  Paths paths;
  DistanceConfig distance;
  SamplePlan sample;
  DatagenConfig datagen;
  TrainConfig train;
  EvalSettings eval;
  std::map<std::string, ClientConfig> clients;  // text, image, scorer, judge, baseline

  PipelineConfig();

  // Relative paths in a config file resolve against base_dir.
  static PipelineConfig from_json(const json& j, const std::filesystem::path& base_dir = {});
  json to_json() const;
  ClientConfig client(const std::string& role) const;
};

PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace affordlab::cli
