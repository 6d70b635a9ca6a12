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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "affordlab/evalharness.hpp"
#include "pipeline_config.hpp"

namespace affordlab::cli {

struct Context {
  PipelineConfig config;
  bool json_output = false;
  std::string command;  // e.g. "sample train", recorded in sidecars
};

// Every command returns a process exit code; affordlab::Error escapes to main.
int ontology_validate(Context& ctx, const std::filesystem::path& file);
int ontology_synth(Context& ctx, const std::filesystem::path& dir, std::size_t affordances, std::size_t concepts);
int metrics_build(Context& ctx);
int sample_train(Context& ctx);
int sample_test(Context& ctx);
int sample_extremes(Context& ctx);
int curriculum_build(Context& ctx);
int datagen_run(Context& ctx, DatagenPhase phase);

struct TrainOptions {
  bool grad_check = false;
  bool gamma_grid = false;
  bool toy = false;
};
int train(Context& ctx, const TrainOptions& options);

int eval_run(Context& ctx, EvalMode mode);
int eval_report(Context& ctx, EvalMode mode);

struct IaaOptions {
  std::string rater_a;
  std::string rater_b;
  bool linear_weights = false;
  std::filesystem::path auto_manifest;  // optional eval manifest for human-vs-auto agreement
};
int eval_iaa(Context& ctx, const std::filesystem::path& csv, const IaaOptions& options);

int prompt(Context& ctx, const std::vector<std::string>& affordances);

int pipeline(Context& ctx);

}  // namespace affordlab::cli
