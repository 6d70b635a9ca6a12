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

#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "affordlab/error.hpp"
#include "commands.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kPipelineError = 1;

struct Overrides {
  std::string config;
  std::string out;
  std::string ontology;
  std::string embeddings;
  std::string catalog;
  std::string fixtures;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma;
  std::optional<double> lr;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> parallelism;
  std::optional<std::size_t> k;
  bool mock = false;
  bool review = false;
  bool shuffled = false;
  bool random_test = false;
  bool swap = false;
};

affordlab::cli::PipelineConfig effective_config(const Overrides& o) {
  using affordlab::cli::PipelineConfig;
  PipelineConfig c = o.config.empty() ? PipelineConfig() : affordlab::cli::load_config(o.config);
  if (!o.out.empty()) c.paths.out = o.out;
  if (!o.ontology.empty()) c.paths.ontology = o.ontology;
  if (!o.embeddings.empty()) c.paths.embeddings = o.embeddings;
  if (!o.catalog.empty()) c.paths.catalog = o.catalog;
  if (!o.fixtures.empty()) c.paths.fixtures = o.fixtures;
  if (o.seed) c.seed = *o.seed;
  if (o.gamma) c.train.gamma = *o.gamma;
  if (o.lr) c.train.learning_rate = *o.lr;
  if (o.epochs) c.train.epochs_per_stage = *o.epochs;
  if (o.parallelism) c.parallelism = *o.parallelism;
  if (o.k) c.extremes_k = *o.k;
  if (o.mock) c.mock = true;
  if (o.review) c.datagen.review = true;
  if (o.shuffled) c.train.shuffled = true;
  if (o.random_test) c.sample.random_test = true;
  if (o.swap) c.eval.swap_and_rejudge = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"affordlab: affordance-pair curriculum data, toy triplet training and judge evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  bool json_output = false;
  bool verbose = false;
  bool quiet = false;
  app.add_option("-c,--config", ov.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  app.add_option("-o,--out", ov.out, "Output directory");
  app.add_option("--ontology", ov.ontology, "Ontology JSON");
  app.add_option("--embeddings", ov.embeddings, "Embedding JSONL");
  app.add_option("--catalog", ov.catalog, "Existing-concept image catalog JSONL");
  app.add_option("--fixtures", ov.fixtures, "Directory of recorded client replies");
  app.add_option("--seed", ov.seed, "Global seed");
  app.add_flag("--mock", ov.mock, "Use offline mock clients");
  app.add_flag("--json", json_output, "Machine-readable output");
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  std::string file_arg;
  std::vector<std::string> words;
  std::string mode = "absolute";
  affordlab::cli::TrainOptions train_opts;
  affordlab::cli::IaaOptions iaa_opts;
  std::size_t synth_affordances = 686;
  std::size_t synth_concepts = 590;
  std::function<int(affordlab::cli::Context&)> action;

  auto* ontology = app.add_subcommand("ontology", "Ontology tools")->require_subcommand(1);
  auto* validate = ontology->add_subcommand("validate", "Validate an ontology file");
  validate->add_option("file", file_arg, "Ontology JSON")->required();
  validate->callback([&] { action = [&](auto& ctx) { return affordlab::cli::ontology_validate(ctx, file_arg); }; });
  auto* synth = ontology->add_subcommand("synth", "Write a seeded synthetic ontology and embeddings");
  synth->add_option("dir", file_arg, "Output directory")->required();
  synth->add_option("--affordances", synth_affordances, "Affordance count")->capture_default_str();
  synth->add_option("--concepts", synth_concepts, "Concept count")->capture_default_str();
  synth->callback([&] {
    action = [&](auto& ctx) {
      return affordlab::cli::ontology_synth(ctx, file_arg, synth_affordances, synth_concepts);
    };
  });

  auto* metrics = app.add_subcommand("metrics", "Affordance proximity")->require_subcommand(1);
  auto* build = metrics->add_subcommand("build", "Build the proximity matrix cache and its summary");
  build->add_option("--parallelism", ov.parallelism, "Worker threads");
  build->callback([&] { action = affordlab::cli::metrics_build; });

  auto* sample = app.add_subcommand("sample", "Pair sampling")->require_subcommand(1);
  sample->add_subcommand("train", "Spectrum-uniform training pairs")->callback([&] {
    action = affordlab::cli::sample_train;
  });
  auto* stest = sample->add_subcommand("test", "Held-out test pairs");
  stest->add_flag("--random", ov.random_test, "Plain uniform draw instead of spectrum-uniform");
  stest->callback([&] { action = affordlab::cli::sample_test; });
  auto* sext = sample->add_subcommand("extremes", "Closest and farthest pairs");
  sext->add_option("-k", ov.k, "Pairs per end");
  sext->callback([&] { action = affordlab::cli::sample_extremes; });

  auto* curriculum = app.add_subcommand("curriculum", "Curriculum stages")->require_subcommand(1);
  curriculum->add_subcommand("build", "Split training pairs into three stages")->callback([&] {
    action = affordlab::cli::curriculum_build;
  });

  auto* datagen = app.add_subcommand("datagen", "Training data assembly")->require_subcommand(1);
  const std::vector<std::pair<const char*, affordlab::DatagenPhase>> phases = {
      {"captions", affordlab::DatagenPhase::kCaptions},
      {"images", affordlab::DatagenPhase::kImages},
      {"curate", affordlab::DatagenPhase::kComplete}};
  for (const auto& [name, phase] : phases) {
    auto* sub = datagen->add_subcommand(name, std::string("Run datagen through the ") + name + " phase");
    sub->add_flag("--review", ov.review, "Write a positive-image review checklist");
    sub->callback([&, phase = phase] {
      action = [phase](auto& ctx) { return affordlab::cli::datagen_run(ctx, phase); };
    });
  }

  auto* trainc = app.add_subcommand("train", "Toy triplet training over the curriculum");
  trainc->add_flag("--shuffled", ov.shuffled, "Pool and shuffle all stages");
  trainc->add_option("--gamma", ov.gamma, "Negative-loss weight")->check(CLI::NonNegativeNumber);
  trainc->add_option("--lr", ov.lr, "Learning rate")->check(CLI::PositiveNumber);
  trainc->add_option("--epochs", ov.epochs, "Epochs per stage")->check(CLI::PositiveNumber);
  trainc->add_flag("--grad-check", train_opts.grad_check, "Check analytic gradients and exit");
  trainc->add_flag("--gamma-grid", train_opts.gamma_grid, "Train once per gamma in {0, 0.2, 0.5, 0.8, 1}");
  trainc->add_flag("--toy", train_opts.toy, "Use the synthetic toy task instead of datagen output");
  trainc->callback([&] { action = [&](auto& ctx) { return affordlab::cli::train(ctx, train_opts); }; });

  auto* eval = app.add_subcommand("eval", "Judge evaluation")->require_subcommand(1);
  auto* erun = eval->add_subcommand("run", "Judge the test items");
  erun->add_option("--mode", mode, "absolute or relative")->check(CLI::IsMember({"absolute", "relative"}));
  erun->add_flag("--swap", ov.swap, "Relative mode: rejudge with A/B swapped and average");
  erun->callback([&] {
    action = [&](auto& ctx) {
      return affordlab::cli::eval_run(ctx, affordlab::eval_mode_from_string(mode));
    };
  });
  auto* ereport = eval->add_subcommand("report", "Aggregate an eval manifest");
  ereport->add_option("--mode", mode, "absolute or relative")->check(CLI::IsMember({"absolute", "relative"}));
  ereport->callback([&] {
    action = [&](auto& ctx) {
      return affordlab::cli::eval_report(ctx, affordlab::eval_mode_from_string(mode));
    };
  });
  auto* iaa = eval->add_subcommand("iaa", "Inter-annotator agreement from a CSV");
  iaa->add_option("annotations", file_arg, "CSV: item_id,rater_id,metric,score")->required();
  iaa->add_option("--rater-a", iaa_opts.rater_a, "First rater id");
  iaa->add_option("--rater-b", iaa_opts.rater_b, "Second rater id");
  iaa->add_flag("--linear", iaa_opts.linear_weights, "Linear-weighted kappa");
  iaa->add_option("--auto", iaa_opts.auto_manifest, "Absolute eval manifest for human-vs-auto agreement");
  iaa->callback([&] { action = [&](auto& ctx) { return affordlab::cli::eval_iaa(ctx, file_arg, iaa_opts); }; });

  auto* promptc = app.add_subcommand("prompt", "Print the inference prompt for affordances");
  promptc->add_option("affordances", words, "Affordance names")->required();
  promptc->callback([&] { action = [&](auto& ctx) { return affordlab::cli::prompt(ctx, words); }; });

  auto* pipe = app.add_subcommand("pipeline", "validate, metrics, sample, curriculum, datagen, train, eval");
  pipe->callback([&] { action = affordlab::cli::pipeline; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  auto logger = spdlog::stderr_color_mt("affordlab");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  affordlab::cli::Context ctx;
  ctx.json_output = json_output;
  try {
    ctx.config = effective_config(ov);
    for (const auto* sub = &app; !sub->get_subcommands().empty();) {
      sub = sub->get_subcommands().front();
      ctx.command += (ctx.command.empty() ? "" : " ") + sub->get_name();
    }
    return action(ctx);
  } catch (const affordlab::Error& e) {
    if (json_output) {
      affordlab::json err = {{"error", std::string(affordlab::to_string(e.code()))},
                             {"message", e.what()},
                             {"subject", e.subject()}};
      std::cerr << err.dump() << "\n";
    } else {
      spdlog::error("{}: {}", affordlab::to_string(e.code()), e.what());
    }
    return kPipelineError;
  } catch (const std::exception& e) {
    if (json_output) {
      std::cerr << affordlab::json({{"error", "Internal"}, {"message", e.what()}}).dump() << "\n";
    } else {
      spdlog::error("{}", e.what());
    }
    return kPipelineError;
  }
}
