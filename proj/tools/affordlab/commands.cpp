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

#include "commands.hpp"

#include <iostream>
#include <memory>

#include <spdlog/spdlog.h>

#include "affordlab/agreement.hpp"
#include "affordlab/error.hpp"
#include "affordlab/evalharness.hpp"
#include "affordlab/http_clients.hpp"
#include "affordlab/ontology.hpp"
#include "affordlab/prompts.hpp"

namespace affordlab::cli {
namespace fs = std::filesystem;

namespace {

constexpr double kGradTolerance = 1e-4;

void emit(const Context& ctx, const json& result, const std::string& text) {
  if (ctx.json_output) {
    std::cout << result.dump(2) << "\n";
  } else {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
  }
}

fs::path out_path(const Context& ctx, const fs::path& name) { return ctx.config.paths.out / name; }

// Manifest plus a sidecar holding the effective config that produced it.
void write_manifest(const Context& ctx, const fs::path& path, const std::string& contents, const json& extra = {}) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, contents);
  json meta = {{"command", ctx.command}, {"config", ctx.config.to_json()}, {"seed", ctx.config.seed}};
  if (!extra.is_null()) meta["details"] = extra;
  write_file_atomic(fs::path(path.string() + ".meta.json"), meta.dump(2) + "\n");
}

fs::path require_path(const fs::path& p, const char* what) {
  if (p.empty()) throw Error(ErrorCode::kInvalidArgument, std::string("no ") + what + " path configured");
  if (!fs::exists(p)) throw Error(ErrorCode::kIoError, std::string(what) + " not found: " + p.string(), p.string());
  return p;
}

Ontology load_ontology(const Context& ctx) {
  return Ontology::load_file(require_path(ctx.config.paths.ontology, "ontology"));
}

ProximityMatrix load_matrix(const Context& ctx) {
  return ProximityMatrix::load(require_path(out_path(ctx, "proximity.json"), "proximity cache"), ctx.config.distance);
}

std::vector<json> read_records(const Context& ctx, const fs::path& name, const char* produced_by) {
  const auto path = out_path(ctx, name);
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kIoError, path.string() + " not found; run `" + produced_by + "` first", path.string());
  }
  return read_jsonl(path);
}

std::string pair_lines(const std::vector<AffordancePair>& pairs, std::string_view split, std::optional<int> stage,
                       const Context& ctx) {
  std::vector<json> records;
  for (const auto& p : pairs) records.push_back(pair_record(p, split, stage, ctx.config.seed, ctx.config.sample.n_bins));
  return to_jsonl(records);
}

std::array<CurriculumStage, 3> read_curriculum(const Context& ctx) {
  std::array<CurriculumStage, 3> stages;
  for (int k = 0; k < 3; ++k) stages[static_cast<std::size_t>(k)].index = k + 1;
  for (const auto& r : read_records(ctx, "curriculum.jsonl", "curriculum build")) {
    const int stage = r.at("stage").get<int>();
    if (stage < 1 || stage > 3) throw Error(ErrorCode::kParseError, "curriculum record has stage " + std::to_string(stage));
    stages[static_cast<std::size_t>(stage - 1)].pairs.push_back(pair_from_record(r));
  }
  for (auto& st : stages) {
    if (st.pairs.empty()) continue;
    st.band_low = st.band_high = st.pairs.front().proximity;
    for (const auto& p : st.pairs) {
      st.band_low = std::min(st.band_low, p.proximity);
      st.band_high = std::max(st.band_high, p.proximity);
    }
  }
  return stages;
}

std::shared_ptr<FixtureStore> fixture_store(const Context& ctx) {
  if (ctx.config.paths.fixtures.empty()) return nullptr;
  return std::make_shared<FixtureStore>(ctx.config.paths.fixtures);
}

// Mock stand-in for a second generator: same mock, distinct requests.
class PrefixedImageGen : public ImageGenClient {
 public:
  PrefixedImageGen(std::unique_ptr<ImageGenClient> inner, std::string prefix)
      : inner_(std::move(inner)), prefix_(std::move(prefix)) {}
  ImageRef generate(const std::string& caption) override { return inner_->generate(prefix_ + caption); }

 private:
  std::unique_ptr<ImageGenClient> inner_;
  std::string prefix_;
};

std::unique_ptr<TextGenClient> text_client(const Context& ctx, const std::string& role) {
  if (ctx.config.mock) return std::make_unique<MockTextGen>(fixture_store(ctx));
  return std::make_unique<HttpTextGen>(ctx.config.client(role));
}

std::unique_ptr<ImageGenClient> image_client(const Context& ctx, const std::string& role) {
  if (ctx.config.mock) {
    std::unique_ptr<ImageGenClient> mock = std::make_unique<MockImageGen>(fixture_store(ctx));
    if (role == "image") return mock;
    return std::make_unique<PrefixedImageGen>(std::move(mock), role + ": ");
  }
  return std::make_unique<HttpImageGen>(ctx.config.client(role));
}

std::unique_ptr<ScorerClient> scorer_client(const Context& ctx) {
  if (ctx.config.mock) return std::make_unique<MockScorer>(fixture_store(ctx));
  return std::make_unique<HttpScorer>(ctx.config.client("scorer"));
}

std::string render_validation(const ValidationReport& rep) {
  std::string out = rep.is_valid() ? "ontology is valid\n" : "ontology has errors\n";
  out += "superordinates " + std::to_string(rep.stats.superordinates) + ", concepts " +
         std::to_string(rep.stats.concepts) + ", parts " + std::to_string(rep.stats.parts) + ", affordances " +
         std::to_string(rep.stats.affordances) + "\n";
  for (const auto& e : rep.errors) out += "error   " + e.code + " " + e.subject + ": " + e.message + "\n";
  for (const auto& w : rep.warnings) out += "warning " + w.code + " " + w.subject + ": " + w.message + "\n";
  return out;
}

std::string stage_dir_name(const TrainConfig& c, bool grid) {
  std::string name = c.shuffled ? "shuffled" : "curriculum";
  if (grid) name += "-gamma-" + format_fixed(c.gamma, 1);
  return name;
}

std::vector<EvalItem> build_eval_items(const Context& ctx, EvalMode mode) {
  std::vector<EvalItem> items;
  if (!ctx.config.eval.items.empty()) {
    for (const auto& j : read_jsonl(require_path(ctx.config.eval.items, "eval items"))) {
      items.push_back(EvalItem::from_json(j));
    }
    return items;
  }
  const Ontology o = load_ontology(ctx);
  auto image = image_client(ctx, "image");
  std::unique_ptr<ImageGenClient> baseline;
  if (mode == EvalMode::kRelative) baseline = image_client(ctx, "baseline");
  for (const auto& r : read_records(ctx, "pairs.test.jsonl", "sample test")) {
    const auto p = pair_from_record(r);
    EvalItem it;
    it.id = p.a.value + "+" + p.b.value;
    it.model = ctx.config.eval.model_name;
    it.prompt = build_inference_prompt({o.affordance_at(p.a).name, o.affordance_at(p.b).name});
    items.push_back(std::move(it));
  }
  std::vector<ImageRef> first(items.size()), second(items.size());
  run_bounded(items.size(), ctx.config.eval.max_concurrency, [&](std::size_t i) {
    first[i] = image->generate(items[i].prompt);
    if (baseline) second[i] = baseline->generate(items[i].prompt);
  });
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i].image = first[i];
    if (baseline) items[i].image_b = second[i];
  }
  return items;
}

}  // namespace

int ontology_validate(Context& ctx, const fs::path& file) {
  ValidationReport rep;
  try {
    rep = Ontology::load_file(file).validate();
  } catch (const Error& e) {
    rep.errors.push_back({std::string(to_string(e.code())), e.what(), e.subject()});
  }
  emit(ctx, rep.to_json(), render_validation(rep));
  return rep.is_valid() ? 0 : 1;
}

int ontology_synth(Context& ctx, const fs::path& dir, std::size_t affordances, std::size_t concepts) {
  SyntheticOntologySpec spec;
  spec.affordances = affordances;
  spec.concepts = concepts;
  spec.superordinates = std::max<std::size_t>(1, std::min(spec.superordinates, concepts / 4 + 1));
  spec.parts = std::max<std::size_t>(1, concepts * 2);
  const Ontology o = synthetic_ontology(spec, ctx.config.seed);
  const EmbeddingStore store = synthetic_embeddings(o, 32, ctx.config.seed);
  fs::create_directories(dir);
  write_file_atomic(dir / "ontology.json", o.to_json().dump(2) + "\n");
  write_file_atomic(dir / "embeddings.jsonl", store.serialize());
  const auto st = o.stats();
  json result = {{"ontology", (dir / "ontology.json").generic_string()},
                 {"embeddings", (dir / "embeddings.jsonl").generic_string()},
                 {"concepts", st.concepts},
                 {"affordances", st.affordances}};
  emit(ctx, result,
       "wrote " + std::to_string(st.concepts) + " concepts and " + std::to_string(st.affordances) +
           " affordances to " + dir.string());
  return 0;
}

int metrics_build(Context& ctx) {
  const Ontology o = load_ontology(ctx);
  const auto store = EmbeddingStore::load_file(require_path(ctx.config.paths.embeddings, "embeddings"));
  const auto m = build_proximity_matrix(o, store, ctx.config.distance, {ctx.config.parallelism});
  spdlog::info("{} affordances with concepts -> C({}, 2) = {} candidate pairs", m.size(), m.size(), m.pair_count());
  if (!m.excluded().empty()) spdlog::warn("{} affordances have no concepts and were excluded", m.excluded().size());
  const auto path = out_path(ctx, "proximity.json");
  fs::create_directories(path.parent_path());
  m.save(path);
  const auto summary = summarize(m.packed());
  json excluded = json::array();
  for (const auto& id : m.excluded()) excluded.push_back(id.value);
  json result = {{"affordances", m.size()},
                 {"candidate_pairs", m.pair_count()},
                 {"excluded", excluded},
                 {"config_hash", m.config_hash()},
                 {"summary", summary.to_json()}};
  write_manifest(ctx, out_path(ctx, "proximity.summary.json"), result.dump(2) + "\n");
  std::string text = std::to_string(m.pair_count()) + " candidate pairs over " + std::to_string(m.size()) +
                     " affordances\n";
  text += "min " + format_fixed(summary.min, 6) + "  max " + format_fixed(summary.max, 6) + "  mean " +
          format_fixed(summary.mean, 6) + "\ndeciles";
  for (double d : summary.deciles) text += " " + format_fixed(d, 6);
  emit(ctx, result, text + "\n");
  return 0;
}

int sample_train(Context& ctx) {
  auto plan = ctx.config.sample;
  plan.seed = ctx.config.seed;
  const auto result = sample_uniform_spectrum(load_matrix(ctx), plan);
  write_manifest(ctx, out_path(ctx, "pairs.train.jsonl"), pair_lines(result.pairs, "train", std::nullopt, ctx),
                 result.report.to_json());
  json out = {{"pairs", result.pairs.size()}, {"report", result.report.to_json()}};
  emit(ctx, out, "sampled " + std::to_string(result.pairs.size()) + " training pairs");
  return 0;
}

int sample_test(Context& ctx) {
  auto plan = ctx.config.sample;
  plan.seed = ctx.config.seed;
  PairKeySet exclude;
  for (const auto& r : read_records(ctx, "pairs.train.jsonl", "sample train")) exclude.insert(pair_from_record(r).key());
  const auto result = select_test(load_matrix(ctx), exclude, plan);
  write_manifest(ctx, out_path(ctx, "pairs.test.jsonl"), pair_lines(result.pairs, "test", std::nullopt, ctx),
                 result.report.to_json());
  json out = {{"pairs", result.pairs.size()}, {"report", result.report.to_json()}};
  emit(ctx, out, "sampled " + std::to_string(result.pairs.size()) + " test pairs disjoint from training");
  return 0;
}

int sample_extremes(Context& ctx) {
  const auto ex = extremes(all_pairs(load_matrix(ctx)), ctx.config.extremes_k);
  const std::string lines = pair_lines(ex.closest, "closest", std::nullopt, ctx) +
                            pair_lines(ex.farthest, "farthest", std::nullopt, ctx);
  write_manifest(ctx, out_path(ctx, "pairs.extremes.jsonl"), lines);
  std::string text = "closest:\n";
  for (const auto& p : ex.closest) text += "  " + p.a.value + " + " + p.b.value + "  " + format_fixed(p.proximity, 6) + "\n";
  text += "farthest:\n";
  for (const auto& p : ex.farthest) text += "  " + p.a.value + " + " + p.b.value + "  " + format_fixed(p.proximity, 6) + "\n";
  json out = {{"closest", ex.closest.size()}, {"farthest", ex.farthest.size()}};
  emit(ctx, out, text);
  return 0;
}

int curriculum_build(Context& ctx) {
  std::vector<AffordancePair> pairs;
  for (const auto& r : read_records(ctx, "pairs.train.jsonl", "sample train")) pairs.push_back(pair_from_record(r));
  const auto stages = split_curriculum(std::move(pairs));
  std::string lines;
  json details = json::array();
  std::string text;
  for (const auto& st : stages) {
    lines += pair_lines(st.pairs, "train", st.index, ctx);
    details.push_back({{"stage", st.index},
                       {"pairs", st.pairs.size()},
                       {"band_low", st.band_low},
                       {"band_high", st.band_high},
                       {"mean_proximity", st.mean_proximity()}});
    text += "stage " + std::to_string(st.index) + ": " + std::to_string(st.pairs.size()) + " pairs, proximity [" +
            format_fixed(st.band_low, 4) + ", " + format_fixed(st.band_high, 4) + "], mean " +
            format_fixed(st.mean_proximity(), 4) + "\n";
  }
  write_manifest(ctx, out_path(ctx, "curriculum.jsonl"), lines, details);
  emit(ctx, {{"stages", details}}, text);
  return 0;
}

int datagen_run(Context& ctx, DatagenPhase phase) {
  const Ontology o = load_ontology(ctx);
  const auto stages = read_curriculum(ctx);
  const ImageCatalog catalog = ctx.config.paths.catalog.empty()
                                   ? ImageCatalog::synthetic(o)
                                   : ImageCatalog::load_file(require_path(ctx.config.paths.catalog, "catalog"));
  auto text = text_client(ctx, "text");
  auto image = image_client(ctx, "image");
  auto scorer = scorer_client(ctx);
  const auto manifest = out_path(ctx, "examples.jsonl");
  const auto res = assemble_examples(stages, o, catalog, {*text, *image, *scorer}, ctx.config.datagen, manifest, phase);
  write_manifest(ctx, manifest, read_file(manifest));
  if (ctx.config.datagen.review) write_file_atomic(out_path(ctx, "review.md"), review_checklist(res.examples));
  json out = {{"examples", res.examples.size()},
              {"processed", res.stats.processed},
              {"skipped", res.stats.skipped},
              {"failed", res.stats.failed},
              {"phase", static_cast<int>(phase)}};
  emit(ctx, out,
       "examples " + std::to_string(res.examples.size()) + ": processed " + std::to_string(res.stats.processed) +
           ", already done " + std::to_string(res.stats.skipped) + ", failed " + std::to_string(res.stats.failed));
  return res.stats.failed == 0 ? 0 : 1;
}

int train(Context& ctx, const TrainOptions& options) {
  TrainConfig base = ctx.config.train;
  base.seed = ctx.config.seed;
  base.check();
  std::array<StageData, 3> stages;
  if (options.toy) {
    ToyTaskSpec spec;
    spec.shape = base.shape;
    stages = make_toy_task(spec, base.seed);
  } else {
    const auto manifest = out_path(ctx, "examples.jsonl");
    if (!fs::exists(manifest)) throw Error(ErrorCode::kIoError, manifest.string() + " not found; run `datagen` first");
    StageBuildReport rep;
    stages = stage_data_from_examples(load_examples(manifest), base.shape, base.seed, &rep);
    spdlog::info("training items: {} used, {} skipped", rep.used, rep.skipped);
  }

  if (options.grad_check) {
    if (stages[0].items.empty()) throw Error(ErrorCode::kInvalidArgument, "stage 1 has no training items");
    Rng rng(derive_seed(base.seed, "grad-check-batch"));
    const auto batch = sample_batch(stages[0].items.front(), rng);
    const ToyDenoiser model(base.shape, derive_seed(base.seed, "init"));
    const auto res = grad_check(model, batch, base.schedule(), base.gamma, 1e-5, base.seed);
    const bool pass = res.max_relative_error <= kGradTolerance;
    json out = {{"max_relative_error", res.max_relative_error},
                {"checked", res.checked},
                {"parameters", model.parameter_count()},
                {"worst_index", res.worst_index},
                {"gamma", base.gamma},
                {"tolerance", kGradTolerance},
                {"pass", pass}};
    write_manifest(ctx, out_path(ctx, "train/grad_check.json"), out.dump(2) + "\n");
    emit(ctx, out,
         "grad check: max relative error " + std::to_string(res.max_relative_error) + " over " +
             std::to_string(res.checked) + " of " + std::to_string(model.parameter_count()) + " parameters (gamma " +
             format_fixed(base.gamma, 2) + ") " + (pass ? "PASS" : "FAIL"));
    return pass ? 0 : 1;
  }

  std::vector<double> gammas;
  if (options.gamma_grid) {
    gammas.assign(kGammaGrid.begin(), kGammaGrid.end());
  } else {
    gammas.push_back(base.gamma);
  }
  json runs = json::array();
  std::string text;
  for (double g : gammas) {
    TrainConfig c = base;
    c.gamma = g;
    const auto res = train_curriculum(stages, c);
    const fs::path dir = out_path(ctx, fs::path("train") / stage_dir_name(c, options.gamma_grid));
    fs::create_directories(dir);
    json cps = json::array();
    for (const auto& cp : res.checkpoints) {
      const auto path = dir / ("checkpoint.stage" + std::to_string(cp.stage) + ".json");
      cp.save(path.string());
      cps.push_back({{"stage", cp.stage}, {"step", cp.step}, {"path", path.generic_string()}});
    }
    write_manifest(ctx, dir / "trace.csv", trace_csv(res.trace), {{"train", c.to_json()}, {"checkpoints", cps}});
    const auto& last = res.trace.back();
    runs.push_back({{"gamma", g}, {"dir", dir.generic_string()}, {"steps", res.trace.size()}, {"checkpoints", cps},
                    {"final_loss", last.loss}});
    text += "gamma " + format_fixed(g, 1) + ": " + std::to_string(res.trace.size()) + " steps, final loss " +
            format_fixed(last.loss, 4) + ", " + std::to_string(cps.size()) + " checkpoints in " + dir.string() + "\n";
  }
  emit(ctx, {{"runs", runs}}, text);
  return 0;
}

int eval_run(Context& ctx, EvalMode mode) {
  const auto items = build_eval_items(ctx, mode);
  const std::string m(to_string(mode));
  std::vector<json> item_lines;
  for (const auto& it : items) item_lines.push_back(it.to_json());
  write_manifest(ctx, out_path(ctx, "eval/items." + m + ".jsonl"), to_jsonl(item_lines));

  auto judge = text_client(ctx, "judge");
  EvalOptions opts;
  opts.mode = mode;
  opts.parse_retries = ctx.config.eval.parse_retries;
  opts.temperature = ctx.config.eval.temperature;
  opts.swap_and_rejudge = ctx.config.eval.swap_and_rejudge;
  opts.max_concurrency = ctx.config.eval.max_concurrency;
  if (!ctx.config.mock) {
    const auto cc = ctx.config.client("judge");
    opts.client_retry.budget = cc.retry_budget;
    opts.client_retry.initial_s = cc.backoff_initial_s;
    opts.client_retry.max_s = cc.backoff_max_s;
  } else {
    opts.client_retry.sleep = nullptr;
  }
  const auto manifest = out_path(ctx, "eval/" + m + ".jsonl");
  const auto run = run_eval(items, *judge, opts, manifest);
  write_manifest(ctx, manifest, read_file(manifest));
  spdlog::info("judged {} items ({} resumed, {} failures)", run.judged, run.skipped, run.failures);
  const auto rep = aggregate(run.records);
  write_manifest(ctx, out_path(ctx, "eval/report." + m + ".json"), rep.to_json().dump(2) + "\n");
  write_file_atomic(out_path(ctx, "eval/report." + m + ".txt"), rep.render_table());
  emit(ctx, rep.to_json(), rep.render_table());
  return 0;
}

int eval_report(Context& ctx, EvalMode mode) {
  const auto manifest = out_path(ctx, "eval/" + std::string(to_string(mode)) + ".jsonl");
  if (!fs::exists(manifest)) throw Error(ErrorCode::kIoError, manifest.string() + " not found; run `eval run` first");
  const auto rep = aggregate(load_eval_records(manifest));
  emit(ctx, rep.to_json(), rep.render_table());
  return 0;
}

int eval_iaa(Context& ctx, const fs::path& csv, const IaaOptions& options) {
  const auto annotations = load_annotations_csv(require_path(csv, "annotations").string());
  std::optional<std::string> a, b;
  if (!options.rater_a.empty()) a = options.rater_a;
  if (!options.rater_b.empty()) b = options.rater_b;
  const auto paired = pair_raters(annotations, a, b);
  AgreementOptions ao;
  ao.weighting = options.linear_weights ? KappaWeighting::kLinear : KappaWeighting::kUnweighted;
  const auto rep = inter_annotator(paired.pairs, ao);
  json out = rep.to_json();
  out["raters"] = {paired.first_rater, paired.second_rater};
  std::string text = "raters " + paired.first_rater + " vs " + paired.second_rater + "\n" + rep.render();
  if (!options.auto_manifest.empty()) {
    const auto hva = human_vs_auto(annotations, load_eval_records(require_path(options.auto_manifest, "eval manifest")));
    out["human_vs_auto"] = hva.to_json();
    text += "human vs automatic (per-item means, |diff| <= 1): " + format_fixed(hva.overall_percent_agreement, 2) +
            "% over " + std::to_string(hva.n_items) + " items\n";
  }
  emit(ctx, out, text);
  return 0;
}

int prompt(Context& ctx, const std::vector<std::string>& affordances) {
  const auto text = build_inference_prompt(affordances);
  emit(ctx, {{"prompt", text}}, text);
  return 0;
}

int pipeline(Context& ctx) {
  struct Step {
    const char* name;
    std::function<int()> run;
  };
  const std::vector<Step> steps = {
      {"ontology validate", [&] { return ontology_validate(ctx, require_path(ctx.config.paths.ontology, "ontology")); }},
      {"metrics build", [&] { return metrics_build(ctx); }},
      {"sample train", [&] { return sample_train(ctx); }},
      {"sample test", [&] { return sample_test(ctx); }},
      {"curriculum build", [&] { return curriculum_build(ctx); }},
      {"datagen curate", [&] { return datagen_run(ctx, DatagenPhase::kComplete); }},
      {"train", [&] { return train(ctx, {}); }},
      {"eval run", [&] { return eval_run(ctx, EvalMode::kAbsolute); }},
  };
  for (const auto& step : steps) {
    spdlog::info("pipeline: {}", step.name);
    ctx.command = step.name;
    if (const int rc = step.run(); rc != 0) {
      spdlog::error("pipeline stopped at `{}` (exit {})", step.name, rc);
      return rc;
    }
  }
  return 0;
}

}  // namespace affordlab::cli
