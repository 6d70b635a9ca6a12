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

// Runs every primary acceptance criterion and prints one PASS/FAIL line each.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "affordlab/agreement.hpp"
#include "affordlab/evalharness.hpp"
#include "affordlab/metrics.hpp"
#include "affordlab/ontology.hpp"
#include "affordlab/prompts.hpp"
#include "affordlab/sampler.hpp"
#include "affordlab/trainer.hpp"
#include "affordlab/util.hpp"
#include "proximity_oracle.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace affordlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

Verdict metric_oracle() {
  double worst = 0.0;
  double slowest = 0.0;
  for (const char* name : {"sofa_chair_car.json", "table_leg_drawer.json"}) {
    const json doc = json::parse(read_file(testing::data_path(std::string("fixtures/ontology/") + name)));
    const std::string emb = read_file(testing::data_path("fixtures/embeddings/small.jsonl"));
    const auto start = Clock::now();
    const auto o = Ontology::from_json(doc);
    const auto store = EmbeddingStore::parse(emb);
    const auto m = build_proximity_matrix(o, store, DistanceConfig{});
    slowest = std::max(slowest, seconds_since(start));
    testing::ProximityOracle oracle(doc, emb);
    const auto ids = oracle.reachable_affordances();
    if (ids.size() != m.size()) return {false, std::string(name) + ": affordance count differs"};
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (m.affordance_ids()[i].value != ids[i]) return {false, std::string(name) + ": id order differs"};
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        worst = std::max(worst, std::abs(m.at(i, j) - oracle.affordance(ids[i], ids[j])));
      }
    }
  }
  return {worst <= 1e-12 && slowest < 1.0, "max |diff| " + fmt(worst) + ", slowest build " + fmt(slowest) + " s"};
}

Verdict combinatorics() {
  const auto start = Clock::now();
  const auto o = synthetic_ontology(SyntheticOntologySpec{}, 1);
  const auto store = synthetic_embeddings(o, 32, 1);
  const auto m = build_proximity_matrix(o, store, DistanceConfig{}, {4});
  const double secs = seconds_since(start);
  const bool pass = m.size() == 686 && m.pair_count() == 234955 && pair_count(686) == 234955 && secs < 120.0;
  return {pass, std::to_string(m.pair_count()) + " pairs over " + std::to_string(m.size()) + " affordances in " +
                    fmt(secs) + " s"};
}

Verdict curriculum_structure() {
  SyntheticOntologySpec spec;
  spec.superordinates = 10;
  spec.concepts = 150;
  spec.parts = 200;
  spec.affordances = 120;
  const auto o = synthetic_ontology(spec, 5);
  const auto m = build_proximity_matrix(o, synthetic_embeddings(o, 32, 5), DistanceConfig{});
  SamplePlan plan;
  plan.seed = 3;
  auto run = [&] { return split_curriculum(sample_uniform_spectrum(m, plan).pairs); };
  const auto a = run();
  const auto b = run();
  bool pass = true;
  std::string sizes;
  for (int s = 0; s < 3; ++s) {
    pass = pass && a[s].pairs.size() == 200 && a[s].pairs == b[s].pairs;
    sizes += (s ? "/" : "") + std::to_string(a[s].pairs.size());
  }
  pass = pass && a[0].mean_proximity() > a[1].mean_proximity() && a[1].mean_proximity() > a[2].mean_proximity();
  return {pass, "stages " + sizes + ", means " + fmt(a[0].mean_proximity()) + " > " + fmt(a[1].mean_proximity()) +
                    " > " + fmt(a[2].mean_proximity())};
}

TripletBatch random_batch(std::uint64_t seed) {
  const DenoiserShape shape;
  Rng r(seed);
  TripletBatch b;
  b.positive.values.resize(shape.latent_dim);
  b.negative.values.resize(shape.latent_dim);
  b.condition.resize(shape.cond_dim);
  for (auto& x : b.positive.values) x = r.normal();
  for (auto& x : b.negative.values) x = r.normal();
  for (auto& x : b.condition) x = r.normal();
  return b;
}

Verdict loss_identities() {
  const auto s = NoiseSchedule::linear();
  const ToyDenoiser m(DenoiserShape{}, 3);
  double worst_rel = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto b = random_batch(seed);
    Rng rng(seed);
    const auto draw = NoiseDraw::sample(rng, s.steps(), m.shape().latent_dim);
    const auto terms = triplet_loss_at(b, m, s, 0.0, draw);
    worst_rel = std::max(worst_rel, std::abs(terms.loss - terms.loss_pos) / std::abs(terms.loss_pos));
  }
  // Zero parameters predict eps_hat = 0; a zero draw then gives I-hat = I+.
  const DenoiserShape shape;
  const ToyDenoiser zero(shape, std::vector<double>(shape.parameter_count(), 0.0));
  const NoiseDraw still{25, std::vector<double>(shape.latent_dim, 0.0)};
  const auto batch = random_batch(1);
  const double round_trip = triplet_loss_at(batch, zero, s, 0.5, still).loss_pos;
  const std::vector<double> eps(shape.latent_dim, 0.7);
  const double perfect = loss_pos(batch.positive, batch.positive, eps, eps);

  ToyTaskSpec spec;
  spec.n_pairs = 12;
  const auto task = make_toy_task(spec, 1);
  std::vector<std::vector<double>> traces;
  for (double g : kGammaGrid) {
    TrainConfig cfg;
    cfg.learning_rate = kToyLearningRate;
    cfg.gamma = g;
    cfg.epochs_per_stage = 2;
    cfg.seed = 1;
    std::vector<double> losses;
    for (const auto& r : train_curriculum(task, cfg).trace) losses.push_back(r.loss);
    traces.push_back(losses);
  }
  std::sort(traces.begin(), traces.end());
  const auto distinct = static_cast<std::size_t>(std::unique(traces.begin(), traces.end()) - traces.begin());
  const bool pass = worst_rel <= 1e-12 && perfect == 0.0 && round_trip <= 1e-20 && distinct == kGammaGrid.size();
  return {pass, "gamma 0 rel diff " + fmt(worst_rel) + ", perfect loss " + fmt(perfect) + " (" + fmt(round_trip) + " through the model), " +
                    std::to_string(distinct) + " distinct gamma traces"};
}

Verdict gradient_check() {
  const auto start = Clock::now();
  const ToyDenoiser m(DenoiserShape{}, 7);
  const auto b = random_batch(3);
  double worst = 0.0;
  for (double g : kGammaGrid) {
    worst = std::max(worst, grad_check(m, b, NoiseSchedule::linear(), g, 1e-5, 1).max_relative_error);
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-4 && secs < 30.0, "max relative error " + fmt(worst) + " in " + fmt(secs) + " s"};
}

double repulsion_distance(double gamma, const TripletBatch& b, std::uint64_t seed, std::size_t steps) {
  const auto s = NoiseSchedule::linear();
  ToyDenoiser m(DenoiserShape{}, derive_seed(seed, "init"));
  AdamW opt(AdamWConfig{}, kToyLearningRate, m.parameter_count());
  Rng noise(derive_seed(seed, "noise"));
  std::vector<double> grad(m.parameter_count());
  for (std::size_t step = 0; step < steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    triplet_loss(b, m, s, gamma, noise, grad);
    opt.step(m.parameters(), grad);
  }
  return mean_negative_distance(m, b, s, 256, 5);
}

Verdict repulsion() {
  const auto b = random_batch(3);
  const double d0 = repulsion_distance(0.0, b, 11, 500);
  const double d5 = repulsion_distance(0.5, b, 11, 500);
  return {d5 > d0, "distance to I- after 500 steps: gamma 0.5 " + fmt(d5) + " vs gamma 0 " + fmt(d0)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Verdict curriculum_vs_shuffled() {
  constexpr double kThreshold = 20.0;
  constexpr double kSmoothing = 0.02;
  std::vector<double> staged, shuffled;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto task = make_toy_task(ToyTaskSpec{}, seed);
    for (bool shuffle : {false, true}) {
      TrainConfig cfg;
      cfg.learning_rate = kToyLearningRate;
      cfg.gamma = 0.0;
      cfg.epochs_per_stage = 20;
      cfg.seed = seed;
      cfg.shuffled = shuffle;
      const auto hit = steps_to_threshold(train_curriculum(task, cfg).trace, kThreshold, kSmoothing);
      const double steps = hit ? static_cast<double>(*hit) : std::numeric_limits<double>::infinity();
      (shuffle ? shuffled : staged).push_back(steps);
    }
  }
  const double a = median(staged);
  const double b = median(shuffled);
  return {a <= b, "median steps to threshold: staged " + fmt(a) + " vs shuffled " + fmt(b)};
}

Verdict prompt_fidelity() {
  auto golden = [](const std::string& name) { return read_file(testing::data_path("golden/" + name)); };
  std::vector<std::pair<std::string, bool>> checks{
      {"caption", build_caption_prompt({"sit", "store"}, {"chair", "car", "sofa", "bench", "shelve", "drawer"}, 3) ==
                      golden("caption_prompt_sit_store.txt")},
      {"absolute judge", build_absolute_prompt() == golden("absolute_judge_prompt.txt")},
      {"relative judge", build_relative_prompt() == golden("relative_judge_prompt.txt")},
      {"inference", build_inference_prompt({"brew", "deliver"}) == golden("inference_prompt_brew_deliver.txt")},
  };
  bool pass = true;
  std::string failed;
  for (const auto& [name, ok] : checks) {
    pass = pass && ok;
    if (!ok) failed += " " + name;
  }
  return {pass, pass ? "4 templates byte-identical" : "mismatch:" + failed};
}

Verdict evaluation_statistics() {
  std::size_t parsed = 0, total = 0;
  std::vector<EvalRecord> records;
  std::array<double, 4> sums{};
  for (const auto& r : read_jsonl(testing::data_path("fixtures/judge/absolute_replies.jsonl"))) {
    ++total;
    try {
      EvalRecord rec;
      rec.item_id = r.at("id");
      rec.model = r.value("model", "");
      rec.scores = parse_absolute(r.at("reply").get<std::string>());
      if (rec.scores->to_json() != r.at("expected")) continue;
      records.push_back(rec);
      ++parsed;
      for (std::size_t k = 0; k < 4; ++k) sums[k] += (*rec.scores).values[k];
    } catch (const Error&) {
    }
  }
  bool means_ok = parsed > 0;
  if (means_ok) {
    const auto rep = aggregate(records);
    for (std::size_t k = 0; k < 4; ++k) means_ok = means_ok && std::abs(rep.means[k].mean - sums[k] / parsed) < 1e-12;
  }

  const auto paired =
      pair_raters(load_annotations_csv(testing::data_path("fixtures/annotations/iaa_8items.csv")));
  const auto iaa = inter_annotator(paired.pairs);
  // Hand-computed from the fixture table.
  const std::array<double, 4> pct{87.5, 87.5, 75.0, 87.5};
  const std::array<double, 4> kappa{17.0 / 49, 23.0 / 47, 19.0 / 51, 13.0 / 21};
  double worst = std::abs(iaa.overall_kappa - 173.0 / 381);
  for (std::size_t k = 0; k < 4; ++k) {
    worst = std::max({worst, std::abs(iaa.percent_agreement[k] - pct[k]), std::abs(iaa.kappa[k] - kappa[k])});
  }
  const bool pass = total == 50 && parsed == total && means_ok && worst <= 1e-9;
  return {pass, std::to_string(parsed) + "/" + std::to_string(total) + " replies parsed, IAA max |diff| " + fmt(worst)};
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
  }
  return out;
}

Verdict offline_end_to_end() {
#ifndef AFFORDLAB_CLI_PATH
  return {false, "CLI not built"};
#else
  testing::TempDir dir;
  const auto out = dir / "out";
  const std::string cmd = std::string(AFFORDLAB_CLI_PATH) + " -q --config " +
                          testing::data_path("fixtures/pipeline/config.json").string() + " --mock --out " +
                          out.string() + " pipeline > " + (dir / "log.txt").string() + " 2>&1";
  const auto start = Clock::now();
  if (const int rc = run_command(cmd); rc != 0) return {false, "first run exited " + std::to_string(rc)};
  const double secs = seconds_since(start);
  fs::rename(out, dir / "out.first");
  if (const int rc = run_command(cmd); rc != 0) return {false, "second run exited " + std::to_string(rc)};
  const auto first = tree_contents(dir / "out.first");
  const auto second = tree_contents(out);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : first) {
    auto it = second.find(name);
    if (it == second.end() || it->second != bytes) {
      std::cerr << "  differs: " << name << "\n";
      ++differing;
    }
  }
  const bool pass = !first.empty() && first.size() == second.size() && differing == 0 && secs < 300.0;
  return {pass, std::to_string(first.size()) + " files, " + std::to_string(differing) + " differing, first run " +
                    fmt(secs) + " s"};
#endif
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"metric oracle equivalence", metric_oracle},
      {"combinatorics", combinatorics},
      {"curriculum structure", curriculum_structure},
      {"loss identities", loss_identities},
      {"gradient check", gradient_check},
      {"repulsion", repulsion},
      {"curriculum vs shuffled", curriculum_vs_shuffled},
      {"prompt fidelity", prompt_fidelity},
      {"evaluation statistics", evaluation_statistics},
      {"offline end-to-end", offline_end_to_end},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
