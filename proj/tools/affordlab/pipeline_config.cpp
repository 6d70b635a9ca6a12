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

#include "pipeline_config.hpp"

#include "affordlab/error.hpp"

namespace affordlab::cli {
namespace {

std::filesystem::path resolve(const json& j, const char* key, const std::filesystem::path& current,
                              const std::filesystem::path& base) {
  if (!j.contains(key)) return current;
  std::filesystem::path p = j.at(key).get<std::string>();
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

json patched(json defaults, const json& j, const char* key) {
  if (j.contains(key)) defaults.merge_patch(j.at(key));
  return defaults;
}

}  // namespace

PipelineConfig::PipelineConfig() { train.learning_rate = kToyLearningRate; }

PipelineConfig PipelineConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    PipelineConfig c;
    c.seed = j.value("seed", c.seed);
    c.mock = j.value("mock", c.mock);
    c.parallelism = j.value("parallelism", c.parallelism);
    c.extremes_k = j.value("extremes_k", c.extremes_k);
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      c.paths.ontology = resolve(p, "ontology", c.paths.ontology, base_dir);
      c.paths.embeddings = resolve(p, "embeddings", c.paths.embeddings, base_dir);
      c.paths.catalog = resolve(p, "catalog", c.paths.catalog, base_dir);
      c.paths.fixtures = resolve(p, "fixtures", c.paths.fixtures, base_dir);
      c.paths.out = resolve(p, "out", c.paths.out, base_dir);
    }
    c.distance = DistanceConfig::from_json(patched(c.distance.to_json(), j, "distance"));
    if (j.contains("sample")) {
      const auto& s = j.at("sample");
      c.sample.n_train = s.value("n_train", c.sample.n_train);
      c.sample.n_test = s.value("n_test", c.sample.n_test);
      c.sample.n_bins = s.value("n_bins", c.sample.n_bins);
      c.sample.random_test = s.value("random_test", c.sample.random_test);
    }
    c.datagen = DatagenConfig::from_json(patched(c.datagen.to_json(), j, "datagen"));
    c.train = TrainConfig::from_json(patched(c.train.to_json(), j, "train"));
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      c.eval.parse_retries = e.value("parse_retries", c.eval.parse_retries);
      c.eval.temperature = e.value("temperature", c.eval.temperature);
      c.eval.swap_and_rejudge = e.value("swap_and_rejudge", c.eval.swap_and_rejudge);
      c.eval.max_concurrency = e.value("max_concurrency", c.eval.max_concurrency);
      c.eval.model_name = e.value("model_name", c.eval.model_name);
      c.eval.items = resolve(e, "items", c.eval.items, base_dir);
    }
    if (j.contains("clients")) {
      for (const auto& [role, cj] : j.at("clients").items()) c.clients[role] = ClientConfig::from_json(cj);
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed config: ") + e.what());
  }
}

json PipelineConfig::to_json() const {
  json clients_json = json::object();
  for (const auto& [role, cc] : clients) clients_json[role] = cc.to_json();
  return {{"seed", seed},
          {"mock", mock},
          {"parallelism", parallelism},
          {"extremes_k", extremes_k},
          {"paths",
           {{"ontology", paths.ontology.generic_string()},
            {"embeddings", paths.embeddings.generic_string()},
            {"catalog", paths.catalog.generic_string()},
            {"fixtures", paths.fixtures.generic_string()},
            {"out", paths.out.generic_string()}}},
          {"distance", distance.to_json()},
          {"sample",
           {{"n_train", sample.n_train},
            {"n_test", sample.n_test},
            {"n_bins", sample.n_bins},
            {"random_test", sample.random_test}}},
          {"datagen", datagen.to_json()},
          {"train", train.to_json()},
          {"eval",
           {{"parse_retries", eval.parse_retries},
            {"temperature", eval.temperature},
            {"swap_and_rejudge", eval.swap_and_rejudge},
            {"max_concurrency", eval.max_concurrency},
            {"model_name", eval.model_name},
            {"items", eval.items.generic_string()}}},
          {"clients", clients_json}};
}

ClientConfig PipelineConfig::client(const std::string& role) const {
  const auto it = clients.find(role);
  if (it == clients.end()) {
    throw Error(ErrorCode::kInvalidArgument, "no client configured for role '" + role + "' (or use --mock)");
  }
  return it->second;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed config: ") + e.what(), path.string());
  }
  return PipelineConfig::from_json(j, path.parent_path());
}

}  // namespace affordlab::cli
