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

#include <memory>
#include <string>

#include "affordlab/clients.hpp"

namespace affordlab {

// JSON-over-HTTP clients. Wire protocol (POST, JSON bodies):
//   {base}/v1/text   {"system","prompt","images":[...],"temperature","model"} -> {"text": str}
//   {base}/v1/image  {"caption","model"}                                     -> {"image_ref": str}
//   {base}/v1/score  {"image_ref","text","model"}                            -> {"score": number}
// Non-2xx replies and transport failures are retried per ClientConfig; a
// missing token env var is a ClientError at construction.
class HttpTextGen : public TextGenClient {
 public:
  explicit HttpTextGen(ClientConfig config);
  ~HttpTextGen() override;
  std::string complete(const TextRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class HttpImageGen : public ImageGenClient {
 public:
  explicit HttpImageGen(ClientConfig config);
  ~HttpImageGen() override;
  ImageRef generate(const std::string& caption) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class HttpScorer : public ScorerClient {
 public:
  explicit HttpScorer(ClientConfig config);
  ~HttpScorer() override;
  double similarity(const ImageRef& image, std::string_view text) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace affordlab
