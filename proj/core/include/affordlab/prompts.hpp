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

#include <string>
#include <string_view>
#include <vector>

namespace affordlab {

// Renders the caption-generation prompt for one affordance pair.
// `n_captions` replaces the template's description count ("three" in the
// published wording); the per-description sentence cap stays at three.
std::string build_caption_prompt(const std::vector<std::string>& positive,
                                 const std::vector<std::string>& negative,
                                 std::size_t n_captions);

// "a new design that has functions of brew, deliver."
std::string build_inference_prompt(const std::vector<std::string>& positives);

std::string build_absolute_prompt();
std::string build_relative_prompt();

// "one".."twenty", digits beyond.
std::string count_word(std::size_t n);

// "[sit, store]"
std::string bracket_list(const std::vector<std::string>& items);

}  // namespace affordlab
