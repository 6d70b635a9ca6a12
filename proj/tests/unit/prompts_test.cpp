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

#include <gtest/gtest.h>

#include "affordlab/prompts.hpp"
#include "affordlab/util.hpp"
#include "test_support.hpp"

namespace affordlab {
namespace {

std::string golden(const std::string& name) { return read_file(testing::data_path("golden/" + name)); }

TEST(Prompts, CaptionTemplateDefaultCount) {
  EXPECT_EQ(build_caption_prompt({"sit", "store"}, {"chair", "car", "sofa", "bench", "shelve", "drawer"}, 3),
            golden("caption_prompt_sit_store.txt"));
}

TEST(Prompts, CaptionTemplateSubstitutesCountWord) {
  EXPECT_EQ(build_caption_prompt({"brew", "deliver"}, {"kettle", "teapot", "coffee maker", "car"}, 10),
            golden("caption_prompt_ten_brew_deliver.txt"));
}

TEST(Prompts, SentenceCapIsNotTheCaptionCount) {
  auto p = build_caption_prompt({"a"}, {"b"}, 5);
  EXPECT_NE(p.find("at most three sentences"), std::string::npos);
  EXPECT_NE(p.find("Generate five different descriptions of five novel concepts"), std::string::npos);
}

TEST(Prompts, JudgeTemplates) {
  EXPECT_EQ(build_absolute_prompt(), golden("absolute_judge_prompt.txt"));
  EXPECT_EQ(build_relative_prompt(), golden("relative_judge_prompt.txt"));
}

TEST(Prompts, InferencePrompt) {
  EXPECT_EQ(build_inference_prompt({"brew", "deliver"}), golden("inference_prompt_brew_deliver.txt"));
  EXPECT_EQ(build_inference_prompt({"sit"}), "a new design that has functions of sit.");
}

TEST(Prompts, CountWords) {
  EXPECT_EQ(count_word(1), "one");
  EXPECT_EQ(count_word(3), "three");
  EXPECT_EQ(count_word(20), "twenty");
  EXPECT_EQ(count_word(25), "25");
}

TEST(Prompts, BracketList) {
  EXPECT_EQ(bracket_list({"a", "b c"}), "[a, b c]");
  EXPECT_EQ(bracket_list({}), "[]");
}

}  // namespace
}  // namespace affordlab
