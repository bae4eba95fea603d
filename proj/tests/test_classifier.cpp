// Copyright 2026 The Authors.
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

#include <cmath>

#include "support/oracles.hpp"
#include "utterancesmith/classifier.hpp"

using namespace utterancesmith;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::Io;
}

IntentDataset tie_data() {
  IntentDataset d;
  d.examples = {{"list invoices", "A"}, {"delete user", "B"}};
  return d;
}

IntentDataset separable() {
  IntentDataset d;
  d.examples = {{"list my invoices", "billing"}, {"show unpaid invoices", "billing"},
                {"delete the user", "users"},    {"create a new user", "users"},
                {"set an alarm", "alarms"},      {"cancel morning alarm", "alarms"}};
  return d;
}

}  // namespace

TEST(Train, UniformPriors) {
  const auto m = train(tie_data());
  ASSERT_EQ(m.log_priors().size(), 2u);
  EXPECT_DOUBLE_EQ(m.log_priors()[0], std::log(0.5));
  EXPECT_DOUBLE_EQ(m.log_priors()[1], std::log(0.5));
  EXPECT_EQ(m.vocabulary().size(), 6u);
}

TEST(Train, ProperDistributions) {
  const auto m = train(separable());
  double prior_sum = 0;
  for (double p : m.log_priors()) prior_sum += std::exp(p);
  EXPECT_NEAR(prior_sum, 1.0, 1e-9);
  for (const auto& row : m.log_likelihoods()) {
    EXPECT_EQ(row.size(), m.vocabulary().size() + 1);
    double s = 0;
    for (double v : row) {
      EXPECT_TRUE(std::isfinite(v));
      s += std::exp(v);
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Train, Preconditions) {
  IntentDataset one;
  one.examples = {{"a", "x"}, {"b", "x"}};
  EXPECT_EQ(code_of([&] { train(one); }), ErrorCode::TooFewIntents);
  EXPECT_EQ(code_of([&] { train(IntentDataset{}); }), ErrorCode::TooFewIntents);
  EXPECT_EQ(code_of([] { train(tie_data(), {"A", "B", "C"}); }), ErrorCode::EmptyIntent);
  auto blank = tie_data();
  blank.examples.push_back({"   ", "A"});
  EXPECT_EQ(code_of([&] { train(blank); }), ErrorCode::EmptyText);
  auto unnamed = tie_data();
  unnamed.examples.push_back({"x", ""});
  EXPECT_EQ(code_of([&] { train(unnamed); }), ErrorCode::EmptyIntent);
}

TEST(Predict, HandComputedTie) {
  const auto m = train(tie_data());
  const auto p = m.predict("list user");
  // 1/2 * 2/10 * 1/10 for both intents; the bigram "list user" is unseen.
  const double expect = std::log(0.5) + std::log(0.2) + std::log(0.1);
  ASSERT_EQ(p.ranked.size(), 2u);
  EXPECT_EQ(p.ranked[0].second, p.ranked[1].second);
  EXPECT_NEAR(p.ranked[0].second, expect, 1e-12);
  EXPECT_EQ(p.intent_id, "A");
  EXPECT_DOUBLE_EQ(p.confidence, 0.5);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(m.predict("list user").intent_id, "A");
}

TEST(Predict, TrainingExampleAndUnseen) {
  const auto m = train(tie_data());
  const auto p = m.predict("list invoices");
  EXPECT_EQ(p.intent_id, "A");
  EXPECT_GT(p.confidence, 0.5);
  EXPECT_LE(p.confidence, 1.0);
  const auto z = m.predict("zzz qqq");
  EXPECT_EQ(z.intent_id, "A");
  EXPECT_EQ(z.ranked[0].second, std::log(0.5));
  EXPECT_EQ(code_of([&] { m.predict("  ?! "); }), ErrorCode::EmptyText);
}

TEST(Predict, PriorDecidesUnseenInput) {
  IntentDataset d;
  d.examples = {{"a", "A"}, {"b", "B"}, {"c", "B"}};
  EXPECT_EQ(train(d).predict("zzz").intent_id, "B");
}

TEST(Evaluate, SeparableIsPerfect) {
  const auto d = separable();
  const auto r = evaluate(train(d), d);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.n_test, 6u);
  EXPECT_EQ(r.correct, 6u);
  EXPECT_EQ(r.per_intent_accuracy.at("users"), 1.0);
}

TEST(Evaluate, OneWrongOfFour) {
  const auto m = train(tie_data());
  IntentDataset test;
  test.examples = {{"list invoices", "A"}, {"delete user", "B"}, {"list", "A"}, {"invoices", "B"}};
  const auto r = evaluate(m, test);
  EXPECT_EQ(r.accuracy, 0.75);
  EXPECT_EQ(r.correct, 3u);
  EXPECT_EQ((r.confusion.at({"B", "A"})), 1u);
  EXPECT_EQ(r.per_intent_accuracy.at("B"), 0.5);
}

TEST(Evaluate, Preconditions) {
  const auto m = train(tie_data());
  EXPECT_EQ(code_of([&] { evaluate(m, IntentDataset{}); }), ErrorCode::EmptyTestSet);
  IntentDataset foreign;
  foreign.examples = {{"x", "C"}};
  EXPECT_EQ(code_of([&] { evaluate(m, foreign); }), ErrorCode::UnknownIntentInTest);
}

TEST(Serialization, ExactRoundTrip) {
  const auto m = train(separable());
  const auto j = to_json(m);
  EXPECT_EQ(j["model_version"], 1);
  EXPECT_TRUE(j["log_priors"][0].is_string());
  const auto back = model_from_json(nlohmann::ordered_json::parse(j.dump()));
  EXPECT_EQ(back, m);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  auto bad = j;
  bad["model_version"] = 2;
  EXPECT_EQ(code_of([&] { model_from_json(bad); }), ErrorCode::InvalidArgument);
}

TEST(ClassifierProperties, DeterministicModels) {
  EXPECT_EQ(train(separable()), train(separable()));
  EXPECT_EQ(evaluate(train(separable()), separable()), evaluate(train(separable()), separable()));
}

TEST(ClassifierProperties, DuplicateExampleKeepsVocabulary) {
  auto d = separable();
  const auto before = train(d).vocabulary().size();
  d.examples.push_back(d.examples[2]);
  EXPECT_EQ(train(d).vocabulary().size(), before);
}

TEST(ClassifierProperties, LabelPermutationEquivariance) {
  oracle::Rng rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    IntentDataset d, renamed;
    const std::vector<std::string> names = {"a", "b", "c"};
    const std::vector<std::string> perm = {"z", "x", "y"};
    for (std::size_t i = 0; i < 12; ++i) {
      const auto label = rng.below(3);
      const auto text = oracle::random_sentence(rng, 5);
      d.examples.push_back({text, names[label]});
      renamed.examples.push_back({text, perm[label]});
    }
    if (d.intent_ids().size() < 2) continue;
    const auto m1 = train(d);
    const auto m2 = train(renamed);
    for (int q = 0; q < 10; ++q) {
      const auto text = oracle::random_sentence(rng, 5);
      const auto p1 = m1.predict(text);
      const auto p2 = m2.predict(text);
      // Compare scores by label rather than winners so ties cannot interfere.
      std::map<std::string, double> s1, s2;
      for (const auto& [id, s] : p1.ranked) s1[id] = s;
      for (const auto& [id, s] : p2.ranked) s2[id] = s;
      for (std::size_t k = 0; k < names.size(); ++k) {
        if (s1.count(names[k])) EXPECT_EQ(s1[names[k]], s2.at(perm[k]));
      }
      if (p1.ranked.size() > 1 && p1.ranked[0].second > p1.ranked[1].second) {
        const auto idx = std::find(names.begin(), names.end(), p1.intent_id) - names.begin();
        EXPECT_EQ(p2.intent_id, perm[static_cast<std::size_t>(idx)]);
      }
    }
  }
}
