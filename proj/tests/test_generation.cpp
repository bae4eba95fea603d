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

#include <map>
#include <mutex>

#include "utterancesmith/generation.hpp"
#include "utterancesmith/mock_backend.hpp"

using namespace utterancesmith;
using Strings = std::vector<std::string>;

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

GeneratorSpec builtin(std::string id) {
  GeneratorSpec g;
  g.id = std::move(id);
  return g;
}

GeneratorSpec remote(std::string id, std::string endpoint) {
  GeneratorSpec g;
  g.id = std::move(id);
  g.kind = GeneratorKind::Remote;
  g.endpoint = std::move(endpoint);
  g.timeout_ms = 2000;
  return g;
}

// Replays fixed texts per (generator, seed).
struct Recorded {
  std::map<std::pair<std::string, std::string>, Strings> answers;
  GeneratorFn fn() const {
    return [this](const std::string& seed, const GeneratorSpec& g) {
      auto it = answers.find({g.id, seed});
      if (it == answers.end()) throw GeneratorError(ErrorCode::BackendUnreachable, g.id, "no answer");
      return it->second;
    };
  }
};

Strings texts(const std::vector<CandidateSentence>& cs) {
  Strings out;
  for (const auto& c : cs) out.push_back(c.text);
  return out;
}

}  // namespace

TEST(RuleParaphrase, RuleOrder) {
  SynonymLexicon lex;
  lex.add("list", {"show"});
  EXPECT_EQ(paraphrase_rule_based("list the process instances", lex, 3, 1),
            (Strings{"show the process instances", "please list the process instances",
                     "can you list the process instances"}));
}

TEST(RuleParaphrase, WrapperOnly) {
  EXPECT_EQ(paraphrase_rule_based("hello", SynonymLexicon{}, 2, 1), (Strings{"please hello", "can you hello"}));
  EXPECT_EQ(paraphrase_rule_based("hello", SynonymLexicon{}, 10, 1),
            (Strings{"please hello", "can you hello", "i need to hello", "i would like to hello"}));
}

TEST(RuleParaphrase, BudgetZeroRejected) {
  EXPECT_EQ(code_of([] { paraphrase_rule_based("x", SynonymLexicon{}, 0, 1); }), ErrorCode::InvalidArgument);
}

TEST(RuleParaphrase, NeverReturnsSeedAndIsDeterministic) {
  SynonymLexicon lex;
  lex.add("show", {"list", "display"});
  lex.add("invoices", {"bills"});
  const auto a = paraphrase_rule_based("please show invoices", lex, 50, 9);
  EXPECT_EQ(a, paraphrase_rule_based("please show invoices", lex, 50, 9));
  for (const auto& s : a) EXPECT_NE(s, "please show invoices");
  EXPECT_EQ(std::set<std::string>(a.begin(), a.end()).size(), a.size());
  // Stage 1 and 2 come first and are independent of the rng.
  const auto b = paraphrase_rule_based("please show invoices", lex, 50, 10);
  EXPECT_EQ(Strings(a.begin(), a.begin() + 3), Strings(b.begin(), b.begin() + 3));
  EXPECT_EQ(a[0], "please list invoices");
  EXPECT_EQ(a.size(), b.size());
}

TEST(RuleParaphrase, KeepsPunctuationAroundSubstitutions) {
  SynonymLexicon lex;
  lex.add("invoices", {"bills"});
  const auto out = paraphrase_rule_based("Show (invoices)?", lex, 2, 1);
  EXPECT_EQ(out[0], "Show (bills)?");
  EXPECT_EQ(out[1], "please show (invoices)?");
}

TEST(SynonymLexicon, ParseDropsSelfMapsAndMerges) {
  const auto lex = SynonymLexicon::parse("# comment\nshow show list\nshow display\nlone\nx x\n");
  ASSERT_NE(lex.find("show"), nullptr);
  EXPECT_EQ(*lex.find("show"), (Strings{"list", "display"}));
  EXPECT_EQ(lex.find("lone"), nullptr);
  EXPECT_EQ(lex.find("x"), nullptr);
}

TEST(SynonymLexicon, BuiltinInvariants) {
  const auto& lex = SynonymLexicon::builtin();
  EXPECT_GT(lex.size(), 200u);
  for (const auto& [token, reps] : lex.entries()) {
    EXPECT_FALSE(reps.empty());
    for (const auto& r : reps) EXPECT_NE(r, token);
  }
}

TEST(Candidate, IdIsStableHashOfIntentAndText) {
  const auto a = CandidateSentence::make("  show  invoices ", "g1", "s", "get:/inv");
  const auto b = CandidateSentence::make("show invoices", "g2", "t", "get:/inv");
  const auto c = CandidateSentence::make("show invoices", "g1", "s", "get:/other");
  EXPECT_EQ(a.text, "show invoices");
  EXPECT_EQ(a.candidate_id, b.candidate_id);
  EXPECT_NE(a.candidate_id, c.candidate_id);
  EXPECT_EQ(candidate_from_json(to_json(a)).candidate_id, a.candidate_id);
  EXPECT_EQ(hex_id(a.candidate_id).size(), 16u);
}

TEST(Ensemble, CountsAcrossSeedsAndGenerators) {
  Recorded rec;
  rec.answers[{"g1", "s1"}] = {"a1", "a2", "a3"};
  rec.answers[{"g1", "s2"}] = {"b1", "b2", "b3"};
  rec.answers[{"g2", "s1"}] = {"c1", "c2", "c3"};
  rec.answers[{"g2", "s2"}] = {"d1", "d2", "d3"};
  EnsembleOptions opts;
  opts.generate = rec.fn();
  const std::vector<SeedUtterance> seeds = {{"s1", std::nullopt, "i"}, {"s2", std::nullopt, "i"}};
  const auto r = run_ensemble(seeds, {builtin("g1"), builtin("g2")}, opts);
  EXPECT_EQ(texts(r.candidates), (Strings{"a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3", "d1", "d2", "d3"}));
  EXPECT_EQ(r.calls, 4u);
}

TEST(Ensemble, DuplicatesGoToEarlierGeneratorAndSeedsAreDropped) {
  Recorded rec;
  rec.answers[{"g1", "s"}] = {"show the invoices", "s", "x"};
  rec.answers[{"g2", "s"}] = {"show  the invoices", "y"};
  EnsembleOptions opts;
  opts.generate = rec.fn();
  const auto r = run_ensemble({{"s", std::nullopt, "i"}}, {builtin("g1"), builtin("g2")}, opts);
  EXPECT_EQ(texts(r.candidates), (Strings{"show the invoices", "x", "y"}));
  EXPECT_EQ(r.candidates[0].generator_id, "g1");
  EXPECT_EQ(r.candidates[2].generator_id, "g2");
}

TEST(Ensemble, SameTextInDifferentIntentsIsKept) {
  Recorded rec;
  rec.answers[{"g", "s1"}] = {"t"};
  rec.answers[{"g", "s2"}] = {"t"};
  EnsembleOptions opts;
  opts.generate = rec.fn();
  const auto r = run_ensemble({{"s1", std::nullopt, "a"}, {"s2", std::nullopt, "b"}}, {builtin("g")}, opts);
  EXPECT_EQ(r.candidates.size(), 2u);
}

TEST(Ensemble, OutputIndependentOfParallelism) {
  Recorded rec;
  std::vector<SeedUtterance> seeds;
  std::vector<GeneratorSpec> gens;
  for (int g = 0; g < 3; ++g) gens.push_back(builtin("g" + std::to_string(g)));
  for (int s = 0; s < 7; ++s) {
    seeds.push_back({"seed " + std::to_string(s), std::nullopt, "i" + std::to_string(s % 2)});
    for (int g = 0; g < 3; ++g) {
      rec.answers[{"g" + std::to_string(g), seeds.back().text}] = {"t" + std::to_string((s * 3 + g) % 5), "u" + std::to_string(s)};
    }
  }
  EnsembleOptions one;
  one.parallelism = 1;
  one.generate = rec.fn();
  EnsembleOptions four = one;
  four.parallelism = 4;
  const auto a = run_ensemble(seeds, gens, one);
  const auto b = run_ensemble(seeds, gens, four);
  ASSERT_EQ(a.candidates.size(), b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    EXPECT_EQ(to_json(a.candidates[i]).dump(), to_json(b.candidates[i]).dump());
  }
  std::map<std::string, std::set<std::string>> per_intent;
  for (const auto& c : a.candidates) EXPECT_TRUE(per_intent[c.intent_id].insert(c.text).second);
}

TEST(Ensemble, ValidatesGenerators) {
  const std::vector<SeedUtterance> seeds = {{"s", std::nullopt, "i"}};
  EXPECT_EQ(code_of([&] { run_ensemble(seeds, {}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { run_ensemble(seeds, {builtin("a"), builtin("a")}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { run_ensemble(seeds, {remote("r", "")}); }), ErrorCode::InvalidArgument);
}

TEST(Ensemble, GeneratorSpecJsonRoundTrip) {
  auto g = remote("t5", "http://localhost:1/x");
  g.params["temperature"] = 0.7;
  const auto back = generator_from_json(to_json(g));
  EXPECT_EQ(to_json(back).dump(), to_json(g).dump());
  EXPECT_EQ(code_of([] { generator_from_json(Json{{"id", "x"}, {"kind", "neural"}}); }), ErrorCode::InvalidArgument);
}

// --- wire protocol against the mock backend

class Protocol : public ::testing::Test {
 protected:
  void SetUp() override {
    MockBackendOptions opts;
    opts.canned["list the open invoices"] = {{"show open invoices", std::nullopt}};
    opts.canned["empty"] = {};
    backend = std::make_unique<MockBackend>(opts);
    ASSERT_GT(backend->start(), 0);
  }
  std::unique_ptr<MockBackend> backend;
};

TEST_F(Protocol, CannedCandidateMapsToOneSentence) {
  const auto spec = remote("t5-quora", backend->endpoint());
  EXPECT_EQ(paraphrase_remote("list the open invoices", spec), Strings{"show open invoices"});
  EXPECT_TRUE(paraphrase_remote("empty", spec).empty());
  EXPECT_EQ(backend->paraphrase_calls(), 2u);
}

TEST_F(Protocol, FallsBackToRuleParaphrases) {
  auto spec = remote("mock", backend->endpoint());
  spec.per_seed_budget = 3;
  spec.params["seed_rng"] = 4;
  EXPECT_EQ(paraphrase_remote("hello there", spec),
            paraphrase_rule_based("hello there", SynonymLexicon::builtin(), 3, 4));
}

TEST_F(Protocol, EndpointPrefixIsHonoured) {
  const auto spec = remote("p", backend->endpoint() + "/");
  EXPECT_EQ(paraphrase_remote("list the open invoices", spec).size(), 1u);
}

TEST_F(Protocol, EnsembleTagsRemoteCandidates) {
  const auto r = run_ensemble({{"list the open invoices", std::nullopt, "get:/inv"}},
                              {remote("t5-quora", backend->endpoint())});
  ASSERT_EQ(r.candidates.size(), 1u);
  EXPECT_EQ(r.candidates[0].generator_id, "t5-quora");
  EXPECT_EQ(r.candidates[0].seed_text, "list the open invoices");
}

TEST(ProtocolErrors, ConnectionRefused) {
  MockBackend dead;
  const int port = dead.start();
  dead.stop();
  const auto spec = remote("t5-quora", "http://127.0.0.1:" + std::to_string(port));
  try {
    paraphrase_remote("x", spec);
    FAIL() << "expected an error";
  } catch (const GeneratorError& e) {
    EXPECT_EQ(e.code(), ErrorCode::BackendUnreachable);
    EXPECT_EQ(e.generator_id(), "t5-quora");
  }
}

TEST(ProtocolErrors, NonOkStatus) {
  MockBackendOptions opts;
  opts.fail_status = 503;
  MockBackend backend(opts);
  ASSERT_GT(backend.start(), 0);
  EXPECT_EQ(code_of([&] { paraphrase_remote("x", remote("r", backend.endpoint())); }), ErrorCode::BackendStatus);
}

TEST(ProtocolErrors, Timeout) {
  MockBackendOptions opts;
  opts.delay_ms = 600;
  MockBackend backend(opts);
  ASSERT_GT(backend.start(), 0);
  auto spec = remote("slow", backend.endpoint());
  spec.timeout_ms = 100;
  EXPECT_EQ(code_of([&] { paraphrase_remote("x", spec); }), ErrorCode::BackendTimeout);
}

TEST(ProtocolErrors, MalformedResponses) {
  EXPECT_EQ(code_of([] { parse_paraphrase_response("not json"); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] { parse_paraphrase_response(R"({"cands":[]})"); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] { parse_paraphrase_response(R"({"candidates":[{"score":1}]})"); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] { parse_paraphrase_response(R"({"candidates":[{"text":"a","score":"x"}]})"); }),
            ErrorCode::MalformedResponse);
  const auto ok = parse_paraphrase_response(R"({"candidates":[{"text":"a","score":null},{"text":"b","score":0.5}]})");
  ASSERT_EQ(ok.size(), 2u);
  EXPECT_FALSE(ok[0].score);
  EXPECT_EQ(ok[1].score, 0.5);
}

TEST(ProtocolErrors, RequestSchema) {
  const auto r = paraphrase_request_from_json(Json::parse(R"({"sentence":"s","num_return":4,"params":{"k":1}})"));
  EXPECT_EQ(r.sentence, "s");
  EXPECT_EQ(r.num_return, 4);
  EXPECT_EQ(r.params["k"], 1);
  EXPECT_EQ(to_json(r).dump(), R"({"sentence":"s","num_return":4,"params":{"k":1}})");
}

TEST(ProtocolErrors, DownRemoteDegradesAllDownFails) {
  MockBackend dead;
  const int port = dead.start();
  dead.stop();
  const auto down = remote("down", "http://127.0.0.1:" + std::to_string(port));
  const std::vector<SeedUtterance> seeds = {{"list the invoices", std::nullopt, "i"}};
  const auto r = run_ensemble(seeds, {down, builtin("rule")});
  EXPECT_FALSE(r.candidates.empty());
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].generator_id, "down");
  EXPECT_EQ(code_of([&] { run_ensemble(seeds, {down}); }), ErrorCode::AllBackendsFailed);
}

TEST(RemoteEmbedderTest, MatchesLocalEmbedding) {
  MockBackend backend;
  ASSERT_GT(backend.start(), 0);
  RemoteEmbedder emb("e", backend.endpoint(), 2000);
  const auto v = emb.embed("list the open invoices");
  const auto local = embed("list the open invoices");
  ASSERT_EQ(v.values.size(), local.values.size());
  for (std::size_t i = 0; i < v.values.size(); ++i) EXPECT_NEAR(v.values[i], local.values[i], 1e-12);
  EXPECT_NEAR(emb.similarity("a b", "a b"), 1.0, 1e-12);
}
