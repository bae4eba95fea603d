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

#pragma once

// Paraphrase candidate generation. An ensemble runs every configured
// generator on every seed: the built-in rule paraphraser in process, and
// any number of remote backends over a small JSON-over-HTTP protocol.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "utterancesmith/builtin_data.hpp"
#include "utterancesmith/error.hpp"
#include "utterancesmith/openapi_extract.hpp"
#include "utterancesmith/textcore.hpp"

namespace utterancesmith {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Synonyms

/// Token -> replacement tokens, in file order.
class SynonymLexicon {
 public:
  SynonymLexicon() = default;

  /// Each line: "<token> <replacement> [<replacement> ...]". Self-mappings
  /// are dropped; lines left without replacements are ignored.
  static SynonymLexicon parse(std::string_view text) {
    SynonymLexicon lex;
    for (const auto& line : parse_word_list(text)) {
      auto parts = split_whitespace(line);
      if (parts.size() < 2) continue;
      std::string key(parts[0]);
      std::vector<std::string> reps;
      for (std::size_t i = 1; i < parts.size(); ++i) {
        std::string r(parts[i]);
        if (r != key && std::find(reps.begin(), reps.end(), r) == reps.end()) {
          reps.push_back(std::move(r));
        }
      }
      if (!reps.empty()) lex.add(key, std::move(reps));
    }
    return lex;
  }

  static const SynonymLexicon& builtin() {
    static const SynonymLexicon lex = parse(builtin_data::kSynonyms);
    return lex;
  }

  void add(const std::string& token, std::vector<std::string> replacements) {
    auto [it, inserted] = index_.try_emplace(token, entries_.size());
    if (inserted) {
      entries_.emplace_back(token, std::move(replacements));
    } else {
      auto& reps = entries_[it->second].second;
      for (auto& r : replacements) {
        if (r != token && std::find(reps.begin(), reps.end(), r) == reps.end())
          reps.push_back(std::move(r));
      }
    }
  }

  const std::vector<std::string>* find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? nullptr : &entries_[it->second].second;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  const auto& entries() const noexcept { return entries_; }

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Domain types

enum class GeneratorKind { BuiltinRule, Remote };

struct GeneratorSpec {
  std::string id;
  GeneratorKind kind = GeneratorKind::BuiltinRule;
  std::string endpoint;
  int per_seed_budget = 15;
  int timeout_ms = 10000;
  Json params = Json::object();
};

enum class CandidateStatus { Pending, Accepted, Rejected, AutoSelected };

constexpr std::string_view status_name(CandidateStatus s) noexcept {
  switch (s) {
    case CandidateStatus::Pending: return "pending";
    case CandidateStatus::Accepted: return "accepted";
    case CandidateStatus::Rejected: return "rejected";
    case CandidateStatus::AutoSelected: return "auto_selected";
  }
  return "pending";
}

inline std::optional<CandidateStatus> parse_status(std::string_view s) {
  if (s == "pending") return CandidateStatus::Pending;
  if (s == "accepted") return CandidateStatus::Accepted;
  if (s == "rejected") return CandidateStatus::Rejected;
  if (s == "auto_selected") return CandidateStatus::AutoSelected;
  return std::nullopt;
}

/// Stable id of a candidate: FNV-1a 64 over intent_id, NUL, text.
inline std::uint64_t candidate_id_of(std::string_view intent_id,
                                     std::string_view text) {
  std::uint64_t h = fnv1a64(intent_id);
  h = fnv1a64(std::string_view("\0", 1), h);
  return fnv1a64(text, h);
}

inline std::string hex_id(std::uint64_t id) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id));
  return buf;
}

struct CandidateSentence {
  std::string text;
  std::string generator_id;
  std::string seed_text;
  std::string intent_id;
  std::optional<double> similarity_to_seed;
  CandidateStatus status = CandidateStatus::Pending;
  std::uint64_t candidate_id = 0;

  static CandidateSentence make(std::string_view text, std::string generator,
                                std::string seed, std::string intent) {
    CandidateSentence c;
    c.text = normalize_whitespace(text);
    c.generator_id = std::move(generator);
    c.seed_text = std::move(seed);
    c.intent_id = std::move(intent);
    c.candidate_id = candidate_id_of(c.intent_id, c.text);
    return c;
  }
};

inline Json to_json(const CandidateSentence& c) {
  Json j;
  j["candidate_id"] = hex_id(c.candidate_id);
  j["text"] = c.text;
  j["generator_id"] = c.generator_id;
  j["seed_text"] = c.seed_text;
  j["intent_id"] = c.intent_id;
  j["similarity_to_seed"] =
      c.similarity_to_seed ? Json(*c.similarity_to_seed) : Json(nullptr);
  j["status"] = std::string(status_name(c.status));
  return j;
}

inline CandidateSentence candidate_from_json(const Json& j) {
  auto c = CandidateSentence::make(
      j.at("text").get<std::string>(), j.value("generator_id", std::string{}),
      j.value("seed_text", std::string{}), j.value("intent_id", std::string{}));
  if (auto it = j.find("similarity_to_seed");
      it != j.end() && it->is_number()) {
    c.similarity_to_seed = it->get<double>();
  }
  if (auto s = parse_status(j.value("status", std::string{"pending"}))) {
    c.status = *s;
  }
  return c;
}

inline Json to_json(const GeneratorSpec& g) {
  Json j;
  j["id"] = g.id;
  j["kind"] = g.kind == GeneratorKind::Remote ? "remote" : "builtin_rule";
  if (g.kind == GeneratorKind::Remote) j["endpoint"] = g.endpoint;
  j["per_seed_budget"] = g.per_seed_budget;
  j["timeout_ms"] = g.timeout_ms;
  j["params"] = g.params;
  return j;
}

inline GeneratorSpec generator_from_json(const Json& j) {
  GeneratorSpec g;
  g.id = j.at("id").get<std::string>();
  const auto kind = j.value("kind", std::string{"builtin_rule"});
  if (kind == "remote") {
    g.kind = GeneratorKind::Remote;
  } else if (kind != "builtin_rule") {
    throw Error(ErrorCode::InvalidArgument, "unknown generator kind " + kind);
  }
  g.endpoint = j.value("endpoint", std::string{});
  g.per_seed_budget = j.value("per_seed_budget", 15);
  g.timeout_ms = j.value("timeout_ms", 10000);
  if (auto it = j.find("params"); it != j.end() && it->is_object()) {
    g.params = *it;
  }
  return g;
}

inline void validate_generators(const std::vector<GeneratorSpec>& gens) {
  if (gens.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no generators configured");
  }
  std::unordered_set<std::string> ids;
  for (const auto& g : gens) {
    if (g.id.empty()) throw Error(ErrorCode::InvalidArgument, "empty generator id");
    if (!ids.insert(g.id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate generator id " + g.id);
    }
    if (g.kind == GeneratorKind::Remote && g.endpoint.empty()) {
      throw Error(ErrorCode::InvalidArgument,
                  "remote generator " + g.id + " has no endpoint");
    }
    if (g.per_seed_budget < 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "generator " + g.id + " budget must be >= 1");
    }
  }
}

// ---------------------------------------------------------------------------
// Rule-based paraphraser

inline const std::vector<std::string>& paraphrase_wrappers() {
  static const std::vector<std::string> w = {"please", "can you", "i need to",
                                             "i would like to"};
  return w;
}

namespace detail {

// Splits a raw word into leading punctuation, core, trailing punctuation.
struct WordParts {
  std::string prefix, core, suffix;
};

inline WordParts word_parts(std::string_view raw) {
  const auto cps = utf8::decode(raw);
  std::size_t lo = 0, hi = cps.size();
  while (lo < hi && !is_alnum(cps[lo])) ++lo;
  while (hi > lo && !is_alnum(cps[hi - 1])) --hi;
  WordParts p;
  for (std::size_t i = 0; i < lo; ++i) utf8::append(p.prefix, cps[i]);
  for (std::size_t i = lo; i < hi; ++i) utf8::append(p.core, cps[i]);
  for (std::size_t i = hi; i < cps.size(); ++i) utf8::append(p.suffix, cps[i]);
  return p;
}

inline std::string lower_first(std::string s) {
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z' &&
      (s.size() == 1 || !(s[1] >= 'A' && s[1] <= 'Z'))) {
    s[0] = static_cast<char>(s[0] + 32);
  }
  return s;
}

}  // namespace detail

/// Deterministic paraphrases of `seed`, in priority order:
///   1. single-token synonym substitutions, leftmost token first, lexicon
///      order within a token;
///   2. politeness/frame wrappers ("please ...", "can you ...", ...);
///   3. substitution x wrapper combinations, shuffled by `seed_rng`.
/// The seed itself and repeats are skipped; at most `budget` are returned.
inline std::vector<std::string> paraphrase_rule_based(
    std::string_view seed, const SynonymLexicon& lexicon, int budget,
    std::uint64_t seed_rng = 0) {
  if (budget < 1) {
    throw Error(ErrorCode::InvalidArgument, "paraphrase budget must be >= 1");
  }
  const std::string base = normalize_whitespace(seed);
  std::vector<std::string> out;
  std::unordered_set<std::string> seen{base};
  auto emit = [&](std::string s) {
    if (out.size() >= static_cast<std::size_t>(budget)) return;
    s = normalize_whitespace(s);
    if (!s.empty() && seen.insert(s).second) out.push_back(std::move(s));
  };
  if (base.empty()) return out;

  const auto raw_words = split_whitespace(base);
  std::vector<std::string> words(raw_words.begin(), raw_words.end());
  std::vector<std::string> substitutions;
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto parts = detail::word_parts(words[i]);
    const auto* reps = lexicon.find(lowercase(parts.core));
    if (!reps) continue;
    for (const auto& r : *reps) {
      auto copy = words;
      copy[i] = parts.prefix + r + parts.suffix;
      substitutions.push_back(join(copy));
    }
  }

  const std::string lowered = lowercase(base);
  auto wrap = [&](const std::string& wrapper, const std::string& sentence) {
    if (lowered.starts_with(wrapper + " ")) return std::string{};
    return wrapper + " " + detail::lower_first(sentence);
  };

  for (const auto& s : substitutions) emit(s);
  for (const auto& w : paraphrase_wrappers()) emit(wrap(w, base));

  std::vector<std::string> combos;
  for (const auto& s : substitutions) {
    for (const auto& w : paraphrase_wrappers()) {
      auto c = wrap(w, s);
      if (!c.empty()) combos.push_back(std::move(c));
    }
  }
  SplitMix64 rng(seed_rng);
  for (std::size_t i = combos.size(); i > 1; --i) {
    std::swap(combos[i - 1], combos[rng.uniform_index(i)]);
  }
  for (auto& c : combos) emit(std::move(c));
  return out;
}

// ---------------------------------------------------------------------------
// Remote backend protocol

/// Failure of a single generator; carries the generator id.
class GeneratorError : public Error {
 public:
  GeneratorError(ErrorCode code, std::string generator_id, std::string detail)
      : Error(code, generator_id + ": " + detail),
        generator_id_(std::move(generator_id)) {}
  const std::string& generator_id() const noexcept { return generator_id_; }

 private:
  std::string generator_id_;
};

struct ParaphraseRequest {
  std::string sentence;
  int num_return = 1;
  Json params = Json::object();
};

struct ScoredText {
  std::string text;
  std::optional<double> score;
};

inline Json to_json(const ParaphraseRequest& r) {
  Json j;
  j["sentence"] = r.sentence;
  j["num_return"] = r.num_return;
  j["params"] = r.params;
  return j;
}

inline ParaphraseRequest paraphrase_request_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("sentence") || !j["sentence"].is_string()) {
    throw Error(ErrorCode::MalformedResponse, "request needs string 'sentence'");
  }
  ParaphraseRequest r;
  r.sentence = j["sentence"].get<std::string>();
  if (auto it = j.find("num_return"); it != j.end()) {
    if (!it->is_number_integer()) {
      throw Error(ErrorCode::MalformedResponse, "'num_return' must be an integer");
    }
    r.num_return = it->get<int>();
  }
  if (auto it = j.find("params"); it != j.end() && it->is_object()) {
    r.params = *it;
  }
  return r;
}

inline Json paraphrase_response_json(const std::vector<ScoredText>& cands) {
  Json arr = Json::array();
  for (const auto& c : cands) {
    Json item;
    item["text"] = c.text;
    item["score"] = c.score ? Json(*c.score) : Json(nullptr);
    arr.push_back(std::move(item));
  }
  Json j;
  j["candidates"] = std::move(arr);
  return j;
}

/// Validates {"candidates": [{"text": string, "score": number|null}]}.
inline std::vector<ScoredText> parse_paraphrase_response(std::string_view body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, e.what());
  }
  if (!j.is_object() || !j.contains("candidates") ||
      !j["candidates"].is_array()) {
    throw Error(ErrorCode::MalformedResponse, "missing 'candidates' array");
  }
  std::vector<ScoredText> out;
  for (const auto& item : j["candidates"]) {
    if (!item.is_object() || !item.contains("text") ||
        !item["text"].is_string()) {
      throw Error(ErrorCode::MalformedResponse, "candidate without string 'text'");
    }
    ScoredText st{item["text"].get<std::string>(), std::nullopt};
    if (auto it = item.find("score"); it != item.end() && !it->is_null()) {
      if (!it->is_number()) {
        throw Error(ErrorCode::MalformedResponse, "'score' must be number|null");
      }
      st.score = it->get<double>();
    }
    out.push_back(std::move(st));
  }
  return out;
}

namespace detail {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing '/'
};

inline Endpoint split_endpoint(std::string_view url) {
  Endpoint ep;
  const auto scheme = url.find("://");
  const auto host_start = scheme == std::string_view::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', host_start);
  ep.origin = std::string(url.substr(0, slash));
  if (scheme == std::string_view::npos) ep.origin = "http://" + ep.origin;
  if (slash != std::string_view::npos) {
    ep.prefix = std::string(url.substr(slash));
    while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  }
  return ep;
}

inline std::string post_json(const std::string& generator_id,
                             const std::string& endpoint,
                             const std::string& route, const Json& body,
                             int timeout_ms) {
  const auto ep = split_endpoint(endpoint);
  httplib::Client client(ep.origin);
  const auto sec = timeout_ms / 1000;
  const auto usec = (timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  auto res = client.Post(ep.prefix + route, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const auto code = (err == httplib::Error::Read ||
                       err == httplib::Error::Write ||
                       err == httplib::Error::ConnectionTimeout)
                          ? ErrorCode::BackendTimeout
                          : ErrorCode::BackendUnreachable;
    throw GeneratorError(code, generator_id, httplib::to_string(err));
  }
  if (res->status != 200) {
    throw GeneratorError(ErrorCode::BackendStatus, generator_id,
                         "HTTP status " + std::to_string(res->status));
  }
  return res->body;
}

}  // namespace detail

/// One request per seed over the paraphrase protocol. Returned texts are
/// trimmed and empties dropped.
inline std::vector<std::string> paraphrase_remote(std::string_view seed,
                                                  const GeneratorSpec& spec) {
  if (spec.kind != GeneratorKind::Remote) {
    throw Error(ErrorCode::InvalidArgument, spec.id + " is not a remote generator");
  }
  ParaphraseRequest req{std::string(seed), spec.per_seed_budget, spec.params};
  const auto body = detail::post_json(spec.id, spec.endpoint, "/paraphrase",
                                      to_json(req), spec.timeout_ms);
  std::vector<ScoredText> cands;
  try {
    cands = parse_paraphrase_response(body);
  } catch (const GeneratorError&) {
    throw;
  } catch (const Error& e) {
    throw GeneratorError(ErrorCode::MalformedResponse, spec.id, e.detail());
  }
  std::vector<std::string> out;
  for (auto& c : cands) {
    auto t = normalize_whitespace(c.text);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

/// Embedder backed by POST {endpoint}/embed. Returned vectors are
/// L2-normalized on arrival.
class RemoteEmbedder {
 public:
  RemoteEmbedder(std::string id, std::string endpoint, int timeout_ms = 10000)
      : id_(std::move(id)), endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

  std::vector<EmbeddingVector> embed_batch(
      const std::vector<std::string>& texts) const {
    Json req;
    req["texts"] = texts;
    const auto body =
        detail::post_json(id_, endpoint_, "/embed", req, timeout_ms_);
    Json j;
    try {
      j = Json::parse(body);
    } catch (const Json::exception& e) {
      throw GeneratorError(ErrorCode::MalformedResponse, id_, e.what());
    }
    if (!j.is_object() || !j.contains("vectors") || !j["vectors"].is_array() ||
        j["vectors"].size() != texts.size()) {
      throw GeneratorError(ErrorCode::MalformedResponse, id_,
                           "expected one vector per text");
    }
    std::vector<EmbeddingVector> out;
    std::size_t dim = 0;
    for (const auto& v : j["vectors"]) {
      if (!v.is_array()) {
        throw GeneratorError(ErrorCode::MalformedResponse, id_, "vector is not an array");
      }
      std::vector<double> values;
      for (const auto& x : v) {
        if (!x.is_number()) {
          throw GeneratorError(ErrorCode::MalformedResponse, id_, "non-numeric component");
        }
        values.push_back(x.get<double>());
      }
      if (out.empty()) dim = values.size();
      if (values.size() != dim) {
        throw GeneratorError(ErrorCode::MalformedResponse, id_, "inconsistent dimension");
      }
      out.push_back(normalized(std::move(values)));
    }
    return out;
  }

  EmbeddingVector embed(std::string_view text) const {
    return embed_batch({std::string(text)}).front();
  }

  double similarity(std::string_view a, std::string_view b) const {
    auto v = embed_batch({std::string(a), std::string(b)});
    return cosine_similarity(v[0], v[1]);
  }

 private:
  std::string id_;
  std::string endpoint_;
  int timeout_ms_;
};

// ---------------------------------------------------------------------------
// Ensemble

/// Produces raw paraphrase texts for one (seed, generator) pair.
using GeneratorFn =
    std::function<std::vector<std::string>(const std::string&, const GeneratorSpec&)>;

/// Builtin generators honour params "seed_rng" (integer) and "lexicon"
/// (path to a synonym file).
inline std::vector<std::string> run_builtin_generator(const std::string& seed,
                                                      const GeneratorSpec& spec) {
  std::uint64_t rng = fnv1a64(spec.id);
  if (auto it = spec.params.find("seed_rng");
      it != spec.params.end() && it->is_number_integer()) {
    rng = it->get<std::uint64_t>();
  }
  if (auto it = spec.params.find("lexicon");
      it != spec.params.end() && it->is_string()) {
    static std::mutex mu;
    static std::map<std::string, SynonymLexicon> cache;
    const auto path = it->get<std::string>();
    const SynonymLexicon* lex = nullptr;
    {
      std::lock_guard lock(mu);
      auto found = cache.find(path);
      if (found == cache.end()) {
        found = cache.emplace(path, SynonymLexicon::parse(read_file(path))).first;
      }
      lex = &found->second;
    }
    return paraphrase_rule_based(seed, *lex, spec.per_seed_budget, rng);
  }
  return paraphrase_rule_based(seed, SynonymLexicon::builtin(),
                               spec.per_seed_budget, rng);
}

inline std::vector<std::string> run_generator(const std::string& seed,
                                              const GeneratorSpec& spec) {
  if (spec.kind == GeneratorKind::Remote) return paraphrase_remote(seed, spec);
  return run_builtin_generator(seed, spec);
}

struct EnsembleOptions {
  int parallelism = 4;
  GeneratorFn generate = run_generator;
};

struct GeneratorFailure {
  std::string generator_id;
  std::string seed_text;
  std::string code;
  std::string detail;
};

struct EnsembleResult {
  std::vector<CandidateSentence> candidates;
  std::vector<GeneratorFailure> warnings;
  std::size_t calls = 0;
};

/// Runs every generator on every seed. Calls may overlap (bounded by
/// `parallelism`) but results are merged in (generator, seed) order, so the
/// output never depends on scheduling. Within an intent the first
/// occurrence of a text wins; texts equal to their own seed are dropped.
/// Failed calls contribute nothing and are reported in `warnings`.
inline EnsembleResult run_ensemble(const std::vector<SeedUtterance>& seeds,
                                   const std::vector<GeneratorSpec>& generators,
                                   const EnsembleOptions& options = {}) {
  validate_generators(generators);
  struct Slot {
    std::vector<std::string> texts;
    std::optional<GeneratorFailure> failure;
  };
  const std::size_t jobs = generators.size() * seeds.size();
  std::vector<Slot> slots(jobs);
  auto run_job = [&](std::size_t job) {
    const auto& gen = generators[job / seeds.size()];
    const auto& seed = seeds[job % seeds.size()];
    try {
      slots[job].texts = options.generate(seed.text, gen);
    } catch (const Error& e) {
      slots[job].failure = GeneratorFailure{gen.id, seed.text,
                                            std::string(e.code_name()), e.what()};
    } catch (const std::exception& e) {
      slots[job].failure =
          GeneratorFailure{gen.id, seed.text, "BackendUnreachable", e.what()};
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(std::max(options.parallelism, 1), jobs);
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs; j = next++) run_job(j);
      });
    }
    for (auto& t : pool) t.join();
  }

  EnsembleResult result;
  result.calls = jobs;
  std::size_t failed = 0;
  std::unordered_map<std::string, std::unordered_set<std::string>> seen;
  for (std::size_t job = 0; job < jobs; ++job) {
    const auto& gen = generators[job / seeds.size()];
    const auto& seed = seeds[job % seeds.size()];
    if (slots[job].failure) {
      ++failed;
      result.warnings.push_back(std::move(*slots[job].failure));
      continue;
    }
    const auto seed_norm = normalize_whitespace(seed.text);
    auto& intent_seen = seen[seed.intent_id];
    for (const auto& text : slots[job].texts) {
      auto c = CandidateSentence::make(text, gen.id, seed.text, seed.intent_id);
      if (c.text.empty() || c.text == seed_norm) continue;
      if (!intent_seen.insert(c.text).second) continue;
      result.candidates.push_back(std::move(c));
    }
  }
  const bool has_builtin =
      std::any_of(generators.begin(), generators.end(), [](const auto& g) {
        return g.kind == GeneratorKind::BuiltinRule;
      });
  if (jobs > 0 && failed == jobs && !has_builtin) {
    throw Error(ErrorCode::AllBackendsFailed,
                "every generator call failed (" + std::to_string(jobs) + " calls)");
  }
  return result;
}

}  // namespace utterancesmith
