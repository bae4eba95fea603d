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

// Sentence selection: fidelity filtering against the seed followed by
// greedy selection of the candidates that add the most unseen n-grams.

#include <concepts>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "utterancesmith/error.hpp"
#include "utterancesmith/generation.hpp"
#include "utterancesmith/textcore.hpp"

namespace utterancesmith {

/// Anything that scores the semantic closeness of two sentences.
template <class T>
concept SentenceSimilarity = requires(const T& s, std::string_view a,
                                      std::string_view b) {
  { s.similarity(a, b) } -> std::convertible_to<double>;
};

struct SelectionConfig {
  double theta = 0.4;
  int gamma = 1;
  int target_size = 5;
  NgramOrders ngram_orders = default_ngram_orders();

  void validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "theta must be in [0,1]");
    }
    if (gamma < 0) throw Error(ErrorCode::InvalidArgument, "gamma must be >= 0");
    if (target_size < 1) {
      throw Error(ErrorCode::InvalidArgument, "target_size must be >= 1");
    }
    check_orders(ngram_orders);
  }
};

struct SelectionStep {
  CandidateSentence candidate;
  std::size_t delta_ngram = 0;
  bool accepted = false;
};

struct SelectionTrace {
  std::vector<std::pair<CandidateSentence, double>> filtered_out;
  std::vector<SelectionStep> steps;
  std::vector<CandidateSentence> selected;
};

struct FidelitySplit {
  std::vector<CandidateSentence> kept;
  std::vector<std::pair<CandidateSentence, double>> dropped;
};

/// Keeps candidates whose similarity to the seed is strictly above theta.
/// Similarity is computed once per candidate and recorded on it.
template <SentenceSimilarity Sim>
FidelitySplit split_by_fidelity(const std::vector<CandidateSentence>& candidates,
                                std::string_view seed, double theta,
                                const Sim& sim) {
  FidelitySplit out;
  for (const auto& c : candidates) {
    const double s = sim.similarity(c.text, seed);
    if (s > theta) {
      auto kept = c;
      kept.similarity_to_seed = s;
      out.kept.push_back(std::move(kept));
    } else {
      out.dropped.emplace_back(c, s);
    }
  }
  return out;
}

template <SentenceSimilarity Sim>
std::vector<CandidateSentence> fidelity_filter(
    const std::vector<CandidateSentence>& candidates, std::string_view seed,
    double theta, const Sim& sim) {
  return split_by_fidelity(candidates, seed, theta, sim).kept;
}

/// Greedy unique-n-gram selection over the fidelity survivors.
///
/// Each round takes the remaining candidate with the largest n-gram gain
/// (earliest position on ties), accepts it when the gain exceeds gamma, and
/// removes it from the pool either way. Stops at target_size accepted or an
/// empty pool. Once the best gain is <= gamma nothing can be accepted any
/// more (the selected set is frozen and gains only shrink), so the loop
/// records that final rejected step and exits.
template <SentenceSimilarity Sim>
SelectionTrace select_sentences(const std::vector<CandidateSentence>& candidates,
                                std::string_view seed,
                                const SelectionConfig& config, const Sim& sim) {
  config.validate();
  SelectionTrace trace;
  auto split = split_by_fidelity(candidates, seed, config.theta, sim);
  trace.filtered_out = std::move(split.dropped);

  std::vector<CandidateSentence> pool = std::move(split.kept);
  std::vector<TokenSeq> tokens;
  tokens.reserve(pool.size());
  for (const auto& c : pool) tokens.push_back(tokenize(c.text));
  std::vector<bool> removed(pool.size(), false);
  std::size_t remaining = pool.size();

  NgramCounter counter(config.ngram_orders);
  const auto target = static_cast<std::size_t>(config.target_size);
  const auto gamma = static_cast<std::size_t>(config.gamma);
  while (trace.selected.size() < target && remaining > 0) {
    std::size_t best = pool.size();
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (removed[i]) continue;
      const std::size_t g = counter.gain(tokens[i]);
      if (best == pool.size() || g > best_gain) {
        best = i;
        best_gain = g;
      }
    }
    removed[best] = true;
    --remaining;
    const bool accept = best_gain > gamma;
    trace.steps.push_back({pool[best], best_gain, accept});
    if (!accept) break;
    counter.add(tokens[best]);
    trace.selected.push_back(pool[best]);
  }
  return trace;
}

inline nlohmann::ordered_json to_json(const SelectionTrace& t) {
  using J = nlohmann::ordered_json;
  J j;
  J out = J::array();
  for (const auto& [c, s] : t.filtered_out) {
    J item = to_json(c);
    item["similarity_to_seed"] = s;
    out.push_back(std::move(item));
  }
  j["filtered_out"] = std::move(out);
  J steps = J::array();
  for (const auto& s : t.steps) {
    J item;
    item["candidate"] = to_json(s.candidate);
    item["delta_ngram"] = s.delta_ngram;
    item["accepted"] = s.accepted;
    steps.push_back(std::move(item));
  }
  j["steps"] = std::move(steps);
  J sel = J::array();
  for (const auto& c : t.selected) sel.push_back(to_json(c));
  j["selected"] = std::move(sel);
  return j;
}

inline nlohmann::ordered_json to_json(const SelectionConfig& c) {
  nlohmann::ordered_json j;
  j["theta"] = c.theta;
  j["gamma"] = c.gamma;
  j["target_size"] = c.target_size;
  j["ngram_orders"] = std::vector<int>(c.ngram_orders.begin(), c.ngram_orders.end());
  return j;
}

inline SelectionConfig selection_config_from_json(const nlohmann::ordered_json& j) {
  SelectionConfig c;
  c.theta = j.value("theta", c.theta);
  c.gamma = j.value("gamma", c.gamma);
  c.target_size = j.value("target_size", c.target_size);
  if (auto it = j.find("ngram_orders"); it != j.end()) {
    auto v = it->get<std::vector<int>>();
    c.ngram_orders = NgramOrders(v.begin(), v.end());
  }
  c.validate();
  return c;
}

}  // namespace utterancesmith
