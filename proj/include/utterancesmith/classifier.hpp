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

// Multinomial naive Bayes intent classifier over word unigrams + bigrams,
// add-one smoothed, scored in log space.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "utterancesmith/error.hpp"
#include "utterancesmith/textcore.hpp"

namespace utterancesmith {

struct LabeledText {
  std::string text;
  std::string intent_id;
  friend bool operator==(const LabeledText&, const LabeledText&) = default;
};

struct IntentDataset {
  std::vector<LabeledText> examples;

  /// Sorted unique intent ids.
  std::vector<std::string> intent_ids() const {
    std::set<std::string> ids;
    for (const auto& e : examples) ids.insert(e.intent_id);
    return {ids.begin(), ids.end()};
  }
  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }
};

/// Word unigrams followed by space-joined bigrams.
inline std::vector<std::string> classifier_features(std::string_view text) {
  const auto seq = tokenize(text);
  std::vector<std::string> out(seq.begin(), seq.end());
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    out.push_back(seq[i] + " " + seq[i + 1]);
  }
  return out;
}

struct Prediction {
  std::string intent_id;
  double confidence = 0.0;
  /// (intent, log score), best first; ties by intent id.
  std::vector<std::pair<std::string, double>> ranked;
};

class ClassifierModel {
 public:
  static constexpr int kVersion = 1;

  const std::vector<std::string>& intent_ids() const noexcept { return intents_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocab_; }
  const std::vector<double>& log_priors() const noexcept { return log_priors_; }
  /// Row per intent; the last column is the unseen-feature mass.
  const std::vector<std::vector<double>>& log_likelihoods() const noexcept {
    return log_likelihoods_;
  }

  std::optional<std::size_t> feature_index(const std::string& f) const {
    auto it = index_.find(f);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Posterior log-scores over known features; unknown features carry no
  /// evidence, so an all-unknown input ranks by prior alone.
  Prediction predict(std::string_view text) const {
    const auto feats = classifier_features(text);
    if (feats.empty()) throw Error(ErrorCode::EmptyText, "nothing to classify");
    std::vector<std::size_t> known;
    for (const auto& f : feats) {
      if (auto i = feature_index(f)) known.push_back(*i);
    }
    Prediction p;
    std::vector<double> terms;
    for (std::size_t c = 0; c < intents_.size(); ++c) {
      // Summed in sorted order so equal evidence gives bit-equal scores.
      terms.clear();
      for (auto i : known) terms.push_back(log_likelihoods_[c][i]);
      std::sort(terms.begin(), terms.end());
      double score = log_priors_[c];
      for (double t : terms) score += t;
      p.ranked.emplace_back(intents_[c], score);
    }
    std::stable_sort(p.ranked.begin(), p.ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    const double top = p.ranked.front().second;
    double z = 0.0;
    for (const auto& [_, s] : p.ranked) z += std::exp(s - top);
    p.intent_id = p.ranked.front().first;
    p.confidence = 1.0 / z;
    return p;
  }

  friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;

 private:
  friend ClassifierModel train(const IntentDataset& data);
  friend ClassifierModel model_from_json(const nlohmann::ordered_json& j);

  void rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], i);
  }

  std::vector<std::string> intents_;
  std::vector<std::string> vocab_;
  std::map<std::string, std::size_t> index_;
  std::vector<double> log_priors_;
  std::vector<std::vector<double>> log_likelihoods_;
};

inline ClassifierModel train(const IntentDataset& data) {
  const auto intents = data.intent_ids();
  if (intents.size() < 2) {
    throw Error(ErrorCode::TooFewIntents,
                std::to_string(intents.size()) + " intent(s); need at least 2");
  }
  std::map<std::string, std::size_t> intent_index;
  for (std::size_t i = 0; i < intents.size(); ++i) intent_index[intents[i]] = i;

  std::map<std::string, std::size_t> vocab;
  std::vector<std::size_t> docs(intents.size(), 0);
  for (const auto& e : data.examples) {
    if (e.intent_id.empty()) throw Error(ErrorCode::EmptyIntent, "example without an intent id");
    if (normalize_whitespace(e.text).empty()) {
      throw Error(ErrorCode::EmptyText, "empty training text for " + e.intent_id);
    }
    ++docs[intent_index[e.intent_id]];
    for (auto& f : classifier_features(e.text)) vocab.emplace(std::move(f), 0);
  }
  ClassifierModel m;
  m.intents_ = intents;
  for (auto& [f, idx] : vocab) {
    idx = m.vocab_.size();
    m.vocab_.push_back(f);
  }
  m.rebuild_index();

  const std::size_t V = m.vocab_.size();
  std::vector<std::vector<double>> counts(intents.size(), std::vector<double>(V, 0.0));
  std::vector<double> totals(intents.size(), 0.0);
  for (const auto& e : data.examples) {
    const auto c = intent_index[e.intent_id];
    for (const auto& f : classifier_features(e.text)) {
      counts[c][vocab[f]] += 1.0;
      totals[c] += 1.0;
    }
  }
  for (std::size_t c = 0; c < intents.size(); ++c) {
    if (docs[c] == 0) throw Error(ErrorCode::EmptyIntent, intents[c]);
  }
  const double n_docs = static_cast<double>(data.examples.size());
  for (std::size_t c = 0; c < intents.size(); ++c) {
    m.log_priors_.push_back(std::log(static_cast<double>(docs[c]) / n_docs));
    const double denom = totals[c] + static_cast<double>(V) + 1.0;
    std::vector<double> row(V + 1);
    for (std::size_t f = 0; f < V; ++f) row[f] = std::log((counts[c][f] + 1.0) / denom);
    row[V] = std::log(1.0 / denom);
    m.log_likelihoods_.push_back(std::move(row));
  }
  return m;
}

/// Trains with intents that must exist even when they have no examples,
/// so empty intents are reported instead of silently vanishing.
inline ClassifierModel train(const IntentDataset& data,
                             const std::vector<std::string>& required_intents) {
  const auto present = data.intent_ids();
  for (const auto& id : required_intents) {
    if (!std::binary_search(present.begin(), present.end(), id)) {
      throw Error(ErrorCode::EmptyIntent, id);
    }
  }
  return train(data);
}

struct EvalReport {
  double accuracy = 0.0;
  std::size_t n_test = 0;
  std::size_t correct = 0;
  std::map<std::string, double> per_intent_accuracy;
  /// (true, predicted) -> count; zero cells omitted.
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

inline EvalReport evaluate(const ClassifierModel& model, const IntentDataset& test) {
  if (test.empty()) throw Error(ErrorCode::EmptyTestSet, "empty test set");
  const auto& known = model.intent_ids();
  for (const auto& id : test.intent_ids()) {
    if (!std::binary_search(known.begin(), known.end(), id)) {
      throw Error(ErrorCode::UnknownIntentInTest, id);
    }
  }
  EvalReport r;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per;
  for (const auto& e : test.examples) {
    const auto p = model.predict(e.text);
    ++r.confusion[{e.intent_id, p.intent_id}];
    auto& [ok, total] = per[e.intent_id];
    ++total;
    if (p.intent_id == e.intent_id) {
      ++ok;
      ++r.correct;
    }
  }
  r.n_test = test.size();
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.n_test);
  for (const auto& [id, pr] : per) {
    r.per_intent_accuracy[id] =
        static_cast<double>(pr.first) / static_cast<double>(pr.second);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Serialization. Reals are written as "%.17g" strings, which round-trip
// exactly through strtod.

inline std::string exact_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_decimal(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw Error(ErrorCode::InvalidArgument, "bad decimal '" + s + "'");
  }
  return v;
}

inline nlohmann::ordered_json to_json(const ClassifierModel& m) {
  nlohmann::ordered_json j;
  j["model_version"] = ClassifierModel::kVersion;
  j["intent_ids"] = m.intent_ids();
  j["vocabulary"] = m.vocabulary();
  std::vector<std::string> priors;
  for (double v : m.log_priors()) priors.push_back(exact_decimal(v));
  j["log_priors"] = priors;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : m.log_likelihoods()) {
    std::vector<std::string> r;
    for (double v : row) r.push_back(exact_decimal(v));
    rows.push_back(r);
  }
  j["log_likelihoods"] = std::move(rows);
  return j;
}

inline ClassifierModel model_from_json(const nlohmann::ordered_json& j) {
  try {
    if (j.at("model_version").get<int>() != ClassifierModel::kVersion) {
      throw Error(ErrorCode::InvalidArgument, "unsupported model_version");
    }
    ClassifierModel m;
    m.intents_ = j.at("intent_ids").get<std::vector<std::string>>();
    m.vocab_ = j.at("vocabulary").get<std::vector<std::string>>();
    m.rebuild_index();
    for (const auto& s : j.at("log_priors")) {
      m.log_priors_.push_back(parse_decimal(s.get<std::string>()));
    }
    for (const auto& row : j.at("log_likelihoods")) {
      std::vector<double> r;
      for (const auto& s : row) r.push_back(parse_decimal(s.get<std::string>()));
      if (r.size() != m.vocab_.size() + 1) {
        throw Error(ErrorCode::InvalidArgument, "likelihood row has wrong width");
      }
      m.log_likelihoods_.push_back(std::move(r));
    }
    if (m.log_priors_.size() != m.intents_.size() ||
        m.log_likelihoods_.size() != m.intents_.size()) {
      throw Error(ErrorCode::InvalidArgument, "model arrays disagree with intents");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad model JSON: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["n_test"] = r.n_test;
  j["correct"] = r.correct;
  j["per_intent_accuracy"] = r.per_intent_accuracy;
  auto conf = nlohmann::ordered_json::array();
  for (const auto& [k, v] : r.confusion) {
    conf.push_back({{"true", k.first}, {"predicted", k.second}, {"count", v}});
  }
  j["confusion"] = std::move(conf);
  return j;
}

inline nlohmann::ordered_json to_json(const Prediction& p) {
  nlohmann::ordered_json j;
  j["intent_id"] = p.intent_id;
  j["confidence"] = p.confidence;
  auto ranked = nlohmann::ordered_json::array();
  for (const auto& [id, s] : p.ranked) ranked.push_back({{"intent_id", id}, {"score", s}});
  j["ranked"] = std::move(ranked);
  return j;
}

}  // namespace utterancesmith
