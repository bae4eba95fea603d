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

// Diverse / random / narrow representative groups for one intent, built on
// seeded k-means over sentence embeddings.

#include <concepts>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "utterancesmith/error.hpp"
#include "utterancesmith/textcore.hpp"

namespace utterancesmith {

template <class T>
concept SentenceEmbedder = requires(const T& e, std::string_view s) {
  { e.embed(s) } -> std::convertible_to<EmbeddingVector>;
};

/// Lists hold indices into the input sentences.
struct SamplingResult {
  std::vector<std::size_t> diverse;
  std::vector<std::size_t> random;
  std::vector<std::size_t> narrow;
  std::vector<std::size_t> cluster_assignments;
  std::size_t smallest_cluster = 0;
  std::vector<std::vector<double>> centers;
  friend bool operator==(const SamplingResult&, const SamplingResult&) = default;
};

/// Samples n distinct indices from [0, size) (partial Fisher-Yates).
inline std::vector<std::size_t> sample_without_replacement(std::size_t size,
                                                           std::size_t n,
                                                           SplitMix64& rng) {
  std::vector<std::size_t> idx(size);
  for (std::size_t i = 0; i < size; ++i) idx[i] = i;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.uniform_index(size - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

/// Groups over precomputed embeddings.
///   diverse: per cluster, the member nearest its center;
///   narrow:  the n sentences globally nearest the smallest cluster's
///            center (lowest index on size ties), taken one at a time;
///   random:  n distinct uniform draws.
/// All ties fall to the earlier input.
inline SamplingResult sample_representatives(
    const std::vector<EmbeddingVector>& embeddings, std::size_t n,
    std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (embeddings.size() < n) {
    throw Error(ErrorCode::TooFewSentences,
                std::to_string(embeddings.size()) + " sentences < n=" +
                    std::to_string(n));
  }
  SplitMix64 root(seed);
  const std::uint64_t kmeans_seed = root.next();
  SplitMix64 random_rng = root.split();

  const auto km = kmeans(embeddings, static_cast<long long>(n), kmeans_seed);
  SamplingResult r;
  r.cluster_assignments = km.assignments;
  r.centers = km.centers;

  for (std::size_t c = 0; c < n; ++c) {
    std::size_t best = embeddings.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
      if (km.assignments[i] != c) continue;
      const double d = squared_distance(embeddings[i].values, km.centers[c]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    r.diverse.push_back(best);
  }

  for (std::size_t c = 1; c < n; ++c) {
    if (km.sizes[c] < km.sizes[r.smallest_cluster]) r.smallest_cluster = c;
  }
  const auto& center = km.centers[r.smallest_cluster];
  std::vector<bool> taken(embeddings.size(), false);
  for (std::size_t round = 0; round < n; ++round) {
    std::size_t best = embeddings.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
      if (taken[i]) continue;
      const double d = squared_distance(embeddings[i].values, center);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    taken[best] = true;
    r.narrow.push_back(best);
  }

  r.random = sample_without_replacement(embeddings.size(), n, random_rng);
  return r;
}

template <SentenceEmbedder Embedder>
SamplingResult sample_representatives(const std::vector<std::string>& sentences,
                                      std::size_t n, std::uint64_t seed,
                                      const Embedder& embedder) {
  std::vector<EmbeddingVector> emb;
  emb.reserve(sentences.size());
  for (const auto& s : sentences) emb.push_back(embedder.embed(s));
  return sample_representatives(emb, n, seed);
}

inline nlohmann::ordered_json to_json(const SamplingResult& r,
                                      const std::vector<std::string>& sentences) {
  nlohmann::ordered_json j;
  auto texts = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(sentences[i]);
    return out;
  };
  j["diverse"] = texts(r.diverse);
  j["random"] = texts(r.random);
  j["narrow"] = texts(r.narrow);
  j["cluster_assignments"] = r.cluster_assignments;
  j["smallest_cluster"] = r.smallest_cluster;
  return j;
}

}  // namespace utterancesmith
