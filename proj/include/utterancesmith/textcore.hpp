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

// Deterministic text primitives: tokenization, unique n-gram counting,
// feature-hashing sentence embeddings, cosine/Euclidean geometry and seeded
// k-means. Everything here is pure and reentrant.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "utterancesmith/error.hpp"

namespace utterancesmith {

// ---------------------------------------------------------------------------
// UTF-8 helpers

namespace utf8 {

constexpr char32_t kReplacement = 0xFFFD;

/// Decodes one code point starting at `pos` and advances `pos`. Invalid
/// sequences yield U+FFFD and consume a single byte.
inline char32_t next(std::string_view s, std::size_t& pos) noexcept {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + len > s.size()) {
    ++pos;
    return kReplacement;
  }
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                        (len == 4 && cp < 0x10000);
  if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kReplacement;
  }
  pos += len;
  return cp;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

/// True when every byte sequence in `s` is well-formed UTF-8.
inline bool valid(std::string_view s) noexcept {
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t before = pos;
    const char32_t cp = next(s, pos);
    if (cp == kReplacement) {
      // A literal U+FFFD is three bytes; anything else was a decode failure.
      if (pos - before != 3) return false;
    }
  }
  return true;
}

inline std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) out.push_back(next(s, pos));
  return out;
}

}  // namespace utf8

// Simple case folding for the scripts we expect in utterances: ASCII,
// Latin-1, Latin Extended-A, Greek and Cyrillic. Other code points pass
// through unchanged.
inline char32_t to_lower(char32_t c) noexcept {
  if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 32 : c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c >= 0x100 && c <= 0x137 && (c % 2 == 0)) return c + 1;
  if (c >= 0x139 && c <= 0x148 && (c % 2 == 1)) return c + 1;
  if (c >= 0x14A && c <= 0x177 && (c % 2 == 0)) return c + 1;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

/// Letters and digits. Non-ASCII code points count as letters unless they
/// fall in a punctuation, symbol or emoji block.
inline bool is_alnum(char32_t c) noexcept {
  if (c < 0x80) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
           (c >= 'A' && c <= 'Z');
  }
  if (c >= 0x80 && c <= 0xBF) return false;
  if (c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;
  if (c >= 0x3000 && c <= 0x303F) return false;
  if (c >= 0xFE30 && c <= 0xFE4F) return false;
  if (c >= 0xFF00 && c <= 0xFF0F) return false;
  if (c >= 0xFF1A && c <= 0xFF20) return false;
  if (c == utf8::kReplacement) return false;
  if (c >= 0x1F000 && c <= 0x1FAFF) return false;
  return true;
}

inline bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::string lowercase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) utf8::append(out, to_lower(utf8::next(s, pos)));
  return out;
}

/// Splits on ASCII whitespace; never yields empty pieces.
inline std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

/// Collapses whitespace runs to single spaces and trims both ends.
inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  for (auto piece : split_whitespace(s)) {
    if (!out.empty()) out.push_back(' ');
    out.append(piece);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tokens

/// Lowercased tokens with no leading/trailing punctuation.
struct TokenSeq {
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  auto begin() const noexcept { return tokens.begin(); }
  auto end() const noexcept { return tokens.end(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }
  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

/// Strips characters that are neither letters nor digits from both ends of
/// a lowercased word. Returns an empty string when nothing survives.
inline std::string strip_token(std::string_view word) {
  const auto cps = utf8::decode(word);
  std::size_t lo = 0;
  std::size_t hi = cps.size();
  while (lo < hi && !is_alnum(cps[lo])) ++lo;
  while (hi > lo && !is_alnum(cps[hi - 1])) --hi;
  std::string out;
  for (std::size_t i = lo; i < hi; ++i) utf8::append(out, to_lower(cps[i]));
  return out;
}

inline TokenSeq tokenize(std::string_view text) {
  TokenSeq seq;
  for (auto word : split_whitespace(text)) {
    auto tok = strip_token(word);
    if (!tok.empty()) seq.tokens.push_back(std::move(tok));
  }
  return seq;
}

inline std::string join(std::span<const std::string> tokens,
                        std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unique n-grams

using NgramOrders = std::set<int>;

inline const NgramOrders& default_ngram_orders() {
  static const NgramOrders orders{1, 2, 3};
  return orders;
}

inline void check_orders(const NgramOrders& orders) {
  if (orders.empty()) throw Error(ErrorCode::EmptyOrders, "no n-gram orders");
  if (*orders.begin() < 1) {
    throw Error(ErrorCode::EmptyOrders, "n-gram orders must be >= 1");
  }
}

/// Contiguous n-grams of every requested order, keyed by their
/// space-joined tokens. Keys of different orders never collide because
/// tokens contain no whitespace.
inline std::vector<std::string> ngrams(const TokenSeq& seq,
                                       const NgramOrders& orders) {
  std::vector<std::string> out;
  for (int n : orders) {
    const auto len = static_cast<std::size_t>(n);
    if (len > seq.size()) continue;
    for (std::size_t i = 0; i + len <= seq.size(); ++i) {
      out.push_back(join(std::span(seq.tokens).subspan(i, len)));
    }
  }
  return out;
}

/// Incremental union of n-grams. `gain` is the marginal increase of the
/// unique count that `add` would produce.
class NgramCounter {
 public:
  explicit NgramCounter(NgramOrders orders = default_ngram_orders())
      : orders_(std::move(orders)) {
    check_orders(orders_);
  }

  std::size_t gain(const TokenSeq& seq) const {
    std::unordered_set<std::string> fresh;
    for (auto& g : ngrams(seq, orders_)) {
      if (!seen_.contains(g)) fresh.insert(std::move(g));
    }
    return fresh.size();
  }

  void add(const TokenSeq& seq) {
    for (auto& g : ngrams(seq, orders_)) seen_.insert(std::move(g));
  }

  std::size_t count() const noexcept { return seen_.size(); }
  const NgramOrders& orders() const noexcept { return orders_; }

 private:
  NgramOrders orders_;
  std::unordered_set<std::string> seen_;
};

inline std::size_t count_unique_ngrams(std::span<const TokenSeq> sentences,
                                       const NgramOrders& orders) {
  NgramCounter counter(orders);
  for (const auto& s : sentences) counter.add(s);
  return counter.count();
}

// ---------------------------------------------------------------------------
// Hashing and PRNG

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = kFnvOffsetBasis) noexcept {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

/// SplitMix64. Small, splittable and identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  /// Derives an independent stream, e.g. one per intent.
  SplitMix64 split() noexcept { return SplitMix64(next()); }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Embeddings

inline constexpr std::size_t kEmbeddingDim = 256;

/// Either all zeros with norm 0, or L2-normalized with norm 1.
struct EmbeddingVector {
  std::vector<double> values;
  double norm = 0.0;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const EmbeddingVector&,
                         const EmbeddingVector&) = default;
};

/// Feature strings fed to the hashing embedder, in accumulation order:
/// "w1:" unigrams, "w2:" space-separated bigrams, then "c3:" code-point
/// trigrams of the space-joined token string.
inline std::vector<std::string> embedding_features(std::string_view text) {
  const TokenSeq seq = tokenize(text);
  std::vector<std::string> feats;
  for (const auto& t : seq) feats.push_back("w1:" + t);
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    feats.push_back("w2:" + seq[i] + " " + seq[i + 1]);
  }
  const auto cps = utf8::decode(join(seq.tokens));
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    std::string f = "c3:";
    for (std::size_t j = i; j < i + 3; ++j) utf8::append(f, cps[j]);
    feats.push_back(std::move(f));
  }
  return feats;
}

inline EmbeddingVector normalized(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  EmbeddingVector out;
  if (sq == 0.0) {
    out.values.assign(values.size(), 0.0);
    return out;
  }
  const double n = std::sqrt(sq);
  for (double& v : values) v /= n;
  out.values = std::move(values);
  out.norm = 1.0;
  return out;
}

/// Signed feature hashing into kEmbeddingDim buckets with FNV-1a 64.
inline EmbeddingVector embed(std::string_view text) {
  std::vector<double> acc(kEmbeddingDim, 0.0);
  for (const auto& f : embedding_features(text)) {
    const std::uint64_t h = fnv1a64(f);
    const double sign = (h >> 63) == 0 ? 1.0 : -1.0;
    acc[h % kEmbeddingDim] += sign;
  }
  return normalized(std::move(acc));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine_similarity(const EmbeddingVector& a,
                                const EmbeddingVector& b) {
  const double d = dot(a.values, b.values);
  if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
  return std::clamp(d / (a.norm * b.norm), -1.0, 1.0);
}

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double euclidean_distance(std::span<const double> a,
                                 std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

/// The built-in sentence embedder. Any type with the same `embed` and
/// `similarity` members can stand in for it (see RemoteEmbedder).
struct HashingEmbedder {
  EmbeddingVector embed(std::string_view text) const {
    return utterancesmith::embed(text);
  }
  double similarity(std::string_view a, std::string_view b) const {
    return cosine_similarity(embed(a), embed(b));
  }
};

// ---------------------------------------------------------------------------
// k-means

struct KMeansResult {
  std::vector<std::size_t> assignments;
  std::vector<std::vector<double>> centers;
  std::vector<std::size_t> sizes;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline std::vector<std::size_t> assign_nearest(
    const std::vector<std::vector<double>>& points,
    const std::vector<std::vector<double>>& centers) {
  std::vector<std::size_t> out(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double d = squared_distance(points[i], centers[c]);
      if (d < best) {
        best = d;
        out[i] = c;
      }
    }
  }
  return out;
}

// Gives every empty cluster the point farthest from its current center,
// taken from clusters that can spare one.
inline void repair_empty(const std::vector<std::vector<double>>& points,
                         std::vector<std::vector<double>>& centers,
                         std::vector<std::size_t>& assignments) {
  const std::size_t k = centers.size();
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignments) ++sizes[a];
  for (std::size_t e = 0; e < k; ++e) {
    if (sizes[e] != 0) continue;
    std::size_t victim = points.size();
    double worst = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (sizes[assignments[i]] < 2) continue;
      const double d = squared_distance(points[i], centers[assignments[i]]);
      if (d > worst) {
        worst = d;
        victim = i;
      }
    }
    if (victim == points.size()) break;  // unreachable while k <= |points|
    --sizes[assignments[victim]];
    assignments[victim] = e;
    sizes[e] = 1;
    centers[e] = points[victim];
  }
}

inline std::vector<std::vector<double>> means(
    const std::vector<std::vector<double>>& points,
    const std::vector<std::size_t>& assignments, std::size_t k,
    std::size_t dim) {
  std::vector<std::vector<double>> centers(k, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& c = centers[assignments[i]];
    for (std::size_t d = 0; d < dim; ++d) c[d] += points[i][d];
    ++sizes[assignments[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] == 0) continue;
    for (auto& v : centers[c]) v /= static_cast<double>(sizes[c]);
  }
  return centers;
}

inline std::vector<std::vector<double>> kmeans_plus_plus(
    const std::vector<std::vector<double>>& points, std::size_t k,
    SplitMix64& rng) {
  const std::size_t m = points.size();
  std::vector<std::vector<double>> centers;
  std::vector<bool> chosen(m, false);
  std::size_t first = rng.uniform_index(m);
  centers.push_back(points[first]);
  chosen[first] = true;
  std::vector<double> d2(m);
  for (std::size_t i = 0; i < m; ++i) {
    d2[i] = squared_distance(points[i], centers[0]);
  }
  while (centers.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = m;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (d2[i] <= 0.0) continue;
        cum += d2[i];
        pick = i;
        if (cum > r) break;
      }
    } else {
      // Every remaining point duplicates a center: pick an unused index.
      std::vector<std::size_t> unused;
      for (std::size_t i = 0; i < m; ++i) {
        if (!chosen[i]) unused.push_back(i);
      }
      pick = unused[rng.uniform_index(unused.size())];
    }
    chosen[pick] = true;
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < m; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
    }
  }
  return centers;
}

}  // namespace detail

inline constexpr int kKMeansMaxIterations = 100;

/// Seeded k-means++ followed by Lloyd iterations until the assignment is
/// stable (or kKMeansMaxIterations). Ties go to the lowest center index.
inline KMeansResult kmeans(const std::vector<std::vector<double>>& points,
                           long long k, std::uint64_t seed) {
  if (k <= 0) {
    throw Error(ErrorCode::KNonPositive, "k=" + std::to_string(k));
  }
  if (static_cast<std::size_t>(k) > points.size()) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " > " +
                                          std::to_string(points.size()) +
                                          " points");
  }
  const std::size_t kk = static_cast<std::size_t>(k);
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "ragged point set");
    }
  }

  SplitMix64 rng(seed);
  auto centers = detail::kmeans_plus_plus(points, kk, rng);
  auto assignments = detail::assign_nearest(points, centers);
  detail::repair_empty(points, centers, assignments);

  KMeansResult result;
  for (int iter = 1; iter <= kKMeansMaxIterations; ++iter) {
    result.iterations = iter;
    centers = detail::means(points, assignments, kk, dim);
    auto next = detail::assign_nearest(points, centers);
    detail::repair_empty(points, centers, next);
    if (next == assignments) {
      result.converged = true;
      break;
    }
    assignments = std::move(next);
  }
  result.centers = detail::means(points, assignments, kk, dim);
  result.sizes.assign(kk, 0);
  for (auto a : assignments) ++result.sizes[a];
  result.assignments = std::move(assignments);
  return result;
}

inline KMeansResult kmeans(std::span<const EmbeddingVector> points,
                           long long k, std::uint64_t seed) {
  std::vector<std::vector<double>> raw;
  raw.reserve(points.size());
  for (const auto& p : points) raw.push_back(p.values);
  return kmeans(raw, k, seed);
}

}  // namespace utterancesmith
