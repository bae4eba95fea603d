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

// Labeled utterance datasets: `text,intent` CSV files with a JSON split
// manifest, plus the bundled synthetic 10-intent dataset.

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "utterancesmith/classifier.hpp"
#include "utterancesmith/error.hpp"
#include "utterancesmith/openapi_extract.hpp"
#include "utterancesmith/textcore.hpp"

namespace utterancesmith {

// ---------------------------------------------------------------------------
// CSV

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::DecodeError, "unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline IntentDataset parse_dataset_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  const auto rows = parse_csv(text);
  if (rows.empty() || rows[0].size() < 2 ||
      normalize_whitespace(rows[0][0]) != "text" ||
      normalize_whitespace(rows[0][1]) != "intent") {
    throw Error(ErrorCode::DecodeError, "dataset CSV must start with header text,intent");
  }
  IntentDataset data;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() < 2) {
      throw Error(ErrorCode::DecodeError, "CSV row " + std::to_string(r) + " has < 2 fields");
    }
    auto text_field = normalize_whitespace(rows[r][0]);
    auto intent = normalize_whitespace(rows[r][1]);
    if (text_field.empty() || intent.empty()) {
      throw Error(ErrorCode::DecodeError, "CSV row " + std::to_string(r) + " has an empty field");
    }
    data.examples.push_back({std::move(text_field), std::move(intent)});
  }
  return data;
}

inline std::string dataset_to_csv(const IntentDataset& data) {
  std::string out = "text,intent\n";
  for (const auto& e : data.examples) {
    out += csv_field(e.text) + "," + csv_field(e.intent_id) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits

struct SplitManifest {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

inline nlohmann::ordered_json to_json(const SplitManifest& m) {
  nlohmann::ordered_json j;
  j["train"] = m.train;
  j["test"] = m.test;
  return j;
}

inline SplitManifest split_from_json(const nlohmann::ordered_json& j) {
  SplitManifest m;
  try {
    m.train = j.at("train").get<std::vector<std::size_t>>();
    m.test = j.at("test").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::DecodeError, std::string("bad split manifest: ") + e.what());
  }
  return m;
}

inline IntentDataset subset(const IntentDataset& data,
                            const std::vector<std::size_t>& indices) {
  IntentDataset out;
  for (auto i : indices) {
    if (i >= data.size()) {
      throw Error(ErrorCode::DecodeError, "split index " + std::to_string(i) + " out of range");
    }
    out.examples.push_back(data.examples[i]);
  }
  return out;
}

struct SplitDataset {
  std::string name;
  IntentDataset all;
  SplitManifest split;

  IntentDataset train() const { return subset(all, split.train); }
  IntentDataset test() const { return subset(all, split.test); }
};

/// Loads `<csv>` and, when given, its manifest. Without a manifest every
/// row is both train and test.
inline SplitDataset load_dataset(const std::filesystem::path& csv,
                                 const std::filesystem::path& manifest = {}) {
  SplitDataset d;
  d.name = csv.stem().string();
  d.all = parse_dataset_csv(read_file(csv));
  if (!manifest.empty()) {
    try {
      d.split = split_from_json(nlohmann::ordered_json::parse(read_file(manifest)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::DecodeError, e.what());
    }
    (void)d.train();
    (void)d.test();
  } else {
    for (std::size_t i = 0; i < d.all.size(); ++i) {
      d.split.train.push_back(i);
      d.split.test.push_back(i);
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Synthetic dataset
//
// Ten intents, four lexically distinct phrasing clusters each (sizes
// 13/11/9/7, rotated per intent). A cluster fills a frame with one word from
// each of two three-word synonym groups plus an optional shared modifier.
// Every group is in the built-in synonym lexicon, so paraphrasing can reach
// the other members of a seed's own cluster but never another cluster.

namespace synthetic {

struct Cluster {
  std::string_view frame;  // {a}, {b}, optional {m}
  std::array<std::string_view, 3> a;
  std::array<std::string_view, 3> b;
};

struct Intent {
  std::string_view id;
  std::array<Cluster, 4> clusters;
};

inline constexpr std::array<std::string_view, 9> kModifiers = {
    "", "now", "today", "tonight", "tomorrow", "this morning", "right away",
    "for me", "asap"};

inline constexpr std::array<std::size_t, 4> kClusterSizes = {13, 11, 9, 7};
inline constexpr std::array<std::size_t, 4> kClusterTrain = {8, 7, 5, 4};

inline const std::array<Intent, 10>& intents() {
  static const std::array<Intent, 10> table = {{
      {"set_alarm",
       {{{"{a} an {b} {m}", {"set", "program", "arrange"}, {"alarm", "alert", "buzzer"}},
         {"{a} me up {m} with a {b}", {"wake", "rouse", "shake"}, {"chime", "ringtone", "beep"}},
         {"i need a {b} call {a} {m}", {"booked", "placed", "lined"}, {"wakeup", "sunrise", "dawn"}},
         {"make sure i {a} before my {b}", {"awaken", "rise", "stir"}, {"flight", "meeting", "lecture"}}}}},
      {"play_music",
       {{{"{a} some {b} {m}", {"play", "spin", "blast"}, {"music", "songs", "tunes"}},
         {"put on my {b} playlist {a} {m}", {"loud", "quietly", "softly"}, {"workout", "party", "chill"}},
         {"i want to hear {b} {a} {m}", {"live", "acoustic", "remixed"}, {"jazz", "rock", "blues"}},
         {"{a} the next {b}", {"skip", "advance", "jump"}, {"track", "record", "single"}}}}},
      {"weather_query",
       {{{"what is the {a} {b} {m}", {"weather", "temperature", "forecast"}, {"outside", "outdoors", "here"}},
         {"will it {a} {m} in {b}", {"rain", "snow", "storm"}, {"boston", "denver", "seattle"}},
         {"do i need an {a} {m} for the {b}", {"umbrella", "raincoat", "jacket"}, {"commute", "walk", "trip"}},
         {"how {a} is it going to be {m} {b}", {"hot", "cold", "windy"}, {"downtown", "uptown", "inland"}}}}},
      {"transfer_money",
       {{{"{a} {b} dollars to savings {m}", {"wire", "shift", "remit"}, {"fifty", "hundred", "twenty"}},
         {"{a} money from checking to my {b} {m}", {"transfer", "relocate", "sweep"}, {"brokerage", "retirement", "college"}},
         {"pay my {a} the {b} i owe {m}", {"landlord", "roommate", "sister"}, {"rent", "money", "deposit"}},
         {"can you {a} funds between my {b}", {"transport", "reallocate", "rebalance"}, {"accounts", "wallets", "portfolios"}}}}},
      {"check_balance",
       {{{"what is my {a} {b} {m}", {"current", "available", "pending"}, {"balance", "total", "amount"}},
         {"how much {a} do i have {b}", {"cash", "credit", "dough"}, {"left", "remaining", "spare"}},
         {"show me my {a} {b} {m}", {"bank", "card", "debit"}, {"statement", "summary", "activity"}},
         {"am i {a} on my {b}", {"overdrawn", "short", "negative"}, {"plan", "allowance", "budget"}}}}},
      {"book_restaurant",
       {{{"{a} a table for {b} {m}", {"reserve", "book", "hold"}, {"two", "four", "six"}},
         {"get me into an {a} {b} place {m}", {"italian", "indian", "thai"}, {"dinner", "lunch", "brunch"}},
         {"i want {a} at the {b} {m}", {"reservations", "seats", "spots"}, {"steakhouse", "bistro", "diner"}},
         {"find a {a} restaurant with {b}", {"quiet", "cozy", "romantic"}, {"parking", "patio", "views"}}}}},
      {"order_food",
       {{{"{a} me a {b} {m}", {"order", "bring", "deliver"}, {"pizza", "burger", "sandwich"}},
         {"i am {a} for some {b}", {"hungry", "starving", "craving"}, {"sushi", "noodles", "tacos"}},
         {"add {a} to my {b} order", {"fries", "salad", "soup"}, {"takeout", "delivery", "pickup"}},
         {"{a} food from {b} {m}", {"grab", "snag", "nab"}, {"ubereats", "doordash", "grubhub"}}}}},
      {"call_contact",
       {{{"{a} my {b} {m}", {"call", "phone", "ring"}, {"mom", "dad", "brother"}},
         {"start a {a} call with {b}", {"video", "voice", "conference"}, {"john", "maria", "alex"}},
         {"dial the {a} {b} number", {"office", "home", "work"}, {"line", "desk", "extension"}},
         {"i want to {a} with {b} {m}", {"talk", "speak", "chat"}, {"grandma", "grandpa", "auntie"}}}}},
      {"navigation",
       {{{"{a} me to the {b}", {"navigate", "direct", "guide"}, {"airport", "station", "stadium"}},
         {"how do i get to {a} {b}", {"main", "central", "north"}, {"street", "avenue", "boulevard"}},
         {"what is the {a} {b} {m}", {"fastest", "shortest", "quickest"}, {"route", "path", "way"}},
         {"avoid {a} on the way {b}", {"tolls", "highways", "traffic"}, {"back", "there", "across"}}}}},
      {"smart_lights",
       {{{"turn the {b} lights {a}", {"brighter", "darker", "lower"}, {"kitchen", "bedroom", "hallway"}},
         {"{a} the {b} {m}", {"dim", "brighten", "soften"}, {"lamp", "bulbs", "chandelier"}},
         {"change the lights to {a} {b}", {"warm", "cool", "soft"}, {"white", "yellow", "blue"}},
         {"make the {a} {b} {m}", {"living", "dining", "guest"}, {"room", "area", "space"}}}}},
  }};
  return table;
}

inline std::string fill(std::string_view frame, std::string_view a,
                        std::string_view b, std::string_view m) {
  std::string s(frame);
  if (s.find("{m}") == std::string::npos) s += " {m}";
  auto put = [&](std::string_view key, std::string_view value) {
    if (auto p = s.find(key); p != std::string::npos) s.replace(p, key.size(), value);
  };
  put("{a}", a);
  put("{b}", b);
  put("{m}", m);
  return normalize_whitespace(s);
}

/// Synonym lexicon lines covering every slot group.
inline std::string lexicon_lines() {
  std::string out;
  for (const auto& intent : intents()) {
    for (const auto& c : intent.clusters) {
      for (const auto* group : {&c.a, &c.b}) {
        for (std::size_t i = 0; i < 3; ++i) {
          out += std::string((*group)[i]);
          for (std::size_t j = 0; j < 3; ++j) {
            if (j != i) out += " " + std::string((*group)[j]);
          }
          out += "\n";
        }
      }
    }
  }
  return out;
}

}  // namespace synthetic

/// Deterministic synthetic dataset (400 rows) and its split: per cluster
/// the first kClusterTrain rows train, the rest test.
inline SplitDataset synthetic_dataset() {
  SplitDataset d;
  d.name = "synthetic";
  SplitMix64 rng(0x5EED'DA7A'0000'0001ULL);
  const auto& table = synthetic::intents();
  for (std::size_t ii = 0; ii < table.size(); ++ii) {
    const auto& intent = table[ii];
    for (std::size_t ci = 0; ci < 4; ++ci) {
      const auto& cluster = intent.clusters[ci];
      const std::size_t slot = (ci + ii) % 4;  // rotate which cluster is small
      const std::size_t size = synthetic::kClusterSizes[slot];
      const std::size_t n_train = synthetic::kClusterTrain[slot];
      const std::size_t combos = 3 * 3 * synthetic::kModifiers.size();
      const auto picks = [&] {
        std::vector<std::size_t> idx(combos);
        for (std::size_t i = 0; i < combos; ++i) idx[i] = i;
        for (std::size_t i = 0; i < size; ++i) {
          std::swap(idx[i], idx[i + rng.uniform_index(combos - i)]);
        }
        idx.resize(size);
        return idx;
      }();
      for (std::size_t k = 0; k < picks.size(); ++k) {
        const std::size_t p = picks[k];
        const auto text = synthetic::fill(
            cluster.frame, cluster.a[p % 3], cluster.b[(p / 3) % 3],
            synthetic::kModifiers[p / 9]);
        const std::size_t row = d.all.size();
        d.all.examples.push_back({text, std::string(intent.id)});
        (k < n_train ? d.split.train : d.split.test).push_back(row);
      }
    }
  }
  return d;
}

}  // namespace utterancesmith
