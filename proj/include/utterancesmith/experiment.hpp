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

// Desk-scale experiment grid: sample n inputs per intent, optionally
// augment them through generation + selection, train, and evaluate on the
// held-out split. Reports come in two layouts: input quality (diverse /
// random / narrow by n) and pipeline ablation (base ... ensemble by n).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "utterancesmith/classifier.hpp"
#include "utterancesmith/dataset.hpp"
#include "utterancesmith/error.hpp"
#include "utterancesmith/generation.hpp"
#include "utterancesmith/sampling.hpp"
#include "utterancesmith/selection.hpp"
#include "utterancesmith/textcore.hpp"

namespace utterancesmith {

enum class InputType { Diverse, Random, Narrow };
enum class PipelineConfig { Base, GenerateOnly, GenerateSelect, EnsembleSelect };

constexpr std::string_view input_type_name(InputType t) noexcept {
  switch (t) {
    case InputType::Diverse: return "diverse";
    case InputType::Random: return "random";
    case InputType::Narrow: return "narrow";
  }
  return "diverse";
}

constexpr std::string_view pipeline_name(PipelineConfig p) noexcept {
  switch (p) {
    case PipelineConfig::Base: return "base";
    case PipelineConfig::GenerateOnly: return "generate_only";
    case PipelineConfig::GenerateSelect: return "generate_select";
    case PipelineConfig::EnsembleSelect: return "ensemble_select";
  }
  return "base";
}

constexpr std::string_view pipeline_label(PipelineConfig p) noexcept {
  switch (p) {
    case PipelineConfig::Base: return "Base";
    case PipelineConfig::GenerateOnly: return "Generate";
    case PipelineConfig::GenerateSelect: return "Generate+Selection";
    case PipelineConfig::EnsembleSelect: return "Ensemble+Selection";
  }
  return "Base";
}

inline InputType parse_input_type(std::string_view s) {
  if (s == "diverse") return InputType::Diverse;
  if (s == "random") return InputType::Random;
  if (s == "narrow") return InputType::Narrow;
  throw Error(ErrorCode::InvalidArgument, "unknown input type " + std::string(s));
}

inline PipelineConfig parse_pipeline(std::string_view s) {
  if (s == "base") return PipelineConfig::Base;
  if (s == "generate_only") return PipelineConfig::GenerateOnly;
  if (s == "generate_select") return PipelineConfig::GenerateSelect;
  if (s == "ensemble_select") return PipelineConfig::EnsembleSelect;
  throw Error(ErrorCode::InvalidArgument, "unknown pipeline config " + std::string(s));
}

/// Two builtin rule paraphrasers with different shuffle seeds.
inline std::vector<GeneratorSpec> default_generators() {
  GeneratorSpec a;
  a.id = "rule-a";
  a.params = Json{{"seed_rng", 1}};
  GeneratorSpec b;
  b.id = "rule-b";
  b.params = Json{{"seed_rng", 2}};
  return {a, b};
}

struct ExperimentConfig {
  /// CSV path, or "synthetic" for the bundled dataset.
  std::string dataset = "synthetic";
  std::string split;
  std::vector<int> n_values = {1, 2, 4, 8};
  std::vector<InputType> input_types = {InputType::Diverse, InputType::Random,
                                        InputType::Narrow};
  std::vector<PipelineConfig> pipeline_configs = {PipelineConfig::GenerateSelect};
  std::vector<std::uint64_t> seeds = {1};
  SelectionConfig selection;
  std::vector<GeneratorSpec> generators = default_generators();
  int parallelism = 4;

  void validate() const {
    if (n_values.empty() || input_types.empty() || pipeline_configs.empty()) {
      throw Error(ErrorCode::InvalidArgument, "empty experiment axis");
    }
    for (int n : n_values) {
      if (n < 1) throw Error(ErrorCode::InvalidArgument, "n values must be positive");
    }
    if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one seed");
    selection.validate();
    const bool generates = std::any_of(
        pipeline_configs.begin(), pipeline_configs.end(),
        [](auto p) { return p != PipelineConfig::Base; });
    if (generates) validate_generators(generators);
  }
};

inline ExperimentConfig experiment_config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    c.dataset = j.value("dataset", c.dataset);
    c.split = j.value("split", c.split);
    if (j.contains("n_values")) c.n_values = j["n_values"].get<std::vector<int>>();
    if (j.contains("input_types")) {
      c.input_types.clear();
      for (const auto& s : j["input_types"]) c.input_types.push_back(parse_input_type(s.get<std::string>()));
    }
    if (j.contains("pipeline_configs")) {
      c.pipeline_configs.clear();
      for (const auto& s : j["pipeline_configs"]) c.pipeline_configs.push_back(parse_pipeline(s.get<std::string>()));
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("selection")) c.selection = selection_config_from_json(j["selection"]);
    if (j.contains("generators")) {
      c.generators.clear();
      for (const auto& g : j["generators"]) c.generators.push_back(generator_from_json(g));
    }
    c.parallelism = j.value("parallelism", c.parallelism);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["dataset"] = c.dataset;
  j["split"] = c.split;
  j["n_values"] = c.n_values;
  auto types = Json::array();
  for (auto t : c.input_types) types.push_back(std::string(input_type_name(t)));
  j["input_types"] = std::move(types);
  auto pipes = Json::array();
  for (auto p : c.pipeline_configs) pipes.push_back(std::string(pipeline_name(p)));
  j["pipeline_configs"] = std::move(pipes);
  j["seeds"] = c.seeds;
  j["selection"] = to_json(c.selection);
  auto gens = Json::array();
  for (const auto& g : c.generators) gens.push_back(to_json(g));
  j["generators"] = std::move(gens);
  j["parallelism"] = c.parallelism;
  return j;
}

struct CellKey {
  std::string dataset;
  InputType input_type;
  PipelineConfig pipeline;
  int n;
  std::uint64_t seed;
  auto operator<=>(const CellKey&) const = default;
};

struct CellResult {
  double accuracy = 0.0;
  /// Training examples per intent (inputs + selected).
  std::map<std::string, std::size_t> train_sizes;
  std::size_t generator_calls = 0;
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

struct ResultGrid {
  std::map<CellKey, CellResult> cells;
  std::vector<GeneratorFailure> warnings;
  std::size_t generator_calls = 0;
  std::vector<int> n_values;

  /// Mean / sample standard deviation over seeds.
  std::map<std::tuple<std::string, InputType, PipelineConfig, int>, Aggregate>
  aggregates() const {
    std::map<std::tuple<std::string, InputType, PipelineConfig, int>, std::vector<double>> groups;
    for (const auto& [k, v] : cells) {
      groups[{k.dataset, k.input_type, k.pipeline, k.n}].push_back(v.accuracy);
    }
    std::map<std::tuple<std::string, InputType, PipelineConfig, int>, Aggregate> out;
    for (const auto& [k, xs] : groups) {
      Aggregate a;
      a.count = xs.size();
      for (double x : xs) a.mean += x;
      a.mean /= static_cast<double>(xs.size());
      if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - a.mean) * (x - a.mean);
        a.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
      }
      out[k] = a;
    }
    return out;
  }

  double mean(InputType t, PipelineConfig p, int n) const {
    for (const auto& [k, a] : aggregates()) {
      if (std::get<1>(k) == t && std::get<2>(k) == p && std::get<3>(k) == n) return a.mean;
    }
    throw Error(ErrorCode::IncompleteGrid, "no cells for " + std::string(input_type_name(t)) +
                                               "/" + std::string(pipeline_name(p)) +
                                               "/n=" + std::to_string(n));
  }
};

inline Json to_json(const ResultGrid& g) {
  Json j;
  auto cells = Json::array();
  for (const auto& [k, v] : g.cells) {
    Json c;
    c["dataset"] = k.dataset;
    c["input_type"] = std::string(input_type_name(k.input_type));
    c["pipeline"] = std::string(pipeline_name(k.pipeline));
    c["n"] = k.n;
    c["seed"] = k.seed;
    c["accuracy"] = v.accuracy;
    c["train_sizes"] = v.train_sizes;
    c["generator_calls"] = v.generator_calls;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  auto aggs = Json::array();
  for (const auto& [k, a] : g.aggregates()) {
    Json item;
    item["dataset"] = std::get<0>(k);
    item["input_type"] = std::string(input_type_name(std::get<1>(k)));
    item["pipeline"] = std::string(pipeline_name(std::get<2>(k)));
    item["n"] = std::get<3>(k);
    item["mean"] = a.mean;
    item["stddev"] = a.stddev;
    item["count"] = a.count;
    aggs.push_back(std::move(item));
  }
  j["aggregates"] = std::move(aggs);
  Json meta;
  meta["generator_calls"] = g.generator_calls;
  auto warns = Json::array();
  for (const auto& w : g.warnings) {
    warns.push_back({{"generator_id", w.generator_id}, {"seed_text", w.seed_text},
                     {"code", w.code}, {"detail", w.detail}});
  }
  meta["warnings"] = std::move(warns);
  j["metadata"] = std::move(meta);
  return j;
}

inline ResultGrid grid_from_json(const Json& j) {
  ResultGrid g;
  std::set<int> ns;
  for (const auto& c : j.at("cells")) {
    CellKey k{c.at("dataset").get<std::string>(),
              parse_input_type(c.at("input_type").get<std::string>()),
              parse_pipeline(c.at("pipeline").get<std::string>()), c.at("n").get<int>(),
              c.at("seed").get<std::uint64_t>()};
    CellResult r;
    r.accuracy = c.at("accuracy").get<double>();
    r.train_sizes = c.value("train_sizes", std::map<std::string, std::size_t>{});
    r.generator_calls = c.value("generator_calls", std::size_t{0});
    ns.insert(k.n);
    g.cells[k] = r;
  }
  g.n_values.assign(ns.begin(), ns.end());
  if (auto m = j.find("metadata"); m != j.end()) {
    g.generator_calls = m->value("generator_calls", std::size_t{0});
  }
  return g;
}

struct ExperimentHooks {
  /// Replaces the generator call path (used to count or replay calls).
  GeneratorFn generate = run_generator;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  SplitMix64 r(seed ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xC2B2AE3D27D4EB4FULL));
  return r.next();
}

}  // namespace detail

/// Runs every (input type, pipeline, n, seed) cell. Cells are independent
/// and keyed, so the grid is a pure function of the config and dataset.
inline ResultGrid run_grid(const ExperimentConfig& config, const SplitDataset& data,
                           const ExperimentHooks& hooks = {}) {
  config.validate();
  const auto train_split = data.train();
  const auto test = data.test();
  const auto intents = train_split.intent_ids();
  std::map<std::string, std::vector<std::string>> by_intent;
  for (const auto& e : train_split.examples) by_intent[e.intent_id].push_back(e.text);
  const int max_n = *std::max_element(config.n_values.begin(), config.n_values.end());
  for (const auto& id : intents) {
    if (by_intent[id].size() < static_cast<std::size_t>(max_n)) {
      throw Error(ErrorCode::DatasetTooSmall,
                  id + " has " + std::to_string(by_intent[id].size()) +
                      " training examples < n=" + std::to_string(max_n));
    }
  }
  for (const auto& id : test.intent_ids()) {
    if (!by_intent.contains(id)) throw Error(ErrorCode::DatasetTooSmall, id + " has no training examples");
  }

  // Embeddings are shared across every cell.
  std::map<std::string, std::vector<EmbeddingVector>> embeddings;
  const HashingEmbedder embedder;
  for (const auto& [id, texts] : by_intent) {
    for (const auto& t : texts) embeddings[id].push_back(embedder.embed(t));
  }

  ResultGrid grid;
  grid.n_values = config.n_values;
  std::sort(grid.n_values.begin(), grid.n_values.end());
  grid.n_values.erase(std::unique(grid.n_values.begin(), grid.n_values.end()), grid.n_values.end());

  for (std::uint64_t seed : config.seeds) {
    for (int n : config.n_values) {
      std::map<std::string, SamplingResult> samples;
      for (std::size_t k = 0; k < intents.size(); ++k) {
        samples[intents[k]] = sample_representatives(
            embeddings[intents[k]], static_cast<std::size_t>(n),
            detail::mix_seed(seed, k, static_cast<std::uint64_t>(n)));
      }
      for (auto type : config.input_types) {
        std::vector<SeedUtterance> inputs;
        for (const auto& id : intents) {
          const auto& s = samples[id];
          const auto& idx = type == InputType::Diverse  ? s.diverse
                            : type == InputType::Random ? s.random
                                                        : s.narrow;
          for (auto i : idx) inputs.push_back({by_intent[id][i], std::nullopt, id});
        }
        for (auto pipeline : config.pipeline_configs) {
          IntentDataset training;
          for (const auto& in : inputs) training.examples.push_back({in.text, in.intent_id});
          CellResult cell;
          if (pipeline != PipelineConfig::Base) {
            std::vector<GeneratorSpec> gens = config.generators;
            if (pipeline != PipelineConfig::EnsembleSelect) gens.resize(1);
            EnsembleOptions opts;
            opts.parallelism = config.parallelism;
            opts.generate = hooks.generate;
            auto ens = run_ensemble(inputs, gens, opts);
            cell.generator_calls = ens.calls;
            grid.generator_calls += ens.calls;
            for (auto& w : ens.warnings) grid.warnings.push_back(std::move(w));
            for (const auto& in : inputs) {
              std::vector<CandidateSentence> pool;
              for (const auto& c : ens.candidates) {
                if (c.intent_id == in.intent_id && c.seed_text == in.text) pool.push_back(c);
              }
              std::vector<CandidateSentence> chosen;
              if (pipeline == PipelineConfig::GenerateOnly) {
                const auto keep = std::min<std::size_t>(pool.size(), config.selection.target_size);
                chosen.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep));
              } else {
                chosen = select_sentences(pool, in.text, config.selection, embedder).selected;
              }
              for (const auto& c : chosen) training.examples.push_back({c.text, c.intent_id});
            }
          }
          for (const auto& e : training.examples) ++cell.train_sizes[e.intent_id];
          const auto model = train(training);
          cell.accuracy = evaluate(model, test).accuracy;
          grid.cells[{data.name, type, pipeline, n, seed}] = std::move(cell);
        }
      }
    }
  }
  return grid;
}

inline SplitDataset load_experiment_dataset(const ExperimentConfig& config) {
  if (config.dataset == "synthetic") return synthetic_dataset();
  return load_dataset(config.dataset, config.split);
}

inline ResultGrid run_grid(const ExperimentConfig& config) {
  return run_grid(config, load_experiment_dataset(config));
}

// ---------------------------------------------------------------------------
// Reports

enum class TableLayout { Table1, Table3 };

struct ReportTable {
  std::string title;
  std::string dataset;
  std::vector<std::string> rows;
  std::vector<int> columns;
  std::vector<std::vector<Aggregate>> values;  // [row][column]

  std::string text() const {
    std::ostringstream os;
    os << title << " [" << dataset << "]\n";
    std::size_t label_w = 5;
    for (const auto& r : rows) label_w = std::max(label_w, r.size());
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(label_w), "input");
    os << buf;
    for (int n : columns) {
      std::snprintf(buf, sizeof buf, " | %15s", ("n=" + std::to_string(n)).c_str());
      os << buf;
    }
    os << "\n" << std::string(label_w + columns.size() * 18, '-') << "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(label_w), rows[r].c_str());
      os << buf;
      for (const auto& a : values[r]) {
        std::snprintf(buf, sizeof buf, " | %7.3f ± %5.3f", a.mean, a.stddev);
        os << buf;
      }
      os << "\n";
    }
    return os.str();
  }

  std::string csv() const {
    std::ostringstream os;
    os << "dataset,row";
    for (int n : columns) os << ",n" << n << "_mean,n" << n << "_stddev";
    os << "\n";
    char buf[64];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      os << csv_field(dataset) << "," << csv_field(rows[r]);
      for (const auto& a : values[r]) {
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f", a.mean, a.stddev);
        os << buf;
      }
      os << "\n";
    }
    return os.str();
  }
};

/// Table1: input quality rows (diverse/random/narrow) under one pipeline
/// (generate_select when present). Table3: the four pipeline rows under one
/// input type (diverse when present). Columns are the grid's n values.
inline std::vector<ReportTable> report_table(const ResultGrid& grid, TableLayout layout) {
  std::set<std::string> datasets;
  std::set<InputType> types;
  std::set<PipelineConfig> pipes;
  std::set<std::uint64_t> seeds;
  for (const auto& [k, _] : grid.cells) {
    datasets.insert(k.dataset);
    types.insert(k.input_type);
    pipes.insert(k.pipeline);
    seeds.insert(k.seed);
  }
  if (grid.cells.empty()) throw Error(ErrorCode::IncompleteGrid, "grid has no cells");

  struct Row {
    InputType type;
    PipelineConfig pipe;
    std::string label;
  };
  std::vector<Row> rows;
  std::string title;
  if (layout == TableLayout::Table1) {
    PipelineConfig pipe = pipes.contains(PipelineConfig::GenerateSelect) ? PipelineConfig::GenerateSelect
                          : pipes.contains(PipelineConfig::EnsembleSelect) ? PipelineConfig::EnsembleSelect
                                                                           : *pipes.begin();
    for (auto t : {InputType::Diverse, InputType::Random, InputType::Narrow}) {
      rows.push_back({t, pipe, std::string(input_type_name(t))});
    }
    title = "Classification accuracy by input quality (" + std::string(pipeline_label(pipe)) + ")";
  } else {
    InputType type = types.contains(InputType::Diverse) ? InputType::Diverse : *types.begin();
    for (auto p : {PipelineConfig::Base, PipelineConfig::GenerateOnly, PipelineConfig::GenerateSelect,
                   PipelineConfig::EnsembleSelect}) {
      rows.push_back({type, p, std::string(pipeline_label(p))});
    }
    title = "Classification accuracy by pipeline configuration (" +
            std::string(input_type_name(type)) + " inputs)";
  }

  std::vector<int> columns = grid.n_values;
  if (columns.empty()) {
    std::set<int> ns;
    for (const auto& [k, _] : grid.cells) ns.insert(k.n);
    columns.assign(ns.begin(), ns.end());
  }

  const auto aggs = grid.aggregates();
  std::vector<ReportTable> tables;
  for (const auto& ds : datasets) {
    ReportTable t;
    t.title = title;
    t.dataset = ds;
    t.columns = columns;
    for (const auto& row : rows) {
      t.rows.push_back(row.label);
      std::vector<Aggregate> vals;
      for (int n : columns) {
        for (auto seed : seeds) {
          if (!grid.cells.contains({ds, row.type, row.pipe, n, seed})) {
            throw Error(ErrorCode::IncompleteGrid,
                        "missing cell dataset=" + ds + " input_type=" +
                            std::string(input_type_name(row.type)) + " pipeline=" +
                            std::string(pipeline_name(row.pipe)) + " n=" + std::to_string(n) +
                            " seed=" + std::to_string(seed));
          }
        }
        vals.push_back(aggs.at({ds, row.type, row.pipe, n}));
      }
      t.values.push_back(std::move(vals));
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

}  // namespace utterancesmith
