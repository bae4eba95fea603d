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

// Command-line front door. Data goes to `out`, diagnostics to `err`.
// Exit codes: 0 ok, 1 domain error, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "utterancesmith/classifier.hpp"
#include "utterancesmith/dataset.hpp"
#include "utterancesmith/experiment.hpp"
#include "utterancesmith/mock_backend.hpp"
#include "utterancesmith/openapi_extract.hpp"
#include "utterancesmith/sampling.hpp"
#include "utterancesmith/selection.hpp"
#include "utterancesmith/service.hpp"

namespace utterancesmith {

namespace cli_detail {

inline Json read_json_file(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::DecodeError, path + ": " + e.what());
  }
}

inline void emit(std::ostream& out, const std::string& path, const std::string& data) {
  if (path.empty()) {
    out << data;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f << data;
  if (!f) throw Error(ErrorCode::Io, "short write to " + path);
}

// Seeds: an extraction document ({"seeds": [...]}) or a bare array of seed
// objects.
inline std::vector<SeedUtterance> seeds_from(const Json& j) {
  const Json& arr = j.is_object() && j.contains("seeds") ? j["seeds"] : j;
  if (!arr.is_array()) throw Error(ErrorCode::InvalidArgument, "expected a seeds array");
  std::vector<SeedUtterance> out;
  try {
    for (const auto& s : arr) out.push_back(seed_from_json(s));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad seed: ") + e.what());
  }
  return out;
}

// Candidates: an array of candidate objects or plain strings, or an object
// holding such an array under "candidates" or "selected".
inline std::vector<CandidateSentence> candidates_from(const Json& j, const std::string& seed_text) {
  const Json* arr = &j;
  if (j.is_object()) {
    if (j.contains("candidates")) arr = &j["candidates"];
    else if (j.contains("selected")) arr = &j["selected"];
  }
  if (!arr->is_array()) throw Error(ErrorCode::InvalidArgument, "expected a candidates array");
  std::vector<CandidateSentence> out;
  try {
    for (const auto& c : *arr) {
      if (c.is_string()) {
        out.push_back(CandidateSentence::make(c.get<std::string>(), "input", seed_text, ""));
      } else {
        out.push_back(candidate_from_json(c));
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad candidate: ") + e.what());
  }
  return out;
}

inline void warn(std::ostream& err, const GeneratorFailure& w) {
  err << "warning: generator " << w.generator_id << " failed on \"" << w.seed_text
      << "\": " << w.code << ": " << w.detail << "\n";
}

inline std::string store_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("UTTERANCESMITH_STORE"); env && *env) return env;
  return "utterancesmith-store";
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"utterancesmith: intent training data from OpenAPI documents"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Fix all randomness");

  std::string out_path;

  // extract
  auto* extract = app.add_subcommand("extract", "Extract operations and seed utterances");
  std::string spec_path, seeds_out, format = "auto";
  extract->add_option("spec", spec_path, "OpenAPI document (YAML or JSON)")->required();
  extract->add_option("--seeds-out", seeds_out, "Also write the seeds array here");
  extract->add_option("--format", format, "yaml|json|auto")
      ->check(CLI::IsMember({"yaml", "json", "auto"}));
  extract->add_option("--out", out_path, "Write output to a file");

  // generate
  auto* generate = app.add_subcommand("generate", "Generate and select paraphrase candidates");
  std::string seeds_path, config_path;
  generate->add_option("seeds", seeds_path, "Seeds JSON (extract output)")->required();
  generate->add_option("--config", config_path, "Generators/selection config JSON")->required();
  generate->add_option("--out", out_path, "Write output to a file");

  // select
  auto* select = app.add_subcommand("select", "Fidelity filter plus n-gram diversity selection");
  std::string cands_path, seed_text;
  SelectionConfig sel;
  select->add_option("candidates", cands_path, "Candidates JSON")->required();
  select->add_option("--seed-text", seed_text, "The seed sentence")->required();
  select->add_option("--theta", sel.theta, "Similarity threshold");
  select->add_option("--gamma", sel.gamma, "Minimum n-gram gain");
  select->add_option("-N,--target-size", sel.target_size, "Sentences to keep");
  select->add_option("--out", out_path, "Write output to a file");

  // train
  auto* trainc = app.add_subcommand("train", "Train the intent classifier on a CSV dataset");
  std::string dataset_path;
  trainc->add_option("dataset", dataset_path, "CSV with header text,intent")->required();
  trainc->add_option("--out", out_path, "Write the model to a file");

  // evaluate
  auto* evalc = app.add_subcommand("evaluate", "Evaluate a trained model on a CSV dataset");
  std::string model_path;
  evalc->add_option("model", model_path, "Model JSON")->required();
  evalc->add_option("dataset", dataset_path, "CSV with header text,intent")->required();
  evalc->add_option("--out", out_path, "Write output to a file");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run an experiment grid");
  std::string report;
  bool report_csv = false;
  experiment->add_option("config", config_path, "Experiment config JSON")->required();
  experiment->add_option("--report", report, "table1|table3")
      ->check(CLI::IsMember({"table1", "table3"}));
  experiment->add_flag("--csv", report_csv, "Report as CSV");
  experiment->add_option("--out", out_path, "Write output to a file");

  // sample
  auto* sample = app.add_subcommand("sample", "Pick diverse/random/narrow representatives");
  std::string sentences_path;
  int n = 1;
  sample->add_option("sentences", sentences_path, "One sentence per line")->required();
  sample->add_option("-n", n, "Sentences to pick")->required()->check(CLI::PositiveNumber);
  sample->add_option("--out", out_path, "Write output to a file");

  // synth-dataset
  auto* synth = app.add_subcommand("synth-dataset", "Write the bundled synthetic dataset as CSV");
  std::string split_out;
  synth->add_option("--split-out", split_out, "Also write the split manifest");
  synth->add_option("--out", out_path, "Write the CSV to a file");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the REST service");
  int port = 8080;
  std::string host = "127.0.0.1", store_dir, ui_dir;
  serve->add_option("--port", port, "Port");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--store", store_dir, "Project store directory");
  serve->add_option("--ui", ui_dir, "Static files served under /");

  // mock-backend
  auto* mock = app.add_subcommand("mock-backend", "Run the reference paraphrase/embed backend");
  int mock_port = 8090;
  mock->add_option("--port", mock_port, "Port");
  mock->add_option("--host", host, "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.back()->help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.back()->help());
    return 2;
  }

  try {
    if (*extract) {
      ParseOptions opts;
      opts.format = format == "yaml" ? DocumentFormat::Yaml
                    : format == "json" ? DocumentFormat::Json
                                       : DocumentFormat::Auto;
      const auto ex = extract_seeds(parse_document(read_file(spec_path), opts));
      const auto j = to_json(ex);
      for (const auto& w : ex.document.warnings) err << "warning: " << w << "\n";
      if (!seeds_out.empty()) emit(out, seeds_out, j["seeds"].dump(2) + "\n");
      emit(out, out_path, j.dump(2) + "\n");
    } else if (*generate) {
      const auto seeds = seeds_from(read_json_file(seeds_path));
      const auto cfg = read_json_file(config_path);
      GenerateRequest req;
      try {
        if (cfg.contains("generators")) {
          for (const auto& g : cfg["generators"]) req.generators.push_back(generator_from_json(g));
        }
        if (cfg.contains("selection")) req.selection = selection_config_from_json(cfg["selection"]);
        if (cfg.contains("operations")) req.operations = cfg["operations"].get<std::vector<std::string>>();
        req.include_filtered = cfg.value("include_filtered", false);
        req.parallelism = cfg.value("parallelism", req.parallelism);
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad generate config: ") + e.what());
      }
      if (req.generators.empty()) req.generators = default_generators();
      if (seed) {
        for (std::size_t i = 0; i < req.generators.size(); ++i) {
          auto& g = req.generators[i];
          if (g.kind == GeneratorKind::BuiltinRule) g.params["seed_rng"] = detail::mix_seed(*seed, i, 0);
        }
      }
      validate_generators(req.generators);
      const auto r = generate_and_select(seeds, req);
      for (const auto& w : r.warnings) warn(err, w);
      emit(out, out_path, to_json(r).dump(2) + "\n");
    } else if (*select) {
      const auto cands = candidates_from(read_json_file(cands_path), seed_text);
      const auto trace = select_sentences(cands, seed_text, sel, HashingEmbedder{});
      emit(out, out_path, to_json(trace).dump(2) + "\n");
    } else if (*trainc) {
      const auto model = train(parse_dataset_csv(read_file(dataset_path)));
      emit(out, out_path, to_json(model).dump() + "\n");
    } else if (*evalc) {
      const auto model = model_from_json(read_json_file(model_path));
      const auto report_j = to_json(evaluate(model, parse_dataset_csv(read_file(dataset_path))));
      emit(out, out_path, report_j.dump(2) + "\n");
    } else if (*experiment) {
      auto cfg = experiment_config_from_json(read_json_file(config_path));
      if (seed) cfg.seeds = {*seed};
      const auto grid = run_grid(cfg);
      for (const auto& w : grid.warnings) warn(err, w);
      if (report.empty()) {
        emit(out, out_path, to_json(grid).dump(2) + "\n");
      } else {
        std::string text;
        for (const auto& t : report_table(grid, report == "table1" ? TableLayout::Table1 : TableLayout::Table3)) {
          text += report_csv ? t.csv() : t.text();
        }
        emit(out, out_path, text);
      }
    } else if (*sample) {
      const auto lines = parse_word_list(read_file(sentences_path), false);
      const auto r = sample_representatives(lines, static_cast<std::size_t>(n), seed.value_or(0), HashingEmbedder{});
      emit(out, out_path, to_json(r, lines).dump(2) + "\n");
    } else if (*synth) {
      const auto d = synthetic_dataset();
      if (!split_out.empty()) emit(out, split_out, to_json(d.split).dump(2) + "\n");
      emit(out, out_path, dataset_to_csv(d.all));
    } else if (*serve) {
      ProjectStore store(store_root(store_dir));
      std::error_code ec;
      std::filesystem::create_directories(store.root(), ec);
      if (ec) throw Error(ErrorCode::StoreUnwritable, store.root().string() + ": " + ec.message());
      ServiceOptions opts;
      opts.ui_dir = ui_dir;
      Service service(store, opts);
      const int bound = service.bind(host, port);
      if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
      err << "serving on http://" << host << ":" << bound << " (store " << store.root().string() << ")\n";
      service.listen_after_bind();
    } else if (*mock) {
      MockBackendOptions opts;
      if (seed) opts.seed_rng = *seed;
      MockBackend backend(opts);
      err << "mock backend on http://" << host << ":" << mock_port << "\n";
      if (!backend.serve(host, mock_port)) {
        throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(mock_port));
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace utterancesmith
