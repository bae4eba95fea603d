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

// Project store and REST service for the review loop:
// upload spec -> extract -> generate -> review -> train -> classify/export.
//
// One directory per project under the store root:
//   project.json     metadata plus the extraction (operations, phrases, seeds)
//   spec.yaml|json   the uploaded document
//   candidates.jsonl generated / edited candidates (rewritten on generate,
//                    appended on edit)
//   reviews.jsonl    append-only review decisions; latest per candidate wins
//   traces.json      selection traces from the last generate
//   model.json       trained classifier

#include <chrono>
#include <cstdio>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "utterancesmith/classifier.hpp"
#include "utterancesmith/dataset.hpp"
#include "utterancesmith/error.hpp"
#include "utterancesmith/generation.hpp"
#include "utterancesmith/openapi_extract.hpp"
#include "utterancesmith/selection.hpp"

namespace utterancesmith {

namespace fs = std::filesystem;

inline std::string utc_now_rfc3339() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms.count()));
  return out;
}

enum class Decision { Accepted, Rejected };

struct ReviewDecision {
  std::uint64_t candidate_id = 0;
  Decision decision = Decision::Accepted;
  std::string actor;
  std::string timestamp;
};

inline Json to_json(const ReviewDecision& d) {
  Json j;
  j["candidate_id"] = hex_id(d.candidate_id);
  j["decision"] = d.decision == Decision::Accepted ? "accepted" : "rejected";
  j["actor"] = d.actor;
  j["timestamp"] = d.timestamp;
  return j;
}

inline std::uint64_t parse_hex_id(const std::string& s) {
  if (s.empty() || s.size() > 16 ||
      s.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos) {
    throw Error(ErrorCode::UnknownCandidate, s);
  }
  return std::stoull(s, nullptr, 16);
}

inline ReviewDecision review_from_json(const Json& j) {
  ReviewDecision d;
  try {
    d.candidate_id = parse_hex_id(j.at("candidate_id").get<std::string>());
    const auto dec = j.at("decision").get<std::string>();
    if (dec == "accepted") {
      d.decision = Decision::Accepted;
    } else if (dec == "rejected") {
      d.decision = Decision::Rejected;
    } else {
      throw Error(ErrorCode::InvalidArgument, "decision must be accepted|rejected");
    }
    d.actor = j.value("actor", std::string{"anonymous"});
    d.timestamp = j.value("timestamp", std::string{});
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad review decision: ") + e.what());
  }
  return d;
}

/// Applies decisions in order: the latest decision per candidate sets its
/// status. Candidates without decisions keep their stored status.
inline void apply_reviews(std::vector<CandidateSentence>& candidates,
                          const std::vector<ReviewDecision>& reviews) {
  std::unordered_map<std::uint64_t, Decision> latest;
  for (const auto& r : reviews) latest[r.candidate_id] = r.decision;
  for (auto& c : candidates) {
    if (auto it = latest.find(c.candidate_id); it != latest.end()) {
      c.status = it->second == Decision::Accepted ? CandidateStatus::Accepted
                                                  : CandidateStatus::Rejected;
    }
  }
}

/// Training data for a project: seeds, accepted candidates, and
/// auto-selected candidates that were not rejected. `candidates` must
/// already carry their effective (reviewed) status.
inline IntentDataset trainable_examples(const std::vector<SeedUtterance>& seeds,
                                        const std::vector<CandidateSentence>& candidates) {
  IntentDataset d;
  for (const auto& s : seeds) d.examples.push_back({s.text, s.intent_id});
  for (const auto& c : candidates) {
    if (c.status == CandidateStatus::Accepted || c.status == CandidateStatus::AutoSelected) {
      d.examples.push_back({c.text, c.intent_id});
    }
  }
  return d;
}

struct Project {
  std::string project_id;
  std::string name;
  std::string spec_digest;
  std::string spec_file;
  Json operations = Json::array();
  Json phrases = Json::array();
  std::vector<SeedUtterance> seeds;
  std::string created;
  std::string updated;
};

inline Json to_json(const Project& p) {
  Json j;
  j["project_id"] = p.project_id;
  j["name"] = p.name;
  j["spec_digest"] = p.spec_digest;
  j["spec_file"] = p.spec_file;
  j["operations"] = p.operations;
  j["phrases"] = p.phrases;
  auto seeds = Json::array();
  for (const auto& s : p.seeds) seeds.push_back(to_json(s));
  j["seeds"] = std::move(seeds);
  j["created"] = p.created;
  j["updated"] = p.updated;
  return j;
}

inline Project project_from_json(const Json& j) {
  Project p;
  p.project_id = j.at("project_id").get<std::string>();
  p.name = j.at("name").get<std::string>();
  p.spec_digest = j.value("spec_digest", std::string{});
  p.spec_file = j.value("spec_file", std::string{});
  p.operations = j.value("operations", Json::array());
  p.phrases = j.value("phrases", Json::array());
  for (const auto& s : j.value("seeds", Json::array())) p.seeds.push_back(seed_from_json(s));
  p.created = j.value("created", std::string{});
  p.updated = j.value("updated", std::string{});
  return p;
}

struct GenerateRequest {
  /// Intent ids to generate for; empty = every operation.
  std::vector<std::string> operations;
  std::vector<GeneratorSpec> generators;
  SelectionConfig selection;
  /// Also persist fidelity/diversity rejects as pending.
  bool include_filtered = false;
  int parallelism = 4;
  GeneratorFn generate = run_generator;
};

struct GenerateResult {
  std::vector<CandidateSentence> selected;
  Json traces = Json::array();
  std::vector<GeneratorFailure> warnings;
  std::size_t persisted = 0;
};

/// Ensemble generation plus per-seed selection. `all_out` (optional)
/// receives what should be persisted: the selected candidates as
/// auto_selected and, with include_filtered, the rest as pending.
inline GenerateResult generate_and_select(const std::vector<SeedUtterance>& all_seeds,
                                          const GenerateRequest& req,
                                          std::vector<CandidateSentence>* all_out = nullptr) {
  std::set<std::string> wanted(req.operations.begin(), req.operations.end());
  std::vector<SeedUtterance> seeds;
  for (const auto& s : all_seeds) {
    if (wanted.empty() || wanted.contains(s.intent_id)) seeds.push_back(s);
  }
  if (seeds.empty()) throw Error(ErrorCode::NoSeeds, "no seed utterances to generate from");

  EnsembleOptions opts;
  opts.parallelism = req.parallelism;
  opts.generate = req.generate;
  auto gens = req.generators;
  if (gens.empty()) {
    GeneratorSpec g;
    g.id = "rule";
    gens.push_back(g);
  }
  auto ens = run_ensemble(seeds, gens, opts);

  GenerateResult result;
  result.warnings = ens.warnings;
  const HashingEmbedder embedder;
  for (const auto& seed : seeds) {
    std::vector<CandidateSentence> pool;
    for (const auto& c : ens.candidates) {
      if (c.intent_id == seed.intent_id && c.seed_text == seed.text) pool.push_back(c);
    }
    auto trace = select_sentences(pool, seed.text, req.selection, embedder);
    std::set<std::uint64_t> chosen;
    for (auto c : trace.selected) {
      c.status = CandidateStatus::AutoSelected;
      chosen.insert(c.candidate_id);
      if (all_out) all_out->push_back(c);
      result.selected.push_back(std::move(c));
    }
    if (req.include_filtered && all_out) {
      for (auto c : pool) {
        if (chosen.contains(c.candidate_id)) continue;
        c.status = CandidateStatus::Pending;
        all_out->push_back(std::move(c));
      }
    }
    Json t;
    t["seed_text"] = seed.text;
    t["intent_id"] = seed.intent_id;
    t["trace"] = to_json(trace);
    result.traces.push_back(std::move(t));
  }
  return result;
}

inline Json to_json(const GenerateResult& r) {
  Json out;
  Json sel = Json::array();
  for (const auto& c : r.selected) sel.push_back(to_json(c));
  out["selected"] = std::move(sel);
  out["traces"] = r.traces;
  Json warns = Json::array();
  for (const auto& w : r.warnings) {
    warns.push_back({{"generator_id", w.generator_id}, {"seed_text", w.seed_text},
                     {"code", w.code}, {"detail", w.detail}});
  }
  out["warnings"] = std::move(warns);
  return out;
}

struct ReviewCounts {
  std::size_t accepted = 0, rejected = 0, auto_selected = 0, pending = 0;
};

inline Json to_json(const ReviewCounts& c) {
  return Json{{"accepted", c.accepted},
              {"rejected", c.rejected},
              {"auto_selected", c.auto_selected},
              {"pending", c.pending}};
}

struct CandidateEdit {
  std::optional<std::uint64_t> source_candidate;
  std::string intent_id;
  std::string text;
  std::string actor;
};

/// File-backed project store. Writes within one project are serialized;
/// readers see the last committed files (whole-file writes go through a
/// temp file + rename, and the review log is append-only).
class ProjectStore {
 public:
  explicit ProjectStore(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const noexcept { return root_; }

  Project create_project(const std::string& name) {
    const auto clean = normalize_whitespace(name);
    if (clean.empty()) throw Error(ErrorCode::InvalidArgument, "project name is empty");
    Project p;
    p.name = clean;
    p.created = p.updated = utc_now_rfc3339();
    for (;;) {
      p.project_id = new_id();
      if (!fs::exists(dir(p.project_id))) break;
    }
    std::error_code ec;
    fs::create_directories(dir(p.project_id), ec);
    if (ec) throw Error(ErrorCode::StoreUnwritable, dir(p.project_id).string() + ": " + ec.message());
    write_project(p);
    return p;
  }

  Project load_project(const std::string& id) const {
    const auto file = dir(id) / "project.json";
    if (!valid_id(id) || !fs::exists(file)) throw Error(ErrorCode::ProjectNotFound, id);
    return project_from_json(Json::parse(read_file(file)));
  }

  std::vector<Project> list_projects() const {
    std::vector<Project> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root_, ec)) {
      if (fs::exists(entry.path() / "project.json")) {
        out.push_back(load_project(entry.path().filename().string()));
      }
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.project_id < b.project_id; });
    return out;
  }

  /// Extracts operations and seeds, replacing any previous extraction.
  Json ingest_spec(const std::string& id, std::string_view raw,
                   DocumentFormat format = DocumentFormat::Auto,
                   const ExtractionConfig& config = {}) {
    auto lock = writer(id);
    Project p = load_project(id);
    ParseOptions opts;
    opts.format = format;
    auto doc = parse_document(raw, opts);
    const bool json = format == DocumentFormat::Json ||
                      (format == DocumentFormat::Auto &&
                       raw.find_first_not_of(" \t\r\n") != std::string_view::npos &&
                       raw[raw.find_first_not_of(" \t\r\n")] == '{');
    auto ex = extract_seeds(std::move(doc), config);
    const auto ex_json = to_json(ex);

    p.spec_file = json ? "spec.json" : "spec.yaml";
    for (const char* old : {"spec.json", "spec.yaml"}) {
      if (p.spec_file != old) fs::remove(dir(id) / old);
    }
    write_atomic(dir(id) / p.spec_file, raw);
    p.spec_digest = ex_json["source_digest"];
    p.operations = ex_json["operations"];
    p.phrases = ex_json["phrases"];
    p.seeds = ex.seeds;
    p.updated = utc_now_rfc3339();
    write_project(p);

    Json summary;
    summary["operations"] = ex.document.operations.size();
    summary["seeds"] = ex.seeds.size();
    summary["phrases"] = {{"operation_id", ex.count(Scenario::OperationId)},
                          {"description", ex.count(Scenario::Description)},
                          {"metadata", ex.count(Scenario::Metadata)}};
    summary["warnings"] = ex.document.warnings;
    return summary;
  }

  /// Candidates with their effective status (stored status overridden by
  /// the latest review decision).
  std::vector<CandidateSentence> candidates(const std::string& id) const {
    (void)load_project(id);
    auto cands = read_candidates(id);
    apply_reviews(cands, read_reviews(id));
    return cands;
  }

  std::vector<ReviewDecision> reviews(const std::string& id) const {
    (void)load_project(id);
    return read_reviews(id);
  }

  GenerateResult generate_candidates(const std::string& id, const GenerateRequest& req) {
    auto lock = writer(id);
    const Project p = load_project(id);
    std::vector<CandidateSentence> fresh;
    GenerateResult result = generate_and_select(p.seeds, req, &fresh);

    // Keep human decisions; replace everything else that was generated.
    auto existing = read_candidates(id);
    apply_reviews(existing, read_reviews(id));
    std::vector<CandidateSentence> kept;
    std::set<std::uint64_t> ids;
    for (auto& c : existing) {
      if (c.status == CandidateStatus::Accepted || c.status == CandidateStatus::Rejected) {
        ids.insert(c.candidate_id);
        kept.push_back(std::move(c));
      }
    }
    // Stored status of kept rows is their pre-review status; reviews re-apply on read.
    auto stored = read_candidates(id);
    std::vector<CandidateSentence> out;
    for (auto& c : stored) {
      if (ids.contains(c.candidate_id)) out.push_back(std::move(c));
    }
    for (auto& c : fresh) {
      if (ids.insert(c.candidate_id).second) out.push_back(std::move(c));
    }
    result.persisted = fresh.size();
    write_candidates(id, out);
    write_atomic(dir(id) / "traces.json", result.traces.dump(2));
    touch(id);
    return result;
  }

  ReviewCounts record_review(const std::string& id, std::vector<ReviewDecision> decisions,
                             const std::vector<CandidateEdit>& edits = {}) {
    auto lock = writer(id);
    (void)load_project(id);
    auto cands = read_candidates(id);
    std::set<std::uint64_t> known;
    for (const auto& c : cands) known.insert(c.candidate_id);
    for (const auto& d : decisions) {
      if (!known.contains(d.candidate_id)) {
        throw Error(ErrorCode::UnknownCandidate, hex_id(d.candidate_id));
      }
    }
    std::set<std::string> intents;
    for (const auto& s : load_project(id).seeds) intents.insert(s.intent_id);
    for (const auto& e : edits) {
      if (!intents.contains(e.intent_id)) {
        throw Error(ErrorCode::InvalidArgument, "edit targets unknown intent " + e.intent_id);
      }
      if (normalize_whitespace(e.text).empty()) {
        throw Error(ErrorCode::EmptyText, "edited text is empty");
      }
      if (e.source_candidate && !known.contains(*e.source_candidate)) {
        throw Error(ErrorCode::UnknownCandidate, hex_id(*e.source_candidate));
      }
    }

    const auto now = utc_now_rfc3339();
    for (const auto& e : edits) {
      std::string seed_text;
      if (e.source_candidate) {
        for (const auto& c : cands) {
          if (c.candidate_id == *e.source_candidate) seed_text = c.seed_text;
        }
      }
      auto c = CandidateSentence::make(e.text, "human-edit", seed_text, e.intent_id);
      c.status = CandidateStatus::Accepted;
      if (!known.contains(c.candidate_id)) {
        append_line(dir(id) / "candidates.jsonl", to_json(c).dump());
        known.insert(c.candidate_id);
        cands.push_back(c);
      }
      decisions.push_back({c.candidate_id, Decision::Accepted, e.actor, now});
    }
    for (auto& d : decisions) {
      if (d.timestamp.empty()) d.timestamp = now;
      append_line(dir(id) / "reviews.jsonl", to_json(d).dump());
    }
    touch(id);
    apply_reviews(cands, read_reviews(id));
    return count(cands);
  }

  static ReviewCounts count(const std::vector<CandidateSentence>& cands) {
    ReviewCounts c;
    for (const auto& x : cands) {
      switch (x.status) {
        case CandidateStatus::Accepted: ++c.accepted; break;
        case CandidateStatus::Rejected: ++c.rejected; break;
        case CandidateStatus::AutoSelected: ++c.auto_selected; break;
        case CandidateStatus::Pending: ++c.pending; break;
      }
    }
    return c;
  }

  IntentDataset training_set(const std::string& id) const {
    return trainable_examples(load_project(id).seeds, candidates(id));
  }

  /// Trains on the trainable set and persists model.json. Evaluates on
  /// `held_out` when it is non-empty.
  Json train_project_model(const std::string& id, const IntentDataset& held_out = {}) {
    auto lock = writer(id);
    const auto data = training_set(id);
    const auto model = train(data);
    write_atomic(dir(id) / "model.json", to_json(model).dump());
    touch(id);
    Json summary;
    std::map<std::string, std::size_t> sizes;
    for (const auto& e : data.examples) ++sizes[e.intent_id];
    summary["intents"] = model.intent_ids().size();
    summary["training_sizes"] = sizes;
    summary["vocabulary_size"] = model.vocabulary().size();
    if (!held_out.empty()) {
      summary["evaluation"] = to_json(evaluate(model, held_out));
    }
    return summary;
  }

  ClassifierModel load_model(const std::string& id) const {
    (void)load_project(id);
    const auto file = dir(id) / "model.json";
    if (!fs::exists(file)) throw Error(ErrorCode::NoModel, "project " + id + " has no trained model");
    return model_from_json(Json::parse(read_file(file)));
  }

  /// Prediction plus the method and path of the winning operation.
  Json classify_utterance(const std::string& id, std::string_view text) const {
    if (normalize_whitespace(text).empty()) throw Error(ErrorCode::EmptyText, "empty utterance");
    const auto project = load_project(id);
    const auto model = load_model(id);
    const auto pred = model.predict(text);
    Json j = to_json(pred);
    for (const auto& op : project.operations) {
      if (op.value("intent_id", std::string{}) == pred.intent_id) {
        j["method"] = op["method"];
        j["path"] = op["path"];
        break;
      }
    }
    return j;
  }

  /// "skill": {"intents":[{"intent", "examples":[{"text"}]}]}; "csv": text,intent.
  std::string export_data(const std::string& id, std::string_view format) const {
    const auto data = training_set(id);
    if (format == "csv") return dataset_to_csv(data);
    if (format != "skill") throw Error(ErrorCode::InvalidArgument, "export format must be skill|csv");
    std::map<std::string, std::vector<std::string>> grouped;
    for (const auto& e : data.examples) grouped[e.intent_id].push_back(e.text);
    Json intents = Json::array();
    for (const auto& [intent, texts] : grouped) {
      Json examples = Json::array();
      for (const auto& t : texts) examples.push_back({{"text", t}});
      intents.push_back({{"intent", intent}, {"examples", std::move(examples)}});
    }
    return Json{{"intents", std::move(intents)}}.dump(2);
  }

  fs::path dir(const std::string& id) const { return root_ / id; }

 private:
  static bool valid_id(const std::string& id) {
    return !id.empty() && id.size() <= 64 &&
           id.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789-_") == std::string::npos;
  }

  static std::string new_id() {
    static std::mutex mu;
    static std::mt19937_64 gen{std::random_device{}() ^
                               static_cast<std::uint64_t>(
                                   std::chrono::steady_clock::now().time_since_epoch().count())};
    std::lock_guard lock(mu);
    return "p" + hex_id(gen()).substr(0, 12);
  }

  std::unique_lock<std::mutex> writer(const std::string& id) {
    std::mutex* m;
    {
      std::lock_guard lock(locks_mu_);
      auto& slot = locks_[id];
      if (!slot) slot = std::make_unique<std::mutex>();
      m = slot.get();
    }
    return std::unique_lock(*m);
  }

  void write_atomic(const fs::path& file, std::string_view content) const {
    const auto tmp = file.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::StoreUnwritable, "cannot write " + tmp);
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.flush();
      if (!out) throw Error(ErrorCode::StoreUnwritable, "short write to " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, file, ec);
    if (ec) throw Error(ErrorCode::StoreUnwritable, file.string() + ": " + ec.message());
  }

  void append_line(const fs::path& file, const std::string& line) const {
    std::ofstream out(file, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::StoreUnwritable, "cannot append to " + file.string());
    out << line << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::StoreUnwritable, "short append to " + file.string());
  }

  // Complete lines only: a torn final line (no newline yet) is ignored.
  static std::vector<Json> read_jsonl(const fs::path& file) {
    std::vector<Json> out;
    if (!fs::exists(file)) return out;
    const auto text = read_file(file);
    std::size_t start = 0;
    for (auto nl = text.find('\n'); nl != std::string::npos; nl = text.find('\n', start)) {
      auto line = std::string_view(text).substr(start, nl - start);
      start = nl + 1;
      if (normalize_whitespace(line).empty()) continue;
      out.push_back(Json::parse(line));
    }
    return out;
  }

  std::vector<CandidateSentence> read_candidates(const std::string& id) const {
    std::vector<CandidateSentence> out;
    for (const auto& j : read_jsonl(dir(id) / "candidates.jsonl")) out.push_back(candidate_from_json(j));
    return out;
  }

  std::vector<ReviewDecision> read_reviews(const std::string& id) const {
    std::vector<ReviewDecision> out;
    for (const auto& j : read_jsonl(dir(id) / "reviews.jsonl")) out.push_back(review_from_json(j));
    return out;
  }

  void write_candidates(const std::string& id, const std::vector<CandidateSentence>& cands) const {
    std::string text;
    for (const auto& c : cands) text += to_json(c).dump() + "\n";
    write_atomic(dir(id) / "candidates.jsonl", text);
  }

  void write_project(const Project& p) const {
    write_atomic(dir(p.project_id) / "project.json", to_json(p).dump(2));
  }

  void touch(const std::string& id) {
    auto p = load_project(id);
    p.updated = utc_now_rfc3339();
    write_project(p);
  }

  fs::path root_;
  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

// ---------------------------------------------------------------------------
// HTTP layer

inline int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ProjectNotFound:
    case ErrorCode::UnknownCandidate:
      return 404;
    case ErrorCode::NoModel:
    case ErrorCode::NoSeeds:
      return 409;
    case ErrorCode::MalformedDocument:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::TooFewIntents:
    case ErrorCode::EmptyIntent:
      return 422;
    case ErrorCode::AllBackendsFailed:
    case ErrorCode::BackendUnreachable:
    case ErrorCode::BackendTimeout:
    case ErrorCode::BackendStatus:
    case ErrorCode::MalformedResponse:
      return 502;
    case ErrorCode::StoreUnwritable:
    case ErrorCode::Io:
      return 500;
    default:
      return 400;
  }
}

struct ServiceOptions {
  fs::path ui_dir;  // served under "/" when it exists
  std::vector<GeneratorSpec> default_generators;
  GeneratorFn generate = run_generator;
  std::size_t idempotency_capacity = 1024;
};

/// Routes the REST API onto a ProjectStore. Mutating routes honour an
/// `X-Request-Id` header: a retried request replays the first response.
class Service {
 public:
  Service(ProjectStore& store, ServiceOptions options = {})
      : store_(store), options_(std::move(options)) {
    install_routes();
  }

  httplib::Server& server() noexcept { return server_; }

  /// Binds to `port` (0 = any free port) and returns the bound port.
  int bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host);
    return server_.bind_to_port(host, port) ? port : -1;
  }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }

 private:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static Json body_json(const httplib::Request& req) {
    if (normalize_whitespace(req.body).empty()) return Json::object();
    try {
      auto j = Json::parse(req.body);
      if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
      return j;
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("bad JSON body: ") + e.what());
    }
  }

  Handler guarded(Handler h, bool mutating) {
    return [this, h = std::move(h), mutating](const httplib::Request& req, httplib::Response& res) {
      std::string key;
      if (mutating && req.has_header("X-Request-Id")) {
        key = req.method + " " + req.path + " " + req.get_header_value("X-Request-Id");
        std::lock_guard lock(idem_mu_);
        if (auto it = idem_.find(key); it != idem_.end()) {
          res.status = it->second.first;
          res.set_content(it->second.second, "application/json");
          return;
        }
      }
      try {
        h(req, res);
      } catch (const Error& e) {
        send_json(res, http_status_for(e.code()),
                  Json{{"error", std::string(e.code_name())}, {"detail", e.detail()}});
      } catch (const std::exception& e) {
        send_json(res, 500, Json{{"error", "Internal"}, {"detail", e.what()}});
      }
      if (!key.empty()) {
        std::lock_guard lock(idem_mu_);
        if (idem_.emplace(key, std::make_pair(res.status, res.body)).second) {
          idem_order_.push_back(key);
          if (idem_order_.size() > options_.idempotency_capacity) {
            idem_.erase(idem_order_.front());
            idem_order_.pop_front();
          }
        }
      }
    };
  }

  void install_routes() {
    auto& s = server_;
    s.Post("/api/projects", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto body = body_json(req);
             const auto p = store_.create_project(body.value("name", std::string{}));
             send_json(res, 201, to_json(p));
           }, true));
    s.Get("/api/projects", guarded([this](const httplib::Request&, httplib::Response& res) {
            Json arr = Json::array();
            for (const auto& p : store_.list_projects()) {
              arr.push_back({{"project_id", p.project_id}, {"name", p.name}, {"updated", p.updated}});
            }
            send_json(res, 200, arr);
          }, false));
    s.Get(R"(/api/projects/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, to_json(store_.load_project(req.matches[1])));
          }, false));
    s.Post(R"(/api/projects/([^/]+)/spec)", guarded([this](const httplib::Request& req, httplib::Response& res) {
             DocumentFormat fmt = DocumentFormat::Auto;
             const auto f = req.get_param_value("format");
             if (f == "yaml") fmt = DocumentFormat::Yaml;
             if (f == "json") fmt = DocumentFormat::Json;
             send_json(res, 200, store_.ingest_spec(req.matches[1], req.body, fmt));
           }, true));
    s.Get(R"(/api/projects/([^/]+)/operations)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto p = store_.load_project(req.matches[1]);
            Json ops = Json::array();
            for (const auto& op : p.operations) {
              Json o = op;
              Json seeds = Json::array();
              for (const auto& sd : p.seeds) {
                if (sd.intent_id == op.value("intent_id", std::string{})) seeds.push_back(sd.text);
              }
              o["seeds"] = std::move(seeds);
              ops.push_back(std::move(o));
            }
            send_json(res, 200, ops);
          }, false));
    s.Post(R"(/api/projects/([^/]+)/generate)", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto body = body_json(req);
             GenerateRequest g;
             try {
               if (body.contains("operations")) g.operations = body["operations"].get<std::vector<std::string>>();
               if (body.contains("generators")) {
                 for (const auto& x : body["generators"]) g.generators.push_back(generator_from_json(x));
               }
               if (body.contains("selection")) g.selection = selection_config_from_json(body["selection"]);
               g.include_filtered = body.value("include_filtered", false);
             } catch (const Json::exception& e) {
               throw Error(ErrorCode::InvalidArgument, e.what());
             }
             if (g.generators.empty()) g.generators = options_.default_generators;
             g.generate = options_.generate;
             send_json(res, 200, to_json(store_.generate_candidates(req.matches[1], g)));
           }, true));
    s.Get(R"(/api/projects/([^/]+)/candidates)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto op = req.get_param_value("operation");
            const auto status = req.get_param_value("status");
            if (!status.empty() && !parse_status(status)) {
              throw Error(ErrorCode::InvalidArgument, "unknown status " + status);
            }
            Json arr = Json::array();
            for (const auto& c : store_.candidates(req.matches[1])) {
              if (!op.empty() && c.intent_id != op) continue;
              if (!status.empty() && status_name(c.status) != status) continue;
              arr.push_back(to_json(c));
            }
            send_json(res, 200, arr);
          }, false));
    s.Post(R"(/api/projects/([^/]+)/review)", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto body = body_json(req);
             std::vector<ReviewDecision> decisions;
             std::vector<CandidateEdit> edits;
             try {
               for (const auto& d : body.value("decisions", Json::array())) decisions.push_back(review_from_json(d));
               for (const auto& e : body.value("edits", Json::array())) {
                 CandidateEdit ed;
                 if (e.contains("candidate_id")) ed.source_candidate = parse_hex_id(e["candidate_id"].get<std::string>());
                 ed.intent_id = e.at("intent_id").get<std::string>();
                 ed.text = e.at("text").get<std::string>();
                 ed.actor = e.value("actor", std::string{"anonymous"});
                 edits.push_back(std::move(ed));
               }
             } catch (const Json::exception& e) {
               throw Error(ErrorCode::InvalidArgument, e.what());
             }
             send_json(res, 200, to_json(store_.record_review(req.matches[1], decisions, edits)));
           }, true));
    s.Post(R"(/api/projects/([^/]+)/train)", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto body = body_json(req);
             IntentDataset held_out;
             for (const auto& t : body.value("test", Json::array())) {
               held_out.examples.push_back({t.at("text").get<std::string>(),
                                            t.at("intent").get<std::string>()});
             }
             send_json(res, 200, store_.train_project_model(req.matches[1], held_out));
           }, true));
    s.Post(R"(/api/projects/([^/]+)/classify)", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto body = body_json(req);
             send_json(res, 200, store_.classify_utterance(req.matches[1], body.value("text", std::string{})));
           }, true));
    s.Get(R"(/api/projects/([^/]+)/export)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto fmt = req.has_param("format") ? req.get_param_value("format") : std::string("skill");
            const auto data = store_.export_data(req.matches[1], fmt);
            res.status = 200;
            res.set_content(data, fmt == "csv" ? "text/csv; charset=utf-8" : "application/json");
          }, false));
    if (!options_.ui_dir.empty() && fs::is_directory(options_.ui_dir)) {
      s.set_mount_point("/", options_.ui_dir.string());
    }
  }

  ProjectStore& store_;
  ServiceOptions options_;
  httplib::Server server_;
  std::mutex idem_mu_;
  std::map<std::string, std::pair<int, std::string>> idem_;
  std::deque<std::string> idem_order_;
};

}  // namespace utterancesmith
