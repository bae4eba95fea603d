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

// OpenAPI / Swagger ingestion and intent seed extraction.
//
// Three extraction routes run per operation:
//   * OperationId - split the identifier and take the first lexicon verb;
//   * Description - find a verb + object phrase in summary/description text;
//   * Metadata    - example utterances from an extension field, used as-is.

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "utterancesmith/builtin_data.hpp"
#include "utterancesmith/error.hpp"
#include "utterancesmith/textcore.hpp"

namespace utterancesmith {

// ---------------------------------------------------------------------------
// Word lists

/// Parses a one-entry-per-line list. `#` starts a comment; entries are
/// trimmed and lowercased; blank lines are skipped.
inline std::vector<std::string> parse_word_list(std::string_view text,
                                                bool lower = true) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    auto entry = normalize_whitespace(line);
    if (entry.empty()) continue;
    out.push_back(lower ? lowercase(entry) : entry);
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class VerbLexicon {
 public:
  VerbLexicon() = default;
  explicit VerbLexicon(const std::vector<std::string>& verbs)
      : verbs_(verbs.begin(), verbs.end()) {}

  static const VerbLexicon& builtin() {
    static const VerbLexicon lex(parse_word_list(builtin_data::kVerbs));
    return lex;
  }

  /// Base form of `token` if it is a lexicon verb, accepting third-person
  /// singular inflections (-s, -es, -ies).
  std::optional<std::string> match(std::string_view token) const {
    std::string t(token);
    if (verbs_.contains(t)) return t;
    if (t.size() > 3 && t.ends_with("ies")) {
      auto base = t.substr(0, t.size() - 3) + "y";
      if (verbs_.contains(base)) return base;
    }
    if (t.size() > 2 && t.ends_with("es")) {
      auto base = t.substr(0, t.size() - 2);
      if (verbs_.contains(base)) return base;
    }
    if (t.size() > 1 && t.ends_with('s')) {
      auto base = t.substr(0, t.size() - 1);
      if (verbs_.contains(base)) return base;
    }
    return std::nullopt;
  }

  bool contains(std::string_view verb) const {
    return verbs_.contains(std::string(verb));
  }
  std::size_t size() const noexcept { return verbs_.size(); }

 private:
  std::unordered_set<std::string> verbs_;
};

using StopwordSet = std::unordered_set<std::string>;

inline const StopwordSet& builtin_stopwords() {
  static const StopwordSet words = [] {
    auto list = parse_word_list(builtin_data::kStopwords);
    return StopwordSet(list.begin(), list.end());
  }();
  return words;
}

inline const std::vector<std::string>& builtin_templates() {
  static const std::vector<std::string> templates =
      parse_word_list(builtin_data::kTemplates);
  return templates;
}

// ---------------------------------------------------------------------------
// Document model

enum class HttpMethod { Get, Post, Put, Patch, Delete };

constexpr std::string_view method_name(HttpMethod m) noexcept {
  switch (m) {
    case HttpMethod::Get: return "GET";
    case HttpMethod::Post: return "POST";
    case HttpMethod::Put: return "PUT";
    case HttpMethod::Patch: return "PATCH";
    case HttpMethod::Delete: return "DELETE";
  }
  return "GET";
}

inline std::optional<HttpMethod> parse_method(std::string_view key) {
  const auto k = lowercase(key);
  if (k == "get") return HttpMethod::Get;
  if (k == "post") return HttpMethod::Post;
  if (k == "put") return HttpMethod::Put;
  if (k == "patch") return HttpMethod::Patch;
  if (k == "delete") return HttpMethod::Delete;
  return std::nullopt;
}

struct ApiOperation {
  std::string path;
  HttpMethod method = HttpMethod::Get;
  std::optional<std::string> operation_id;
  std::optional<std::string> summary;
  std::optional<std::string> description;
  std::vector<std::string> example_utterances;
  std::vector<std::string> tags;

  /// One intent per operation: lowercased "method:path".
  std::string intent_id() const {
    return lowercase(std::string(method_name(method)) + ":" + path);
  }
};

struct ApiDocument {
  std::string version;
  std::string title;
  std::vector<ApiOperation> operations;
  std::uint64_t source_digest = 0;
  std::vector<std::string> warnings;
};

enum class DocumentFormat { Yaml, Json, Auto };

struct ParseOptions {
  DocumentFormat format = DocumentFormat::Auto;
  std::string example_key = "x-example-utterances";
};

namespace detail {

inline nlohmann::ordered_json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Map: {
      auto obj = nlohmann::ordered_json::object();
      for (const auto& kv : node) {
        obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      }
      return obj;
    }
    case YAML::NodeType::Sequence: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Scalar:
      return node.Scalar();
    default:
      return nullptr;
  }
}

inline std::optional<std::string> text_field(const nlohmann::ordered_json& obj,
                                             const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (it->is_string()) {
    auto s = normalize_whitespace(it->get<std::string>());
    if (!s.empty()) return s;
    return std::nullopt;
  }
  if (it->is_number()) return it->dump();
  return std::nullopt;
}

inline std::vector<std::string> string_list(const nlohmann::ordered_json& obj,
                                            const std::string& key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end()) return out;
  auto take = [&](const nlohmann::ordered_json& v) {
    if (!v.is_string()) return;
    auto s = normalize_whitespace(v.get<std::string>());
    if (!s.empty()) out.push_back(std::move(s));
  };
  if (it->is_array()) {
    for (const auto& v : *it) take(v);
  } else {
    take(*it);
  }
  return out;
}

}  // namespace detail

/// Parses an OpenAPI 3.x or Swagger 2.0 document (YAML or JSON). Only the
/// fields needed for intent extraction are kept.
inline ApiDocument parse_document(std::string_view raw,
                                  const ParseOptions& options = {}) {
  if (!utf8::valid(raw)) {
    throw Error(ErrorCode::DecodeError, "document is not valid UTF-8");
  }
  DocumentFormat format = options.format;
  if (format == DocumentFormat::Auto) {
    auto first = raw.find_first_not_of(" \t\r\n");
    if (raw.substr(0, 3) == "\xEF\xBB\xBF") first = 3;
    format = (first != std::string_view::npos && raw[first] == '{')
                 ? DocumentFormat::Json
                 : DocumentFormat::Yaml;
  }

  nlohmann::ordered_json root;
  try {
    if (format == DocumentFormat::Json) {
      root = nlohmann::ordered_json::parse(raw);
    } else {
      root = detail::yaml_to_json(YAML::Load(std::string(raw)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::DecodeError, e.what());
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::DecodeError, e.what());
  }

  if (!root.is_object()) {
    throw Error(ErrorCode::MalformedDocument, "top level is not a mapping");
  }
  ApiDocument doc;
  doc.source_digest = fnv1a64(raw);
  if (auto v = detail::text_field(root, "openapi")) {
    doc.version = *v;
  } else if (auto s = detail::text_field(root, "swagger")) {
    doc.version = *s;
  } else {
    throw Error(ErrorCode::UnsupportedVersion,
                "no 'openapi' or 'swagger' version key");
  }
  if (auto info = root.find("info"); info != root.end() && info->is_object()) {
    doc.title = detail::text_field(*info, "title").value_or("");
  }
  auto paths = root.find("paths");
  if (paths == root.end() || !paths->is_object()) {
    throw Error(ErrorCode::MalformedDocument, "missing 'paths' mapping");
  }

  static const std::unordered_set<std::string> kOtherMethods = {
      "head", "options", "trace", "connect"};
  for (const auto& [path, item] : paths->items()) {
    if (path.empty() || !item.is_object()) continue;
    for (const auto& [key, op] : item.items()) {
      auto method = parse_method(key);
      if (!method) {
        if (kOtherMethods.contains(lowercase(key))) {
          doc.warnings.push_back("skipping unsupported method " + key +
                                 " on " + path);
        }
        continue;
      }
      if (!op.is_object()) continue;
      ApiOperation operation;
      operation.path = path;
      operation.method = *method;
      operation.operation_id = detail::text_field(op, "operationId");
      operation.summary = detail::text_field(op, "summary");
      operation.description = detail::text_field(op, "description");
      operation.example_utterances =
          detail::string_list(op, options.example_key);
      operation.tags = detail::string_list(op, "tags");
      doc.operations.push_back(std::move(operation));
    }
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Action phrases

enum class Scenario { OperationId, Description, Metadata };

constexpr std::string_view scenario_name(Scenario s) noexcept {
  switch (s) {
    case Scenario::OperationId: return "operation_id";
    case Scenario::Description: return "description";
    case Scenario::Metadata: return "metadata";
  }
  return "operation_id";
}

struct ActionPhrase {
  std::string verb;
  std::vector<std::string> object;
  Scenario scenario = Scenario::OperationId;
  /// Index into ApiDocument::operations.
  std::size_t source_operation = 0;
  /// Verbatim utterance for metadata phrases.
  std::string utterance;

  std::string object_text() const { return join(object); }
  friend bool operator==(const ActionPhrase&, const ActionPhrase&) = default;
};

struct SeedUtterance {
  std::string text;
  std::optional<ActionPhrase> phrase;
  std::string intent_id;
};

/// Splits an identifier on '_', '-', digit/letter boundaries and camel
/// case. A run of capitals followed by a lowercase letter splits before
/// its last capital ("HTTPServer" -> "http", "server").
inline std::vector<std::string> split_identifier(std::string_view identifier) {
  if (normalize_whitespace(identifier).empty()) {
    throw Error(ErrorCode::EmptyIdentifier, "empty identifier");
  }
  enum class Kind { Upper, Lower, Digit, Other, Sep };
  auto kind_of = [](char32_t c) {
    if (c == '_' || c == '-' || c < 0x80 && is_space(static_cast<char>(c))) {
      return Kind::Sep;
    }
    if (c >= 'A' && c <= 'Z') return Kind::Upper;
    if (c >= '0' && c <= '9') return Kind::Digit;
    if (is_alnum(c)) return to_lower(c) != c ? Kind::Upper : Kind::Lower;
    return Kind::Sep;
  };
  const auto cps = utf8::decode(identifier);
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(lowercase(current));
    current.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const Kind k = kind_of(cps[i]);
    if (k == Kind::Sep) {
      flush();
      continue;
    }
    if (!current.empty()) {
      const Kind prev = kind_of(cps[i - 1]);
      const bool digit_edge = (prev == Kind::Digit) != (k == Kind::Digit);
      const bool camel = prev == Kind::Lower && k == Kind::Upper;
      const bool acronym_end = prev == Kind::Upper && k == Kind::Upper &&
                               i + 1 < cps.size() &&
                               kind_of(cps[i + 1]) == Kind::Lower;
      if (digit_edge || camel || acronym_end) flush();
    }
    utf8::append(current, cps[i]);
  }
  flush();
  if (tokens.empty()) {
    throw Error(ErrorCode::EmptyIdentifier,
                "identifier has no word characters");
  }
  return tokens;
}

/// Verb = first lexicon token; object = the tokens after it minus stopwords.
inline std::optional<ActionPhrase> phrase_from_identifier(
    std::span<const std::string> tokens, const VerbLexicon& lexicon,
    const StopwordSet& stopwords = builtin_stopwords()) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto verb = lexicon.match(tokens[i]);
    if (!verb) continue;
    ActionPhrase phrase;
    phrase.verb = *verb;
    phrase.scenario = Scenario::OperationId;
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      if (!stopwords.contains(tokens[j])) phrase.object.push_back(tokens[j]);
    }
    return phrase;
  }
  return std::nullopt;
}

namespace detail {

inline const std::unordered_set<std::string>& auxiliaries() {
  static const std::unordered_set<std::string> words = {
      "is",  "are", "was",   "were", "be",   "been", "being", "am",
      "has", "have", "had",  "the",  "a",    "an",   "this",  "that",
      "these", "those", "my", "your", "its", "our",  "their", "each",
      "every"};
  return words;
}

inline const std::unordered_set<std::string>& phrase_boundaries() {
  static const std::unordered_set<std::string> words = {
      "of",    "by",     "for",   "to",      "in",     "on",     "at",
      "with",  "from",   "into",  "about",   "as",     "via",    "per",
      "using", "under",  "over",  "after",   "before", "between",
      "within", "without", "and", "or",      "but",    "nor",    "than",
      "then",  "if",     "when",  "where",   "which",  "who",    "whose"};
  return words;
}

inline const std::unordered_set<std::string>& conjunctions() {
  static const std::unordered_set<std::string> words = {"and", "or", "nor",
                                                         "but"};
  return words;
}

struct Word {
  std::string token;
  bool ends_clause = false;  // trailing punctuation such as , . ; :
};

inline std::vector<Word> words_of(std::string_view sentence) {
  std::vector<Word> out;
  for (auto raw : split_whitespace(sentence)) {
    auto token = strip_token(raw);
    const bool stops = !raw.empty() && std::string_view(",.;:!?)").find(
                                           raw.back()) != std::string_view::npos;
    if (token.empty()) {
      if (!out.empty()) out.back().ends_clause = true;
      continue;
    }
    out.push_back({std::move(token), stops});
  }
  return out;
}

}  // namespace detail

/// Lightweight stand-in for dependency parsing. Takes the earliest lexicon
/// verb not directly preceded by an auxiliary or determiner, then the
/// first run of content words after it. Coordinated verbs ("retrieve and
/// delete a record") share the object.
inline std::optional<ActionPhrase> phrase_from_text(
    std::string_view sentence, const VerbLexicon& lexicon,
    const StopwordSet& stopwords = builtin_stopwords()) {
  const auto words = detail::words_of(sentence);
  const auto& aux = detail::auxiliaries();
  const auto& bounds = detail::phrase_boundaries();
  const auto& conj = detail::conjunctions();
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto verb = lexicon.match(words[i].token);
    if (!verb) continue;
    if (i > 0 && aux.contains(words[i - 1].token)) continue;

    ActionPhrase phrase;
    phrase.verb = *verb;
    phrase.scenario = Scenario::Description;
    std::size_t j = i + 1;
    bool clause_closed = words[i].ends_clause;
    // Skip determiners and coordinated verbs ahead of the object.
    while (!clause_closed && j < words.size()) {
      const auto& t = words[j].token;
      const bool skippable =
          conj.contains(t) || lexicon.match(t).has_value() ||
          (stopwords.contains(t) && !bounds.contains(t));
      if (!skippable) break;
      clause_closed = words[j].ends_clause;
      ++j;
    }
    while (!clause_closed && j < words.size()) {
      const auto& t = words[j].token;
      if (bounds.contains(t) || stopwords.contains(t)) break;
      phrase.object.push_back(t);
      clause_closed = words[j].ends_clause;
      ++j;
    }
    return phrase;
  }
  return std::nullopt;
}

/// Metadata utterances bypass phrase structure; the phrase keeps the
/// verbatim text.
inline ActionPhrase phrase_from_metadata(std::string_view utterance) {
  ActionPhrase phrase;
  phrase.scenario = Scenario::Metadata;
  phrase.utterance = normalize_whitespace(utterance);
  auto tokens = tokenize(utterance);
  if (!tokens.empty()) {
    phrase.verb = tokens[0];
    phrase.object.assign(tokens.tokens.begin() + 1, tokens.tokens.end());
  }
  return phrase;
}

/// Instantiates every template with the phrase. An empty object collapses
/// "the {object}"; duplicate realizations are dropped keeping the first.
inline std::vector<std::string> realize_sentences(
    const ActionPhrase& phrase, std::span<const std::string> templates) {
  if (phrase.scenario == Scenario::Metadata) {
    if (phrase.utterance.empty()) return {};
    return {phrase.utterance};
  }
  if (templates.empty()) {
    throw Error(ErrorCode::EmptyTemplateSet, "no seed templates");
  }
  if (phrase.verb.empty()) {
    throw Error(ErrorCode::InvalidArgument, "phrase has an empty verb");
  }
  auto replace_all = [](std::string s, std::string_view from,
                        std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos;
         pos = s.find(from, pos + to.size())) {
      s.replace(pos, from.size(), to);
    }
    return s;
  };
  const std::string object = phrase.object_text();
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& tmpl : templates) {
    std::string s = tmpl;
    if (object.empty()) s = replace_all(s, "the {object}", "");
    s = replace_all(s, "{object}", object);
    s = replace_all(s, "{verb}", phrase.verb);
    s = normalize_whitespace(s);
    if (!s.empty() && seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<SeedUtterance> realize_seed_sentences(
    const ActionPhrase& phrase, std::span<const std::string> templates,
    const std::string& intent_id) {
  std::vector<SeedUtterance> out;
  for (auto& text : realize_sentences(phrase, templates)) {
    out.push_back({std::move(text), phrase, intent_id});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole-document extraction

struct ExtractionConfig {
  VerbLexicon verbs = VerbLexicon::builtin();
  StopwordSet stopwords = builtin_stopwords();
  std::vector<std::string> templates = builtin_templates();
};

struct Extraction {
  ApiDocument document;
  std::vector<ActionPhrase> phrases;
  std::vector<SeedUtterance> seeds;

  std::size_t count(Scenario s) const {
    std::size_t n = 0;
    for (const auto& p : phrases) n += p.scenario == s;
    return n;
  }
};

/// Runs the three extraction routes over every operation. Seeds are
/// deduplicated per operation, first occurrence wins.
inline Extraction extract_seeds(ApiDocument document,
                                const ExtractionConfig& config = {}) {
  Extraction ex;
  for (std::size_t op_index = 0; op_index < document.operations.size();
       ++op_index) {
    const auto& op = document.operations[op_index];
    std::vector<ActionPhrase> phrases;
    if (op.operation_id) {
      try {
        auto tokens = split_identifier(*op.operation_id);
        if (auto p = phrase_from_identifier(tokens, config.verbs,
                                            config.stopwords)) {
          phrases.push_back(std::move(*p));
        }
      } catch (const Error&) {
        // identifier without word characters: nothing to mine
      }
    }
    for (const auto* text : {&op.summary, &op.description}) {
      if (!*text) continue;
      if (auto p = phrase_from_text(**text, config.verbs, config.stopwords)) {
        phrases.push_back(std::move(*p));
      }
    }
    for (const auto& utt : op.example_utterances) {
      phrases.push_back(phrase_from_metadata(utt));
    }

    const std::string intent = op.intent_id();
    std::unordered_set<std::string> seen;
    for (auto& p : phrases) {
      p.source_operation = op_index;
      for (auto& seed : realize_seed_sentences(p, config.templates, intent)) {
        if (seen.insert(seed.text).second) ex.seeds.push_back(std::move(seed));
      }
      ex.phrases.push_back(std::move(p));
    }
  }
  ex.document = std::move(document);
  return ex;
}

// ---------------------------------------------------------------------------
// JSON forms

inline nlohmann::ordered_json to_json(const ActionPhrase& p) {
  nlohmann::ordered_json j;
  j["verb"] = p.verb;
  j["object"] = p.object;
  j["scenario"] = std::string(scenario_name(p.scenario));
  j["source_operation"] = p.source_operation;
  if (p.scenario == Scenario::Metadata) j["utterance"] = p.utterance;
  return j;
}

inline nlohmann::ordered_json to_json(const ApiOperation& op) {
  nlohmann::ordered_json j;
  j["path"] = op.path;
  j["method"] = std::string(method_name(op.method));
  j["intent_id"] = op.intent_id();
  j["operation_id"] = op.operation_id ? nlohmann::ordered_json(*op.operation_id)
                                      : nlohmann::ordered_json(nullptr);
  j["summary"] = op.summary ? nlohmann::ordered_json(*op.summary)
                            : nlohmann::ordered_json(nullptr);
  j["description"] = op.description ? nlohmann::ordered_json(*op.description)
                                    : nlohmann::ordered_json(nullptr);
  j["example_utterances"] = op.example_utterances;
  j["tags"] = op.tags;
  return j;
}

inline nlohmann::ordered_json to_json(const SeedUtterance& s) {
  nlohmann::ordered_json j;
  j["text"] = s.text;
  j["intent_id"] = s.intent_id;
  if (s.phrase) {
    j["phrase"] = to_json(*s.phrase);
  } else {
    j["phrase"] = nullptr;
  }
  return j;
}

inline nlohmann::ordered_json to_json(const Extraction& ex) {
  nlohmann::ordered_json j;
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx",
                static_cast<unsigned long long>(ex.document.source_digest));
  j["version"] = ex.document.version;
  j["title"] = ex.document.title;
  j["source_digest"] = digest;
  auto ops = nlohmann::ordered_json::array();
  for (const auto& op : ex.document.operations) ops.push_back(to_json(op));
  j["operations"] = std::move(ops);
  auto phrases = nlohmann::ordered_json::array();
  for (const auto& p : ex.phrases) phrases.push_back(to_json(p));
  j["phrases"] = std::move(phrases);
  auto seeds = nlohmann::ordered_json::array();
  for (const auto& s : ex.seeds) seeds.push_back(to_json(s));
  j["seeds"] = std::move(seeds);
  j["warnings"] = ex.document.warnings;
  return j;
}

inline ActionPhrase phrase_from_json(const nlohmann::ordered_json& j) {
  ActionPhrase p;
  p.verb = j.at("verb").get<std::string>();
  p.object = j.at("object").get<std::vector<std::string>>();
  const auto sc = j.at("scenario").get<std::string>();
  p.scenario = sc == "metadata"      ? Scenario::Metadata
               : sc == "description" ? Scenario::Description
                                     : Scenario::OperationId;
  p.source_operation = j.value("source_operation", std::size_t{0});
  p.utterance = j.value("utterance", std::string{});
  return p;
}

inline SeedUtterance seed_from_json(const nlohmann::ordered_json& j) {
  SeedUtterance s;
  s.text = j.at("text").get<std::string>();
  s.intent_id = j.at("intent_id").get<std::string>();
  if (auto it = j.find("phrase"); it != j.end() && it->is_object()) {
    s.phrase = phrase_from_json(*it);
  }
  return s;
}

}  // namespace utterancesmith
