// Copyright 2026 The musicduel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Prompt moderation and structured extraction. Two analyzer backends: a
// deterministic rule engine and a remote LLM service.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "musicduel/domain.hpp"

namespace musicduel::gate {

enum class Category { kCopyright, kCultural, kExplicit };

std::string_view to_string(Category category);
Category category_from_string(std::string_view s);

struct ModerationVerdict {
  bool accepted = false;
  std::optional<Category> category;  // present iff !accepted
  std::string reason;
  bool operator==(const ModerationVerdict&) const = default;
};

struct GateResult {
  ModerationVerdict verdict;
  std::optional<DetailedPrompt> detailed;  // present iff verdict.accepted
  bool operator==(const GateResult&) const = default;

  static GateResult accept(DetailedPrompt detailed);
  static GateResult reject(Category category, std::string reason);
};

void to_json(json& j, const GateResult& r);

class AnalyzerBackend {
 public:
  virtual ~AnalyzerBackend() = default;

  /// Throws Error(kGateUnavailable) when the backend cannot answer.
  virtual GateResult analyze(const Prompt& prompt) = 0;
  virtual std::string write_lyrics(const Prompt& prompt, const DetailedPrompt& detailed) = 0;
  /// Backend name plus the version/digest of its configuration, logged per battle.
  virtual GateAudit audit() const = 0;
};

/// Rule engine configuration, loaded from a versioned text file:
///
///   version = 2026.1
///   max_duration = 600
///   [deny copyright]      one phrase per line (also: cultural, explicit)
///   [vocal]               cues implying vocals
///   [instrumental]        negation cues ("no vocals")
///   [units]               "<unit word> <seconds per unit>"
///
/// Blank lines and '#' comments are ignored. Phrases match case-insensitively
/// on word boundaries.
struct RuleConfig {
  std::string version;
  double max_duration = kMaxDurationSeconds;
  std::vector<std::pair<Category, std::vector<std::string>>> deny;
  std::vector<std::string> vocal_cues;
  std::vector<std::string> instrumental_cues;
  std::vector<std::pair<std::string, double>> duration_units;
  std::string digest;  // of the source text

  /// Throws Error(kConfiguration) on malformed input.
  static RuleConfig parse(std::string_view text);
  static RuleConfig load(const std::filesystem::path& path);
  /// The configuration shipped in config/rules.conf, compiled in.
  static RuleConfig builtin();
};

extern const char* const kBuiltinRules;

/// Pure function of (prompt, rules).
GateResult rule_analyze(const Prompt& prompt, const RuleConfig& rules);

/// Explicit "<number> <unit>" durations only; never guesses.
std::optional<double> parse_duration(std::string_view text, const RuleConfig& rules);

/// Verbatim lyrics from a delimited block (`lyrics: "..."` or
/// `[lyrics]...[/lyrics]`), if any.
std::optional<std::string> extract_verbatim_lyrics(std::string_view text);

/// Deterministic verse/chorus scaffold built from the prompt's content words.
std::string template_lyrics(const Prompt& prompt);

class RuleAnalyzer final : public AnalyzerBackend {
 public:
  explicit RuleAnalyzer(RuleConfig rules) : rules_(std::move(rules)) {}

  GateResult analyze(const Prompt& prompt) override { return rule_analyze(prompt, rules_); }
  std::string write_lyrics(const Prompt& prompt, const DetailedPrompt& detailed) override;
  GateAudit audit() const override;

  const RuleConfig& rules() const { return rules_; }

 private:
  RuleConfig rules_;
};

struct RemoteAnalyzerConfig {
  std::string base_url;  // e.g. "http://127.0.0.1:9000"
  std::string analyze_path = "/v1/analyze";
  std::string lyrics_path = "/v1/lyrics";
  std::string instruction_template;
  std::string template_version = "1";
  std::chrono::milliseconds timeout{15000};
  int retries = 1;
};

/// Instruction template for the remote backend (config/llm_template.txt).
extern const char* const kDefaultInstructionTemplate;

/// Talks to an LLM-backed analysis service. Nondeterministic by nature;
/// fails closed with kGateUnavailable on timeout, transport error, or a
/// malformed reply.
class RemoteAnalyzer final : public AnalyzerBackend {
 public:
  explicit RemoteAnalyzer(RemoteAnalyzerConfig config);

  GateResult analyze(const Prompt& prompt) override;
  std::string write_lyrics(const Prompt& prompt, const DetailedPrompt& detailed) override;
  GateAudit audit() const override;

 private:
  json call(const std::string& path, const json& body) const;

  RemoteAnalyzerConfig config_;
  std::string template_digest_;
};

/// Moderates and extracts structure. Never accepts on backend failure;
/// an inconsistent backend answer is treated as a failure.
/// Throws Error(kGateUnavailable).
GateResult gate(const Prompt& prompt, AnalyzerBackend& backend,
                double max_duration = kMaxDurationSeconds);

/// Lyrics for systems that need explicit lyric conditioning. Verbatim user
/// lyrics win; otherwise the backend writes them. Throws kInvalidArgument
/// for instrumental prompts and kGateUnavailable on backend failure.
std::string provision_lyrics(const Prompt& prompt, const DetailedPrompt& detailed,
                             AnalyzerBackend& backend);

}  // namespace musicduel::gate
