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

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "musicduel/gate.hpp"
#include "musicduel/hashing.hpp"

namespace musicduel::gate {

std::string_view to_string(Category category) {
  switch (category) {
    case Category::kCopyright: return "COPYRIGHT";
    case Category::kCultural: return "CULTURAL";
    case Category::kExplicit: return "EXPLICIT";
  }
  return "COPYRIGHT";
}

Category category_from_string(std::string_view s) {
  std::string upper(s);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "COPYRIGHT") return Category::kCopyright;
  if (upper == "CULTURAL") return Category::kCultural;
  if (upper == "EXPLICIT") return Category::kExplicit;
  throw Error(ErrorCode::kInvalidArgument, "unknown moderation category '" + std::string(s) + "'");
}

GateResult GateResult::accept(DetailedPrompt detailed) {
  return GateResult{ModerationVerdict{true, std::nullopt, "accepted"}, std::move(detailed)};
}

GateResult GateResult::reject(Category category, std::string reason) {
  return GateResult{ModerationVerdict{false, category, std::move(reason)}, std::nullopt};
}

void to_json(json& j, const GateResult& r) {
  j = json{{"accepted", r.verdict.accepted},
           {"category", r.verdict.category ? json(to_string(*r.verdict.category)) : json(nullptr)},
           {"reason", r.verdict.reason},
           {"detailed", r.detailed ? json(*r.detailed) : json(nullptr)}};
}

namespace {

[[noreturn]] void config_error(std::size_t line, const std::string& message) {
  throw Error(ErrorCode::kConfiguration,
              "rule config line " + std::to_string(line) + ": " + message);
}

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

/// Every occurrence of `phrase` in `text` bounded by non-word characters.
std::vector<std::size_t> find_phrase(std::string_view text, std::string_view phrase) {
  std::vector<std::size_t> hits;
  if (phrase.empty()) return hits;
  for (std::size_t pos = text.find(phrase); pos != std::string_view::npos;
       pos = text.find(phrase, pos + 1)) {
    bool left = pos == 0 || !is_word_char(static_cast<unsigned char>(text[pos - 1]));
    std::size_t end = pos + phrase.size();
    bool right = end == text.size() || !is_word_char(static_cast<unsigned char>(text[end]));
    if (left && right) hits.push_back(pos);
  }
  return hits;
}

bool contains_phrase(std::string_view text, std::string_view phrase) {
  return !find_phrase(text, phrase).empty();
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
    } else {
      if (space && !out.empty()) out.push_back(' ');
      space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::string regex_escape(std::string_view s) {
  static const std::string kSpecial = R"(\^$.|?*+()[]{})";
  std::string out;
  for (char c : s) {
    if (kSpecial.find(c) != std::string::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

const std::regex kQuotedLyrics(R"(lyrics\s*:\s*\"([^\"]+)\")", std::regex::icase);
const std::regex kBlockLyrics(R"(\[lyrics\]([\s\S]*?)\[/lyrics\])", std::regex::icase);

/// The prompt with any delimited lyric block removed.
std::string without_lyric_block(const std::string& text) {
  std::string out = std::regex_replace(text, kBlockLyrics, " ");
  return std::regex_replace(out, kQuotedLyrics, " ");
}

}  // namespace

RuleConfig RuleConfig::parse(std::string_view text) {
  RuleConfig cfg;
  cfg.digest = hashing::digest128_hex(text);
  enum class Section { kNone, kDeny, kVocal, kInstrumental, kUnits };
  Section section = Section::kNone;
  std::vector<std::string>* deny = nullptr;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') config_error(line_no, "unterminated section header");
      std::string name = collapse_spaces(to_lower(line.substr(1, line.size() - 2)));
      if (name.rfind("deny ", 0) == 0) {
        Category category;
        try {
          category = category_from_string(name.substr(5));
        } catch (const Error&) {
          config_error(line_no, "unknown deny category '" + name.substr(5) + "'");
        }
        cfg.deny.emplace_back(category, std::vector<std::string>{});
        deny = &cfg.deny.back().second;
        section = Section::kDeny;
      } else if (name == "vocal") {
        section = Section::kVocal;
      } else if (name == "instrumental") {
        section = Section::kInstrumental;
      } else if (name == "units") {
        section = Section::kUnits;
      } else {
        config_error(line_no, "unknown section '" + name + "'");
      }
      continue;
    }

    if (section == Section::kNone) {
      auto eq = line.find('=');
      if (eq == std::string::npos) config_error(line_no, "expected 'key = value'");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key == "version") {
        cfg.version = value;
      } else if (key == "max_duration") {
        try {
          cfg.max_duration = std::stod(value);
        } catch (const std::exception&) {
          config_error(line_no, "max_duration is not a number");
        }
        if (!(cfg.max_duration > 0)) config_error(line_no, "max_duration must be positive");
      } else {
        config_error(line_no, "unknown key '" + key + "'");
      }
      continue;
    }

    std::string phrase = collapse_spaces(to_lower(line));
    switch (section) {
      case Section::kDeny: deny->push_back(phrase); break;
      case Section::kVocal: cfg.vocal_cues.push_back(phrase); break;
      case Section::kInstrumental: cfg.instrumental_cues.push_back(phrase); break;
      case Section::kUnits: {
        std::istringstream fields(phrase);
        std::string unit;
        double factor = 0;
        if (!(fields >> unit >> factor) || !(factor > 0)) {
          config_error(line_no, "unit lines are '<word> <seconds>'");
        }
        if (!std::all_of(unit.begin(), unit.end(), [](unsigned char c) { return std::isalpha(c); })) {
          config_error(line_no, "unit must be alphabetic");
        }
        cfg.duration_units.emplace_back(unit, factor);
        break;
      }
      case Section::kNone: break;
    }
  }

  if (cfg.version.empty()) config_error(line_no, "missing 'version'");
  if (cfg.duration_units.empty()) config_error(line_no, "no [units] defined");
  if (cfg.vocal_cues.empty()) config_error(line_no, "no [vocal] cues defined");
  // Longest unit first so "seconds" wins over "second" in the alternation.
  std::stable_sort(cfg.duration_units.begin(), cfg.duration_units.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  return cfg;
}

RuleConfig RuleConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfiguration, "cannot read rule config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

RuleConfig RuleConfig::builtin() { return parse(kBuiltinRules); }

std::optional<double> parse_duration(std::string_view text, const RuleConfig& rules) {
  std::string alternation;
  for (const auto& [unit, factor] : rules.duration_units) {
    if (!alternation.empty()) alternation += '|';
    alternation += regex_escape(unit);
  }
  // number, optional hyphen, unit word; the unit must end on a word boundary.
  const std::regex pattern("(^|[^0-9a-z.])([0-9]+(?:\\.[0-9]+)?)\\s*-?\\s*(" + alternation +
                           ")(?![a-z0-9])");
  const std::string lowered = to_lower(text);

  std::optional<double> total;
  std::size_t last_end = 0;
  double last_factor = 0;
  for (auto it = std::sregex_iterator(lowered.begin(), lowered.end(), pattern);
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    double value = std::stod(m[2].str());
    double factor = 0;
    for (const auto& [unit, f] : rules.duration_units) {
      if (unit == m[3].str()) factor = f;
    }
    auto start = static_cast<std::size_t>(m.position(2));
    if (!total) {
      total = value * factor;
    } else {
      // "1 minute 30 seconds" / "2 min and 10 sec": adjacent, finer unit.
      std::string gap = trim(lowered.substr(last_end, start - last_end));
      bool adjacent = gap.empty() || gap == "and" || gap == ",";
      if (!adjacent || factor >= last_factor) break;
      *total += value * factor;
    }
    last_end = static_cast<std::size_t>(m.position(3) + m.length(3));
    last_factor = factor;
  }
  if (total && (*total <= 0.0 || *total > rules.max_duration)) return std::nullopt;
  return total;
}

std::optional<std::string> extract_verbatim_lyrics(std::string_view text) {
  std::string s(text);
  std::smatch m;
  if (std::regex_search(s, m, kBlockLyrics) || std::regex_search(s, m, kQuotedLyrics)) {
    std::string lyrics = trim(m[1].str());
    if (!lyrics.empty()) return lyrics;
  }
  return std::nullopt;
}

GateResult rule_analyze(const Prompt& prompt, const RuleConfig& rules) {
  const std::string lowered = collapse_spaces(to_lower(prompt.text));
  for (const auto& [category, phrases] : rules.deny) {
    for (const auto& phrase : phrases) {
      if (contains_phrase(lowered, phrase)) {
        return GateResult::reject(category, "matched deny-list term '" + phrase + "'");
      }
    }
  }

  DetailedPrompt detailed;
  detailed.overall_prompt = prompt.text;
  detailed.lyrics = extract_verbatim_lyrics(prompt.text);

  std::string body = collapse_spaces(to_lower(without_lyric_block(prompt.text)));
  // Blank out negation cues first so "no vocals" does not read as a vocal cue.
  std::vector<std::string> negations = rules.instrumental_cues;
  std::stable_sort(negations.begin(), negations.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  for (const auto& cue : negations) {
    for (auto pos : find_phrase(body, cue)) body.replace(pos, cue.size(), std::string(cue.size(), ' '));
  }
  bool vocal = detailed.lyrics.has_value() ||
               std::any_of(rules.vocal_cues.begin(), rules.vocal_cues.end(),
                           [&](const std::string& cue) { return contains_phrase(body, cue); });
  detailed.instrumental = !vocal;
  detailed.duration = parse_duration(without_lyric_block(prompt.text), rules);
  return GateResult::accept(std::move(detailed));
}

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> kWords = {
      "a",     "an",    "the",  "and",   "or",    "of",     "with",  "about", "for",   "to",
      "in",    "on",    "at",   "by",    "from",  "song",   "songs", "track", "music", "called",
      "named", "that",  "this", "some",  "my",    "me",     "make",  "play",  "like",  "is",
      "are",   "very",  "lots", "lot",   "vocals", "vocal", "lyrics", "lyric", "prominent",
      "sing",  "singing", "style", "second", "seconds", "minute", "minutes", "sec", "min"};
  return kWords;
}

std::vector<std::string> content_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 3 && !stopwords().count(current) &&
        std::find(words.begin(), words.end(), current) == words.end()) {
      words.push_back(current);
    }
    current.clear();
  };
  for (unsigned char c : text) {
    if (std::isalpha(c)) current.push_back(static_cast<char>(std::tolower(c)));
    else flush();
  }
  flush();
  return words;
}

}  // namespace

std::string template_lyrics(const Prompt& prompt) {
  auto words = content_words(prompt.text);
  if (words.empty()) words = {"music"};
  auto w = [&](std::size_t i) -> const std::string& { return words[i % words.size()]; };

  std::ostringstream out;
  out << "[Verse 1]\n"
      << "Here we go with " << w(0) << " and " << w(1) << "\n"
      << "Every step we take is " << w(2) << " tonight\n"
      << "[Chorus]\n"
      << "Sing it loud, sing of " << w(0) << "\n"
      << w(1) << " and " << w(3) << ", carry on\n"
      << "[Verse 2]\n"
      << "Out beyond the " << w(4) << " we keep on moving\n"
      << "Holding on to " << w(5) << " till the dawn\n"
      << "[Chorus]\n"
      << "Sing it loud, sing of " << w(0) << "\n"
      << w(1) << " and " << w(3) << ", carry on\n"
      << "[Outro]\n"
      << w(0) << ", " << w(0) << ", carry on";
  return out.str();
}

std::string RuleAnalyzer::write_lyrics(const Prompt& prompt, const DetailedPrompt&) {
  return template_lyrics(prompt);
}

GateAudit RuleAnalyzer::audit() const { return GateAudit{"rules", rules_.version, rules_.digest}; }

}  // namespace musicduel::gate
