// Copyright 2026 The hleval Authors.
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

#ifndef HLEVAL_CORPUS_HPP_
#define HLEVAL_CORPUS_HPP_

// Corpus data model and the line-delimited corpus file format.
//
// A corpus file is UTF-8, one JSON object per line. The `record` field selects
// the kind: an optional leading `header`, then any mix of `dialogue`,
// `sample` and `judgment` records. Times are seconds with at most three
// decimals on disk and integer milliseconds in memory.

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hleval/time.hpp"
#include "json.hpp"

namespace hleval {

inline constexpr std::string_view kCorpusFormat = "hleval-corpus";
inline constexpr int kCorpusVersion = 1;
inline constexpr std::size_t kQuestionnaireItems = 19;
inline constexpr int kQuestionnaireMin = 1;
inline constexpr int kQuestionnaireMax = 7;

enum class SystemType { kAutonomous, kWoz };
enum class Speaker { kUser, kSystem };
enum class Pos { kNoun, kVerb, kAdjective, kAdverb, kConjunction, kOther };
enum class EventKind { kBackchannel, kFiller, kLaugh, kDisfluency };
enum class GazeTarget { kPartner, kAway };
enum class Verdict { kHuman, kSystem };

inline bool is_content_word(Pos pos) { return pos != Pos::kOther; }

struct Token {
  std::string surface;
  Pos pos = Pos::kOther;
  friend bool operator==(const Token&, const Token&) = default;
};

struct UtteranceSegment {
  Ms start{0};
  Ms end{0};
  std::vector<Token> tokens;

  Ms duration() const { return end - start; }
  friend bool operator==(const UtteranceSegment&, const UtteranceSegment&) = default;
};

struct EventAnnotation {
  EventKind kind = EventKind::kFiller;
  Ms start{0};
  Ms end{0};
  friend bool operator==(const EventAnnotation&, const EventAnnotation&) = default;
};

struct SpeakerChannel {
  Speaker speaker = Speaker::kUser;
  std::vector<UtteranceSegment> segments;
  std::vector<EventAnnotation> events;
  friend bool operator==(const SpeakerChannel&, const SpeakerChannel&) = default;
};

struct GazeInterval {
  Ms start{0};
  Ms end{0};
  GazeTarget target = GazeTarget::kPartner;
  friend bool operator==(const GazeInterval&, const GazeInterval&) = default;
};

struct QuestionnaireResponse {
  std::array<int, kQuestionnaireItems> items{};
  friend bool operator==(const QuestionnaireResponse&,
                         const QuestionnaireResponse&) = default;
};

struct DialogueRecord {
  std::string dialogue_id;
  SystemType system_type = SystemType::kAutonomous;
  Ms duration{0};
  SpeakerChannel user{Speaker::kUser, {}, {}};
  SpeakerChannel system{Speaker::kSystem, {}, {}};
  std::vector<GazeInterval> gaze;
  std::optional<QuestionnaireResponse> questionnaire;
  friend bool operator==(const DialogueRecord&, const DialogueRecord&) = default;
};

/// One evaluation segment of a dialogue. `clip_url` is an opaque stimulus
/// reference passed through to annotators; it is optional on disk.
struct SampleWindow {
  std::string sample_id;
  std::string dialogue_id;
  Ms start{0};
  Ms end{0};
  std::optional<std::string> clip_url;
  friend bool operator==(const SampleWindow&, const SampleWindow&) = default;
};

struct Judgment {
  std::string sample_id;
  std::string annotator_id;
  Verdict verdict = Verdict::kSystem;
  friend bool operator==(const Judgment&, const Judgment&) = default;
};

struct CorpusBundle {
  std::vector<DialogueRecord> dialogues;
  std::vector<SampleWindow> samples;
  std::vector<Judgment> judgments;

  const DialogueRecord* find_dialogue(std::string_view id) const {
    for (const auto& d : dialogues) {
      if (d.dialogue_id == id) return &d;
    }
    return nullptr;
  }
  friend bool operator==(const CorpusBundle&, const CorpusBundle&) = default;
};

// ---------------------------------------------------------------------------
// Enum spellings used on disk.

inline std::string_view to_string(SystemType v) {
  return v == SystemType::kAutonomous ? "autonomous" : "woz";
}
inline std::string_view to_string(Speaker v) {
  return v == Speaker::kUser ? "user" : "system";
}
inline std::string_view to_string(Pos v) {
  switch (v) {
    case Pos::kNoun: return "NOUN";
    case Pos::kVerb: return "VERB";
    case Pos::kAdjective: return "ADJECTIVE";
    case Pos::kAdverb: return "ADVERB";
    case Pos::kConjunction: return "CONJUNCTION";
    case Pos::kOther: return "OTHER";
  }
  return "OTHER";
}
inline std::string_view to_string(EventKind v) {
  switch (v) {
    case EventKind::kBackchannel: return "backchannel";
    case EventKind::kFiller: return "filler";
    case EventKind::kLaugh: return "laugh";
    case EventKind::kDisfluency: return "disfluency";
  }
  return "filler";
}
inline std::string_view to_string(GazeTarget v) {
  return v == GazeTarget::kPartner ? "partner" : "away";
}
inline std::string_view to_string(Verdict v) {
  return v == Verdict::kHuman ? "human" : "system";
}

inline std::optional<SystemType> parse_system_type(std::string_view s) {
  if (s == "autonomous") return SystemType::kAutonomous;
  if (s == "woz") return SystemType::kWoz;
  return std::nullopt;
}
inline std::optional<Pos> parse_pos(std::string_view s) {
  if (s == "NOUN") return Pos::kNoun;
  if (s == "VERB") return Pos::kVerb;
  if (s == "ADJECTIVE") return Pos::kAdjective;
  if (s == "ADVERB") return Pos::kAdverb;
  if (s == "CONJUNCTION") return Pos::kConjunction;
  if (s == "OTHER") return Pos::kOther;
  return std::nullopt;
}
inline std::optional<EventKind> parse_event_kind(std::string_view s) {
  if (s == "backchannel") return EventKind::kBackchannel;
  if (s == "filler") return EventKind::kFiller;
  if (s == "laugh") return EventKind::kLaugh;
  if (s == "disfluency") return EventKind::kDisfluency;
  return std::nullopt;
}
inline std::optional<GazeTarget> parse_gaze_target(std::string_view s) {
  if (s == "partner") return GazeTarget::kPartner;
  if (s == "away") return GazeTarget::kAway;
  return std::nullopt;
}
inline std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "human") return Verdict::kHuman;
  if (s == "system") return Verdict::kSystem;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parsing

/// Decode failure. `line()` is 1-based; `field()` is a dotted path into the
/// record, empty when the line is not valid JSON at all.
class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::size_t line, std::string field, const std::string& what)
      : std::runtime_error(format(line, field, what)),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(std::size_t line, const std::string& field,
                            const std::string& what) {
    std::string msg = "line " + std::to_string(line);
    if (!field.empty()) msg += ", field '" + field + "'";
    return msg + ": " + what;
  }

  std::size_t line_;
  std::string field_;
};

namespace detail {

using Json = nlohmann::json;

// Reads fields of one JSON object, tracking which keys were consumed so that
// unexpected keys can be rejected.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::size_t line, std::string path)
      : obj_(obj), line_(line), path_(std::move(path)) {
    if (!obj_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(std::string_view key, const std::string& what) const {
    throw CorpusError(line_, join(key), what);
  }

  std::string join(std::string_view key) const {
    if (key.empty()) return path_;
    if (path_.empty()) return std::string(key);
    return path_ + "." + std::string(key);
  }

  bool has(std::string_view key) const { return obj_.contains(key); }

  const Json& get(std::string_view key) {
    auto it = obj_.find(key);
    if (it == obj_.end()) fail(key, "missing required field");
    seen_.insert(std::string(key));
    return *it;
  }

  std::string string(std::string_view key, bool allow_empty = false) {
    const Json& v = get(key);
    if (!v.is_string()) fail(key, "expected a string");
    auto s = v.get<std::string>();
    if (s.empty() && !allow_empty) fail(key, "must not be empty");
    return s;
  }

  Ms seconds(std::string_view key) {
    const Json& v = get(key);
    if (!v.is_number()) fail(key, "expected a number of seconds");
    auto ms = seconds_to_ms(v.get<double>());
    if (!ms) fail(key, "seconds must be finite with at most 3 decimals");
    if (ms->count() < 0) fail(key, "time must be non-negative");
    return *ms;
  }

  const Json& array(std::string_view key) {
    const Json& v = get(key);
    if (!v.is_array()) fail(key, "expected an array");
    return v;
  }

  template <typename E>
  E enumeration(std::string_view key, std::optional<E> (*decode)(std::string_view)) {
    const std::string s = string(key);
    auto e = decode(s);
    if (!e) fail(key, "unknown value \"" + s + "\"");
    return *e;
  }

  void reject_unknown() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
    }
  }

  std::size_t line() const { return line_; }
  std::string index_path(std::string_view key, std::size_t i) const {
    return join(key) + "[" + std::to_string(i) + "]";
  }

 private:
  const Json& obj_;
  std::size_t line_;
  std::string path_;
  std::set<std::string> seen_;
};

inline SpeakerChannel read_channel(const Json& obj, std::size_t line,
                                   const std::string& path, Speaker speaker) {
  ObjectReader r(obj, line, path);
  SpeakerChannel ch;
  ch.speaker = speaker;
  if (r.has("gaze")) {
    r.fail("gaze", "gaze is recorded for the user only, at dialogue level");
  }
  const Json& segs = r.array("segments");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    ObjectReader s(segs[i], line, r.index_path("segments", i));
    UtteranceSegment seg;
    seg.start = s.seconds("start_s");
    seg.end = s.seconds("end_s");
    const Json& toks = s.array("tokens");
    for (std::size_t j = 0; j < toks.size(); ++j) {
      ObjectReader t(toks[j], line, s.index_path("tokens", j));
      Token tok;
      tok.surface = t.string("surface");
      tok.pos = t.enumeration<Pos>("pos", &parse_pos);
      t.reject_unknown();
      seg.tokens.push_back(std::move(tok));
    }
    s.reject_unknown();
    ch.segments.push_back(std::move(seg));
  }
  const Json& events = r.array("events");
  for (std::size_t i = 0; i < events.size(); ++i) {
    ObjectReader e(events[i], line, r.index_path("events", i));
    EventAnnotation ev;
    ev.kind = e.enumeration<EventKind>("kind", &parse_event_kind);
    ev.start = e.seconds("start_s");
    ev.end = e.seconds("end_s");
    e.reject_unknown();
    ch.events.push_back(ev);
  }
  r.reject_unknown();
  return ch;
}

inline DialogueRecord read_dialogue(ObjectReader& r) {
  DialogueRecord d;
  d.dialogue_id = r.string("dialogue_id");
  d.system_type = r.enumeration<SystemType>("system_type", &parse_system_type);
  d.duration = r.seconds("duration_s");
  d.user = read_channel(r.get("user"), r.line(), "user", Speaker::kUser);
  d.system = read_channel(r.get("system"), r.line(), "system", Speaker::kSystem);
  const Json& gaze = r.array("gaze");
  for (std::size_t i = 0; i < gaze.size(); ++i) {
    ObjectReader g(gaze[i], r.line(), r.index_path("gaze", i));
    GazeInterval gi;
    gi.start = g.seconds("start_s");
    gi.end = g.seconds("end_s");
    gi.target = g.enumeration<GazeTarget>("target", &parse_gaze_target);
    g.reject_unknown();
    d.gaze.push_back(gi);
  }
  if (r.has("questionnaire")) {
    const Json& q = r.get("questionnaire");
    if (!q.is_null()) {
      if (!q.is_array() || q.size() != kQuestionnaireItems) {
        r.fail("questionnaire", "expected an array of 19 integers");
      }
      QuestionnaireResponse resp;
      for (std::size_t i = 0; i < kQuestionnaireItems; ++i) {
        if (!q[i].is_number_integer()) {
          r.fail("questionnaire[" + std::to_string(i) + "]", "expected an integer");
        }
        resp.items[i] = q[i].get<int>();
      }
      d.questionnaire = resp;
    }
  }
  return d;
}

}  // namespace detail

/// Decodes a corpus stream. Performs field-level checks only; cross-record
/// consistency is reported by validate().
inline CorpusBundle parse_corpus(std::istream& in) {
  CorpusBundle bundle;
  std::set<std::string> dialogue_ids;
  std::string text;
  std::size_t line_no = 0;
  bool any_record = false;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;

    detail::Json obj;
    try {
      obj = detail::Json::parse(text);
    } catch (const detail::Json::parse_error& e) {
      throw CorpusError(line_no, "", std::string("malformed JSON: ") + e.what());
    }
    detail::ObjectReader r(obj, line_no, "");
    const std::string kind = r.string("record");
    if (kind == "header") {
      if (any_record) r.fail("record", "header must be the first record");
      if (r.string("format") != kCorpusFormat) r.fail("format", "not a corpus file");
      const auto& version = r.get("version");
      if (!version.is_number_integer() || version.get<int>() != kCorpusVersion) {
        r.fail("version", "unsupported corpus version");
      }
      if (r.has("manifest")) r.string("manifest");
    } else if (kind == "dialogue") {
      DialogueRecord d = detail::read_dialogue(r);
      if (!dialogue_ids.insert(d.dialogue_id).second) {
        r.fail("dialogue_id", "duplicate dialogue_id \"" + d.dialogue_id + "\"");
      }
      bundle.dialogues.push_back(std::move(d));
    } else if (kind == "sample") {
      SampleWindow s;
      s.sample_id = r.string("sample_id");
      s.dialogue_id = r.string("dialogue_id");
      s.start = r.seconds("start_s");
      s.end = r.seconds("end_s");
      if (r.has("clip_url")) s.clip_url = r.string("clip_url");
      bundle.samples.push_back(std::move(s));
    } else if (kind == "judgment") {
      Judgment j;
      j.sample_id = r.string("sample_id");
      j.annotator_id = r.string("annotator_id");
      j.verdict = r.enumeration<Verdict>("judgment", &parse_verdict);
      bundle.judgments.push_back(std::move(j));
    } else {
      r.fail("record", "unknown value \"" + kind + "\"");
    }
    r.reject_unknown();
    any_record = true;
  }
  return bundle;
}

inline CorpusBundle parse_corpus(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in);
}

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  kNonPositiveDuration,  // dialogue duration or segment/gaze length <= 0
  kOutOfRange,           // a time outside [0, duration]
  kUnsorted,
  kOverlap,
  kGazeNotMaximal,       // touching gaze intervals with the same target
  kSpeakerMismatch,
  kQuestionnaireRange,
  kWindowLength,         // sample end <= start
  kDuplicateId,
  kDanglingRef,
};

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kNonPositiveDuration: return "NONPOSITIVE_DURATION";
    case ViolationKind::kOutOfRange: return "OUT_OF_RANGE";
    case ViolationKind::kUnsorted: return "UNSORTED";
    case ViolationKind::kOverlap: return "OVERLAP";
    case ViolationKind::kGazeNotMaximal: return "GAZE_NOT_MAXIMAL";
    case ViolationKind::kSpeakerMismatch: return "SPEAKER_MISMATCH";
    case ViolationKind::kQuestionnaireRange: return "QUESTIONNAIRE_RANGE";
    case ViolationKind::kWindowLength: return "WINDOW_LENGTH";
    case ViolationKind::kDuplicateId: return "DUPLICATE_ID";
    case ViolationKind::kDanglingRef: return "DANGLING_REF";
  }
  return "UNKNOWN";
}

struct Violation {
  ViolationKind kind;
  std::string record_id;  // dialogue, sample or "sample/annotator" id
  std::string where;      // e.g. "user.segments[3]"
  std::string message;

  std::string describe() const {
    std::string s = std::string(to_string(kind)) + " " + record_id;
    if (!where.empty()) s += " " + where;
    return s + ": " + message;
  }
};

namespace detail {

inline void check_segments(const DialogueRecord& d, const SpeakerChannel& ch,
                           std::string_view name, std::vector<Violation>& out) {
  const std::string base(name);
  for (std::size_t i = 0; i < ch.segments.size(); ++i) {
    const auto& s = ch.segments[i];
    const std::string where = base + ".segments[" + std::to_string(i) + "]";
    if (s.end <= s.start) {
      out.push_back({ViolationKind::kNonPositiveDuration, d.dialogue_id, where,
                     "segment end must be after start"});
    }
    if (s.start < Ms{0} || s.end > d.duration) {
      out.push_back({ViolationKind::kOutOfRange, d.dialogue_id, where,
                     "segment lies outside the dialogue"});
    }
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      if (s.tokens[t].surface.empty()) {
        out.push_back({ViolationKind::kOutOfRange, d.dialogue_id,
                       where + ".tokens[" + std::to_string(t) + "]",
                       "empty token surface"});
      }
    }
    if (i > 0) {
      const auto& prev = ch.segments[i - 1];
      if (s.start < prev.start) {
        out.push_back({ViolationKind::kUnsorted, d.dialogue_id, where,
                       "segments not sorted by start (indices " +
                           std::to_string(i - 1) + ", " + std::to_string(i) + ")"});
      } else if (s.start < prev.end) {
        out.push_back({ViolationKind::kOverlap, d.dialogue_id, where,
                       "segments " + std::to_string(i - 1) + " and " +
                           std::to_string(i) + " overlap"});
      }
    }
  }
  for (std::size_t i = 0; i < ch.events.size(); ++i) {
    const auto& e = ch.events[i];
    const std::string where = base + ".events[" + std::to_string(i) + "]";
    if (e.end < e.start) {
      out.push_back({ViolationKind::kNonPositiveDuration, d.dialogue_id, where,
                     "event end before start"});
    }
    if (e.start < Ms{0} || e.end > d.duration) {
      out.push_back({ViolationKind::kOutOfRange, d.dialogue_id, where,
                     "event lies outside the dialogue"});
    }
  }
}

inline void check_dialogue(const DialogueRecord& d, std::vector<Violation>& out) {
  if (d.duration <= Ms{0}) {
    out.push_back({ViolationKind::kNonPositiveDuration, d.dialogue_id, "duration_s",
                   "dialogue duration must be positive"});
  }
  if (d.user.speaker != Speaker::kUser) {
    out.push_back({ViolationKind::kSpeakerMismatch, d.dialogue_id, "user",
                   "user channel carries the wrong speaker"});
  }
  if (d.system.speaker != Speaker::kSystem) {
    out.push_back({ViolationKind::kSpeakerMismatch, d.dialogue_id, "system",
                   "system channel carries the wrong speaker"});
  }
  check_segments(d, d.user, "user", out);
  check_segments(d, d.system, "system", out);

  for (std::size_t i = 0; i < d.gaze.size(); ++i) {
    const auto& g = d.gaze[i];
    const std::string where = "gaze[" + std::to_string(i) + "]";
    if (g.end <= g.start) {
      out.push_back({ViolationKind::kNonPositiveDuration, d.dialogue_id, where,
                     "gaze interval end must be after start"});
    }
    if (g.start < Ms{0} || g.end > d.duration) {
      out.push_back({ViolationKind::kOutOfRange, d.dialogue_id, where,
                     "gaze interval lies outside the dialogue"});
    }
    if (i > 0) {
      const auto& prev = d.gaze[i - 1];
      if (g.start < prev.start) {
        out.push_back({ViolationKind::kUnsorted, d.dialogue_id, where,
                       "gaze intervals not sorted"});
      } else if (g.start < prev.end) {
        out.push_back({ViolationKind::kOverlap, d.dialogue_id, where,
                       "gaze intervals " + std::to_string(i - 1) + " and " +
                           std::to_string(i) + " overlap"});
      } else if (g.start == prev.end && g.target == prev.target) {
        out.push_back({ViolationKind::kGazeNotMaximal, d.dialogue_id, where,
                       "touching gaze intervals share a target"});
      }
    }
  }
  if (d.questionnaire) {
    for (std::size_t i = 0; i < kQuestionnaireItems; ++i) {
      const int v = d.questionnaire->items[i];
      if (v < kQuestionnaireMin || v > kQuestionnaireMax) {
        out.push_back({ViolationKind::kQuestionnaireRange, d.dialogue_id,
                       "questionnaire[" + std::to_string(i) + "]",
                       "rating " + std::to_string(v) + " outside [1, 7]"});
      }
    }
  }
}

}  // namespace detail

/// Returns every invariant violation in the bundle; empty means valid.
inline std::vector<Violation> validate(const CorpusBundle& bundle) {
  std::vector<Violation> out;
  std::map<std::string, const DialogueRecord*> dialogues;
  for (const auto& d : bundle.dialogues) {
    if (!dialogues.emplace(d.dialogue_id, &d).second) {
      out.push_back({ViolationKind::kDuplicateId, d.dialogue_id, "",
                     "duplicate dialogue_id"});
    }
    detail::check_dialogue(d, out);
  }

  std::set<std::string> sample_ids;
  for (const auto& s : bundle.samples) {
    if (!sample_ids.insert(s.sample_id).second) {
      out.push_back({ViolationKind::kDuplicateId, s.sample_id, "",
                     "duplicate sample_id"});
    }
    if (s.end <= s.start) {
      out.push_back({ViolationKind::kWindowLength, s.sample_id, "",
                     "sample end must be after start"});
    }
    auto it = dialogues.find(s.dialogue_id);
    if (it == dialogues.end()) {
      out.push_back({ViolationKind::kDanglingRef, s.sample_id, "dialogue_id",
                     "unknown dialogue \"" + s.dialogue_id + "\""});
    } else if (s.start < Ms{0} || s.end > it->second->duration) {
      out.push_back({ViolationKind::kOutOfRange, s.sample_id, "",
                     "sample window lies outside its dialogue"});
    }
  }

  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& j : bundle.judgments) {
    const std::string id = j.sample_id + "/" + j.annotator_id;
    if (!sample_ids.count(j.sample_id)) {
      out.push_back({ViolationKind::kDanglingRef, id, "sample_id",
                     "unknown sample \"" + j.sample_id + "\""});
    }
    if (!pairs.emplace(j.sample_id, j.annotator_id).second) {
      out.push_back({ViolationKind::kDuplicateId, id, "",
                     "annotator judged this sample more than once"});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

using OJson = nlohmann::ordered_json;

inline OJson channel_json(const SpeakerChannel& ch) {
  OJson segs = OJson::array();
  for (const auto& s : ch.segments) {
    OJson toks = OJson::array();
    for (const auto& t : s.tokens) {
      toks.push_back({{"surface", t.surface}, {"pos", to_string(t.pos)}});
    }
    segs.push_back({{"start_s", to_seconds(s.start)},
                    {"end_s", to_seconds(s.end)},
                    {"tokens", std::move(toks)}});
  }
  OJson events = OJson::array();
  for (const auto& e : ch.events) {
    events.push_back({{"kind", to_string(e.kind)},
                      {"start_s", to_seconds(e.start)},
                      {"end_s", to_seconds(e.end)}});
  }
  return {{"segments", std::move(segs)}, {"events", std::move(events)}};
}

}  // namespace detail

inline std::string header_line(std::string_view manifest_digest = {}) {
  detail::OJson h = {{"record", "header"},
                     {"format", kCorpusFormat},
                     {"version", kCorpusVersion}};
  if (!manifest_digest.empty()) h["manifest"] = manifest_digest;
  return h.dump();
}

inline std::string judgment_line(const Judgment& j) {
  detail::OJson o = {{"record", "judgment"},
                     {"sample_id", j.sample_id},
                     {"annotator_id", j.annotator_id},
                     {"judgment", to_string(j.verdict)}};
  return o.dump();
}

inline std::string sample_line(const SampleWindow& s) {
  detail::OJson o = {{"record", "sample"},
                     {"sample_id", s.sample_id},
                     {"dialogue_id", s.dialogue_id},
                     {"start_s", to_seconds(s.start)},
                     {"end_s", to_seconds(s.end)}};
  if (s.clip_url) o["clip_url"] = *s.clip_url;
  return o.dump();
}

inline std::string dialogue_line(const DialogueRecord& d) {
  detail::OJson gaze = detail::OJson::array();
  for (const auto& g : d.gaze) {
    gaze.push_back({{"start_s", to_seconds(g.start)},
                    {"end_s", to_seconds(g.end)},
                    {"target", to_string(g.target)}});
  }
  detail::OJson o = {{"record", "dialogue"},
                     {"dialogue_id", d.dialogue_id},
                     {"system_type", to_string(d.system_type)},
                     {"duration_s", to_seconds(d.duration)},
                     {"user", detail::channel_json(d.user)},
                     {"system", detail::channel_json(d.system)},
                     {"gaze", std::move(gaze)}};
  if (d.questionnaire) o["questionnaire"] = d.questionnaire->items;
  return o.dump();
}

/// Writes a header line followed by dialogues, samples and judgments in
/// bundle order.
inline void serialize(const CorpusBundle& bundle, std::ostream& out,
                      std::string_view manifest_digest = {}) {
  out << header_line(manifest_digest) << '\n';
  for (const auto& d : bundle.dialogues) out << dialogue_line(d) << '\n';
  for (const auto& s : bundle.samples) out << sample_line(s) << '\n';
  for (const auto& j : bundle.judgments) out << judgment_line(j) << '\n';
}

inline std::string serialize(const CorpusBundle& bundle,
                             std::string_view manifest_digest = {}) {
  std::ostringstream out;
  serialize(bundle, out, manifest_digest);
  return out.str();
}

}  // namespace hleval

#endif  // HLEVAL_CORPUS_HPP_
