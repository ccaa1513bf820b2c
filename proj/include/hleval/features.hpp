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

#ifndef HLEVAL_FEATURES_HPP_
#define HLEVAL_FEATURES_HPP_

// Per-window user behavior features and their per-dialogue averages.
//
// Window membership is onset based: an utterance, token, event or turn
// belongs to the window containing its start time. Durations (utterance and
// gaze time) are clipped to the window instead, so they add up across a
// tiling of the dialogue.

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hleval/corpus.hpp"
#include "hleval/time.hpp"

namespace hleval {

inline constexpr std::size_t kNumFeatures = 17;

enum class Feature : std::size_t {
  kTotalUtteranceTime,
  kAvgUtteranceDuration,
  kNumUtterances,
  kNumWords,
  kNumUniqueWords,
  kNumContentWords,
  kNumUniqueContentWords,
  kNumGazeShifts,
  kTotalGazeDuration,
  kAvgGazeDuration,
  kNumTurns,
  kAvgTurnDuration,
  kAvgSwitchingPause,
  kNumBackchannels,
  kNumFillers,
  kNumLaughs,
  kNumDisfluencies,
};

constexpr std::size_t index(Feature f) { return static_cast<std::size_t>(f); }

struct FeatureInfo {
  std::string_view key;    // column name
  std::string_view label;  // report row label
  std::string_view group;
};

inline constexpr std::array<FeatureInfo, kNumFeatures> kFeatureInfo{{
    {"total_utterance_time", "Total utterance time", "Voice activity"},
    {"avg_utterance_duration", "Average utterance duration", "Voice activity"},
    {"n_utterances", "# of utterances", "Voice activity"},
    {"n_words", "# of words", "Linguistic"},
    {"n_unique_words", "# of unique words", "Linguistic"},
    {"n_content_words", "# of content words", "Linguistic"},
    {"n_unique_content_words", "# of unique content words", "Linguistic"},
    {"n_gaze_shifts", "# of gaze shifts (eye contact)", "Gaze"},
    {"total_gaze_duration", "Total gaze duration", "Gaze"},
    {"avg_gaze_duration", "Average gaze duration", "Gaze"},
    {"n_turns", "# of turns", "Dialogue"},
    {"avg_turn_duration", "Average turn duration", "Dialogue"},
    {"avg_switching_pause", "Average switching pause length", "Dialogue"},
    {"n_backchannels", "# of backchannels", "Dialogue"},
    {"n_fillers", "# of fillers", "Dialogue"},
    {"n_laughs", "# of laughs", "Dialogue"},
    {"n_disfluencies", "# of disfluencies", "Dialogue"},
}};

inline bool onset_in(Ms t, const SampleWindow& w) { return t >= w.start && t < w.end; }

// ---------------------------------------------------------------------------
// Voice activity

struct VoiceFeatures {
  Ms total_time{0};
  int n_utterances = 0;

  double avg_duration_s() const {
    return n_utterances == 0 ? 0.0 : to_seconds(total_time) / n_utterances;
  }
};

inline VoiceFeatures voice_features(const SampleWindow& window, const SpeakerChannel& user) {
  VoiceFeatures v;
  for (const auto& s : user.segments) {
    v.total_time += overlap(s.start, s.end, window.start, window.end);
    if (onset_in(s.start, window)) ++v.n_utterances;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Linguistic

struct LinguisticFeatures {
  int n_words = 0;
  int n_unique_words = 0;
  int n_content_words = 0;
  int n_unique_content_words = 0;
};

/// Word counts over the tokens of utterances starting in the window. Words
/// are unique by exact surface string.
inline LinguisticFeatures linguistic_features(const SampleWindow& window,
                                              const SpeakerChannel& user) {
  LinguisticFeatures f;
  std::unordered_set<std::string_view> words;
  std::unordered_set<std::string_view> content;
  for (const auto& s : user.segments) {
    if (!onset_in(s.start, window)) continue;
    for (const auto& t : s.tokens) {
      ++f.n_words;
      words.insert(t.surface);
      if (is_content_word(t.pos)) {
        ++f.n_content_words;
        content.insert(t.surface);
      }
    }
  }
  f.n_unique_words = static_cast<int>(words.size());
  f.n_unique_content_words = static_cast<int>(content.size());
  return f;
}

// ---------------------------------------------------------------------------
// Gaze

struct GazeFeatures {
  int n_shifts = 0;
  Ms total_partner{0};
  /// Partner gaze inside the window but no onset there: the average is
  /// reported as 0.
  bool degenerate_average = false;

  double avg_duration_s() const {
    return n_shifts == 0 ? 0.0 : to_seconds(total_partner) / n_shifts;
  }
};

/// A shift is the onset of a PARTNER interval inside the window. An interval
/// starting at time 0 has no preceding state and is not a shift.
inline GazeFeatures gaze_features(const SampleWindow& window,
                                  std::span<const GazeInterval> gaze) {
  GazeFeatures f;
  for (const auto& g : gaze) {
    if (g.target != GazeTarget::kPartner) continue;
    f.total_partner += overlap(g.start, g.end, window.start, window.end);
    if (g.start > Ms{0} && onset_in(g.start, window)) ++f.n_shifts;
  }
  f.degenerate_average = f.n_shifts == 0 && f.total_partner > Ms{0};
  return f;
}

// ---------------------------------------------------------------------------
// Turns

struct Turn {
  Speaker speaker = Speaker::kUser;
  Ms start{0};
  Ms end{0};
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct TurnConfig {
  /// Same-speaker segments separated by less than this are one unit.
  Ms merge_gap{500};
};

namespace detail {

inline bool covered_by_backchannel(const UtteranceSegment& s, const SpeakerChannel& ch) {
  return std::any_of(ch.events.begin(), ch.events.end(), [&](const EventAnnotation& e) {
    return e.kind == EventKind::kBackchannel && e.start <= s.start && s.end <= e.end;
  });
}

inline std::vector<Turn> inter_pausal_units(const SpeakerChannel& ch, Ms merge_gap) {
  std::vector<Turn> units;
  for (const auto& s : ch.segments) {
    if (covered_by_backchannel(s, ch)) continue;
    if (!units.empty() && s.start - units.back().end < merge_gap) {
      units.back().end = std::max(units.back().end, s.end);
    } else {
      units.push_back({ch.speaker, s.start, s.end});
    }
  }
  return units;
}

}  // namespace detail

/// Builds the alternating turn sequence of a dialogue. Backchannel-covered
/// segments are dropped, close segments merged into units, and consecutive
/// units of one speaker (in onset order) joined into a turn.
inline std::vector<Turn> derive_turns(const SpeakerChannel& user, const SpeakerChannel& system,
                                      const TurnConfig& config = {}) {
  std::vector<Turn> units = detail::inter_pausal_units(user, config.merge_gap);
  std::vector<Turn> sys = detail::inter_pausal_units(system, config.merge_gap);
  units.insert(units.end(), sys.begin(), sys.end());
  std::stable_sort(units.begin(), units.end(), [](const Turn& a, const Turn& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.speaker < b.speaker;
  });
  std::vector<Turn> turns;
  for (const auto& u : units) {
    if (!turns.empty() && turns.back().speaker == u.speaker) {
      turns.back().end = u.end;
    } else {
      turns.push_back(u);
    }
  }
  return turns;
}

// ---------------------------------------------------------------------------
// Dialogue behaviors

struct DialogueFeatures {
  int n_turns = 0;
  Ms total_turn_time{0};
  int n_switches = 0;
  Ms total_switching_pause{0};  // may be negative
  std::array<int, 4> event_counts{};  // indexed by EventKind

  double avg_turn_duration_s() const {
    return n_turns == 0 ? 0.0 : to_seconds(total_turn_time) / n_turns;
  }
  bool switching_pause_defined() const { return n_switches > 0; }
  /// 0 when no system-to-user switch starts in the window.
  double avg_switching_pause_s() const {
    return n_switches == 0 ? 0.0 : to_seconds(total_switching_pause) / n_switches;
  }
  int count(EventKind k) const { return event_counts[static_cast<int>(k)]; }
};

/// Turn and event statistics for user turns and events starting in the
/// window. The switching pause of a user turn is its start minus the end of
/// the system turn right before it; overlaps give negative pauses.
inline DialogueFeatures dialogue_features(const SampleWindow& window,
                                          std::span<const Turn> turns,
                                          std::span<const EventAnnotation> user_events) {
  DialogueFeatures f;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Turn& t = turns[i];
    if (t.speaker != Speaker::kUser || !onset_in(t.start, window)) continue;
    ++f.n_turns;
    f.total_turn_time += t.end - t.start;
    if (i > 0 && turns[i - 1].speaker == Speaker::kSystem) {
      ++f.n_switches;
      f.total_switching_pause += t.start - turns[i - 1].end;
    }
  }
  for (const auto& e : user_events) {
    if (onset_in(e.start, window)) ++f.event_counts[static_cast<int>(e.kind)];
  }
  return f;
}

// ---------------------------------------------------------------------------
// Assembled features

struct WindowFeatures {
  std::array<double, kNumFeatures> values{};
  bool switching_pause_defined = false;
  bool gaze_average_degenerate = false;

  double operator[](Feature f) const { return values[index(f)]; }
};

inline WindowFeatures window_features(const DialogueRecord& d, const SampleWindow& w,
                                      std::span<const Turn> turns) {
  const VoiceFeatures voice = voice_features(w, d.user);
  const LinguisticFeatures ling = linguistic_features(w, d.user);
  const GazeFeatures gaze = gaze_features(w, d.gaze);
  const DialogueFeatures dia = dialogue_features(w, turns, d.user.events);

  WindowFeatures f;
  auto& v = f.values;
  v[index(Feature::kTotalUtteranceTime)] = to_seconds(voice.total_time);
  v[index(Feature::kAvgUtteranceDuration)] = voice.avg_duration_s();
  v[index(Feature::kNumUtterances)] = voice.n_utterances;
  v[index(Feature::kNumWords)] = ling.n_words;
  v[index(Feature::kNumUniqueWords)] = ling.n_unique_words;
  v[index(Feature::kNumContentWords)] = ling.n_content_words;
  v[index(Feature::kNumUniqueContentWords)] = ling.n_unique_content_words;
  v[index(Feature::kNumGazeShifts)] = gaze.n_shifts;
  v[index(Feature::kTotalGazeDuration)] = to_seconds(gaze.total_partner);
  v[index(Feature::kAvgGazeDuration)] = gaze.avg_duration_s();
  v[index(Feature::kNumTurns)] = dia.n_turns;
  v[index(Feature::kAvgTurnDuration)] = dia.avg_turn_duration_s();
  v[index(Feature::kAvgSwitchingPause)] = dia.avg_switching_pause_s();
  v[index(Feature::kNumBackchannels)] = dia.count(EventKind::kBackchannel);
  v[index(Feature::kNumFillers)] = dia.count(EventKind::kFiller);
  v[index(Feature::kNumLaughs)] = dia.count(EventKind::kLaugh);
  v[index(Feature::kNumDisfluencies)] = dia.count(EventKind::kDisfluency);
  f.switching_pause_defined = dia.switching_pause_defined();
  f.gaze_average_degenerate = gaze.degenerate_average;
  return f;
}

/// Per-dialogue feature vector: the mean of each feature over the windows.
/// A value is NaN when it is undefined in every window (switching pause
/// only).
struct FeatureVector {
  std::string dialogue_id;
  std::array<double, kNumFeatures> values{};
  int n_windows = 0;
  int n_pause_undefined_windows = 0;
  int n_gaze_degenerate_windows = 0;

  double operator[](Feature f) const { return values[index(f)]; }
  bool missing(std::size_t i) const { return std::isnan(values[i]); }
};

inline FeatureVector dialogue_feature_vector(const DialogueRecord& d,
                                             std::span<const SampleWindow> windows,
                                             const TurnConfig& config = {}) {
  if (windows.empty()) {
    throw std::invalid_argument("dialogue " + d.dialogue_id + " has no windows");
  }
  const std::vector<Turn> turns = derive_turns(d.user, d.system, config);
  FeatureVector fv;
  fv.dialogue_id = d.dialogue_id;
  fv.n_windows = static_cast<int>(windows.size());
  std::array<double, kNumFeatures> sums{};
  int pause_windows = 0;
  for (const auto& w : windows) {
    if (w.dialogue_id != d.dialogue_id) {
      throw std::invalid_argument("window " + w.sample_id + " belongs to dialogue " +
                                  w.dialogue_id + ", not " + d.dialogue_id);
    }
    const WindowFeatures wf = window_features(d, w, turns);
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      if (i == index(Feature::kAvgSwitchingPause) && !wf.switching_pause_defined) continue;
      sums[i] += wf.values[i];
    }
    if (wf.switching_pause_defined) {
      ++pause_windows;
    } else {
      ++fv.n_pause_undefined_windows;
    }
    if (wf.gaze_average_degenerate) ++fv.n_gaze_degenerate_windows;
  }
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const int n = i == index(Feature::kAvgSwitchingPause) ? pause_windows : fv.n_windows;
    fv.values[i] = n == 0 ? std::numeric_limits<double>::quiet_NaN() : sums[i] / n;
  }
  return fv;
}

/// Feature vectors for every dialogue with at least one sample in the
/// bundle, using those samples as windows; sorted by dialogue_id.
inline std::vector<FeatureVector> extract_features(const CorpusBundle& bundle,
                                                   const TurnConfig& config = {}) {
  std::map<std::string, std::vector<SampleWindow>> windows;
  for (const auto& s : bundle.samples) windows[s.dialogue_id].push_back(s);
  std::vector<FeatureVector> out;
  for (const auto& [id, ws] : windows) {
    const DialogueRecord* d = bundle.find_dialogue(id);
    if (d == nullptr) throw std::invalid_argument("samples reference unknown dialogue " + id);
    out.push_back(dialogue_feature_vector(*d, ws, config));
  }
  return out;
}

/// Tab-separated feature table, one row per dialogue. Missing values and
/// unscored dialogues are written as NA.
inline void write_feature_table(std::ostream& os, std::span<const FeatureVector> features,
                                const CorpusBundle& bundle,
                                const std::map<std::string, double>& scores) {
  os << "dialogue_id\tsystem_type\tn_windows\thl_score";
  for (const auto& info : kFeatureInfo) os << '\t' << info.key;
  os << '\n';
  auto num = [&os](double v) {
    if (std::isnan(v)) {
      os << "NA";
    } else {
      os << std::fixed << std::setprecision(6) << v;
    }
  };
  for (const auto& fv : features) {
    const DialogueRecord* d = bundle.find_dialogue(fv.dialogue_id);
    os << fv.dialogue_id << '\t' << (d ? to_string(d->system_type) : "NA") << '\t'
       << fv.n_windows << '\t';
    auto it = scores.find(fv.dialogue_id);
    num(it == scores.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
    for (double v : fv.values) {
      os << '\t';
      num(v);
    }
    os << '\n';
  }
}

}  // namespace hleval

#endif  // HLEVAL_FEATURES_HPP_
