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

#ifndef HLEVAL_TESTS_SUPPORT_HPP_
#define HLEVAL_TESTS_SUPPORT_HPP_

// Fixture builders shared by the test binaries.

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "hleval/corpus.hpp"
#include "hleval/random.hpp"
#include "hleval/synth.hpp"

namespace hleval::testing {

inline UtteranceSegment seg(std::int64_t start_ms, std::int64_t end_ms,
                            std::vector<Token> tokens = {}) {
  return {Ms{start_ms}, Ms{end_ms}, std::move(tokens)};
}

inline Token tok(std::string surface, Pos pos = Pos::kNoun) { return {std::move(surface), pos}; }

inline EventAnnotation ev(EventKind kind, std::int64_t start_ms, std::int64_t end_ms) {
  return {kind, Ms{start_ms}, Ms{end_ms}};
}

inline GazeInterval gz(std::int64_t start_ms, std::int64_t end_ms, GazeTarget target) {
  return {Ms{start_ms}, Ms{end_ms}, target};
}

inline SampleWindow window(const std::string& dialogue, std::int64_t start_ms,
                           std::int64_t end_ms, int index = 0) {
  return {dialogue + "#" + std::to_string(index), dialogue, Ms{start_ms}, Ms{end_ms},
          std::nullopt};
}

inline DialogueRecord empty_dialogue(const std::string& id, std::int64_t duration_ms) {
  DialogueRecord d;
  d.dialogue_id = id;
  d.duration = Ms{duration_ms};
  return d;
}

/// Non-overlapping sorted intervals in [lo, hi), with gaps of at least
/// `min_gap` ms. Lengths are drawn in [min_len, max_len].
inline std::vector<std::pair<std::int64_t, std::int64_t>> random_intervals(
    Rng& rng, std::int64_t lo, std::int64_t hi, int count, std::int64_t min_len,
    std::int64_t max_len, std::int64_t min_gap) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  std::int64_t t = lo + static_cast<std::int64_t>(rng.below(3000));
  for (int i = 0; i < count; ++i) {
    const auto len = min_len + static_cast<std::int64_t>(rng.below(max_len - min_len + 1));
    if (t + len > hi) break;
    out.emplace_back(t, t + len);
    t += len + min_gap + static_cast<std::int64_t>(rng.below(4000));
  }
  return out;
}

/// A random valid dialogue of at most `max_ms`, with at most 20 segments,
/// overlapping speakers, backchannels, events and gaze with gaps.
inline DialogueRecord random_dialogue(Rng& rng, const std::string& id,
                                      std::int64_t max_ms = 120'000) {
  static const std::vector<std::string> kWords{"ano", "sou", "kyou", "hon", "ii",
                                               "eki", "mada", "totemo", "un"};
  DialogueRecord d = empty_dialogue(id, 20'000 + static_cast<std::int64_t>(
                                                     rng.below(max_ms - 20'000 + 1)));
  d.system_type = rng.bernoulli(0.5) ? SystemType::kWoz : SystemType::kAutonomous;
  const auto dur = d.duration.count();

  auto words = [&](int n) {
    std::vector<Token> ts;
    for (int i = 0; i < n; ++i) {
      ts.push_back({kWords[rng.below(kWords.size())],
                    static_cast<Pos>(rng.below(6))});
    }
    return ts;
  };
  for (auto [s, e] : random_intervals(rng, 0, dur, 1 + rng.below(10), 100, 6000,
                                      rng.bernoulli(0.3) ? 0 : 50)) {
    d.user.segments.push_back(seg(s, e, words(static_cast<int>(rng.below(6)))));
    if (rng.bernoulli(0.2)) d.user.events.push_back(ev(EventKind::kBackchannel, s, e));
  }
  for (auto [s, e] : random_intervals(rng, 0, dur, 1 + rng.below(10), 200, 7000, 0)) {
    d.system.segments.push_back(seg(s, e, words(2)));
  }
  const int n_events = static_cast<int>(rng.below(8));
  for (int i = 0; i < n_events; ++i) {
    const auto s = static_cast<std::int64_t>(rng.below(dur));
    const auto e = std::min<std::int64_t>(dur, s + static_cast<std::int64_t>(rng.below(800)));
    d.user.events.push_back(ev(static_cast<EventKind>(rng.below(4)), s, e));
  }
  std::sort(d.user.events.begin(), d.user.events.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });

  std::int64_t t = rng.bernoulli(0.5) ? 0 : static_cast<std::int64_t>(rng.below(2000));
  auto target = rng.bernoulli(0.5) ? GazeTarget::kPartner : GazeTarget::kAway;
  while (t < dur) {
    const auto e = std::min<std::int64_t>(dur, t + 200 + static_cast<std::int64_t>(
                                                           rng.below(7000)));
    d.gaze.push_back(gz(t, e, target));
    if (rng.bernoulli(0.25)) {
      t = e + 1 + static_cast<std::int64_t>(rng.below(1500));
      if (rng.bernoulli(0.5)) continue;  // same target may follow a gap
    } else {
      t = e;
    }
    target = target == GazeTarget::kPartner ? GazeTarget::kAway : GazeTarget::kPartner;
  }
  if (rng.bernoulli(0.5)) {
    QuestionnaireResponse q;
    for (auto& item : q.items) item = 1 + static_cast<int>(rng.below(7));
    d.questionnaire = q;
  }
  return d;
}

/// Small synthetic configuration that keeps test runtime low.
inline SynthConfig small_synth(std::uint64_t seed, int n_dialogues = 12) {
  SynthConfig cfg;
  cfg.n_dialogues = n_dialogues;
  cfg.n_annotators = 20;
  cfg.load_min = 0;
  cfg.seed = seed;
  return cfg;
}

/// Fresh empty directory under the system temp path, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("hleval-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace hleval::testing

#endif  // HLEVAL_TESTS_SUPPORT_HPP_
