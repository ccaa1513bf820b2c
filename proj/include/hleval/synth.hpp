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

#ifndef HLEVAL_SYNTH_HPP_
#define HLEVAL_SYNTH_HPP_

// Synthetic corpora with a known latent human-likeness h per dialogue.
//
// h drives both the user's behavior (through signed effect slopes) and the
// annotators' verdicts, so the whole pipeline can be checked end to end.
// All numeric generator parameters below are synthetic design values.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hleval/corpus.hpp"
#include "hleval/features.hpp"
#include "hleval/random.hpp"
#include "hleval/sampling.hpp"
#include "json.hpp"

namespace hleval {

/// Signed slopes linking h to behavior. 0 disables a link; the sign is the
/// direction in which the behavior moves as h grows.
struct EffectSlopes {
  double speech = 1.0;       // user utterance length
  double vocabulary = 1.0;   // size of the vocabulary words are drawn from
  double gaze = 1.0;         // rate of AWAY -> PARTNER shifts
  double pause = -1.0;       // switching pause before user turns
  double backchannel = 0.0;  // chance of a user backchannel per system turn
  double laugh = 0.0;        // laughs per user turn
};

struct SynthConfig {
  int n_dialogues = 69;
  double p_woz = 49.0 / 69.0;
  double duration_s = 480.0;
  double window_s = 60.0;
  double hop_s = 60.0;
  int k = kJudgmentsPerSample;
  int n_annotators = 78;
  int load_min = 50;
  int load_max = 70;
  double woz_h_mean = 0.62;
  double auto_h_mean = 0.36;
  double h_sd = 0.15;
  EffectSlopes slopes;
  /// Standard deviation of the per-sample perturbation of P(HUMAN).
  double judgment_noise = 0.1;
  bool questionnaires = true;
  /// Questionnaire items (1-based) linked to h, with slope.
  std::map<int, double> questionnaire_links{{13, 1.0}, {16, -1.0}};
  std::uint64_t seed = 1;

  void check() const {
    if (n_dialogues < 2) throw std::invalid_argument("n_dialogues must be >= 2");
    if (!(p_woz >= 0.0 && p_woz <= 1.0)) throw std::invalid_argument("p_woz outside [0, 1]");
    if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
    if (!(h_sd >= 0.0) || !(judgment_noise >= 0.0)) {
      throw std::invalid_argument("spreads must be non-negative");
    }
    for (double s : {slopes.speech, slopes.vocabulary, slopes.gaze, slopes.pause,
                     slopes.backchannel, slopes.laugh}) {
      if (!std::isfinite(s)) throw std::invalid_argument("slopes must be finite");
    }
    for (const auto& [item, slope] : questionnaire_links) {
      if (item < 1 || item > static_cast<int>(kQuestionnaireItems) || !std::isfinite(slope)) {
        throw std::invalid_argument("bad questionnaire link");
      }
    }
  }
};

inline void to_json(nlohmann::json& j, const EffectSlopes& s) {
  j = {{"speech", s.speech}, {"vocabulary", s.vocabulary}, {"gaze", s.gaze},
       {"pause", s.pause},   {"backchannel", s.backchannel}, {"laugh", s.laugh}};
}

inline void from_json(const nlohmann::json& j, EffectSlopes& s) {
  s.speech = j.value("speech", s.speech);
  s.vocabulary = j.value("vocabulary", s.vocabulary);
  s.gaze = j.value("gaze", s.gaze);
  s.pause = j.value("pause", s.pause);
  s.backchannel = j.value("backchannel", s.backchannel);
  s.laugh = j.value("laugh", s.laugh);
}

inline void to_json(nlohmann::json& j, const SynthConfig& c) {
  nlohmann::json links = nlohmann::json::object();
  for (const auto& [item, slope] : c.questionnaire_links) links[std::to_string(item)] = slope;
  j = {{"n_dialogues", c.n_dialogues},
       {"p_woz", c.p_woz},
       {"duration_s", c.duration_s},
       {"window_s", c.window_s},
       {"hop_s", c.hop_s},
       {"k", c.k},
       {"n_annotators", c.n_annotators},
       {"load_min", c.load_min},
       {"load_max", c.load_max},
       {"woz_h_mean", c.woz_h_mean},
       {"auto_h_mean", c.auto_h_mean},
       {"h_sd", c.h_sd},
       {"slopes", c.slopes},
       {"judgment_noise", c.judgment_noise},
       {"questionnaires", c.questionnaires},
       {"questionnaire_links", links},
       {"seed", c.seed}};
}

/// Missing keys keep their defaults.
inline void from_json(const nlohmann::json& j, SynthConfig& c) {
  c.n_dialogues = j.value("n_dialogues", c.n_dialogues);
  c.p_woz = j.value("p_woz", c.p_woz);
  c.duration_s = j.value("duration_s", c.duration_s);
  c.window_s = j.value("window_s", c.window_s);
  c.hop_s = j.value("hop_s", c.hop_s);
  c.k = j.value("k", c.k);
  c.n_annotators = j.value("n_annotators", c.n_annotators);
  c.load_min = j.value("load_min", c.load_min);
  c.load_max = j.value("load_max", c.load_max);
  c.woz_h_mean = j.value("woz_h_mean", c.woz_h_mean);
  c.auto_h_mean = j.value("auto_h_mean", c.auto_h_mean);
  c.h_sd = j.value("h_sd", c.h_sd);
  if (j.contains("slopes")) c.slopes = j.at("slopes").get<EffectSlopes>();
  c.judgment_noise = j.value("judgment_noise", c.judgment_noise);
  c.questionnaires = j.value("questionnaires", c.questionnaires);
  if (j.contains("questionnaire_links")) {
    c.questionnaire_links.clear();
    for (auto it = j.at("questionnaire_links").begin();
         it != j.at("questionnaire_links").end(); ++it) {
      c.questionnaire_links[std::stoi(it.key())] = it.value().get<double>();
    }
  }
  c.seed = j.value("seed", c.seed);
}

struct GroundTruth {
  std::vector<std::pair<std::string, double>> h;  // dialogue_id -> latent h
  /// Intended correlation sign per feature; 0 for features not planted.
  std::array<int, kNumFeatures> signs{};

  std::vector<Feature> planted() const {
    std::vector<Feature> out;
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      if (signs[i] != 0) out.push_back(static_cast<Feature>(i));
    }
    return out;
  }
};

/// Sidecar file: a header line naming the planted signs, then
/// `{dialogue_id, h}` per dialogue.
inline void write_ground_truth(std::ostream& os, const GroundTruth& gt,
                               std::string_view manifest_digest = {}) {
  nlohmann::ordered_json planted = nlohmann::ordered_json::object();
  for (Feature f : gt.planted()) planted[std::string(kFeatureInfo[index(f)].key)] = gt.signs[index(f)];
  nlohmann::ordered_json header = {{"record", "header"},
                                   {"format", "hleval-ground-truth"},
                                   {"version", 1}};
  if (!manifest_digest.empty()) header["manifest"] = manifest_digest;
  header["planted"] = planted;
  os << header.dump() << '\n';
  for (const auto& [id, h] : gt.h) {
    os << nlohmann::ordered_json{{"dialogue_id", id}, {"h", h}}.dump() << '\n';
  }
}

namespace detail {

inline int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

inline Ms ms_of(double seconds) {
  return Ms{static_cast<std::int64_t>(std::llround(seconds * 1000.0))};
}

// Word i of the synthetic vocabulary. Part of speech cycles so that 60% of
// the vocabulary is content words.
inline Token vocabulary_word(std::uint64_t i) {
  static constexpr std::array<Pos, 10> kCycle{Pos::kNoun,  Pos::kNoun,   Pos::kVerb,
                                              Pos::kVerb,  Pos::kAdjective, Pos::kAdverb,
                                              Pos::kOther, Pos::kOther,  Pos::kOther,
                                              Pos::kOther};
  std::ostringstream s;
  s << "w" << std::setw(4) << std::setfill('0') << i;
  return {s.str(), kCycle[i % kCycle.size()]};
}

class DialogueSynth {
 public:
  DialogueSynth(const SynthConfig& cfg, double h, Rng rng)
      : cfg_(cfg), c_(h - 0.5), rng_(std::move(rng)) {}

  void run(DialogueRecord& d) {
    d.duration = ms_of(cfg_.duration_s);
    end_ = d.duration;
    conversation(d);
    gaze(d);
  }

 private:
  double ipu_mean_s() const { return 2.5 + 2.0 * cfg_.slopes.speech * c_; }
  double vocabulary_size() const {
    return std::max(20.0, 150.0 + 240.0 * cfg_.slopes.vocabulary * c_);
  }
  double pause_mean_s() const { return 0.8 + 1.2 * cfg_.slopes.pause * c_; }
  double backchannel_p() const {
    return std::clamp(0.4 + 0.6 * cfg_.slopes.backchannel * c_, 0.0, 1.0);
  }
  double laugh_rate() const {
    return std::max(0.0, 0.15 + 0.25 * cfg_.slopes.laugh * c_);
  }

  std::vector<Token> words(double seconds, bool user) {
    std::vector<Token> out;
    const int n = std::max(1, rng_.poisson(2.5 * seconds));
    const auto vocab = static_cast<std::uint64_t>(vocabulary_size());
    for (int i = 0; i < n; ++i) {
      out.push_back(user ? vocabulary_word(rng_.below(vocab))
                         : vocabulary_word(5000 + rng_.below(50)));
    }
    return out;
  }

  void event_in(SpeakerChannel& ch, EventKind kind, Ms lo, Ms hi, Ms len) {
    if (hi - lo <= len) return;
    const Ms start = lo + Ms{static_cast<std::int64_t>(rng_.below(
                              static_cast<std::uint64_t>((hi - lo - len).count())))};
    ch.events.push_back({kind, start, start + len});
  }

  void conversation(DialogueRecord& d) {
    Ms t = ms_of(rng_.uniform(0.5, 2.0));
    for (;;) {
      // System turn.
      const Ms sys_start = t;
      const Ms sys_end = sys_start + ms_of(rng_.uniform(1.0, 2.5));
      if (sys_end > end_) break;
      d.system.segments.push_back(
          {sys_start, sys_end, words(to_seconds(sys_end - sys_start), false)});

      // Optional user backchannel inside the system turn; it must end well
      // before the earliest possible user turn start.
      const Ms bc_len = ms_of(rng_.uniform(0.2, 0.4));
      const Ms bc_lo = sys_start + Ms{100};
      const Ms bc_hi = sys_end - Ms{900};
      if (rng_.bernoulli(backchannel_p()) && bc_hi - bc_lo > bc_len) {
        const Ms s = bc_lo + Ms{static_cast<std::int64_t>(rng_.below(
                                 static_cast<std::uint64_t>((bc_hi - bc_lo - bc_len).count())))};
        d.user.segments.push_back({s, s + bc_len, {Token{"un", Pos::kOther}}});
        d.user.events.push_back({EventKind::kBackchannel, s, s + bc_len});
      }

      // User turn after a switching pause (negative = overlap).
      const double pause = rng_.clipped_normal(pause_mean_s(), 0.25, -0.4, 3.0);
      Ms u = sys_end + ms_of(pause);
      const int n_ipus = 1 + rng_.poisson(1.5);
      bool stop = false;
      Ms turn_end = u;
      for (int i = 0; i < n_ipus; ++i) {
        if (i > 0) u = turn_end + ms_of(rng_.uniform(0.15, 1.0));
        const Ms len = ms_of(rng_.clipped_normal(ipu_mean_s(), 0.6, 0.3, 8.0));
        if (u + len > end_) {
          stop = true;
          break;
        }
        UtteranceSegment seg{u, u + len, words(to_seconds(len), true)};
        for (int f = rng_.poisson(0.3); f > 0; --f) {
          event_in(d.user, EventKind::kFiller, seg.start, seg.end, Ms{300});
        }
        for (int f = rng_.poisson(0.15); f > 0; --f) {
          event_in(d.user, EventKind::kDisfluency, seg.start, seg.end, Ms{400});
        }
        for (int f = rng_.poisson(laugh_rate()); f > 0; --f) {
          event_in(d.user, EventKind::kLaugh, seg.start, seg.end, Ms{500});
        }
        d.user.segments.push_back(std::move(seg));
        turn_end = u + len;
      }
      if (stop) break;
      t = turn_end + ms_of(rng_.uniform(0.3, 0.9));
    }
    auto by_start = [](const auto& a, const auto& b) { return a.start < b.start; };
    std::stable_sort(d.user.segments.begin(), d.user.segments.end(), by_start);
    std::stable_sort(d.user.events.begin(), d.user.events.end(), by_start);
  }

  // Alternating AWAY / PARTNER runs covering the dialogue, starting AWAY.
  void gaze(DialogueRecord& d) {
    const double away_mean = std::max(0.8, 4.0 - 4.0 * cfg_.slopes.gaze * c_);
    Ms t{0};
    GazeTarget target = GazeTarget::kAway;
    while (t < end_) {
      const double mean = target == GazeTarget::kAway ? away_mean : 3.0;
      const Ms len = std::max(Ms{300}, ms_of(rng_.exponential(mean)));
      const Ms stop = std::min(end_, t + len);
      d.gaze.push_back({t, stop, target});
      t = stop;
      target = target == GazeTarget::kAway ? GazeTarget::kPartner : GazeTarget::kAway;
    }
  }

  const SynthConfig& cfg_;
  double c_;
  Rng rng_;
  Ms end_{0};
};

}  // namespace detail

/// Generates a corpus bundle (dialogues, windows, judgments) and its ground
/// truth. Throws AllocationError when the annotator pool cannot absorb the
/// judgment slots.
inline std::pair<CorpusBundle, GroundTruth> generate(const SynthConfig& cfg) {
  cfg.check();
  CorpusBundle bundle;
  GroundTruth truth;
  const auto& sl = cfg.slopes;
  truth.signs[index(Feature::kTotalUtteranceTime)] = detail::sign_of(sl.speech);
  truth.signs[index(Feature::kNumUniqueWords)] = detail::sign_of(sl.vocabulary);
  truth.signs[index(Feature::kNumUniqueContentWords)] = detail::sign_of(sl.vocabulary);
  truth.signs[index(Feature::kNumGazeShifts)] = detail::sign_of(sl.gaze);
  truth.signs[index(Feature::kAvgSwitchingPause)] = detail::sign_of(sl.pause);
  truth.signs[index(Feature::kNumBackchannels)] = detail::sign_of(sl.backchannel);
  truth.signs[index(Feature::kNumLaughs)] = detail::sign_of(sl.laugh);

  Rng rng(cfg.seed);
  const int n_woz = static_cast<int>(std::lround(cfg.p_woz * cfg.n_dialogues));
  std::vector<SystemType> types(static_cast<std::size_t>(cfg.n_dialogues),
                                SystemType::kAutonomous);
  std::fill_n(types.begin(), n_woz, SystemType::kWoz);
  rng.shuffle(types);

  const Ms window = detail::ms_of(cfg.window_s);
  const Ms hop = detail::ms_of(cfg.hop_s);
  std::map<std::string, double> h_of;
  for (int i = 0; i < cfg.n_dialogues; ++i) {
    Rng sub = Rng::substream(cfg.seed, static_cast<std::uint64_t>(i));
    DialogueRecord d;
    std::ostringstream id;
    id << "d" << std::setw(3) << std::setfill('0') << i;
    d.dialogue_id = id.str();
    d.system_type = types[static_cast<std::size_t>(i)];
    const double mean = d.system_type == SystemType::kWoz ? cfg.woz_h_mean : cfg.auto_h_mean;
    const double h = cfg.h_sd == 0.0 ? std::clamp(mean, 0.0, 1.0)
                                     : sub.clipped_normal(mean, cfg.h_sd, 0.0, 1.0);
    detail::DialogueSynth(cfg, h, std::move(sub)).run(d);

    if (cfg.questionnaires) {
      Rng qrng = Rng::substream(cfg.seed ^ 0x51ULL, static_cast<std::uint64_t>(i));
      QuestionnaireResponse q;
      for (std::size_t item = 0; item < kQuestionnaireItems; ++item) {
        auto link = cfg.questionnaire_links.find(static_cast<int>(item) + 1);
        if (link == cfg.questionnaire_links.end()) {
          q.items[item] = kQuestionnaireMin + static_cast<int>(qrng.below(
                                                  kQuestionnaireMax - kQuestionnaireMin + 1));
        } else {
          const double v = 4.0 + 6.0 * link->second * (h - 0.5) + qrng.normal(0.0, 0.8);
          q.items[item] = std::clamp(static_cast<int>(std::lround(v)), kQuestionnaireMin,
                                     kQuestionnaireMax);
        }
      }
      d.questionnaire = q;
    }

    for (auto& w : segment(d, window, hop).windows) bundle.samples.push_back(std::move(w));
    h_of[d.dialogue_id] = h;
    truth.h.emplace_back(d.dialogue_id, h);
    bundle.dialogues.push_back(std::move(d));
  }

  std::vector<std::string> sample_ids;
  for (const auto& s : bundle.samples) sample_ids.push_back(s.sample_id);
  std::vector<std::string> annotators;
  for (int a = 0; a < cfg.n_annotators; ++a) {
    std::ostringstream id;
    id << "a" << std::setw(3) << std::setfill('0') << a;
    annotators.push_back(id.str());
  }
  const Assignment assignment =
      allocate(sample_ids, annotators,
               {cfg.k, cfg.load_min, cfg.load_max, mix_seed(cfg.seed ^ 0xa110cULL)});
  std::map<std::string, std::vector<std::string>> judges;
  for (const auto& [annotator, samples] : assignment.queues) {
    for (const auto& s : samples) judges[s].push_back(annotator);
  }
  for (std::size_t s = 0; s < bundle.samples.size(); ++s) {
    const auto& sample = bundle.samples[s];
    Rng jr = Rng::substream(cfg.seed ^ 0x1d9eULL, s);
    const double p = std::clamp(
        h_of.at(sample.dialogue_id) +
            (cfg.judgment_noise > 0.0 ? jr.normal(0.0, cfg.judgment_noise) : 0.0),
        0.0, 1.0);
    for (const auto& annotator : judges[sample.sample_id]) {
      bundle.judgments.push_back({sample.sample_id, annotator,
                                  jr.bernoulli(p) ? Verdict::kHuman : Verdict::kSystem});
    }
  }
  return {std::move(bundle), std::move(truth)};
}

}  // namespace hleval

#endif  // HLEVAL_SYNTH_HPP_
