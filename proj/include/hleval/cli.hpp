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

#ifndef HLEVAL_CLI_HPP_
#define HLEVAL_CLI_HPP_

// The `hleval` command line. run() is the whole program; main() only
// forwards to it, so tests can invoke subcommands in-process.
//
// Exit codes: 0 success, 1 data or validation failure, 2 usage error,
// 3 internal error.

#include <openssl/evp.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hleval/annotation_service.hpp"
#include "hleval/corpus.hpp"
#include "hleval/features.hpp"
#include "hleval/http_service.hpp"
#include "hleval/loocv.hpp"
#include "hleval/sampling.hpp"
#include "hleval/statistics.hpp"
#include "hleval/svr.hpp"
#include "hleval/synth.hpp"
#include "json.hpp"

namespace hleval::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kDataError = 1, kUsageError = 2, kInternalError = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return os.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Options {
  std::string corpus;
  std::string out = "out";
  double window_s = 60.0;
  std::optional<double> hop_s;
  int k = kJudgmentsPerSample;
  int load_min = 50;
  int load_max = 70;
  int n_annotators = 78;
  double svr_c = 1.0;
  double svr_eps = 0.05;
  double svr_gamma = 0.0;
  std::string kernel = "rbf";
  double highlight_r = kDefaultHighlightR;
  std::optional<std::uint64_t> seed;
  int merge_gap_ms = 500;
  std::string synth_config;
  std::optional<int> n_dialogues;
  std::optional<double> noise;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string state_dir = "annotation-state";
  std::string clip_base = "clips/";
};

/// Output directory with a manifest; every artifact written through it
/// starts with a version header carrying the manifest digest.
class ArtifactWriter {
 public:
  ArtifactWriter(const std::filesystem::path& dir, const std::string& subcommand,
                 nlohmann::ordered_json config, const std::vector<std::string>& inputs)
      : dir_(dir) {
    std::filesystem::create_directories(dir_);
    nlohmann::ordered_json in = nlohmann::ordered_json::array();
    for (const auto& path : inputs) {
      in.push_back({{"path", path}, {"sha256", sha256_hex(read_file(path))}});
    }
    nlohmann::ordered_json manifest = {{"tool", "hleval"},
                                       {"version", kToolVersion},
                                       {"subcommand", subcommand},
                                       {"config", std::move(config)},
                                       {"inputs", std::move(in)}};
    const std::string text = manifest.dump(2) + "\n";
    digest_ = "sha256:" + sha256_hex(text);
    write_raw("manifest.json", text);
  }

  const std::string& digest() const { return digest_; }
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  /// Text or TSV artifact: `# hleval <name> v1 manifest=<digest>` first.
  void write_text(const std::string& name, const std::string& body) const {
    write_raw(name, "# hleval " + name + " v1 manifest=" + digest_ + "\n" + body);
  }

  /// JSON-lines artifact with a header record first.
  void write_jsonl(const std::string& name, const std::string& format,
                   const std::vector<nlohmann::ordered_json>& rows) const {
    nlohmann::ordered_json header = {{"record", "header"},
                                     {"format", format},
                                     {"version", 1},
                                     {"manifest", digest_}};
    std::string body = header.dump() + "\n";
    for (const auto& r : rows) body += r.dump() + "\n";
    write_raw(name, body);
  }

  void write_raw(const std::string& name, const std::string& body) const {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out.flush()) throw std::runtime_error("cannot write " + (dir_ / name).string());
  }

 private:
  std::filesystem::path dir_;
  std::string digest_;
};

namespace detail {

inline std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

/// Parses and validates; any problem is a data error listing diagnostics.
inline CorpusBundle load_corpus(const std::string& path, std::ostream& err) {
  if (path.empty()) throw UsageError("--corpus is required");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path);
  CorpusBundle bundle;
  try {
    bundle = parse_corpus(in);
  } catch (const CorpusError& e) {
    throw DataError(path + ": " + e.what());
  }
  const auto violations = validate(bundle);
  if (!violations.empty()) {
    for (const auto& v : violations) err << path << ": " << v.describe() << "\n";
    throw DataError(path + ": " + std::to_string(violations.size()) + " violation(s)");
  }
  return bundle;
}

inline std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw UsageError("--seed is required for this command");
  return *o.seed;
}

inline Ms window_ms(double seconds, const char* flag) {
  auto ms = seconds_to_ms(seconds);
  if (!ms || ms->count() <= 0) {
    throw UsageError(std::string(flag) + " must be positive with at most 3 decimals");
  }
  return *ms;
}

inline SvrHyperparams hyperparams(const Options& o) {
  SvrHyperparams hp;
  hp.c = o.svr_c;
  hp.epsilon = o.svr_eps;
  hp.gamma = o.svr_gamma;
  try {
    hp.kernel = parse_kernel(o.kernel);
    hp.check();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return hp;
}

inline nlohmann::ordered_json svr_config(const Options& o) {
  return {{"svr_c", o.svr_c},
          {"svr_eps", o.svr_eps},
          {"svr_gamma", o.svr_gamma},
          {"kernel", o.kernel},
          {"merge_gap_ms", o.merge_gap_ms}};
}

inline std::vector<std::string> annotator_ids(int n) {
  std::vector<std::string> out;
  for (int a = 0; a < n; ++a) {
    std::ostringstream id;
    id << "a" << std::setw(3) << std::setfill('0') << a;
    out.push_back(id.str());
  }
  return out;
}

struct Scored {
  std::vector<HumanLikenessScore> samples;
  std::map<std::string, double> dialogues;
};

inline Scored score_corpus(const CorpusBundle& bundle) {
  Scored s;
  s.samples = aggregate_bundle(bundle);
  s.dialogues = dialogue_scores(s.samples);
  return s;
}

// --- individual steps, shared by their subcommand and `report` -------------

inline void write_aggregate(const ArtifactWriter& w, const CorpusBundle& bundle,
                            const Scored& scored, std::ostream& out) {
  std::vector<nlohmann::ordered_json> rows;
  int partial = 0;
  for (const auto& s : scored.samples) {
    rows.push_back({{"sample_id", s.sample_id},
                    {"dialogue_id", s.dialogue_id},
                    {"human", s.human},
                    {"total", s.total},
                    {"score", s.score()},
                    {"partial", s.partial()}});
    partial += s.partial() ? 1 : 0;
  }
  w.write_jsonl("sample_scores.jsonl", "hleval-sample-scores", rows);

  std::ostringstream tsv;
  tsv << "dialogue_id\tsystem_type\thl_score\n";
  for (const auto& [id, score] : scored.dialogues) {
    tsv << id << '\t' << to_string(bundle.find_dialogue(id)->system_type) << '\t'
        << fixed(score) << '\n';
  }
  w.write_text("dialogue_scores.tsv", tsv.str());

  std::map<std::string, SystemType> types;
  for (const auto& d : bundle.dialogues) types[d.dialogue_id] = d.system_type;
  const HistogramTable table = distribution(scored.samples, types);
  const std::string text = render_histogram(table);
  w.write_text("histogram.txt", text);
  w.write_jsonl("histogram.jsonl", "hleval-histogram", histogram_rows(table));
  out << text;
  if (partial > 0) {
    out << partial << " sample(s) did not receive exactly " << kJudgmentsPerSample
        << " judgments\n";
  }
}

inline std::vector<FeatureVector> write_features(const ArtifactWriter& w,
                                                 const CorpusBundle& bundle,
                                                 const Scored& scored, const Options& o) {
  const auto features = extract_features(bundle, {Ms{o.merge_gap_ms}});
  std::ostringstream tsv;
  write_feature_table(tsv, features, bundle, scored.dialogues);
  w.write_text("features.tsv", tsv.str());
  return features;
}

inline std::vector<FeatureVector> scored_only(std::vector<FeatureVector> features,
                                              const std::map<std::string, double>& scores) {
  std::erase_if(features, [&](const FeatureVector& f) { return !scores.count(f.dialogue_id); });
  return features;
}

inline void write_correlations(const ArtifactWriter& w, const CorpusBundle& bundle,
                               const std::vector<FeatureVector>& features,
                               const Scored& scored, const Options& o, std::ostream& out) {
  const auto usable = scored_only(features, scored.dialogues);
  std::map<std::string, double> scores;
  for (const auto& f : usable) scores[f.dialogue_id] = scored.dialogues.at(f.dialogue_id);
  if (usable.size() < 3) throw DataError("need at least 3 scored dialogues to correlate");
  const auto rows = feature_correlation_report(usable, scores, o.highlight_r);
  const std::string text = render_correlations(rows, "Behavior");
  w.write_text("behavior_correlations.txt", text);
  std::vector<nlohmann::ordered_json> json;
  for (const auto& r : rows) json.push_back(to_json(r));
  w.write_jsonl("behavior_correlations.jsonl", "hleval-correlations", json);
  out << text;

  const auto qs = scored_questionnaires(bundle, scored.dialogues);
  if (qs.size() >= 3) {
    const auto qrows = subjective_correlation_report(qs, scored.dialogues, o.highlight_r);
    const std::string qtext = render_correlations(qrows, "Question item");
    w.write_text("subjective_correlations.txt", qtext);
    std::vector<nlohmann::ordered_json> qjson;
    for (const auto& r : qrows) qjson.push_back(to_json(r));
    w.write_jsonl("subjective_correlations.jsonl", "hleval-correlations", qjson);
    out << "\n" << qtext;
  } else {
    out << "\n(fewer than 3 scored questionnaires; subjective report skipped)\n";
  }
}

inline void write_evaluation(const ArtifactWriter& w, const std::vector<FeatureVector>& features,
                             const Scored& scored, const Options& o, std::ostream& out) {
  const SvrHyperparams hp = hyperparams(o);
  const RegressionData data = regression_data(features, scored.dialogues);
  if (data.y.size() < 3) throw DataError("need at least 3 scored dialogues to evaluate");
  const EvaluationResult result = loocv(data.ids, data.x, data.y, hp);

  std::ostringstream tsv;
  tsv << "dialogue_id\tactual\tpredicted\tabs_error\n";
  std::vector<nlohmann::ordered_json> rows;
  for (const auto& p : result.predictions) {
    tsv << p.dialogue_id << '\t' << fixed(p.actual) << '\t' << fixed(p.predicted) << '\t'
        << fixed(p.abs_error()) << '\n';
    rows.push_back({{"dialogue_id", p.dialogue_id},
                    {"actual", p.actual},
                    {"predicted", p.predicted},
                    {"abs_error", p.abs_error()}});
  }
  tsv << "# MAE\t" << fixed(result.mae) << "\n# baseline_MAE\t" << fixed(result.baseline_mae)
      << "\n";
  rows.push_back({{"summary", true},
                  {"n", result.predictions.size()},
                  {"mae", result.mae},
                  {"baseline_mae", result.baseline_mae},
                  {"converged", result.all_converged},
                  {"imputed_folds", result.imputed_folds}});
  w.write_text("loocv.tsv", tsv.str());
  w.write_jsonl("loocv.jsonl", "hleval-loocv", rows);

  const SvrModel model = svr_train(data.x, data.y, hp);
  nlohmann::ordered_json mj = to_json(model);
  mj["manifest"] = w.digest();
  w.write_raw("model.json", mj.dump(2) + "\n");

  out << "LOOCV over " << result.predictions.size() << " dialogues\n"
      << "MAE          " << fixed(result.mae, 4) << "\n"
      << "baseline MAE " << fixed(result.baseline_mae, 4) << " (training-fold mean)\n";
  if (!result.all_converged) out << "warning: at least one fold did not converge\n";
  if (result.imputed_folds > 0) {
    out << "note: missing switching-pause values imputed in " << result.imputed_folds
        << " fold(s)\n";
  }
}

// --- subcommands ------------------------------------------------------------

inline int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.corpus.empty()) throw UsageError("--corpus is required");
  std::ifstream in(o.corpus);
  if (!in) throw DataError("cannot open corpus " + o.corpus);
  CorpusBundle bundle;
  try {
    bundle = parse_corpus(in);
  } catch (const CorpusError& e) {
    err << o.corpus << ": " << e.what() << "\n";
    return kDataError;
  }
  const auto violations = validate(bundle);
  for (const auto& v : violations) out << v.describe() << "\n";
  out << bundle.dialogues.size() << " dialogues, " << bundle.samples.size() << " samples, "
      << bundle.judgments.size() << " judgments: "
      << (violations.empty() ? "valid" : std::to_string(violations.size()) + " violation(s)")
      << "\n";
  return violations.empty() ? kOk : kDataError;
}

inline int cmd_segment(const Options& o, std::ostream& out, std::ostream& err) {
  CorpusBundle bundle = load_corpus(o.corpus, err);
  const Ms window = window_ms(o.window_s, "--window-s");
  const Ms hop = o.hop_s ? window_ms(*o.hop_s, "--hop-s") : window;
  if (hop > window) throw UsageError("--hop-s must not exceed --window-s");
  ArtifactWriter w(o.out, "segment", {{"window_s", o.window_s}, {"hop_s", to_seconds(hop)}},
                   {o.corpus});
  CorpusBundle result;
  result.dialogues = bundle.dialogues;
  for (const auto& d : bundle.dialogues) {
    auto seg = segment(d, window, hop);
    if (seg.warning) err << "warning: " << *seg.warning << "\n";
    for (auto& s : seg.windows) result.samples.push_back(std::move(s));
  }
  if (!bundle.judgments.empty()) {
    err << "note: existing samples and judgments are replaced by the new windows\n";
  }
  w.write_raw("segmented.jsonl", serialize(result, w.digest()));
  out << result.samples.size() << " windows from " << result.dialogues.size()
      << " dialogues\n";
  return kOk;
}

inline int cmd_assign(const Options& o, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = require_seed(o);
  CorpusBundle bundle = load_corpus(o.corpus, err);
  if (o.n_annotators <= 0) throw UsageError("--annotators must be positive");
  ArtifactWriter w(o.out, "assign",
                   {{"k", o.k},
                    {"load_min", o.load_min},
                    {"load_max", o.load_max},
                    {"annotators", o.n_annotators},
                    {"seed", seed}},
                   {o.corpus});
  std::vector<std::string> ids;
  for (const auto& s : bundle.samples) ids.push_back(s.sample_id);
  Assignment a;
  try {
    a = allocate(ids, annotator_ids(o.n_annotators), {o.k, o.load_min, o.load_max, seed});
  } catch (const AllocationError& e) {
    throw DataError(e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  nlohmann::ordered_json doc = {{"format", "hleval-assignment"},
                                {"version", 1},
                                {"manifest", w.digest()},
                                {"assignment", to_json(a)}};
  w.write_raw("assignment.json", doc.dump(2) + "\n");
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& [aid, q] : a.queues) {
    lo = std::min(lo, q.size());
    hi = std::max(hi, q.size());
  }
  out << ids.size() << " samples x " << o.k << " judgments over " << a.queues.size()
      << " annotators; load " << lo << ".." << hi << "\n";
  if (!a.underloaded.empty()) {
    out << a.underloaded.size() << " annotator(s) below load_min " << o.load_min << "\n";
  }
  return kOk;
}

inline int cmd_aggregate(const Options& o, std::ostream& out, std::ostream& err) {
  CorpusBundle bundle = load_corpus(o.corpus, err);
  ArtifactWriter w(o.out, "aggregate", nlohmann::ordered_json::object(), {o.corpus});
  write_aggregate(w, bundle, score_corpus(bundle), out);
  return kOk;
}

inline int cmd_features(const Options& o, std::ostream& out, std::ostream& err) {
  CorpusBundle bundle = load_corpus(o.corpus, err);
  ArtifactWriter w(o.out, "features", {{"merge_gap_ms", o.merge_gap_ms}}, {o.corpus});
  const auto features = write_features(w, bundle, score_corpus(bundle), o);
  out << features.size() << " feature vectors written to " << w.path("features.tsv").string()
      << "\n";
  return kOk;
}

inline int cmd_correlate(const Options& o, std::ostream& out, std::ostream& err) {
  CorpusBundle bundle = load_corpus(o.corpus, err);
  ArtifactWriter w(o.out, "correlate",
                   {{"highlight_r", o.highlight_r}, {"merge_gap_ms", o.merge_gap_ms}},
                   {o.corpus});
  const Scored scored = score_corpus(bundle);
  const auto features = extract_features(bundle, {Ms{o.merge_gap_ms}});
  write_correlations(w, bundle, features, scored, o, out);
  return kOk;
}

inline int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  CorpusBundle bundle = load_corpus(o.corpus, err);
  hyperparams(o);
  ArtifactWriter w(o.out, "evaluate", svr_config(o), {o.corpus});
  const Scored scored = score_corpus(bundle);
  const auto features = extract_features(bundle, {Ms{o.merge_gap_ms}});
  write_evaluation(w, features, scored, o, out);
  return kOk;
}

inline int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
  CorpusBundle bundle = load_corpus(o.corpus, err);
  hyperparams(o);
  nlohmann::ordered_json config = svr_config(o);
  config["highlight_r"] = o.highlight_r;
  ArtifactWriter w(o.out, "report", config, {o.corpus});
  const Scored scored = score_corpus(bundle);
  out << "== Human-likeness score distribution\n";
  write_aggregate(w, bundle, scored, out);
  const auto features = write_features(w, bundle, scored, o);
  out << "\n== Correlations\n";
  write_correlations(w, bundle, features, scored, o, out);
  out << "\n== Leave-one-out evaluation\n";
  write_evaluation(w, features, scored, o, out);
  return kOk;
}

inline int cmd_synth(const Options& o, std::ostream& out, std::ostream&) {
  SynthConfig cfg;
  std::vector<std::string> inputs;
  if (!o.synth_config.empty()) {
    try {
      nlohmann::json::parse(read_file(o.synth_config)).get_to(cfg);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(o.synth_config + ": " + e.what());
    }
    inputs.push_back(o.synth_config);
  }
  cfg.seed = require_seed(o);
  if (o.n_dialogues) cfg.n_dialogues = *o.n_dialogues;
  if (o.noise) cfg.judgment_noise = *o.noise;
  try {
    cfg.check();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  nlohmann::json cj = cfg;
  ArtifactWriter w(o.out, "synth", nlohmann::ordered_json::parse(cj.dump()), inputs);
  std::pair<CorpusBundle, GroundTruth> generated;
  try {
    generated = generate(cfg);
  } catch (const AllocationError& e) {
    throw DataError(e.what());
  }
  w.write_raw("corpus.jsonl", serialize(generated.first, w.digest()));
  std::ostringstream gt;
  write_ground_truth(gt, generated.second, w.digest());
  w.write_raw("ground_truth.jsonl", gt.str());
  out << generated.first.dialogues.size() << " dialogues, " << generated.first.samples.size()
      << " samples, " << generated.first.judgments.size() << " judgments written to "
      << w.path("corpus.jsonl").string() << "\n";
  return kOk;
}

inline int cmd_serve(const Options& o, std::ostream& out, std::ostream& err) {
  CorpusBundle bundle = load_corpus(o.corpus, err);
  AnnotationService service(std::move(bundle), o.state_dir, 64, o.clip_base);
  httplib::Server server;
  mount_annotation_routes(server, service);
  out << "serving annotation sessions on http://" << o.host << ":" << o.port << std::endl;
  if (!server.listen(o.host, o.port)) {
    throw DataError("cannot listen on " + o.host + ":" + std::to_string(o.port));
  }
  return kOk;
}

}  // namespace detail

/// Runs one invocation. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Human-likeness evaluation from multimodal user behaviors", "hleval"};
  app.require_subcommand(1);
  Options o;

  auto corpus_opt = [&](CLI::App* sc) {
    sc->add_option("--corpus", o.corpus, "Corpus file (line-delimited JSON)");
  };
  auto out_opt = [&](CLI::App* sc) {
    sc->add_option("--out", o.out, "Output directory")->capture_default_str();
  };
  auto svr_opts = [&](CLI::App* sc) {
    sc->add_option("--svr-c", o.svr_c, "SVR box constraint C")->capture_default_str();
    sc->add_option("--svr-eps", o.svr_eps, "SVR tube width epsilon")->capture_default_str();
    sc->add_option("--svr-gamma", o.svr_gamma, "RBF gamma (0: 1/n_features)")
        ->capture_default_str();
    sc->add_option("--kernel", o.kernel, "rbf or linear")->capture_default_str();
  };
  auto merge_opt = [&](CLI::App* sc) {
    sc->add_option("--merge-gap-ms", o.merge_gap_ms, "Inter-pausal unit merge gap")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
  };
  auto highlight_opt = [&](CLI::App* sc) {
    sc->add_option("--highlight-r", o.highlight_r, "Highlight rows with |r| >= this")
        ->capture_default_str();
  };
  auto seed_opt = [&](CLI::App* sc) { sc->add_option("--seed", o.seed, "Random seed"); };

  auto* validate = app.add_subcommand("validate", "Check a corpus file");
  corpus_opt(validate);

  auto* seg = app.add_subcommand("segment", "Cut dialogues into sample windows");
  corpus_opt(seg);
  out_opt(seg);
  seg->add_option("--window-s", o.window_s, "Window length (s)")->capture_default_str();
  seg->add_option("--hop-s", o.hop_s, "Window hop (s, default: window)");

  auto* assign = app.add_subcommand("assign", "Allocate samples to annotators");
  corpus_opt(assign);
  out_opt(assign);
  assign->add_option("--k", o.k, "Judgments per sample")->capture_default_str();
  assign->add_option("--load-min", o.load_min, "Minimum samples per annotator")
      ->capture_default_str();
  assign->add_option("--load-max", o.load_max, "Maximum samples per annotator")
      ->capture_default_str();
  assign->add_option("--annotators", o.n_annotators, "Number of annotators")
      ->capture_default_str();
  seed_opt(assign);

  auto* aggregate = app.add_subcommand("aggregate", "Score samples and dialogues");
  corpus_opt(aggregate);
  out_opt(aggregate);

  auto* features = app.add_subcommand("features", "Write the per-dialogue feature table");
  corpus_opt(features);
  out_opt(features);
  merge_opt(features);

  auto* correlate = app.add_subcommand("correlate", "Spearman correlation reports");
  corpus_opt(correlate);
  out_opt(correlate);
  merge_opt(correlate);
  highlight_opt(correlate);

  auto* evaluate = app.add_subcommand("evaluate", "Leave-one-out SVR evaluation");
  corpus_opt(evaluate);
  out_opt(evaluate);
  merge_opt(evaluate);
  svr_opts(evaluate);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  out_opt(synth);
  seed_opt(synth);
  synth->add_option("--config", o.synth_config, "Generator config (JSON)");
  synth->add_option("--n-dialogues", o.n_dialogues, "Override the number of dialogues");
  synth->add_option("--noise", o.noise, "Override the judgment noise");

  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  corpus_opt(serve);
  serve->add_option("--state-dir", o.state_dir, "Session state directory")
      ->capture_default_str();
  serve->add_option("--host", o.host)->capture_default_str();
  serve->add_option("--port", o.port)->capture_default_str();
  serve->add_option("--clip-base", o.clip_base, "Prefix for clip URLs")->capture_default_str();

  auto* report = app.add_subcommand("report", "aggregate + features + correlate + evaluate");
  corpus_opt(report);
  out_opt(report);
  merge_opt(report);
  highlight_opt(report);
  svr_opts(report);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (validate->parsed()) return detail::cmd_validate(o, out, err);
    if (seg->parsed()) return detail::cmd_segment(o, out, err);
    if (assign->parsed()) return detail::cmd_assign(o, out, err);
    if (aggregate->parsed()) return detail::cmd_aggregate(o, out, err);
    if (features->parsed()) return detail::cmd_features(o, out, err);
    if (correlate->parsed()) return detail::cmd_correlate(o, out, err);
    if (evaluate->parsed()) return detail::cmd_evaluate(o, out, err);
    if (synth->parsed()) return detail::cmd_synth(o, out, err);
    if (serve->parsed()) return detail::cmd_serve(o, out, err);
    if (report->parsed()) return detail::cmd_report(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kUsageError;
}

}  // namespace hleval::cli

#endif  // HLEVAL_CLI_HPP_
