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

#ifndef HLEVAL_ANNOTATION_SERVICE_HPP_
#define HLEVAL_ANNOTATION_SERVICE_HPP_

// Judgment collection sessions.
//
// A session fixes an allocation of samples to annotators and then accepts
// one verdict per (sample, annotator) slot, strictly in queue order. Every
// accepted mutation is appended to the session's log and synced before it
// is acknowledged; restarting the service replays snapshot + log.
//
// State directory layout, per session `<id>`:
//   <id>.session.json   creation record (parameters, samples, assignment)
//   <id>.log            one JSON line per accepted mutation
//   <id>.snapshot.json  periodic state snapshot with the log position it covers

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "hleval/corpus.hpp"
#include "hleval/sampling.hpp"
#include "json.hpp"

namespace hleval {

inline constexpr int kServiceSchemaVersion = 1;

class ServiceError : public std::runtime_error {
 public:
  enum class Code { kBadRequest = 400, kNotFound = 404, kConflict = 409 };

  ServiceError(Code code, const std::string& what, std::optional<std::int64_t> deficit = {})
      : std::runtime_error(what), code_(code), deficit_(deficit) {}

  Code code() const { return code_; }
  int http_status() const { return static_cast<int>(code_); }
  std::optional<std::int64_t> deficit() const { return deficit_; }

 private:
  Code code_;
  std::optional<std::int64_t> deficit_;
};

/// Append-only file whose writes are synced to disk before returning.
class AppendLog {
 public:
  AppendLog() = default;
  explicit AppendLog(const std::filesystem::path& path)
      : fd_(::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644)) {
    if (fd_ < 0) throw std::system_error(errno, std::generic_category(), path.string());
  }
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;
  AppendLog(AppendLog&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  AppendLog& operator=(AppendLog&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~AppendLog() { close(); }

  void append(const std::string& line) {
    std::string buf = line + "\n";
    const char* p = buf.data();
    std::size_t left = buf.size();
    while (left > 0) {
      const ssize_t n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw std::system_error(errno, std::generic_category(), "log write");
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    if (::fdatasync(fd_) != 0) {
      throw std::system_error(errno, std::generic_category(), "log sync");
    }
  }

 private:
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int fd_ = -1;
};

struct SessionParams {
  std::vector<std::string> annotators;
  AllocationParams allocation;
};

/// What an annotator sees next: a sample or the done marker. No dialogue
/// metadata is exposed.
struct SampleDescriptor {
  bool done = false;
  std::string sample_id;
  std::string clip_url;
  std::size_t position = 0;  // 1-based index of this item among the assigned
  std::size_t total = 0;
  friend bool operator==(const SampleDescriptor&, const SampleDescriptor&) = default;
};

struct AnnotatorProgress {
  std::size_t assigned = 0;
  std::size_t judged = 0;
  std::size_t pending = 0;
};

struct SessionProgress {
  bool complete = false;
  std::map<std::string, AnnotatorProgress> annotators;
};

class AnnotationService {
 public:
  /// `corpus` supplies the samples sessions are built from. Existing
  /// sessions in `state_dir` are recovered.
  AnnotationService(CorpusBundle corpus, std::filesystem::path state_dir,
                    std::size_t snapshot_every = 64, std::string clip_base = "clips/")
      : corpus_(std::move(corpus)),
        dir_(std::move(state_dir)),
        snapshot_every_(snapshot_every),
        clip_base_(std::move(clip_base)) {
    std::filesystem::create_directories(dir_);
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      const std::string name = entry.path().filename().string();
      const std::string suffix = ".session.json";
      if (name.size() > suffix.size() &&
          name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
        recover(name.substr(0, name.size() - suffix.size()));
      }
    }
  }

  std::string create_session(const SessionParams& params) {
    std::vector<std::string> sample_ids;
    for (const auto& s : corpus_.samples) sample_ids.push_back(s.sample_id);
    Assignment assignment;
    try {
      assignment = allocate(sample_ids, params.annotators, params.allocation);
    } catch (const AllocationError& e) {
      throw ServiceError(ServiceError::Code::kConflict, e.what(), e.deficit());
    } catch (const std::invalid_argument& e) {
      throw ServiceError(ServiceError::Code::kBadRequest, e.what());
    }

    std::lock_guard lock(sessions_mu_);
    std::ostringstream id;
    id << "s" << std::setw(4) << std::setfill('0') << ++last_session_number_;
    auto session = std::make_shared<Session>();
    session->id = id.str();
    session->params = params;
    session->assignment = assignment;
    init_queues(*session);

    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    for (const auto& s : corpus_.samples) {
      samples.push_back({{"sample_id", s.sample_id}, {"clip_url", clip_url(s)}});
    }
    nlohmann::ordered_json record = {
        {"schema_version", kServiceSchemaVersion},
        {"session_id", session->id},
        {"k", params.allocation.k},
        {"load_min", params.allocation.load_min},
        {"load_max", params.allocation.load_max},
        {"seed", params.allocation.seed},
        {"annotators", params.annotators},
        {"samples", std::move(samples)},
        {"assignment", to_json(assignment)}};
    for (const auto& s : corpus_.samples) session->clip_urls[s.sample_id] = clip_url(s);
    write_atomically(dir_ / (session->id + ".session.json"), record.dump());
    session->log = AppendLog(dir_ / (session->id + ".log"));
    sessions_[session->id] = session;
    return session->id;
  }

  SampleDescriptor next_sample(const std::string& session_id, const std::string& annotator) {
    auto s = find(session_id);
    std::lock_guard lock(s->mu);
    return describe(*s, queue_of(*s, annotator));
  }

  /// Records a verdict for the annotator's head-of-queue sample.
  void submit_judgment(const std::string& session_id, const std::string& annotator,
                       const std::string& sample_id, Verdict verdict) {
    auto s = find(session_id);
    std::lock_guard lock(s->mu);
    Queue& q = queue_of(*s, annotator);
    check_head(*s, q, annotator, sample_id);
    nlohmann::ordered_json entry = {{"seq", s->log_entries + 1},
                                    {"op", "judgment"},
                                    {"annotator_id", annotator},
                                    {"sample_id", sample_id},
                                    {"verdict", to_string(verdict)}};
    s->log.append(entry.dump());
    apply_judgment(*s, annotator, sample_id, verdict);
    maybe_snapshot(*s);
  }

  /// Moves an unplayable head-of-queue sample to the tail, once per sample.
  void flag_unplayable(const std::string& session_id, const std::string& annotator,
                       const std::string& sample_id) {
    auto s = find(session_id);
    std::lock_guard lock(s->mu);
    Queue& q = queue_of(*s, annotator);
    check_head(*s, q, annotator, sample_id);
    if (q.flagged.count(sample_id)) {
      throw ServiceError(ServiceError::Code::kConflict,
                         "sample " + sample_id + " was already flagged once");
    }
    nlohmann::ordered_json entry = {{"seq", s->log_entries + 1},
                                    {"op", "flag"},
                                    {"annotator_id", annotator},
                                    {"sample_id", sample_id}};
    s->log.append(entry.dump());
    apply_flag(*s, annotator, sample_id);
    maybe_snapshot(*s);
  }

  /// Collected judgments in acceptance order. An incomplete session is only
  /// exported when `partial` is set.
  std::vector<Judgment> export_judgments(const std::string& session_id, bool partial) {
    auto s = find(session_id);
    std::lock_guard lock(s->mu);
    if (!partial && !complete(*s)) {
      throw ServiceError(ServiceError::Code::kConflict,
                         "session " + session_id + " is not complete");
    }
    return s->judgments;
  }

  SessionProgress progress(const std::string& session_id) {
    auto s = find(session_id);
    std::lock_guard lock(s->mu);
    SessionProgress p;
    p.complete = complete(*s);
    for (const auto& [aid, q] : s->queues) {
      p.annotators[aid] = {q.assigned.size(), q.judged.size(), q.pending.size()};
    }
    return p;
  }

  const Assignment& assignment(const std::string& session_id) { return find(session_id)->assignment; }

  /// Canonical dump of a session's mutable state; equal dumps mean equal
  /// states.
  std::string state_dump(const std::string& session_id) {
    auto s = find(session_id);
    std::lock_guard lock(s->mu);
    return state_json(*s).dump();
  }

  std::vector<std::string> session_ids() {
    std::lock_guard lock(sessions_mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
  }

 private:
  struct Queue {
    std::vector<std::string> assigned;
    std::deque<std::string> pending;
    std::set<std::string> judged;
    std::set<std::string> flagged;
  };

  struct Session {
    std::string id;
    SessionParams params;
    Assignment assignment;
    std::map<std::string, Queue> queues;
    std::map<std::string, std::string> clip_urls;
    std::vector<Judgment> judgments;
    std::int64_t log_entries = 0;
    AppendLog log;
    std::mutex mu;
  };

  static std::string percent_encode(const std::string& s) {
    std::ostringstream os;
    for (unsigned char c : s) {
      if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
        os << c;
      } else {
        os << '%' << std::uppercase << std::hex << std::setw(2) << std::setfill('0')
           << static_cast<int>(c) << std::dec << std::nouppercase;
      }
    }
    return os.str();
  }

  std::string clip_url(const SampleWindow& s) const {
    return s.clip_url ? *s.clip_url : clip_base_ + percent_encode(s.sample_id);
  }

  static void write_atomically(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << text << '\n';
      if (!out.flush()) throw std::runtime_error("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, path);
  }

  static void init_queues(Session& s) {
    for (const auto& [aid, samples] : s.assignment.queues) {
      Queue q;
      q.assigned = samples;
      q.pending.assign(samples.begin(), samples.end());
      s.queues.emplace(aid, std::move(q));
    }
  }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(sessions_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
      throw ServiceError(ServiceError::Code::kNotFound, "unknown session " + id);
    }
    return it->second;
  }

  static Queue& queue_of(Session& s, const std::string& annotator) {
    auto it = s.queues.find(annotator);
    if (it == s.queues.end()) {
      throw ServiceError(ServiceError::Code::kNotFound,
                         "annotator " + annotator + " is not part of session " + s.id);
    }
    return it->second;
  }

  static bool complete(const Session& s) {
    for (const auto& [aid, q] : s.queues) {
      if (!q.pending.empty()) return false;
    }
    return true;
  }

  SampleDescriptor describe(const Session& s, const Queue& q) const {
    SampleDescriptor d;
    d.total = q.assigned.size();
    if (q.pending.empty()) {
      d.done = true;
      d.position = d.total;
      return d;
    }
    d.sample_id = q.pending.front();
    d.clip_url = s.clip_urls.at(d.sample_id);
    d.position = q.judged.size() + 1;
    return d;
  }

  static void check_head(const Session& s, const Queue& q, const std::string& annotator,
                         const std::string& sample_id) {
    if (!s.clip_urls.count(sample_id)) {
      throw ServiceError(ServiceError::Code::kNotFound, "unknown sample " + sample_id);
    }
    if (q.judged.count(sample_id)) {
      throw ServiceError(ServiceError::Code::kConflict,
                         annotator + " already judged " + sample_id);
    }
    if (q.pending.empty() || q.pending.front() != sample_id) {
      throw ServiceError(ServiceError::Code::kConflict,
                         sample_id + " is not the current sample of " + annotator);
    }
  }

  static void apply_judgment(Session& s, const std::string& annotator,
                             const std::string& sample_id, Verdict verdict) {
    Queue& q = s.queues.at(annotator);
    q.pending.pop_front();
    q.judged.insert(sample_id);
    s.judgments.push_back({sample_id, annotator, verdict});
    ++s.log_entries;
  }

  static void apply_flag(Session& s, const std::string& annotator,
                         const std::string& sample_id) {
    Queue& q = s.queues.at(annotator);
    q.pending.pop_front();
    q.pending.push_back(sample_id);
    q.flagged.insert(sample_id);
    ++s.log_entries;
  }

  static nlohmann::ordered_json state_json(const Session& s) {
    nlohmann::ordered_json queues = nlohmann::ordered_json::object();
    for (const auto& [aid, q] : s.queues) {
      queues[aid] = {{"pending", std::vector<std::string>(q.pending.begin(), q.pending.end())},
                     {"judged", q.judged},
                     {"flagged", q.flagged}};
    }
    nlohmann::ordered_json judgments = nlohmann::ordered_json::array();
    for (const auto& j : s.judgments) {
      judgments.push_back({j.sample_id, j.annotator_id, to_string(j.verdict)});
    }
    return {{"session_id", s.id},
            {"log_entries", s.log_entries},
            {"queues", std::move(queues)},
            {"judgments", std::move(judgments)}};
  }

  void maybe_snapshot(Session& s) {
    if (snapshot_every_ == 0 || s.log_entries % static_cast<std::int64_t>(snapshot_every_) != 0) {
      return;
    }
    write_atomically(dir_ / (s.id + ".snapshot.json"), state_json(s).dump());
  }

  void recover(const std::string& id) {
    std::ifstream in(dir_ / (id + ".session.json"));
    const auto record = nlohmann::json::parse(in);
    auto s = std::make_shared<Session>();
    s->id = id;
    s->params.annotators = record.at("annotators").get<std::vector<std::string>>();
    s->params.allocation = {record.at("k").get<int>(), record.at("load_min").get<int>(),
                            record.at("load_max").get<int>(),
                            record.at("seed").get<std::uint64_t>()};
    s->assignment = assignment_from_json(record.at("assignment"));
    for (const auto& sample : record.at("samples")) {
      s->clip_urls[sample.at("sample_id").get<std::string>()] =
          sample.at("clip_url").get<std::string>();
    }
    init_queues(*s);

    const auto snapshot_path = dir_ / (id + ".snapshot.json");
    if (std::filesystem::exists(snapshot_path)) {
      std::ifstream sin(snapshot_path);
      const auto snap = nlohmann::json::parse(sin);
      s->log_entries = snap.at("log_entries").get<std::int64_t>();
      for (auto it = snap.at("queues").begin(); it != snap.at("queues").end(); ++it) {
        Queue& q = s->queues.at(it.key());
        const auto pending = it.value().at("pending").get<std::vector<std::string>>();
        q.pending.assign(pending.begin(), pending.end());
        q.judged = it.value().at("judged").get<std::set<std::string>>();
        q.flagged = it.value().at("flagged").get<std::set<std::string>>();
      }
      for (const auto& j : snap.at("judgments")) {
        s->judgments.push_back({j.at(0).get<std::string>(), j.at(1).get<std::string>(),
                                *parse_verdict(j.at(2).get<std::string>())});
      }
    }

    const auto log_path = dir_ / (id + ".log");
    if (std::filesystem::exists(log_path)) {
      std::ifstream lin(log_path, std::ios::binary);
      std::string line;
      std::uintmax_t good_bytes = 0;
      bool torn = false;
      while (std::getline(lin, line)) {
        const bool terminated = !lin.eof();
        nlohmann::json e;
        try {
          e = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
          if (!terminated) {  // torn tail write from a crash
            torn = true;
            break;
          }
          throw;
        }
        if (!terminated) {
          torn = true;  // complete JSON but never acknowledged; drop it
          break;
        }
        good_bytes += line.size() + 1;
        if (e.at("seq").get<std::int64_t>() <= s->log_entries) continue;
        const auto annotator = e.at("annotator_id").get<std::string>();
        const auto sample = e.at("sample_id").get<std::string>();
        if (e.at("op") == "judgment") {
          apply_judgment(*s, annotator, sample, *parse_verdict(e.at("verdict").get<std::string>()));
        } else {
          apply_flag(*s, annotator, sample);
        }
      }
      lin.close();
      if (torn) std::filesystem::resize_file(log_path, good_bytes);
    }
    s->log = AppendLog(log_path);
    const int number = std::stoi(id.substr(1));
    last_session_number_ = std::max(last_session_number_, number);
    sessions_[id] = std::move(s);
  }

  CorpusBundle corpus_;
  std::filesystem::path dir_;
  std::size_t snapshot_every_;
  std::string clip_base_;
  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  int last_session_number_ = 0;
};

inline nlohmann::ordered_json to_json(const SampleDescriptor& d) {
  nlohmann::ordered_json j = {{"schema_version", kServiceSchemaVersion}, {"done", d.done}};
  if (!d.done) {
    j["sample_id"] = d.sample_id;
    j["clip_url"] = d.clip_url;
  }
  j["position"] = d.position;
  j["total"] = d.total;
  return j;
}

inline nlohmann::ordered_json to_json(const SessionProgress& p, const std::string& id) {
  nlohmann::ordered_json annotators = nlohmann::ordered_json::object();
  std::size_t assigned = 0, judged = 0;
  for (const auto& [aid, a] : p.annotators) {
    annotators[aid] = {{"assigned", a.assigned}, {"judged", a.judged}, {"pending", a.pending}};
    assigned += a.assigned;
    judged += a.judged;
  }
  return {{"schema_version", kServiceSchemaVersion},
          {"session_id", id},
          {"state", p.complete ? "complete" : "open"},
          {"assigned", assigned},
          {"judged", judged},
          {"annotators", std::move(annotators)}};
}

/// Judgments as corpus-format lines, preceded by a header line.
inline std::string export_corpus_text(std::span<const Judgment> judgments) {
  std::string out = header_line() + "\n";
  for (const auto& j : judgments) out += judgment_line(j) + "\n";
  return out;
}

}  // namespace hleval

#endif  // HLEVAL_ANNOTATION_SERVICE_HPP_
