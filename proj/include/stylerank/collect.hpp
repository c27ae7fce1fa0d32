// stylerank/collect.hpp

// Copyright 2026  The stylerank Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// A/B judgment collection. Raters open sessions of fixed size; each trial
// shows one pair with a randomized left/right order, and clicks are stored
// in canonical A/B form. All state lives in an append-only log (one JSON
// object per line, fsync'd before a request is acknowledged) and is rebuilt
// from it on start-up.

#ifndef STYLERANK_COLLECT_HPP_
#define STYLERANK_COLLECT_HPP_

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "stylerank/error.hpp"
#include "stylerank/judgment.hpp"
#include "stylerank/lineformat.hpp"
#include "stylerank/pairing.hpp"
#include "stylerank/rng.hpp"

namespace stylerank {

/// Request the service refuses; `status` is the HTTP code to report.
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string &what) : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

inline constexpr const char *kAgeBands[] = {"≤20s", "30s", "40s", "≥50s"};
inline constexpr const char *kGenders[] = {"male", "female", "other/unstated"};
inline constexpr const char *kFamiliarity[] = {"low", "medium", "high"};

struct RaterProfile {
  std::string rater_id;
  std::string age_band;
  std::string gender;
  std::string familiarity;
};

inline void validate_profile(const RaterProfile &p) {
  auto one_of = [](const std::string &v, const auto &options) {
    return std::find(std::begin(options), std::end(options), v) != std::end(options);
  };
  if (p.rater_id.empty()) throw ServiceError(400, "rater_id must be non-empty");
  if (!one_of(p.age_band, kAgeBands))
    throw ServiceError(400, "age_band must be one of ≤20s, 30s, 40s, ≥50s");
  if (!one_of(p.gender, kGenders))
    throw ServiceError(400, "gender must be one of male, female, other/unstated");
  if (!one_of(p.familiarity, kFamiliarity))
    throw ServiceError(400, "familiarity must be one of low, medium, high");
}

inline RaterProfile profile_from_json(const Json &o) {
  auto str = [&](const char *key) {
    if (!o.is_object() || !o.contains(key) || !o[key].is_string())
      throw ServiceError(400, std::string("missing string field '") + key + "'");
    return o[key].get<std::string>();
  };
  RaterProfile p{str("rater_id"), str("age_band"), str("gender"), str("familiarity")};
  validate_profile(p);
  return p;
}

struct Trial {
  std::string pair_id;
  Slot presented_left = Slot::kA;
};

struct Session {
  std::string session_id;
  std::string rater_id;
  std::vector<Trial> trials;
  std::size_t cursor = 0;
  bool described = false;

  bool complete() const { return cursor == trials.size(); }
};

/// What a rater sees for the current trial.
struct TrialView {
  std::string session_id;
  std::string pair_id;
  std::string left_utterance;
  std::string right_utterance;
  std::size_t index = 0;  // 1-based
  std::size_t total = 0;

  std::string progress() const {
    return std::to_string(index) + " of " + std::to_string(total);
  }
};

struct ServiceConfig {
  std::filesystem::path log_path = "collect.log";
  std::size_t session_size = 25;
  std::size_t session_cap = 10;
  std::uint64_t seed = 0;
};

/// Counts of distinct raters by demographic group.
struct DemographicsSummary {
  std::map<std::string, std::size_t> age_band, gender, familiarity;
  std::size_t raters = 0;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms % 1000));
  return buf;
}

namespace detail {

// Append-only line log. Each append is one write(2) of a full line followed
// by fsync(2). Existing bytes are never rewritten: a torn final line left by
// a crash is terminated with a newline on reopen and skipped by replay.
class AppendLog {
 public:
  explicit AppendLog(const std::filesystem::path &path) : path_(path) {
    if (std::filesystem::exists(path)) {
      std::ifstream in(path, std::ios::binary);
      text_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
      if (!in.good() && !in.eof()) throw IoError("cannot read log " + path.string());
    }
    fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open log " + path.string());
    if (!text_.empty() && text_.back() != '\n') {
      write_all("\n");
      text_ += '\n';
    }
  }
  ~AppendLog() {
    if (fd_ >= 0) ::close(fd_);
  }
  AppendLog(const AppendLog &) = delete;
  AppendLog &operator=(const AppendLog &) = delete;

  /// Contents present when the log was opened.
  const std::string &initial_text() const { return text_; }

  void append(const Json &record) { write_all(record.dump() + "\n"); }

 private:
  void write_all(const std::string &line) {
    std::size_t done = 0;
    while (done < line.size()) {
      const ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError("write to log " + path_.string() + " failed");
      }
      done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw IoError("fsync of log " + path_.string() + " failed");
  }

  std::filesystem::path path_;
  std::string text_;
  int fd_ = -1;
};

}  // namespace detail

class CollectService {
 public:
  using Clock = std::function<std::string()>;

  CollectService(std::vector<ComparisonPair> pool, ServiceConfig cfg,
                 Clock clock = utc_timestamp)
      : pool_(std::move(pool)), cfg_(std::move(cfg)), clock_(std::move(clock)),
        log_(cfg_.log_path) {
    if (cfg_.session_size == 0) throw ConfigError("collect: session_size must be > 0");
    if (cfg_.session_cap == 0) throw ConfigError("collect: session_cap must be > 0");
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (!pair_index_.emplace(pool_[i].pair_id, i).second)
        throw ValidationError("collect: duplicate pair_id '" + pool_[i].pair_id + "'");
    }
    judged_.assign(pool_.size(), 0);
    replay(log_.initial_text());
  }

  const ServiceConfig &config() const { return cfg_; }

  Session create_session(const RaterProfile &profile) {
    validate_profile(profile);
    std::unique_lock lock(mutex_);
    auto &seen = assigned_[profile.rater_id];
    const auto sessions = sessions_of_[profile.rater_id];
    if (sessions >= cfg_.session_cap)
      throw ServiceError(409, "rater '" + profile.rater_id + "' has reached the cap of " +
                                  std::to_string(cfg_.session_cap) + " sessions");
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < pool_.size(); ++i)
      if (!seen.count(i)) candidates.push_back(i);
    if (candidates.size() < cfg_.session_size)
      throw ServiceError(409, "only " + std::to_string(candidates.size()) +
                                  " unjudged pairs remain for rater '" +
                                  profile.rater_id + "'");
    Rng rng = Rng::derived(cfg_.seed, sessions_.size());
    rng.shuffle(std::span<std::size_t>(candidates));
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return judged_[a] < judged_[b]; });

    Session s;
    s.session_id = session_name(sessions_.size());
    s.rater_id = profile.rater_id;
    for (std::size_t k = 0; k < cfg_.session_size; ++k)
      s.trials.push_back({pool_[candidates[k]].pair_id,
                          rng.bernoulli(0.5) ? Slot::kA : Slot::kB});

    Json rec;
    rec["type"] = "session";
    rec["session_id"] = s.session_id;
    rec["rater_id"] = profile.rater_id;
    rec["age_band"] = profile.age_band;
    rec["gender"] = profile.gender;
    rec["familiarity"] = profile.familiarity;
    Json trials = Json::array();
    for (const auto &t : s.trials)
      trials.push_back({{"pair_id", t.pair_id}, {"presented_left", slot_name(t.presented_left)}});
    rec["trials"] = trials;
    rec["timestamp"] = clock_();
    log_.append(rec);
    apply_session(s, profile);
    return s;
  }

  TrialView next_trial(const std::string &session_id) const {
    std::shared_lock lock(mutex_);
    const auto &s = session(session_id);
    if (s.complete()) throw ServiceError(409, "session '" + session_id + "' is complete");
    return view(s);
  }

  /// Records the click for the current trial. Anything but the current
  /// trial's pair_id is rejected without touching the log.
  JudgmentRecord submit_judgment(const std::string &session_id, const std::string &pair_id,
                                 Side side_chosen) {
    std::unique_lock lock(mutex_);
    auto &s = session(session_id);
    if (s.complete()) throw ServiceError(409, "session '" + session_id + "' is complete");
    const auto &t = s.trials[s.cursor];
    if (t.pair_id != pair_id)
      throw ServiceError(409, "pair '" + pair_id + "' is not the current trial (expected '" +
                                  t.pair_id + "')");
    JudgmentRecord j;
    j.pair_id = pair_id;
    j.rater_id = s.rater_id;
    j.session_id = session_id;
    j.presented_left = t.presented_left;
    j.side_chosen = side_chosen;
    j.choice = canonical_choice(t.presented_left, side_chosen);
    j.timestamp = clock_();
    Json rec = judgment_to_json(j);
    rec["type"] = "judgment";
    log_.append(rec);
    apply_judgment(s, j);
    return j;
  }

  void submit_description(const std::string &session_id, const std::string &text) {
    std::unique_lock lock(mutex_);
    auto &s = session(session_id);
    if (!s.complete())
      throw ServiceError(409, "session '" + session_id + "' is not complete yet");
    if (s.described)
      throw ServiceError(409, "session '" + session_id + "' already has a description");
    Json rec;
    rec["type"] = "description";
    rec["session_id"] = session_id;
    rec["rater_id"] = s.rater_id;
    rec["text"] = text;
    rec["timestamp"] = clock_();
    log_.append(rec);
    s.described = true;
    descriptions_.push_back(rec);
  }

  std::vector<JudgmentRecord> judgments() const {
    std::shared_lock lock(mutex_);
    return judgments_;
  }

  std::vector<Json> descriptions() const {
    std::shared_lock lock(mutex_);
    return descriptions_;
  }

  /// Judgments in the line format read by the analysis stage.
  std::string export_judgments() const {
    std::shared_lock lock(mutex_);
    std::string out;
    for (const auto &j : judgments_) out += judgment_to_json(j).dump() + "\n";
    return out;
  }

  DemographicsSummary demographics() const {
    std::shared_lock lock(mutex_);
    DemographicsSummary d;
    for (auto *b : kAgeBands) d.age_band[b] = 0;
    for (auto *g : kGenders) d.gender[g] = 0;
    for (auto *f : kFamiliarity) d.familiarity[f] = 0;
    for (const auto &[_, p] : profiles_) {
      ++d.age_band[p.age_band];
      ++d.gender[p.gender];
      ++d.familiarity[p.familiarity];
      ++d.raters;
    }
    return d;
  }

  std::size_t judgment_count(const std::string &pair_id) const {
    std::shared_lock lock(mutex_);
    auto it = pair_index_.find(pair_id);
    return it == pair_index_.end() ? 0 : judged_[it->second];
  }

  /// Unparseable log lines skipped during replay (torn writes).
  std::size_t torn_lines() const { return torn_lines_; }

  std::optional<Session> find_session(const std::string &session_id) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
  }

 private:
  static std::string session_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s-%06zu", index);
    return buf;
  }

  const Session &session(const std::string &id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(404, "unknown session '" + id + "'");
    return it->second;
  }
  Session &session(const std::string &id) {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(404, "unknown session '" + id + "'");
    return it->second;
  }

  TrialView view(const Session &s) const {
    const auto &t = s.trials[s.cursor];
    const auto &p = pool_[pair_index_.at(t.pair_id)];
    TrialView v;
    v.session_id = s.session_id;
    v.pair_id = t.pair_id;
    v.left_utterance = t.presented_left == Slot::kA ? p.utt_a : p.utt_b;
    v.right_utterance = t.presented_left == Slot::kA ? p.utt_b : p.utt_a;
    v.index = s.cursor + 1;
    v.total = s.trials.size();
    return v;
  }

  void apply_session(const Session &s, const RaterProfile &profile) {
    profiles_.try_emplace(profile.rater_id, profile);
    auto &seen = assigned_[s.rater_id];
    for (const auto &t : s.trials) {
      auto it = pair_index_.find(t.pair_id);
      if (it == pair_index_.end())
        throw ValidationError("log: session refers to unknown pair '" + t.pair_id + "'");
      seen.insert(it->second);
    }
    ++sessions_of_[s.rater_id];
    sessions_.emplace(s.session_id, s);
  }

  void apply_judgment(Session &s, const JudgmentRecord &j) {
    ++judged_[pair_index_.at(j.pair_id)];
    ++s.cursor;
    judgments_.push_back(j);
  }

  void replay(const std::string &text) {
    std::vector<Line> lines;
    std::size_t number = 0, begin = 0;
    while (begin < text.size()) {
      const auto end = text.find('\n', begin);
      const std::string_view raw(text.data() + begin, end - begin);
      begin = end + 1;
      ++number;
      if (is_blank(raw)) continue;
      Json obj = Json::parse(raw, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) {
        ++torn_lines_;
        continue;
      }
      lines.push_back({number, std::move(obj)});
    }
    for (const auto &line : lines) {
      const auto type = get_string(line, "type");
      if (type == "session") {
        RaterProfile p{get_string(line, "rater_id"), get_string(line, "age_band"),
                       get_string(line, "gender"), get_string(line, "familiarity")};
        Session s;
        s.session_id = get_string(line, "session_id");
        s.rater_id = p.rater_id;
        for (const auto &t : require_key(line, "trials"))
          s.trials.push_back({t.at("pair_id").get<std::string>(),
                              parse_slot(t.at("presented_left").get<std::string>(),
                                         line.number)});
        if (s.session_id != session_name(sessions_.size()))
          throw ParseError("log: unexpected session id '" + s.session_id + "'", line.number);
        apply_session(s, p);
      } else if (type == "judgment") {
        const auto j = judgment_from_line(line);
        auto it = sessions_.find(j.session_id);
        if (it == sessions_.end() || it->second.complete() ||
            it->second.trials[it->second.cursor].pair_id != j.pair_id)
          throw ParseError("log: judgment out of sequence", line.number);
        apply_judgment(it->second, j);
      } else if (type == "description") {
        auto it = sessions_.find(get_string(line, "session_id"));
        if (it == sessions_.end()) throw ParseError("log: description for unknown session", line.number);
        it->second.described = true;
        descriptions_.push_back(line.object);
      } else {
        throw ParseError("log: unknown record type '" + type + "'", line.number);
      }
    }
  }

  std::vector<ComparisonPair> pool_;
  ServiceConfig cfg_;
  Clock clock_;
  detail::AppendLog log_;
  mutable std::shared_mutex mutex_;

  std::unordered_map<std::string, std::size_t> pair_index_;
  std::vector<std::size_t> judged_;  // judgments per pool index
  std::map<std::string, Session> sessions_;
  std::map<std::string, RaterProfile> profiles_;
  std::map<std::string, std::set<std::size_t>> assigned_;  // rater -> pool indices
  std::map<std::string, std::size_t> sessions_of_;
  std::vector<JudgmentRecord> judgments_;
  std::vector<Json> descriptions_;
  std::size_t torn_lines_ = 0;
};

inline Json session_to_json(const Session &s) {
  Json o;
  o["session_id"] = s.session_id;
  o["rater_id"] = s.rater_id;
  o["size"] = s.trials.size();
  o["cursor"] = s.cursor;
  o["status"] = s.complete() ? "complete" : "open";
  return o;
}

inline Json trial_to_json(const TrialView &v) {
  Json o;
  o["session_id"] = v.session_id;
  o["pair_id"] = v.pair_id;
  o["left_audio"] = "/audio/" + v.left_utterance;
  o["right_audio"] = "/audio/" + v.right_utterance;
  o["index"] = v.index;
  o["total"] = v.total;
  o["progress"] = v.progress();
  return o;
}

inline Json demographics_to_json(const DemographicsSummary &d) {
  Json o;
  o["raters"] = d.raters;
  Json age = Json::object(), gender = Json::object(), fam = Json::object();
  for (auto *b : kAgeBands) age[b] = d.age_band.at(b);
  for (auto *g : kGenders) gender[g] = d.gender.at(g);
  for (auto *f : kFamiliarity) fam[f] = d.familiarity.at(f);
  o["age_band"] = age;
  o["gender"] = gender;
  o["familiarity"] = fam;
  return o;
}

namespace detail {

// Left-justifies to `width` code points (the group labels include ≤ and ≥).
inline std::string pad_utf8(const std::string &s, std::size_t width) {
  std::size_t points = 0;
  for (unsigned char c : s) points += (c & 0xC0) != 0x80;
  return s + std::string(points < width ? width - points : 0, ' ');
}

}  // namespace detail

/// Category / group / count / percentage table.
inline std::string format_demographics(const DemographicsSummary &d) {
  std::ostringstream os;
  char buf[64];
  os << detail::pad_utf8("Category", 14) << detail::pad_utf8("Group", 16) << "     n       %\n";
  auto block = [&](std::string category, const auto &groups,
                   const std::map<std::string, std::size_t> &counts) {
    for (const auto *g : groups) {
      const auto n = counts.at(g);
      std::snprintf(buf, sizeof buf, "%6zu %6.1f%%\n", n,
                    d.raters ? 100.0 * static_cast<double>(n) / static_cast<double>(d.raters)
                             : 0.0);
      os << detail::pad_utf8(category, 14) << detail::pad_utf8(g, 16) << buf;
      category.clear();
    }
  };
  block("Age", kAgeBands, d.age_band);
  block("Gender", kGenders, d.gender);
  block("Familiarity", kFamiliarity, d.familiarity);
  std::snprintf(buf, sizeof buf, "%6zu\n", d.raters);
  os << detail::pad_utf8("Total", 30) << buf;
  return os.str();
}

}  // namespace stylerank

#endif  // STYLERANK_COLLECT_HPP_
