// stylerank/judgment.hpp

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

// A/B judgment records as written by the collection service and the simulator
// and read by analysis and training.

#ifndef STYLERANK_JUDGMENT_HPP_
#define STYLERANK_JUDGMENT_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stylerank/error.hpp"
#include "stylerank/lineformat.hpp"
#include "stylerank/pairing.hpp"

namespace stylerank {

/// Canonical pair slot: A is utt_a, B is utt_b.
enum class Slot { kA, kB };

/// Presentation side as seen by the rater.
enum class Side { kLeft, kRight };

inline const char *slot_name(Slot s) { return s == Slot::kA ? "A" : "B"; }
inline const char *side_name(Side s) { return s == Side::kLeft ? "left" : "right"; }

inline Slot parse_slot(const std::string &s, std::size_t line = 0) {
  if (s == "A") return Slot::kA;
  if (s == "B") return Slot::kB;
  throw ParseError("expected slot A or B, got '" + s + "'", line);
}

inline Side parse_side(const std::string &s, std::size_t line = 0) {
  if (s == "left") return Side::kLeft;
  if (s == "right") return Side::kRight;
  throw ParseError("expected side left or right, got '" + s + "'", line);
}

inline Slot other(Slot s) { return s == Slot::kA ? Slot::kB : Slot::kA; }

/// Maps the side a rater clicked to the pair slot it showed.
inline Slot canonical_choice(Slot presented_left, Side side_chosen) {
  return side_chosen == Side::kLeft ? presented_left : other(presented_left);
}

struct JudgmentRecord {
  std::string pair_id;
  std::string rater_id;
  Slot choice = Slot::kA;
  std::string session_id;
  Slot presented_left = Slot::kA;
  std::string timestamp;
  // Raw click, kept so canonicalization can be audited from the log.
  std::optional<Side> side_chosen;
};

inline Json judgment_to_json(const JudgmentRecord &j) {
  Json o;
  o["pair_id"] = j.pair_id;
  o["rater_id"] = j.rater_id;
  o["choice"] = slot_name(j.choice);
  o["session_id"] = j.session_id;
  o["presented_left"] = slot_name(j.presented_left);
  if (j.side_chosen) o["side_chosen"] = side_name(*j.side_chosen);
  o["timestamp"] = j.timestamp;
  return o;
}

inline JudgmentRecord judgment_from_line(const Line &line) {
  JudgmentRecord j;
  j.pair_id = get_string(line, "pair_id");
  j.rater_id = get_string(line, "rater_id");
  j.choice = parse_slot(get_string(line, "choice"), line.number);
  j.session_id = get_string(line, "session_id");
  j.presented_left = parse_slot(get_string(line, "presented_left"), line.number);
  j.timestamp = get_string(line, "timestamp");
  if (line.object.contains("side_chosen")) {
    j.side_chosen = parse_side(get_string(line, "side_chosen"), line.number);
    if (canonical_choice(j.presented_left, *j.side_chosen) != j.choice)
      throw ValidationError("line " + std::to_string(line.number) +
                            ": choice disagrees with presented_left/side_chosen");
  }
  return j;
}

/// Reads judgment lines. Lines carrying a "type" other than "judgment" (as in
/// the service's raw log) are skipped.
inline std::vector<JudgmentRecord> load_judgments(const std::filesystem::path &path) {
  std::vector<JudgmentRecord> out;
  for (const auto &line : read_lines(path)) {
    if (line.object.contains("type") && line.object["type"] != "judgment") continue;
    out.push_back(judgment_from_line(line));
  }
  return out;
}

inline void save_judgments(const std::filesystem::path &path,
                           const std::vector<JudgmentRecord> &judgments) {
  std::vector<Json> lines;
  lines.reserve(judgments.size());
  for (const auto &j : judgments) lines.push_back(judgment_to_json(j));
  write_lines(path, lines);
}

/// pair_id -> pair lookup that rejects dangling references.
class PairIndex {
 public:
  explicit PairIndex(const std::vector<ComparisonPair> &pairs) : pairs_(&pairs) {
    for (std::size_t i = 0; i < pairs.size(); ++i) index_[pairs[i].pair_id] = i;
  }

  const ComparisonPair &at(const std::string &pair_id) const {
    auto it = index_.find(pair_id);
    if (it == index_.end())
      throw ValidationError("judgment refers to unknown pair_id '" + pair_id + "'");
    return (*pairs_)[it->second];
  }

  bool contains(const std::string &pair_id) const {
    return index_.count(pair_id) != 0;
  }

 private:
  const std::vector<ComparisonPair> *pairs_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline const std::string &winner_of(const ComparisonPair &p, const JudgmentRecord &j) {
  return j.choice == Slot::kA ? p.utt_a : p.utt_b;
}

inline const std::string &loser_of(const ComparisonPair &p, const JudgmentRecord &j) {
  return j.choice == Slot::kA ? p.utt_b : p.utt_a;
}

}  // namespace stylerank

#endif  // STYLERANK_JUDGMENT_HPP_
