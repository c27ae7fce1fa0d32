// stylerank/corpus.hpp

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

// Utterance manifests and the screening filter that turns a raw corpus into
// the evaluation pool. All screening quantities (script-likeness, CER,
// predicted MOS, arousal) are precomputed by external models and arrive as
// manifest fields.

#ifndef STYLERANK_CORPUS_HPP_
#define STYLERANK_CORPUS_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stylerank/error.hpp"
#include "stylerank/lineformat.hpp"

namespace stylerank {

enum class Split { kTrain, kTest, kUnassigned };

inline const char *split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

inline Split parse_split(const std::string &s, std::size_t line = 0) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  if (s == "unassigned") return Split::kUnassigned;
  throw ParseError("unknown split '" + s + "'", line);
}

struct UtteranceRecord {
  std::string id;
  std::string source;
  Split split = Split::kUnassigned;
  std::string audio_path;
  double duration_s = 0.0;
  std::string transcript;
  int script_likeness = 1;
  double cer = 0.0;
  double predicted_mos = 1.0;
  double arousal = 0.0;
  std::uint32_t speaker_embedding_ref = 0;
  std::uint32_t text_embedding_ref = 0;
};

/// Throws ValidationError if `r` violates a record invariant.
inline void validate_record(const UtteranceRecord &r, std::size_t line = 0) {
  auto fail = [&](const std::string &what) {
    std::string prefix = line ? "line " + std::to_string(line) + ": " : "";
    throw ValidationError(prefix + "record '" + r.id + "': " + what);
  };
  if (r.id.empty()) fail("empty id");
  if (!(std::isfinite(r.duration_s) && r.duration_s > 0.0))
    fail("duration_s must be > 0");
  if (r.script_likeness < 1 || r.script_likeness > 5)
    fail("script_likeness must be in 1..5");
  if (!(r.cer >= 0.0 && r.cer <= 1.0)) fail("cer must be in [0,1]");
  if (!std::isfinite(r.predicted_mos)) fail("predicted_mos must be finite");
  if (!std::isfinite(r.arousal)) fail("arousal must be finite");
}

inline Json record_to_json(const UtteranceRecord &r) {
  Json o;
  o["id"] = r.id;
  o["source"] = r.source;
  o["split"] = split_name(r.split);
  o["audio_path"] = r.audio_path;
  o["duration_s"] = r.duration_s;
  o["transcript"] = r.transcript;
  o["script_likeness"] = r.script_likeness;
  o["cer"] = r.cer;
  o["predicted_mos"] = r.predicted_mos;
  o["arousal"] = r.arousal;
  o["speaker_embedding_ref"] = r.speaker_embedding_ref;
  o["text_embedding_ref"] = r.text_embedding_ref;
  return o;
}

inline UtteranceRecord record_from_line(const Line &line) {
  UtteranceRecord r;
  r.id = get_string(line, "id");
  r.source = get_string(line, "source");
  r.split = parse_split(get_string(line, "split"), line.number);
  r.audio_path = get_string(line, "audio_path");
  r.duration_s = get_number(line, "duration_s");
  r.transcript = get_string(line, "transcript");
  r.cer = get_number(line, "cer");
  r.predicted_mos = get_number(line, "predicted_mos");
  r.arousal = get_number(line, "arousal");
  const long long likeness = get_integer(line, "script_likeness");
  if (likeness < 1 || likeness > 5)
    throw ValidationError("line " + std::to_string(line.number) +
                          ": script_likeness must be in 1..5");
  r.script_likeness = static_cast<int>(likeness);
  auto ref = [&](const char *key) {
    const long long v = get_integer(line, key);
    if (v < 0 || v > UINT32_MAX)
      throw ValidationError("line " + std::to_string(line.number) + ": " +
                            key + " out of range");
    return static_cast<std::uint32_t>(v);
  };
  r.speaker_embedding_ref = ref("speaker_embedding_ref");
  r.text_embedding_ref = ref("text_embedding_ref");
  validate_record(r, line.number);
  return r;
}

inline std::vector<UtteranceRecord> records_from_lines(
    const std::vector<Line> &lines) {
  std::vector<UtteranceRecord> out;
  out.reserve(lines.size());
  std::unordered_set<std::string> seen;
  for (const auto &line : lines) {
    out.push_back(record_from_line(line));
    if (!seen.insert(out.back().id).second)
      throw ValidationError("line " + std::to_string(line.number) +
                            ": duplicate id '" + out.back().id + "'");
  }
  return out;
}

inline std::vector<UtteranceRecord> load_manifest(
    const std::filesystem::path &path) {
  return records_from_lines(read_lines(path));
}

inline void save_manifest(const std::filesystem::path &path,
                          const std::vector<UtteranceRecord> &records) {
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const auto &r : records) lines.push_back(record_to_json(r));
  write_lines(path, lines);
}

struct FilterConfig {
  int max_script_likeness = 2;
  double min_duration_s = 2.0;
  double max_duration_s = 10.0;
  double min_mos_exclusive = 3.0;
  double max_cer = 0.15;

  void validate() const {
    if (!(std::isfinite(min_duration_s) && std::isfinite(max_duration_s) &&
          std::isfinite(min_mos_exclusive) && std::isfinite(max_cer)))
      throw ConfigError("filter thresholds must be finite");
    if (!(min_duration_s < max_duration_s))
      throw ConfigError("min_duration_s must be < max_duration_s");
  }
};

/// True iff `r` passes every screening gate. Duration bounds are inclusive;
/// the MOS bound is strict.
inline bool passes_filter(const UtteranceRecord &r, const FilterConfig &cfg) {
  return r.script_likeness <= cfg.max_script_likeness &&
         r.duration_s >= cfg.min_duration_s &&
         r.duration_s <= cfg.max_duration_s &&
         r.predicted_mos > cfg.min_mos_exclusive && r.cer <= cfg.max_cer;
}

inline std::vector<UtteranceRecord> filter_pool(
    const std::vector<UtteranceRecord> &records, const FilterConfig &cfg) {
  cfg.validate();
  std::vector<UtteranceRecord> out;
  for (const auto &r : records)
    if (passes_filter(r, cfg)) out.push_back(r);
  return out;
}

using CorpusStats = std::map<std::pair<std::string, Split>, std::size_t>;

inline CorpusStats corpus_stats(const std::vector<UtteranceRecord> &records) {
  CorpusStats stats;
  for (const auto &r : records) ++stats[{r.source, r.split}];
  return stats;
}

/// Source x {train, test, total} table.
inline std::string format_corpus_stats(const CorpusStats &stats) {
  std::map<std::string, std::array<std::size_t, 3>> rows;
  std::array<std::size_t, 3> total{};
  for (const auto &[key, n] : stats) {
    auto &row = rows[key.first];
    if (key.second == Split::kTrain) row[0] += n;
    if (key.second == Split::kTest) row[1] += n;
    row[2] += n;
  }
  std::ostringstream os;
  auto line = [&](const std::string &name, const std::array<std::size_t, 3> &c) {
    os << name;
    for (std::size_t pad = name.size(); pad < 16; ++pad) os << ' ';
    os << '\t' << c[0] << '\t' << c[1] << '\t' << c[2] << '\n';
  };
  os << "Corpus          \tTrain\tTest\tTotal\n";
  for (const auto &[name, c] : rows) {
    line(name, c);
    for (int i = 0; i < 3; ++i) total[i] += c[i];
  }
  line("Total", total);
  return os.str();
}

}  // namespace stylerank

#endif  // STYLERANK_CORPUS_HPP_
