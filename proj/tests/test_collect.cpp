// tests/test_collect.cpp

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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "stylerank/analysis.hpp"
#include "stylerank/collect.hpp"
#include "stylerank/collect_http.hpp"

namespace stylerank {
namespace {

namespace fs = std::filesystem;

std::vector<ComparisonPair> make_pool(std::size_t n) {
  std::vector<ComparisonPair> pool;
  for (std::size_t i = 0; i < n; ++i)
    pool.push_back({"p" + std::to_string(i), "u" + std::to_string(i), "u" + std::to_string(i + 1),
                    Split::kTrain, false, 0.5, 0.1});
  return pool;
}

RaterProfile profile(const std::string &id) { return {id, "30s", "female", "high"}; }

class CollectTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stylerank_collect_" + std::string(
                ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  ServiceConfig config(std::uint64_t seed = 0) const {
    ServiceConfig c;
    c.log_path = dir_ / "collect.log";
    c.seed = seed;
    return c;
  }

  std::string log_text() const {
    std::ifstream in(dir_ / "collect.log", std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  static std::string fixed_clock() { return "2026-01-01T00:00:00.000Z"; }

  fs::path dir_;
};

// Judges every remaining trial of `session_id`, alternating sides.
void finish_session(CollectService &svc, const std::string &session_id) {
  int k = 0;
  while (!svc.find_session(session_id)->complete()) {
    const auto t = svc.next_trial(session_id);
    svc.submit_judgment(session_id, t.pair_id, k++ % 3 ? Side::kLeft : Side::kRight);
  }
}

TEST_F(CollectTest, FreshRaterGetsTwentyFiveDistinctPairs) {
  CollectService svc(make_pool(100), config(), fixed_clock);
  const auto s = svc.create_session(profile("r1"));
  EXPECT_EQ(s.trials.size(), 25u);
  std::set<std::string> ids;
  for (const auto &t : s.trials) ids.insert(t.pair_id);
  EXPECT_EQ(ids.size(), 25u);
}

TEST_F(CollectTest, ExhaustedRaterIsRefusedWithRemainingCount) {
  CollectService svc(make_pool(60), config(), fixed_clock);
  svc.create_session(profile("r1"));
  svc.create_session(profile("r1"));
  try {
    svc.create_session(profile("r1"));
    FAIL() << "expected exhaustion";
  } catch (const ServiceError &e) {
    EXPECT_NE(std::string(e.what()).find("only 10 unjudged"), std::string::npos) << e.what();
  }
}

TEST_F(CollectTest, SessionCap) {
  auto cfg = config();
  cfg.session_size = 2;
  CollectService svc(make_pool(100), cfg, fixed_clock);
  for (int i = 0; i < 10; ++i) svc.create_session(profile("r1"));
  EXPECT_THROW(svc.create_session(profile("r1")), ServiceError);
  EXPECT_NO_THROW(svc.create_session(profile("r2")));
}

TEST_F(CollectTest, InvalidProfileRejected) {
  CollectService svc(make_pool(30), config(), fixed_clock);
  EXPECT_THROW(svc.create_session({"r", "60s", "female", "high"}), ServiceError);
  EXPECT_THROW(svc.create_session({"r", "30s", "x", "high"}), ServiceError);
  EXPECT_THROW(svc.create_session({"", "30s", "male", "high"}), ServiceError);
  EXPECT_TRUE(log_text().empty());
}

// Before each session, recount judgments from the log on disk and check the
// assignment takes the least-judged pairs the rater has not seen.
TEST_F(CollectTest, LeastJudgedAssignmentMatchesLogRecount) {
  auto cfg = config(5);
  cfg.session_size = 7;
  const auto pool = make_pool(40);
  CollectService svc(pool, cfg, fixed_clock);
  for (int round = 0; round < 12; ++round) {
    const std::string rater = "r" + std::to_string(round % 4);
    std::map<std::string, int> count;
    std::set<std::string> seen;
    for (const auto &line : parse_lines(std::string_view(log_text()))) {
      if (line.object["type"] == "judgment") ++count[line.object["pair_id"].get<std::string>()];
      if (line.object["type"] == "session" && line.object["rater_id"] == rater)
        for (const auto &t : line.object["trials"]) seen.insert(t["pair_id"].get<std::string>());
    }
    const auto s = svc.create_session(profile(rater));
    std::set<std::string> chosen;
    int max_chosen = 0;
    for (const auto &t : s.trials) {
      EXPECT_FALSE(seen.count(t.pair_id)) << "repeat for " << rater;
      chosen.insert(t.pair_id);
      max_chosen = std::max(max_chosen, count[t.pair_id]);
    }
    for (const auto &p : pool) {
      if (!seen.count(p.pair_id) && !chosen.count(p.pair_id)) {
        EXPECT_GE(count[p.pair_id], max_chosen) << p.pair_id;
      }
    }
    for (const auto &p : pool)
      EXPECT_EQ(svc.judgment_count(p.pair_id), std::size_t(count[p.pair_id]));
    finish_session(svc, s.session_id);
  }
}

TEST_F(CollectTest, NextTrialProgressIdempotenceAndCompletion) {
  CollectService svc(make_pool(50), config(), fixed_clock);
  const auto s = svc.create_session(profile("r1"));
  const auto a = svc.next_trial(s.session_id);
  const auto b = svc.next_trial(s.session_id);
  EXPECT_EQ(a.progress(), "1 of 25");
  EXPECT_EQ(trial_to_json(a), trial_to_json(b));
  finish_session(svc, s.session_id);
  EXPECT_THROW(svc.next_trial(s.session_id), ServiceError);
  try {
    svc.next_trial("nope");
  } catch (const ServiceError &e) {
    EXPECT_EQ(e.status(), 404);
  }
}

TEST_F(CollectTest, AudioOrderFollowsPresentation) {
  CollectService svc(make_pool(50), config(3), fixed_clock);
  const auto s = svc.create_session(profile("r1"));
  const auto &first = s.trials.front();
  const auto v = svc.next_trial(s.session_id);
  const auto n = first.pair_id.substr(1);
  const std::string a = "u" + n, b = "u" + std::to_string(std::stoi(n) + 1);
  EXPECT_EQ(v.left_utterance, first.presented_left == Slot::kA ? a : b);
  EXPECT_EQ(v.right_utterance, first.presented_left == Slot::kA ? b : a);
}

TEST_F(CollectTest, CanonicalizationRule) {
  EXPECT_EQ(canonical_choice(Slot::kB, Side::kLeft), Slot::kB);
  EXPECT_EQ(canonical_choice(Slot::kB, Side::kRight), Slot::kA);
  EXPECT_EQ(canonical_choice(Slot::kA, Side::kLeft), Slot::kA);
  EXPECT_EQ(canonical_choice(Slot::kA, Side::kRight), Slot::kB);

  CollectService svc(make_pool(50), config(), fixed_clock);
  finish_session(svc, svc.create_session(profile("r1")).session_id);
  // judgment_from_line rejects any record whose choice disagrees with the click.
  std::size_t n = 0;
  for (const auto &line : parse_lines(std::string_view(log_text()))) {
    if (line.object["type"] != "judgment") continue;
    const auto j = judgment_from_line(line);
    ASSERT_TRUE(j.side_chosen.has_value());
    EXPECT_EQ(j.choice, canonical_choice(j.presented_left, *j.side_chosen));
    ++n;
  }
  EXPECT_EQ(n, 25u);
}

TEST_F(CollectTest, OutOfOrderAndDuplicateSubmitsLeaveLogUnchanged) {
  CollectService svc(make_pool(50), config(), fixed_clock);
  const auto s = svc.create_session(profile("r1"));
  const auto t0 = svc.next_trial(s.session_id);
  svc.submit_judgment(s.session_id, t0.pair_id, Side::kLeft);
  const auto before = log_text();
  EXPECT_THROW(svc.submit_judgment(s.session_id, t0.pair_id, Side::kLeft), ServiceError);
  EXPECT_THROW(svc.submit_judgment(s.session_id, s.trials[5].pair_id, Side::kLeft),
               ServiceError);
  EXPECT_THROW(svc.submit_judgment("nope", t0.pair_id, Side::kLeft), ServiceError);
  EXPECT_EQ(log_text(), before);
  EXPECT_EQ(svc.find_session(s.session_id)->cursor, 1u);
}

TEST_F(CollectTest, TwentyFiveSubmissionsCompleteSession) {
  CollectService svc(make_pool(50), config(), fixed_clock);
  const auto s = svc.create_session(profile("r1"));
  const auto lines_before = parse_lines(std::string_view(log_text())).size();
  finish_session(svc, s.session_id);
  EXPECT_TRUE(svc.find_session(s.session_id)->complete());
  EXPECT_EQ(parse_lines(std::string_view(log_text())).size(), lines_before + 25);
  EXPECT_EQ(svc.judgments().size(), 25u);
}

TEST_F(CollectTest, DescriptionRules) {
  CollectService svc(make_pool(50), config(), fixed_clock);
  const auto s = svc.create_session(profile("r1"));
  EXPECT_THROW(svc.submit_description(s.session_id, "early"), ServiceError);
  finish_session(svc, s.session_id);
  EXPECT_NO_THROW(svc.submit_description(s.session_id, ""));
  EXPECT_THROW(svc.submit_description(s.session_id, "again"), ServiceError);
  const auto d = svc.descriptions();
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0]["session_id"], s.session_id);
  EXPECT_EQ(d[0]["text"], "");
}

TEST_F(CollectTest, EmptyExport) {
  CollectService svc(make_pool(30), config(), fixed_clock);
  EXPECT_EQ(svc.export_judgments(), "");
  const auto d = svc.demographics();
  EXPECT_EQ(d.raters, 0u);
  for (const auto &[_, n] : d.age_band) EXPECT_EQ(n, 0u);
}

TEST_F(CollectTest, DemographicsColumnsSumToRaters) {
  auto cfg = config();
  cfg.session_size = 1;
  CollectService svc(make_pool(30), cfg, fixed_clock);
  svc.create_session({"a", "≤20s", "male", "low"});
  svc.create_session({"b", "≥50s", "female", "high"});
  svc.create_session({"c", "30s", "other/unstated", "high"});
  svc.create_session({"a", "40s", "female", "medium"});  // later profile ignored
  const auto d = svc.demographics();
  EXPECT_EQ(d.raters, 3u);
  for (const auto *m : {&d.age_band, &d.gender, &d.familiarity}) {
    std::size_t sum = 0;
    for (const auto &[_, n] : *m) sum += n;
    EXPECT_EQ(sum, 3u);
  }
  EXPECT_EQ(d.age_band.at("≤20s"), 1u);
  EXPECT_EQ(d.familiarity.at("high"), 2u);
  const auto table = format_demographics(d);
  EXPECT_NE(table.find("33.3%"), std::string::npos) << table;
}

TEST_F(CollectTest, ExportRecountMatchesServiceCounters) {
  const auto pool = make_pool(60);
  CollectService svc(pool, config(9), fixed_clock);
  for (int r = 0; r < 5; ++r)
    finish_session(svc, svc.create_session(profile("r" + std::to_string(r))).session_id);
  const auto path = dir_ / "export.jsonl";
  {
    std::ofstream out(path);
    out << svc.export_judgments();
  }
  const auto exported = load_judgments(path);
  EXPECT_EQ(exported.size(), 125u);
  const auto wins = empirical_win_rate(exported, pool);
  for (const auto &p : pool) {
    std::size_t n = 0;
    for (const auto &j : exported) n += j.pair_id == p.pair_id;
    EXPECT_EQ(n, svc.judgment_count(p.pair_id));
  }
  std::size_t appearances = 0;
  for (const auto &[_, w] : wins) appearances += w.appearances;
  EXPECT_EQ(appearances, 250u);
}

TEST_F(CollectTest, RestartReplaysLog) {
  const auto pool = make_pool(80);
  std::string session_id, exported;
  std::size_t cursor = 0;
  {
    CollectService svc(pool, config(), fixed_clock);
    finish_session(svc, svc.create_session(profile("r1")).session_id);
    const auto s = svc.create_session(profile("r1"));
    session_id = s.session_id;
    for (int i = 0; i < 7; ++i)
      svc.submit_judgment(session_id, svc.next_trial(session_id).pair_id, Side::kRight);
    cursor = svc.find_session(session_id)->cursor;
    exported = svc.export_judgments();
  }
  CollectService svc(pool, config(), fixed_clock);
  EXPECT_EQ(svc.export_judgments(), exported);
  EXPECT_EQ(svc.find_session(session_id)->cursor, cursor);
  EXPECT_EQ(svc.demographics().raters, 1u);
  // The rater's earlier pairs are still excluded after restart.
  const auto s3 = svc.create_session(profile("r1"));
  for (const auto &t : s3.trials)
    for (const auto &j : svc.judgments()) EXPECT_NE(t.pair_id, j.pair_id);
}

TEST_F(CollectTest, TornTailIsSkippedWithoutRewritingBytes) {
  const auto pool = make_pool(60);
  {
    CollectService svc(pool, config(), fixed_clock);
    const auto s = svc.create_session(profile("r1"));
    svc.submit_judgment(s.session_id, svc.next_trial(s.session_id).pair_id, Side::kLeft);
  }
  {
    std::ofstream out(dir_ / "collect.log", std::ios::app | std::ios::binary);
    out << R"({"type":"judgment","pair_id":"p)";
  }
  const auto before = log_text();
  CollectService svc(pool, config(), fixed_clock);
  EXPECT_EQ(svc.torn_lines(), 1u);
  EXPECT_EQ(svc.judgments().size(), 1u);
  EXPECT_EQ(log_text().substr(0, before.size()), before);
  svc.submit_judgment("s-000000", svc.next_trial("s-000000").pair_id, Side::kLeft);
  CollectService again(pool, config(), fixed_clock);
  EXPECT_EQ(again.judgments().size(), 2u);
}

TEST_F(CollectTest, PresentationBalance) {
  auto cfg = config(11);
  cfg.session_size = 50;
  cfg.session_cap = 1000;
  CollectService svc(make_pool(100), cfg, fixed_clock);
  std::size_t a = 0, n = 0;
  for (int r = 0; r < 40; ++r) {
    for (const auto &t : svc.create_session(profile("r" + std::to_string(r))).trials) {
      a += t.presented_left == Slot::kA;
      ++n;
    }
  }
  ASSERT_GE(n, 1000u);
  const double f = static_cast<double>(a) / static_cast<double>(n);
  EXPECT_GE(f, 0.45);
  EXPECT_LE(f, 0.55);
}

TEST_F(CollectTest, ConcurrentRatersProduceConsistentLog) {
  const auto pool = make_pool(200);
  std::vector<JudgmentRecord> live;
  {
    CollectService svc(pool, config(2));
    std::vector<std::thread> workers;
    for (int w = 0; w < 6; ++w)
      workers.emplace_back([&svc, w] {
        for (int k = 0; k < 2; ++k)
          finish_session(svc, svc.create_session(profile("w" + std::to_string(w))).session_id);
      });
    for (auto &t : workers) t.join();
    live = svc.judgments();
  }
  EXPECT_EQ(live.size(), 6u * 2 * 25);
  CollectService replayed(pool, config(2));
  EXPECT_EQ(replayed.judgments().size(), live.size());
  std::map<std::string, std::set<std::string>> per_rater;
  for (const auto &j : replayed.judgments())
    EXPECT_TRUE(per_rater[j.rater_id].insert(j.pair_id).second) << "repeat for " << j.rater_id;
}

TEST_F(CollectTest, HttpRoutes) {
  const auto pool = make_pool(40);
  std::vector<UtteranceRecord> records(1);
  records[0].id = "u0";
  records[0].audio_path = "u0.wav";
  {
    std::ofstream out(dir_ / "u0.wav", std::ios::binary);
    out << "RIFFdata";
  }
  const auto audio = audio_index(records, dir_);
  CollectService svc(pool, config(), fixed_clock);
  httplib::Server server;
  register_routes(server, svc, audio);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  auto bad = cli.Post("/sessions", R"({"rater_id":"r1"})", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto res = cli.Post("/sessions",
                      R"({"rater_id":"r1","age_band":"40s","gender":"male","familiarity":"low"})",
                      "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 201) << res->body;
  const auto session = Json::parse(res->body);
  const std::string sid = session["session_id"];
  EXPECT_EQ(session["size"], 25);

  for (int k = 0; k < 25; ++k) {
    auto next = cli.Get("/sessions/" + sid + "/next");
    ASSERT_EQ(next->status, 200);
    const auto trial = Json::parse(next->body);
    EXPECT_EQ(trial["progress"], std::to_string(k + 1) + " of 25");
    Json body = {{"pair_id", trial["pair_id"]}, {"side_chosen", k % 2 ? "left" : "right"}};
    auto ack = cli.Post("/sessions/" + sid + "/judgments", body.dump(), "application/json");
    ASSERT_EQ(ack->status, 200) << ack->body;
    EXPECT_EQ(Json::parse(ack->body)["status"], k == 24 ? "complete" : "open");
  }
  EXPECT_EQ(cli.Get("/sessions/" + sid + "/next")->status, 409);
  EXPECT_EQ(cli.Get("/sessions/zzz/next")->status, 404);
  EXPECT_EQ(cli.Post("/sessions/" + sid + "/description", R"({"text":"bright voice"})",
                     "application/json")->status, 200);
  EXPECT_EQ(cli.Post("/sessions/" + sid + "/description", R"({"text":"x"})",
                     "application/json")->status, 409);

  auto wav = cli.Get("/audio/u0");
  EXPECT_EQ(wav->status, 200);
  EXPECT_EQ(wav->get_header_value("Content-Type"), "audio/wav");
  EXPECT_EQ(wav->body, "RIFFdata");
  EXPECT_EQ(cli.Get("/audio/u9")->status, 404);

  auto exp = cli.Get("/export");
  EXPECT_EQ(exp->status, 200);
  EXPECT_EQ(exp->body, svc.export_judgments());
  EXPECT_EQ(parse_lines(std::string_view(exp->body)).size(), 25u);
  auto demo = Json::parse(cli.Get("/export/demographics")->body);
  EXPECT_EQ(demo["raters"], 1);
  EXPECT_EQ(demo["age_band"]["40s"], 1);

  server.stop();
  th.join();
}

}  // namespace
}  // namespace stylerank
