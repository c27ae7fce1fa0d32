// tools/stylerank.cpp

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

// Pipeline driver. Every stage is a subcommand:
//
//   stylerank simulate --out out/simulate --seed 7
//   stylerank extract  --manifest out/simulate/manifest.jsonl
//   stylerank analyze  --pairs ... --proxies ... --judgments ...
//
// A config file (--config) holds JSON objects, one per line; top-level keys
// set global options and a nested object named after a subcommand sets that
// subcommand's options. Command-line flags win over the file.
// Exit status: 0 success, 1 runtime error, 2 usage error.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "stylerank/stylerank.hpp"

namespace fs = std::filesystem;
using namespace stylerank;

namespace {

// Reads the config format above into CLI11 items.
class JsonLinesConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App *app, bool default_also, bool,
                        std::string) const override {
    Json out = Json::object();
    for (const CLI::Option *opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const auto &results = opt->results();
      if (!results.empty())
        out[opt->get_lnames().front()] = results.size() == 1 ? Json(results[0]) : Json(results);
      else if (default_also && !opt->get_default_str().empty())
        out[opt->get_lnames().front()] = opt->get_default_str();
    }
    return out.dump() + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream &in) const override {
    std::vector<CLI::ConfigItem> items;
    for (const auto &line : parse_lines(in)) flatten(line.object, {}, items);
    return items;
  }

 private:
  static std::string scalar(const Json &v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  static void flatten(const Json &obj, const std::vector<std::string> &parents,
                      std::vector<CLI::ConfigItem> &items) {
    for (const auto &[key, value] : obj.items()) {
      std::string name = key;
      std::replace(name.begin(), name.end(), '_', '-');
      if (value.is_object()) {
        auto p = parents;
        p.push_back(name);
        flatten(value, p, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = name;
      if (value.is_array()) {
        for (const auto &v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

void log(const std::string &stage, const std::string &msg) {
  std::cerr << "stylerank " << stage << ": " << msg << "\n";
}

void write_text(const fs::path &path, const std::string &text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

void ensure_parent(const fs::path &path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

// Frame features when `frames_dir` is set, otherwise z-scored proxies.
FeatureStore load_features(const std::string &frames_dir, const std::string &proxies) {
  if (!frames_dir.empty()) return FeatureStore::from_directory(frames_dir);
  if (!proxies.empty()) return FeatureStore::from_proxies(load_proxies(proxies));
  throw ConfigError("one of --frames or --proxies is required");
}

// ---- filter ---------------------------------------------------------------

struct FilterArgs {
  std::string manifest, out = "out/filter/manifest.jsonl";
  FilterConfig cfg;
};

void run_filter(const FilterArgs &a) {
  const auto records = load_manifest(a.manifest);
  const auto kept = filter_pool(records, a.cfg);
  ensure_parent(a.out);
  save_manifest(a.out, kept);
  std::cout << format_corpus_stats(corpus_stats(kept));
  log("filter", std::to_string(kept.size()) + " of " + std::to_string(records.size()) +
                    " utterances kept");
}

// ---- sample ---------------------------------------------------------------

struct SampleArgs {
  std::string manifest, speaker_emb, out = "out/sample/manifest.jsonl", projection;
  TsneOptions tsne;
  double eps = 2.0;
  std::size_t min_pts = 8;
  std::size_t max_per_cluster = 50;
  std::uint64_t seed = 0;
};

void run_sample(SampleArgs a) {
  const auto records = load_manifest(a.manifest);
  const auto spk = load_embedding(a.speaker_emb);
  EmbeddingMatrix rows(records.size(), spk.dims());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto src = spk.row(records[i].speaker_embedding_ref);
    std::copy(src.begin(), src.end(), rows.row(i).begin());
  }
  a.tsne.seed = a.seed;
  const auto proj = tsne_project(rows, a.tsne);
  const auto labels = cluster_points(proj, a.eps, a.min_pts);
  const auto kept = cap_clusters(records, labels, a.max_per_cluster, a.seed);
  ensure_parent(a.out);
  save_manifest(a.out, kept);
  if (!a.projection.empty()) {
    std::ostringstream csv;
    csv << "id,x,y,cluster\n";
    for (std::size_t i = 0; i < records.size(); ++i)
      csv << records[i].id << ',' << proj.points[i][0] << ',' << proj.points[i][1] << ','
          << labels[i] << '\n';
    write_text(a.projection, csv.str());
  }
  const int clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  log("sample", std::to_string(clusters) + " clusters, " + std::to_string(kept.size()) +
                    " of " + std::to_string(records.size()) + " utterances kept");
}

// ---- pair -----------------------------------------------------------------

struct PairArgs {
  std::string manifest, text_emb, speaker_emb, out = "out/pair/pairs.jsonl";
  std::size_t train_quota = 1600, test_quota = 400;
  PairingConfig cfg;
};

void run_pair(const PairArgs &a) {
  const auto records = load_manifest(a.manifest);
  const auto text = load_embedding(a.text_emb);
  const auto spk = load_embedding(a.speaker_emb);
  std::vector<ComparisonPair> all;
  for (Split s : {Split::kTrain, Split::kTest}) {
    std::vector<UtteranceRecord> pool;
    for (const auto &r : records)
      if (r.split == s) pool.push_back(r);
    PairingConfig cfg = a.cfg;
    cfg.quota = s == Split::kTrain ? a.train_quota : a.test_quota;
    if (cfg.quota == 0) continue;
    if (pool.size() < 2) {
      log("pair", std::string("skipping ") + split_name(s) + " split: fewer than 2 utterances");
      continue;
    }
    const auto res = build_pairs(pool, text, spk, cfg);
    if (res.shortfall)
      log("pair", std::string("warning: ") + split_name(s) + " quota short by " +
                      std::to_string(res.shortfall));
    log("pair", std::string(split_name(s)) + ": " + std::to_string(res.pairs.size()) +
                    " pairs, " + std::to_string(res.cross_phase_pairs) + " cross-source");
    all.insert(all.end(), res.pairs.begin(), res.pairs.end());
  }
  ensure_parent(a.out);
  save_pairs(a.out, all);
}

// ---- extract --------------------------------------------------------------

struct ExtractArgs {
  std::string manifest, out = "out/extract/proxies.jsonl", audio_root;
  unsigned jobs = 0;
};

void run_extract(const ExtractArgs &a) {
  const auto records = load_manifest(a.manifest);
  const fs::path root =
      a.audio_root.empty() ? fs::path(a.manifest).parent_path() : fs::path(a.audio_root);
  std::vector<Json> lines(records.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < records.size();) {
      const auto &r = records[i];
      try {
        fs::path p = r.audio_path;
        if (p.is_relative()) p = root / p;
        lines[i] = proxies_to_json(r.id, extract_proxies(r, load_wav(p)));
      } catch (const std::exception &e) {
        lines[i] = flagged_to_json(r.id, e.what());
      }
    }
  };
  const unsigned jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();

  std::size_t flagged = 0;
  for (const auto &l : lines) flagged += l.contains("flagged");
  ensure_parent(a.out);
  write_lines(a.out, lines);
  log("extract", std::to_string(records.size()) + " utterances, " + std::to_string(flagged) +
                     " flagged");
}

// ---- analyze --------------------------------------------------------------

struct AnalyzeArgs {
  std::string pairs, proxies, judgments, manifest, out_dir = "out/analyze";
  std::size_t bootstrap = 1000, folds = 5;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

void run_analyze(const AnalyzeArgs &a) {
  const auto pairs = load_pairs(a.pairs);
  const auto judgments = load_judgments(a.judgments);
  const auto proxies = load_proxies(a.proxies);
  const fs::path out = a.out_dir;
  fs::create_directories(out);

  const auto wins = empirical_win_rate(judgments, pairs);
  if (!a.manifest.empty()) {
    const auto records = load_manifest(a.manifest);
    const auto matrix = format_win_matrix(corpus_win_matrix(judgments, pairs, records));
    write_text(out / "win_matrix.txt", matrix);
    write_text(out / "win_rate_histogram.csv", win_rate_histogram_csv(wins, records));
    write_text(out / "quantile_split.csv", quantile_split_csv(wins, records, proxies));
    std::cout << matrix << "\n";
  }

  const auto pcr = compute_all_pcr(proxies, judgments, pairs, a.bootstrap, a.seed);
  std::vector<Json> pcr_lines;
  for (const auto &r : pcr) pcr_lines.push_back(pcr_to_json(r));
  write_lines(out / "pcr.jsonl", pcr_lines);
  const auto pcr_table = format_pcr_table(pcr);
  write_text(out / "pcr.txt", pcr_table);
  std::cout << pcr_table << "\n";

  const auto data = build_diff_dataset(pairs, proxies, judgments);
  if (data.dropped)
    log("analyze", std::to_string(data.dropped) + " judgments dropped for missing proxies");
  std::vector<CVReport> reports;
  std::vector<Json> cv_lines;
  auto sets = proxy_dimensions();
  sets.push_back("All Combined");
  for (const auto &set : sets) {
    auto r = cross_validate(data, a.folds, dimension_features(set), a.seed, a.l2);
    r.feature_set = set;
    cv_lines.push_back(cv_to_json(r));
    reports.push_back(std::move(r));
  }
  write_lines(out / "cv.jsonl", cv_lines);
  const auto cv_table = format_cv_table(reports);
  write_text(out / "cv.txt", cv_table);
  write_text(out / "coefficients.txt", format_coefficients(reports.back()));
  std::cout << cv_table;
}

// ---- train / eval ---------------------------------------------------------

struct TrainArgs {
  std::string pairs, judgments, frames, proxies, out = "out/train/model.psmd", log_csv;
  std::string aggregator = "mean_pool";
  std::size_t hidden_dim = 128;
  std::vector<std::size_t> mlp_dims{64, 1};
  TrainConfig cfg;
};

void run_train(const TrainArgs &a) {
  const auto pairs = load_pairs(a.pairs);
  const auto judgments = load_judgments(a.judgments);
  auto store = load_features(a.frames, a.proxies);
  const auto outcomes = outcomes_for_split(judgments, pairs, Split::kTrain);
  ModelConfig mc;
  mc.aggregator = parse_aggregator(a.aggregator);
  mc.hidden_dim = a.hidden_dim;
  mc.mlp_dims = a.mlp_dims;
  const auto result = train_ranker(outcomes, store, mc, a.cfg);
  ensure_parent(a.out);
  save_model(result.model, a.out);
  const fs::path log_path =
      a.log_csv.empty() ? fs::path(a.out).replace_extension(".log.csv") : fs::path(a.log_csv);
  write_text(log_path, training_log_csv(result.log));
  log("train", std::to_string(outcomes.size()) + " training judgments, best epoch " +
                   std::to_string(result.best_epoch) + " of " +
                   std::to_string(result.log.size() - 1));
}

struct EvalArgs {
  std::string model, pairs, judgments, frames, proxies, split = "test", name = "model", out;
};

void run_eval(const EvalArgs &a) {
  const auto model = load_model(a.model);
  const auto pairs = load_pairs(a.pairs);
  const auto judgments = load_judgments(a.judgments);
  auto store = load_features(a.frames, a.proxies);
  const auto outcomes = outcomes_for_split(judgments, pairs, parse_split(a.split));
  const auto r = evaluate_ranker(model, outcomes, store);
  const auto row = format_eval_row(a.name, r);
  std::cout << row;
  if (!a.out.empty()) {
    Json o;
    o["model"] = a.name;
    o["split"] = a.split;
    o["n"] = r.n;
    o["nll"] = r.nll;
    o["accuracy"] = r.accuracy;
    o["auc"] = r.auc;
    ensure_parent(a.out);
    write_lines(a.out, {o});
  }
}

// ---- serve ----------------------------------------------------------------

struct ServeArgs {
  std::string pairs, manifest, log = "out/serve/collect.log", host = "127.0.0.1";
  int port = 8080;
  std::string split = "train";
  std::size_t session_size = 25, session_cap = 10;
  std::uint64_t seed = 0;
};

httplib::Server *g_server = nullptr;

void run_serve(const ServeArgs &a) {
  std::vector<ComparisonPair> pool;
  const auto split = parse_split(a.split);
  for (auto &p : load_pairs(a.pairs))
    if (p.split == split) pool.push_back(std::move(p));
  const auto records = load_manifest(a.manifest);
  const auto audio = audio_index(records, fs::path(a.manifest).parent_path());
  ServiceConfig cfg;
  cfg.log_path = a.log;
  cfg.session_size = a.session_size;
  cfg.session_cap = a.session_cap;
  cfg.seed = a.seed;
  ensure_parent(cfg.log_path);
  CollectService service(std::move(pool), cfg);
  if (service.torn_lines())
    log("serve", "skipped " + std::to_string(service.torn_lines()) + " torn log line(s)");
  httplib::Server server;
  register_routes(server, service, audio);
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  log("serve", "listening on " + a.host + ":" + std::to_string(a.port) + ", " +
                   std::to_string(service.judgments().size()) + " judgments in log");
  if (!server.listen(a.host, a.port)) throw IoError("cannot bind " + a.host + ":" + std::to_string(a.port));
  g_server = nullptr;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string out = "out/simulate";
  SimulationConfig cfg;
  bool no_audio = false;
};

void run_simulate(SimulateArgs a) {
  a.cfg.write_audio = !a.no_audio;
  const auto res = simulate(a.cfg);
  write_simulation(a.cfg, res, a.out);
  if (res.pair_shortfall) log("simulate", "warning: pair quota short by " + std::to_string(res.pair_shortfall));
  log("simulate", std::to_string(res.utterances.size()) + " utterances, " +
                      std::to_string(res.pairs.size()) + " pairs, " +
                      std::to_string(res.judgments.size()) + " judgments -> " + a.out);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"stylerank: pairwise speech-style preference toolkit"};
  app.config_formatter(std::make_shared<JsonLinesConfig>());
  app.set_config("--config", "", "Config file (JSON object per line)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  FilterArgs fa;
  auto *filter = app.add_subcommand("filter", "Screen a manifest by score, duration and MOS");
  filter->add_option("--manifest", fa.manifest, "Input manifest")->required();
  filter->add_option("--out", fa.out, "Output manifest")->capture_default_str();
  filter->add_option("--max-script-likeness", fa.cfg.max_script_likeness)->capture_default_str();
  filter->add_option("--min-duration", fa.cfg.min_duration_s)->capture_default_str();
  filter->add_option("--max-duration", fa.cfg.max_duration_s)->capture_default_str();
  filter->add_option("--min-mos", fa.cfg.min_mos_exclusive, "Strict lower MOS bound")->capture_default_str();
  filter->add_option("--max-cer", fa.cfg.max_cer)->capture_default_str();

  SampleArgs sa;
  auto *sample = app.add_subcommand("sample", "t-SNE + DBSCAN speaker clustering with a per-cluster cap");
  sample->add_option("--manifest", sa.manifest)->required();
  sample->add_option("--speaker-emb", sa.speaker_emb)->required();
  sample->add_option("--out", sa.out)->capture_default_str();
  sample->add_option("--projection", sa.projection, "Optional CSV of 2-D points and labels");
  sample->add_option("--perplexity", sa.tsne.perplexity)->capture_default_str();
  sample->add_option("--iterations", sa.tsne.iterations)->capture_default_str();
  sample->add_option("--eps", sa.eps)->capture_default_str();
  sample->add_option("--min-pts", sa.min_pts)->capture_default_str();
  sample->add_option("--max-per-cluster", sa.max_per_cluster)->capture_default_str();
  sample->add_option("--seed", sa.seed)->capture_default_str();

  PairArgs pa;
  auto *pair = app.add_subcommand("pair", "Build A/B pairs per split");
  pair->add_option("--manifest", pa.manifest)->required();
  pair->add_option("--text-emb", pa.text_emb)->required();
  pair->add_option("--speaker-emb", pa.speaker_emb)->required();
  pair->add_option("--out", pa.out)->capture_default_str();
  pair->add_option("--train-quota", pa.train_quota)->capture_default_str();
  pair->add_option("--test-quota", pa.test_quota)->capture_default_str();
  pair->add_option("--min-text-sim", pa.cfg.min_text_sim)->capture_default_str();
  pair->add_option("--max-speaker-sim", pa.cfg.max_speaker_sim)->capture_default_str();
  pair->add_option("--weight-text", pa.cfg.weight_text)->capture_default_str();
  pair->add_option("--weight-speaker", pa.cfg.weight_speaker)->capture_default_str();
  pair->add_option("--shortlist", pa.cfg.shortlist_size)->capture_default_str();
  pair->add_option("--seed", pa.cfg.seed)->capture_default_str();

  ExtractArgs ea;
  auto *extract = app.add_subcommand("extract", "Compute the eleven acoustic proxies");
  extract->add_option("--manifest", ea.manifest)->required();
  extract->add_option("--out", ea.out)->capture_default_str();
  extract->add_option("--audio-root", ea.audio_root, "Base for relative audio paths (default: manifest dir)");
  extract->add_option("--jobs", ea.jobs, "Worker threads (0: one per core)")->capture_default_str();

  AnalyzeArgs aa;
  auto *analyze = app.add_subcommand("analyze", "Win rates, PCR table and logistic CV");
  analyze->add_option("--pairs", aa.pairs)->required();
  analyze->add_option("--proxies", aa.proxies)->required();
  analyze->add_option("--judgments", aa.judgments)->required();
  analyze->add_option("--manifest", aa.manifest, "Enables corpus win matrix and win-rate CSVs");
  analyze->add_option("--out-dir", aa.out_dir)->capture_default_str();
  analyze->add_option("--bootstrap", aa.bootstrap)->capture_default_str();
  analyze->add_option("--folds", aa.folds)->capture_default_str();
  analyze->add_option("--l2", aa.l2)->capture_default_str();
  analyze->add_option("--seed", aa.seed)->capture_default_str();

  TrainArgs ta;
  auto *train = app.add_subcommand("train", "Train the pairwise scorer");
  train->add_option("--pairs", ta.pairs)->required();
  train->add_option("--judgments", ta.judgments)->required();
  train->add_option("--frames", ta.frames, "Directory of <id>.fse frame features");
  train->add_option("--proxies", ta.proxies, "Proxy file used as 1-frame features");
  train->add_option("--out", ta.out)->capture_default_str();
  train->add_option("--log", ta.log_csv, "Training log CSV (default: next to the model)");
  train->add_option("--aggregator", ta.aggregator)
      ->check(CLI::IsMember({"mean_pool", "recurrent"}))
      ->capture_default_str();
  train->add_option("--hidden-dim", ta.hidden_dim)->capture_default_str();
  train->add_option("--mlp-dims", ta.mlp_dims)->delimiter(',')->capture_default_str();
  train->add_option("--lr", ta.cfg.learning_rate)->capture_default_str();
  train->add_option("--batch-size", ta.cfg.batch_size)->capture_default_str();
  train->add_option("--epochs", ta.cfg.epochs)->capture_default_str();
  train->add_option("--l2", ta.cfg.l2)->capture_default_str();
  train->add_option("--patience", ta.cfg.patience)->capture_default_str();
  train->add_option("--valid-fraction", ta.cfg.valid_fraction)->capture_default_str();
  train->add_option("--momentum", ta.cfg.momentum)->capture_default_str();
  train->add_option("--seed", ta.cfg.seed)->capture_default_str();

  EvalArgs va;
  auto *eval = app.add_subcommand("eval", "Score held-out judgments (NLL / accuracy / AUC)");
  eval->add_option("--model", va.model)->required();
  eval->add_option("--pairs", va.pairs)->required();
  eval->add_option("--judgments", va.judgments)->required();
  eval->add_option("--frames", va.frames);
  eval->add_option("--proxies", va.proxies);
  eval->add_option("--split", va.split)->check(CLI::IsMember({"train", "test"}))->capture_default_str();
  eval->add_option("--name", va.name, "Row label")->capture_default_str();
  eval->add_option("--out", va.out, "Optional JSON result file");

  ServeArgs ra;
  auto *serve = app.add_subcommand("serve", "Run the A/B collection service");
  serve->add_option("--pairs", ra.pairs)->required()->envname("STYLERANK_PAIRS");
  serve->add_option("--manifest", ra.manifest)->required()->envname("STYLERANK_MANIFEST");
  serve->add_option("--log", ra.log)->envname("STYLERANK_LOG")->capture_default_str();
  serve->add_option("--host", ra.host)->envname("STYLERANK_HOST")->capture_default_str();
  serve->add_option("--port", ra.port)->envname("STYLERANK_PORT")->capture_default_str();
  serve->add_option("--split", ra.split, "Pairs offered to raters")
      ->check(CLI::IsMember({"train", "test"}))
      ->capture_default_str();
  serve->add_option("--session-size", ra.session_size)->envname("STYLERANK_SESSION_SIZE")->capture_default_str();
  serve->add_option("--session-cap", ra.session_cap)->envname("STYLERANK_SESSION_CAP")->capture_default_str();
  serve->add_option("--seed", ra.seed)->capture_default_str();

  SimulateArgs ma;
  auto *sim = app.add_subcommand("simulate", "Generate a synthetic Bradley-Terry corpus");
  sim->add_option("--out", ma.out)->capture_default_str();
  sim->add_option("--n-utterances", ma.cfg.n_utterances)->capture_default_str();
  sim->add_option("--n-pairs", ma.cfg.n_pairs)->capture_default_str();
  sim->add_option("--n-judgments", ma.cfg.n_judgments)->capture_default_str();
  sim->add_option("--latent-spread", ma.cfg.latent_spread)->capture_default_str();
  sim->add_option("--frame-dims", ma.cfg.frame_dims)->capture_default_str();
  sim->add_option("--acoustic-noise", ma.cfg.acoustic_noise)->capture_default_str();
  sim->add_flag("--no-audio", ma.no_audio, "Skip writing waveforms");
  sim->add_option("--seed", ma.cfg.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*filter) run_filter(fa);
    if (*sample) run_sample(sa);
    if (*pair) run_pair(pa);
    if (*extract) run_extract(ea);
    if (*analyze) run_analyze(aa);
    if (*train) run_train(ta);
    if (*eval) run_eval(va);
    if (*serve) run_serve(ra);
    if (*sim) run_simulate(ma);
  } catch (const ConfigError &e) {
    std::cerr << "stylerank: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "stylerank: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
