// Command-line front end: corpus preparation, training, the trial protocol
// and the curation service.
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>

#include "harmony/experiment.hpp"
#include "harmony/io.hpp"
#include "harmony/providers.hpp"
#include "harmony/service.hpp"
#include "harmony/synthetic.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines _res.
#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace harmony;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string cache_dir;
  nlohmann::json config = nlohmann::json::object();

  const nlohmann::json& section(const char* name) const {
    static const nlohmann::json empty = nlohmann::json::object();
    return config.contains(name) ? config.at(name) : empty;
  }
};

struct CorpusOptions {
  std::string sources;
  std::string targets;
  std::string gold;
  ColumnMap columns;
  std::string embedder = "auto";  // auto | hash | http | vectors
  std::string endpoint;
  std::string keyword_endpoint;
  std::vector<std::string> vector_files;
  std::vector<std::string> models;
  int hash_dim = 256;
  std::size_t batch_size = 64;

  void add(CLI::App* app, bool need_gold) {
    app->add_option("--sources", sources, "source dictionary CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--targets", targets, "target dictionary CSV")->required()->check(CLI::ExistingFile);
    auto* g = app->add_option("--gold", gold, "gold pairs CSV (source_var, target_var)")->check(CLI::ExistingFile);
    if (need_gold) g->required();
    add_columns(app);
    app->add_option("--embedder", embedder, "auto, hash, http or vectors")
        ->check(CLI::IsMember({"auto", "hash", "http", "vectors"}));
    app->add_option("--endpoint", endpoint, "embedding sidecar base URL");
    app->add_option("--keyword-endpoint", keyword_endpoint, "keyword extraction base URL");
    app->add_option("--vectors", vector_files, "precomputed vector files")->check(CLI::ExistingFile);
    app->add_option("--models", models, "three embedding model ids")->expected(3);
    app->add_option("--hash-dim", hash_dim, "dimension for the hash embedder");
    app->add_option("--batch-size", batch_size, "texts per provider call");
  }

  void add_columns(CLI::App* app) {
    app->add_option("--col-name", columns.name, "column holding variable names");
    app->add_option("--col-label", columns.label, "column holding labels");
    app->add_option("--col-sheet", columns.sheet, "column holding sheet descriptions");
    app->add_option("--col-rule", columns.rule, "column holding derivation rules");
  }

  // Config-file values fill whatever the command line left at its default.
  void merge(const Globals& g) {
    const auto& emb = g.section("embedding");
    if (embedder == "auto" && emb.contains("provider")) embedder = emb.at("provider").get<std::string>();
    if (endpoint.empty() && emb.contains("endpoint")) endpoint = emb.at("endpoint").get<std::string>();
    if (keyword_endpoint.empty() && emb.contains("keyword_endpoint"))
      keyword_endpoint = emb.at("keyword_endpoint").get<std::string>();
    if (models.empty() && emb.contains("models")) models = emb.at("models").get<std::vector<std::string>>();
    if (emb.contains("hash_dim")) hash_dim = emb.at("hash_dim").get<int>();
    if (emb.contains("batch_size")) batch_size = emb.at("batch_size").get<std::size_t>();
    const auto& cols = g.section("columns");
    ColumnMap defaults;
    if (columns.name == defaults.name && cols.contains("name")) columns.name = cols.at("name").get<std::string>();
    if (columns.label == defaults.label && cols.contains("label")) columns.label = cols.at("label").get<std::string>();
    if (columns.sheet == defaults.sheet && cols.contains("sheet")) columns.sheet = cols.at("sheet").get<std::string>();
    if (columns.rule == defaults.rule && cols.contains("rule")) columns.rule = cols.at("rule").get<std::string>();
  }
};

struct Corpus {
  DataDictionary sources;
  DataDictionary targets;
  GoldPairs gold;
  FeatureStore store;
};

std::optional<fs::path> cache_root(const Globals& g) {
  std::optional<fs::path> configured;
  if (!g.cache_dir.empty()) configured = g.cache_dir;
  return resolve_cache_dir(configured);
}

// Owns whatever providers the options ask for.
struct Embedders {
  std::unique_ptr<EmbeddingProvider> provider;
  std::unique_ptr<EmbeddingCache> cache;
  std::unique_ptr<KeywordProvider> http_keywords;
  TermFrequencyKeywords tf_keywords;
  std::unique_ptr<FallbackKeywords> fallback;
  EmbedderSet set;

  Embedders(const CorpusOptions& opt, const Globals& g) {
    const auto endpoint = resolve_endpoint(opt.endpoint);
    std::string kind = opt.embedder;
    if (kind == "auto") kind = !endpoint.empty() ? "http" : (!opt.vector_files.empty() ? "vectors" : "cache");
    if (kind == "hash") {
      provider = std::make_unique<HashEmbedProvider>(opt.hash_dim, g.seed);
    } else if (kind == "http") {
      if (endpoint.empty())
        throw Error(ErrorCode::ProviderUnavailable, "no embedding endpoint configured (--endpoint or HARMONY_EMBED_ENDPOINT)");
      provider = std::make_unique<HttpEmbeddingProvider>(endpoint);
    } else if (kind == "vectors") {
      std::vector<fs::path> files(opt.vector_files.begin(), opt.vector_files.end());
      provider = std::make_unique<VectorFileProvider>(files);
    }
    auto root = cache_root(g);
    cache = root ? std::make_unique<EmbeddingCache>(*root) : std::make_unique<EmbeddingCache>();
    set.cache = cache.get();
    set.batch_size = opt.batch_size;
    for (std::size_t m = 0; m < 3; ++m) {
      set.slots[m].model_id = opt.models.size() == 3 ? opt.models[m] : kDefaultModelIds[m];
      set.slots[m].provider = provider.get();
    }
    if (!opt.keyword_endpoint.empty()) {
      http_keywords = std::make_unique<HttpKeywordProvider>(opt.keyword_endpoint);
      fallback = std::make_unique<FallbackKeywords>(*http_keywords, tf_keywords);
    }
  }

  KeywordProvider& keywords() { return fallback ? static_cast<KeywordProvider&>(*fallback) : tf_keywords; }
};

Corpus load_corpus(CorpusOptions opt, const Globals& g) {
  opt.merge(g);
  Corpus c;
  c.sources = load_dictionary(opt.sources, Side::source, opt.columns);
  c.targets = load_dictionary(opt.targets, Side::target, opt.columns);
  if (!opt.gold.empty()) c.gold = GoldPairs::load(opt.gold, c.sources, c.targets);
  Embedders emb(opt, g);
  const auto src = prepare_variables(c.sources, emb.set, emb.keywords());
  const auto tgt = prepare_variables(c.targets, emb.set, emb.keywords());
  c.store = compute_feature_store(src, tgt);
  return c;
}

ExperimentConfig experiment_config(const Globals& g) {
  auto cfg = ExperimentConfig::from_json(g.section("experiment"));
  cfg.base_seed = g.seed;
  return cfg;
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

void write_table(const fs::path& path, const csv::Table& table) {
  csv::write_file(path, table);
  std::cerr << "wrote " << path.string() << '\n';
}

nlohmann::json report_json(const MetricReport& r) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [n, v] : r.hr) j["HR-" + std::to_string(n)] = v;
  j["MRR"] = r.mrr;
  return j;
}

std::atomic<httplib::Server*> g_server{nullptr};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable matching across data dictionaries"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--seed", g.seed, "base random seed")->capture_default_str();
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--cache-dir", g.cache_dir, "embedding cache directory");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate a dictionary and report corpus statistics");
  std::string ingest_input, ingest_side = "source", ingest_output;
  CorpusOptions ingest_cols;
  ingest->add_option("--input", ingest_input)->required()->check(CLI::ExistingFile);
  ingest->add_option("--side", ingest_side)->check(CLI::IsMember({"source", "target"}));
  ingest->add_option("--output", ingest_output, "write the normalized dictionary here");
  ingest_cols.add_columns(ingest);

  // reshape
  auto* reshape = app.add_subcommand("reshape", "turn a long-format table into dictionary records");
  std::string reshape_input, reshape_spec, reshape_side = "source", reshape_sheet, reshape_output;
  reshape->add_option("--input", reshape_input)->required()->check(CLI::ExistingFile);
  reshape->add_option("--spec", reshape_spec, "reshape spec JSON")->required()->check(CLI::ExistingFile);
  reshape->add_option("--side", reshape_side)->check(CLI::IsMember({"source", "target"}));
  reshape->add_option("--sheet", reshape_sheet, "sheet description for every generated record");
  reshape->add_option("--output", reshape_output)->required();

  // embed-cache
  auto* embed = app.add_subcommand("embed-cache", "fill the embedding cache for both dictionaries");
  CorpusOptions embed_opt;
  embed_opt.add(embed, false);

  // match
  auto* match = app.add_subcommand("match", "rank target candidates for every source");
  CorpusOptions match_opt;
  std::string match_model, match_output;
  std::size_t match_top = 10;
  bool match_explain = false;
  match_opt.add(match, false);
  match->add_option("--model", match_model, "trained model JSON; without it a similarity mean is used")
      ->check(CLI::ExistingFile);
  match->add_option("--top", match_top)->capture_default_str();
  match->add_option("--output", match_output, "ranked candidates CSV (stdout when absent)");
  match->add_flag("--explain", match_explain, "include every feature value");

  // train
  auto* train = app.add_subcommand("train", "tune and fit a forest on every gold source");
  CorpusOptions train_opt;
  std::string train_output;
  train_opt.add(train, true);
  train->add_option("--output", train_output, "model JSON")->required();

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "rank gold sources with a model and report metrics");
  CorpusOptions eval_opt;
  std::string eval_model, eval_ranked;
  eval_opt.add(evaluate_cmd, true);
  evaluate_cmd->add_option("--model", eval_model)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--ranked", eval_ranked, "write the full ranked lists here");

  // trials / importance / ablate
  auto* trials = app.add_subcommand("trials", "repeated split, tune, train and compare");
  CorpusOptions trials_opt;
  int trials_n = 0;
  std::string trials_out = "results";
  trials_opt.add(trials, true);
  trials->add_option("--n", trials_n, "number of trials (overrides the config)");
  trials->add_option("--out", trials_out, "report directory")->capture_default_str();

  auto* importance = app.add_subcommand("importance", "permutation feature importance across trials");
  CorpusOptions imp_opt;
  int imp_n = 0;
  std::string imp_out = "results";
  imp_opt.add(importance, true);
  importance->add_option("--n", imp_n, "number of trials (overrides the config)");
  importance->add_option("--out", imp_out)->capture_default_str();

  auto* ablate = app.add_subcommand("ablate", "retrain without each feature group");
  CorpusOptions abl_opt;
  int abl_n = 0;
  std::string abl_out = "results";
  abl_opt.add(ablate, true);
  ablate->add_option("--n", abl_n, "number of trials (overrides the config)");
  ablate->add_option("--out", abl_out)->capture_default_str();

  // errors
  auto* errors = app.add_subcommand("errors", "gold pairs ranked below a cutoff in finished trials");
  std::string err_dir = "results", err_sources, err_targets;
  double err_cutoff = 30;
  CorpusOptions err_cols;
  errors->add_option("--out", err_dir, "report directory written by trials")->capture_default_str();
  errors->add_option("--cutoff", err_cutoff)->capture_default_str();
  errors->add_option("--sources", err_sources, "source dictionary for labels")->check(CLI::ExistingFile);
  errors->add_option("--targets", err_targets, "target dictionary for labels")->check(CLI::ExistingFile);
  err_cols.add_columns(errors);

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP API for ranking, labels and retraining");
  CorpusOptions serve_opt;
  std::string serve_host = "127.0.0.1", serve_model_dir = "models", serve_labels = "labels.jsonl", serve_token;
  int serve_port = 8080;
  serve_opt.add(serve, false);
  serve->add_option("--host", serve_host)->capture_default_str();
  serve->add_option("--port", serve_port)->capture_default_str();
  serve->add_option("--model-dir", serve_model_dir)->capture_default_str();
  serve->add_option("--labels", serve_labels)->capture_default_str();
  serve->add_option("--token", serve_token, "bearer token (also HARMONY_API_TOKEN)");
  std::string serve_reports;
  serve->add_option("--reports", serve_reports, "trials output directory for /api/metrics");

  // synth
  auto* synth = app.add_subcommand("synth", "write a generated corpus with planted paraphrase noise");
  SyntheticSpec synth_spec;
  std::string synth_out;
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--n-sources", synth_spec.n_sources)->capture_default_str();
  synth->add_option("--n-targets", synth_spec.n_targets)->capture_default_str();
  synth->add_option("--noise", synth_spec.noise)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  synth->add_option("--multi-gold", synth_spec.multi_gold_fraction)->capture_default_str()->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);

  try {
    if (!g.config_path.empty()) {
      try {
        g.config = nlohmann::json::parse(io::read_text(g.config_path));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, g.config_path + ": " + e.what());
      }
    }

    if (*ingest) {
      ingest_cols.merge(g);
      const auto dict = load_dictionary(ingest_input, side_from_string(ingest_side), ingest_cols.columns);
      const auto stats = corpus_stats(dict);
      if (!ingest_output.empty()) write_table(ingest_output, serialize_dictionary(dict));
      print_json({{"records", stats.n_records},
                  {"mean_label_words", stats.mean_label_words},
                  {"mean_sheet_words", stats.mean_sheet_words},
                  {"mean_rule_words", stats.mean_rule_words}});
    } else if (*reshape) {
      const auto spec = ReshapeSpec::from_json(io::read_text(reshape_spec));
      const auto rows = long_rows_from_table(csv::read_file(reshape_input), spec);
      const auto side = side_from_string(reshape_side);
      DataDictionary dict(side, long_to_wide(rows, spec, reshape_sheet, side), {reshape_input, "long"});
      write_table(reshape_output, serialize_dictionary(dict));
      print_json({{"records", dict.size()}});
    } else if (*embed) {
      embed_opt.merge(g);
      if (!cache_root(g)) throw Error(ErrorCode::InvalidArgument, "embed-cache needs --cache-dir or HARMONY_CACHE_DIR");
      const auto src = load_dictionary(embed_opt.sources, Side::source, embed_opt.columns);
      const auto tgt = load_dictionary(embed_opt.targets, Side::target, embed_opt.columns);
      Embedders emb(embed_opt, g);
      std::vector<std::string> texts;
      for (const auto* dict : {&src, &tgt}) {
        for (const auto& rec : *dict) {
          const auto t = build_match_texts(rec, derive_keyword_text(rec.derivation_rule, emb.keywords()));
          texts.insert(texts.end(), {t.label_text, t.sheet_text, t.label_key_text});
        }
      }
      nlohmann::json out = nlohmann::json::array();
      for (const auto& slot : emb.set.slots) {
        EmbedStats stats;
        embed_batch(texts, slot.model_id, slot.provider, *emb.cache, emb.set.batch_size, &stats);
        out.push_back({{"model_id", slot.model_id},
                       {"texts", texts.size()},
                       {"cache_hits", stats.cache_hits},
                       {"provider_calls", stats.provider_calls},
                       {"cached", emb.cache->size(slot.model_id)}});
      }
      print_json(out);
    } else if (*match) {
      const auto corpus = load_corpus(match_opt, g);
      std::optional<ForestModel> model;
      if (!match_model.empty()) {
        model = ForestModel::load(match_model);
        if (model->schema() != corpus.store.schema())
          throw Error(ErrorCode::SchemaMismatch, match_model + " was trained on another feature schema");
      }
      const auto& schema = corpus.store.schema();
      std::vector<Eigen::Index> sim;
      for (std::size_t c = 0; c < schema.size(); ++c)
        if (schema.names()[c].find("_on_") != std::string::npos) sim.push_back(static_cast<Eigen::Index>(c));
      csv::Table table;
      table.header = {"source", "rank", "target", "score", "target_label"};
      if (match_explain)
        for (const auto& n : schema.names()) table.header.push_back(n);
      for (std::size_t s = 0; s < corpus.store.n_sources(); ++s) {
        const auto& block = corpus.store.block(s);
        const Eigen::VectorXd scores =
            model ? model->predict_proba(block) : Eigen::VectorXd(block(Eigen::all, sim).rowwise().mean());
        const auto& name = corpus.store.sources()[s];
        const auto ranked = rank_candidates(name, corpus.store.targets(),
                                            std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                                            corpus.gold.has_source(name) ? corpus.gold.targets_of(name) : std::set<std::string>{});
        for (std::size_t i = 0; i < std::min(match_top, ranked.entries.size()); ++i) {
          const auto& e = ranked.entries[i];
          std::vector<std::string> row = {name, io::exact(e.rank), e.target, io::fixed(e.score),
                                          corpus.targets.find(e.target)->label};
          if (match_explain) {
            const auto t = static_cast<Eigen::Index>(*corpus.store.target_index(e.target));
            for (Eigen::Index c = 0; c < block.cols(); ++c) row.push_back(io::fixed(block(t, c)));
          }
          table.rows.push_back(std::move(row));
        }
      }
      if (match_output.empty()) {
        std::cout << csv::format(table);
      } else {
        write_table(match_output, table);
      }
    } else if (*train) {
      const auto corpus = load_corpus(train_opt, g);
      const auto cfg = experiment_config(g);
      const auto sources = corpus.gold.sources_in(corpus.store);
      Rng rng(derive_seed(g.seed, 2));
      const auto pairs = generate_training_pairs(corpus.store, corpus.gold, sources, cfg.negatives_per_source, rng);
      ForestParams params = cfg.grid.front();
      nlohmann::json cv = nullptr;
      if (cfg.grid.size() > 1) {
        const auto search = grid_search_cv(pairs, cfg.grid, cfg.cv_folds, derive_seed(g.seed, 3));
        params = search.best;
        cv = search.mean_mrr;
      }
      const auto model = train_forest(pairs, params, derive_seed(g.seed, 4));
      model.save(train_output);
      print_json({{"model", train_output},
                  {"params", params.to_json()},
                  {"cv_mrr", cv},
                  {"training_pairs", pairs.size()},
                  {"model_hash", model.hash()}});
    } else if (*evaluate_cmd) {
      const auto corpus = load_corpus(eval_opt, g);
      const auto model = ForestModel::load(eval_model);
      const auto sources = corpus.gold.sources_in(corpus.store);
      const auto lists = rank_sources(corpus.store, corpus.gold, sources,
                                      [&](const FeatureMatrix& block) { return model.predict_proba(block); });
      if (!eval_ranked.empty()) {
        csv::Table t;
        t.header = {"source", "rank", "target", "score", "gold"};
        for (const auto& l : lists)
          for (const auto& e : l.entries)
            t.rows.push_back({l.source, io::exact(e.rank), e.target, io::exact(e.score), e.gold ? "1" : "0"});
        write_table(eval_ranked, t);
      }
      auto j = report_json(evaluate(lists));
      j["sources"] = lists.size();
      print_json(j);
    } else if (*trials || *importance) {
      const bool want_importance = static_cast<bool>(*importance);
      const auto corpus = load_corpus(want_importance ? imp_opt : trials_opt, g);
      auto cfg = experiment_config(g);
      const int n = want_importance ? imp_n : trials_n;
      if (n > 0) cfg.n_trials = n;
      const fs::path out = want_importance ? imp_out : trials_out;
      TrialStore store(out / "trials");
      std::vector<FeatureImportance> imps;
      const auto results = run_trials(corpus.store, corpus.gold, cfg, &store, [&](const TrialArtifacts& t, bool resumed) {
        std::cerr << "trial " << t.result.trial_id << (resumed ? " (resumed)" : "") << ": MRR "
                  << io::fixed(t.result.ensemble.mrr, 4) << '\n';
        if (want_importance) {
          Rng rng(derive_seed(t.result.seed, 5));
          imps.push_back(permutation_importance(t.model, t.test_pairs, cfg.metrics, rng, cfg.permutation_repeats));
        }
      });
      if (want_importance) {
        write_table(out / "importance.csv", importance_table(summarize_importance(imps)));
      } else {
        const auto all_sources = corpus.gold.sources_in(corpus.store);
        write_table(out / "trial_metrics.csv", trial_metrics_table(results));
        write_table(out / "summary.csv", method_summary_table(results));
        write_table(out / "comparison.csv", comparison_table(results));
        write_table(out / "coverage.csv", coverage_table(results, all_sources));
      }
    } else if (*ablate) {
      const auto corpus = load_corpus(abl_opt, g);
      auto cfg = experiment_config(g);
      if (abl_n > 0) cfg.n_trials = abl_n;
      const auto outcome = ablation(corpus.store, corpus.gold, cfg);
      write_table(fs::path(abl_out) / "ablation.csv", ablation_table(outcome.rows));
    } else if (*errors) {
      err_cols.merge(g);
      std::optional<DataDictionary> src, tgt;
      if (!err_sources.empty()) src = load_dictionary(err_sources, Side::source, err_cols.columns);
      if (!err_targets.empty()) tgt = load_dictionary(err_targets, Side::target, err_cols.columns);
      TrialStore store(fs::path(err_dir) / "trials");
      std::vector<LowRankRow> rows;
      for (int t = 1; fs::exists(store.ranked_path(t)); ++t) {
        const auto lists = store.load_ranked(t);
        auto part = report_low_ranked(lists, err_cutoff, src ? &*src : nullptr, tgt ? &*tgt : nullptr);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      write_table(fs::path(err_dir) / "low_ranked.csv", low_rank_table(rows));
      print_json({{"low_ranked", rows.size()}});
    } else if (*serve) {
      auto corpus = load_corpus(serve_opt, g);
      ServiceConfig sc;
      sc.model_dir = serve_model_dir;
      sc.labels_path = serve_labels;
      sc.report_dir = serve_reports;
      sc.seed = g.seed;
      const auto cfg = experiment_config(g);
      sc.retrain_params = cfg.grid.front();
      sc.negatives_per_source = cfg.negatives_per_source;
      if (!serve_token.empty()) {
        sc.bearer_token = serve_token;
      } else if (const char* env = std::getenv("HARMONY_API_TOKEN"); env && *env) {
        sc.bearer_token = env;
      }
      MatchService service(sc, std::move(corpus.sources), std::move(corpus.targets), std::move(corpus.store),
                           std::move(corpus.gold));
      httplib::Server server;
      service.bind(server);
      g_server = &server;
      std::signal(SIGINT, [](int) {
        if (auto* s = g_server.load()) s->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (auto* s = g_server.load()) s->stop();
      });
      std::cerr << "listening on " << serve_host << ':' << serve_port << '\n';
      if (!server.listen(serve_host, serve_port))
        throw Error(ErrorCode::IoError, "cannot listen on " + serve_host + ":" + std::to_string(serve_port));
      service.wait_for_retrain();
    } else if (*synth) {
      synth_spec.seed = g.seed;
      const auto corpus = make_synthetic_corpus(synth_spec);
      const fs::path out = synth_out;
      fs::create_directories(out);
      write_table(out / "sources.csv", serialize_dictionary(corpus.sources));
      write_table(out / "targets.csv", serialize_dictionary(corpus.targets));
      write_table(out / "gold.csv", corpus.gold.to_table());
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ProviderUnavailable ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
