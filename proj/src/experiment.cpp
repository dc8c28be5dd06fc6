#include "harmony/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "harmony/hashing.hpp"
#include "harmony/io.hpp"

namespace harmony {

namespace {

constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kNegativeStream = 2;
constexpr std::uint64_t kTuneStream = 3;
constexpr std::uint64_t kForestStream = 4;

const std::vector<std::string> kReportMetrics = {"HR-5", "HR-10", "HR-15", "HR-20", "HR-30", "MRR"};

nlohmann::json report_to_json(const MetricReport& r) {
  nlohmann::json hr = nlohmann::json::object();
  for (const auto& [n, v] : r.hr) hr[std::to_string(n)] = v;
  return {{"hr", hr}, {"mrr", r.mrr}, {"per_source_rr", r.per_source_rr}};
}

MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  for (const auto& [k, v] : j.at("hr").items()) r.hr[std::stoi(k)] = v.get<double>();
  r.mrr = j.at("mrr").get<double>();
  r.per_source_rr = j.at("per_source_rr").get<std::map<std::string, double>>();
  return r;
}

double metric_from_ranks(const std::string& metric, std::span<const double> ranks) {
  if (metric == "MRR") return mrr_from_ranks(ranks);
  if (metric.starts_with("HR-")) return hit_ratio_from_ranks(ranks, std::stod(metric.substr(3)));
  throw Error(ErrorCode::InvalidArgument, "unknown metric " + metric);
}

std::vector<double> group_ranks(const PairSet& pairs, const Eigen::VectorXd& scores) {
  std::vector<double> ranks;
  ranks.reserve(pairs.groups.size());
  for (const auto& [begin, end] : pairs.groups) {
    const auto b = static_cast<Eigen::Index>(begin);
    const auto n = static_cast<Eigen::Index>(end - begin);
    ranks.push_back(best_gold_rank(scores.segment(b, n), pairs.gold.segment(b, n)));
  }
  return ranks;
}

std::string num(double v) { return io::fixed(v == 0.0 ? 0.0 : v, 6); }

std::vector<double> metric_series(std::span<const TrialResult> trials, const std::string& method,
                                  const std::string& metric) {
  std::vector<double> out;
  for (const auto& t : trials) {
    if (method == "RandomForest") {
      out.push_back(t.ensemble.metric(metric));
    } else {
      out.push_back(t.baselines.at(method).metric(metric));
    }
  }
  return out;
}

std::string fingerprint(const FeatureStore& store, const GoldPairs& gold, const ExperimentConfig& config) {
  std::string blob = config.hash();
  blob += store.schema().hash();
  for (const auto& s : store.sources()) blob += s + '\x1f';
  blob += '\x1e';
  for (const auto& t : store.targets()) blob += t + '\x1f';
  blob += '\x1e';
  for (const auto& [s, t] : gold.pairs()) blob += s + '\x1f' + t + '\x1f';
  for (std::size_t s = 0; s < store.n_sources(); ++s) {
    const auto& b = store.block(s);
    blob.append(reinterpret_cast<const char*>(b.data()), static_cast<std::size_t>(b.size()) * sizeof(double));
  }
  return to_hex(sha256(blob));
}

}  // namespace

FeatureGroups default_feature_groups() {
  const auto& n = kStandardFeatureNames;
  auto names = [&](std::size_t begin, std::size_t end) {
    return std::vector<std::string>(n.begin() + static_cast<std::ptrdiff_t>(begin),
                                    n.begin() + static_cast<std::ptrdiff_t>(end));
  };
  return {{"LLM", names(0, 9)}, {"Fuzzy", names(9, 12)}, {"Other", names(12, 18)}};
}

std::vector<BaselineMethod> default_baselines() {
  return {{"E5", "E5_on_label"}, {"MPNet", "MPNet_on_label"}, {"MiniLM", "MiniLM_on_label"},
          {"Fuzzy", "Fuzzy_on_label"}};
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json grid_json = nlohmann::json::array();
  for (const auto& p : grid) grid_json.push_back(p.to_json());
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& [name, features] : feature_groups) groups.push_back({{"name", name}, {"features", features}});
  nlohmann::json base = nlohmann::json::array();
  for (const auto& b : baselines) base.push_back({{"name", b.name}, {"feature", b.feature}});
  return {{"n_trials", n_trials},
          {"base_seed", base_seed},
          {"negatives_per_source", negatives_per_source},
          {"grid", grid_json},
          {"cv_folds", cv_folds},
          {"test_fraction", test_fraction},
          {"metrics", metrics},
          {"feature_groups", groups},
          {"baselines", base},
          {"permutation_repeats", permutation_repeats},
          {"ranked_top_k", ranked_top_k}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("n_trials")) c.n_trials = j.at("n_trials").get<int>();
    if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("negatives_per_source")) c.negatives_per_source = j.at("negatives_per_source").get<std::size_t>();
    if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
    if (j.contains("cv_folds")) c.cv_folds = j.at("cv_folds").get<std::size_t>();
    if (j.contains("test_fraction")) c.test_fraction = j.at("test_fraction").get<double>();
    if (j.contains("metrics")) c.metrics = j.at("metrics").get<std::vector<std::string>>();
    if (j.contains("feature_groups")) {
      c.feature_groups.clear();
      const auto& g = j.at("feature_groups");
      if (g.is_object()) {
        for (const auto& [name, features] : g.items())
          c.feature_groups.emplace_back(name, features.get<std::vector<std::string>>());
      } else {
        for (const auto& entry : g)
          c.feature_groups.emplace_back(entry.at("name").get<std::string>(),
                                        entry.at("features").get<std::vector<std::string>>());
      }
    }
    if (j.contains("baselines")) {
      c.baselines.clear();
      for (const auto& b : j.at("baselines"))
        c.baselines.push_back({b.at("name").get<std::string>(), b.at("feature").get<std::string>()});
    }
    if (j.contains("permutation_repeats")) c.permutation_repeats = j.at("permutation_repeats").get<int>();
    if (j.contains("ranked_top_k")) c.ranked_top_k = j.at("ranked_top_k").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("experiment config: ") + e.what());
  }
  if (c.n_trials < 1) throw Error(ErrorCode::InvalidArgument, "n_trials must be positive");
  if (c.grid.empty()) throw Error(ErrorCode::EmptyGrid, "experiment config has an empty grid");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "test_fraction must lie in (0, 1)");
  if (c.permutation_repeats < 1) throw Error(ErrorCode::InvalidArgument, "permutation_repeats must be >= 1");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(io::read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

std::string ExperimentConfig::hash() const {
  nlohmann::json j = to_json();
  // Trial count and importance settings do not change any individual trial.
  j.erase("n_trials");
  j.erase("metrics");
  j.erase("permutation_repeats");
  j.erase("feature_groups");
  return to_hex(sha256(j.dump()));
}

SourceSplit split_sources(std::span<const std::string> sources, double test_fraction, std::uint64_t seed) {
  std::vector<std::string> shuffled(sources.begin(), sources.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(shuffled));
  auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(shuffled.size()) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, shuffled.size() - 1);
  SourceSplit split;
  split.test.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_test), shuffled.end());
  return split;
}

nlohmann::json TrialResult::to_json() const {
  nlohmann::json base = nlohmann::json::object();
  for (const auto& [name, r] : baselines) base[name] = report_to_json(r);
  return {{"trial_id", trial_id},
          {"seed", seed},
          {"train_sources", train_sources},
          {"test_sources", test_sources},
          {"tuned_params", tuned_params.to_json()},
          {"cv_mrr", cv_mrr},
          {"ensemble", report_to_json(ensemble)},
          {"baselines", base},
          {"model_ref", model_ref},
          {"model_hash", model_hash},
          {"schema_hash", schema_hash}};
}

TrialResult TrialResult::from_json(const nlohmann::json& j) {
  TrialResult r;
  r.trial_id = j.at("trial_id").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.train_sources = j.at("train_sources").get<std::vector<std::string>>();
  r.test_sources = j.at("test_sources").get<std::vector<std::string>>();
  r.tuned_params = ForestParams::from_json(j.at("tuned_params"));
  r.cv_mrr = j.at("cv_mrr").get<std::vector<double>>();
  r.ensemble = report_from_json(j.at("ensemble"));
  for (const auto& [name, rep] : j.at("baselines").items()) r.baselines[name] = report_from_json(rep);
  r.model_ref = j.at("model_ref").get<std::string>();
  r.model_hash = j.at("model_hash").get<std::string>();
  r.schema_hash = j.at("schema_hash").get<std::string>();
  return r;
}

std::vector<RankedList> rank_sources(const FeatureStore& store, const GoldPairs& gold,
                                     std::span<const std::string> sources,
                                     const std::function<Eigen::VectorXd(const FeatureMatrix&)>& scorer) {
  std::vector<RankedList> lists;
  lists.reserve(sources.size());
  for (const auto& name : sources) {
    const auto s = store.source_index(name);
    if (!s) throw Error(ErrorCode::UnknownSource, name);
    const Eigen::VectorXd scores = scorer(store.block(*s));
    lists.push_back(rank_candidates(name, store.targets(), std::span<const double>(scores.data(), scores.size()),
                                    gold.targets_of(name)));
  }
  return lists;
}

TrialArtifacts run_trial(const FeatureStore& store, const GoldPairs& gold, const ExperimentConfig& config,
                         int trial_id, std::uint64_t seed) {
  const auto sources = gold.sources_in(store);
  if (sources.size() < 10)
    throw Error(ErrorCode::TooFewSources, "a trial needs gold targets for at least 10 sources, got " +
                                              std::to_string(sources.size()));

  TrialArtifacts out;
  auto& result = out.result;
  result.trial_id = trial_id;
  result.seed = seed;
  result.schema_hash = store.schema().hash();

  auto split = split_sources(sources, config.test_fraction, derive_seed(seed, kSplitStream));
  result.train_sources = split.train;
  result.test_sources = split.test;

  Rng negatives(derive_seed(seed, kNegativeStream));
  const auto train = generate_training_pairs(store, gold, split.train, config.negatives_per_source, negatives);

  if (config.grid.size() == 1) {
    result.tuned_params = config.grid.front();
  } else {
    auto search = grid_search_cv(train, config.grid, config.cv_folds, derive_seed(seed, kTuneStream));
    result.tuned_params = search.best;
    result.cv_mrr = std::move(search.mean_mrr);
  }
  out.model = train_forest(train, result.tuned_params, derive_seed(seed, kForestStream));
  result.model_hash = out.model.hash();

  out.test_pairs = generate_test_pairs(store, gold, split.test, split.train);
  const Eigen::VectorXd proba = out.model.predict_proba(out.test_pairs.features);
  const auto ranks = group_ranks(out.test_pairs, proba);
  result.ensemble = evaluate_ranks(split.test, ranks);

  for (const auto& base : config.baselines) {
    const auto col = store.schema().index_of(base.feature);
    if (!col) continue;
    const Eigen::VectorXd scores = out.test_pairs.features.col(static_cast<Eigen::Index>(*col));
    result.baselines[base.name] = evaluate_ranks(split.test, group_ranks(out.test_pairs, scores));
  }

  out.ranked.reserve(split.test.size());
  for (std::size_t g = 0; g < out.test_pairs.groups.size(); ++g) {
    const auto [begin, end] = out.test_pairs.groups[g];
    out.ranked.push_back(rank_candidates(split.test[g], store.targets(),
                                         std::span<const double>(proba.data() + begin, end - begin),
                                         gold.targets_of(split.test[g])));
  }
  return out;
}

TrialStore::TrialStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

namespace {
std::string trial_stem(const char* prefix, int trial_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d", prefix, trial_id);
  return buf;
}
}  // namespace

std::filesystem::path TrialStore::trial_path(int trial_id) const {
  return dir_ / (trial_stem("trial", trial_id) + ".json");
}
std::filesystem::path TrialStore::model_path(int trial_id) const {
  return dir_ / (trial_stem("model", trial_id) + ".json");
}
std::filesystem::path TrialStore::ranked_path(int trial_id) const {
  return dir_ / (trial_stem("ranked", trial_id) + ".csv");
}

std::optional<TrialResult> TrialStore::load(int trial_id, const std::string& config_hash) const {
  const auto path = trial_path(trial_id);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(io::read_text(path));
    if (j.at("config_hash").get<std::string>() != config_hash) return std::nullopt;
    if (!std::filesystem::exists(model_path(trial_id))) return std::nullopt;
    return TrialResult::from_json(j.at("result"));
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

void TrialStore::save(const TrialArtifacts& trial, const std::string& config_hash, const FeatureStore& store,
                      std::size_t ranked_top_k) const {
  const int id = trial.result.trial_id;
  trial.model.save(model_path(id));

  csv::Table ranked;
  ranked.header = {"source", "rank", "target", "score", "gold"};
  for (const auto& list : trial.ranked) {
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
      const auto& e = list.entries[i];
      if (i >= ranked_top_k && !e.gold) continue;
      ranked.rows.push_back({list.source, io::exact(e.rank), e.target, io::exact(e.score), e.gold ? "1" : "0"});
    }
  }
  (void)store;
  csv::write_file(ranked_path(id), ranked);

  TrialResult result = trial.result;
  result.model_ref = model_path(id).filename().string();
  nlohmann::json j = {{"config_hash", config_hash}, {"result", result.to_json()}};
  io::write_text_atomic(trial_path(id), j.dump(2) + "\n");
}

ForestModel TrialStore::load_model(const TrialResult& result) const {
  return ForestModel::load(dir_ / result.model_ref);
}

std::vector<RankedList> TrialStore::load_ranked(int trial_id) const {
  const auto table = csv::read_file(ranked_path(trial_id));
  std::vector<RankedList> lists;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& row : table.rows) {
    if (row.size() < 5) throw Error(ErrorCode::ParseError, "short row in " + ranked_path(trial_id).string());
    auto [it, inserted] = index.emplace(row[0], lists.size());
    if (inserted) lists.push_back(RankedList{row[0], {}, {}});
    auto& list = lists[it->second];
    const bool is_gold = row[4] == "1";
    list.entries.push_back({row[2], std::stod(row[3]), std::stod(row[1]), is_gold});
    if (is_gold) list.gold_targets.insert(row[2]);
  }
  return lists;
}

std::vector<TrialResult> run_trials(const FeatureStore& store, const GoldPairs& gold,
                                    const ExperimentConfig& config, const TrialStore* trial_store,
                                    const TrialCallback& on_trial) {
  std::vector<TrialResult> results;
  results.reserve(static_cast<std::size_t>(config.n_trials));
  const std::string key = trial_store ? fingerprint(store, gold, config) : std::string();
  for (int t = 1; t <= config.n_trials; ++t) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(t);
    if (trial_store) {
      if (auto done = trial_store->load(t, key)) {
        if (on_trial) {
          TrialArtifacts art;
          art.result = *done;
          art.model = trial_store->load_model(*done);
          art.test_pairs = generate_test_pairs(store, gold, done->test_sources, done->train_sources);
          art.ranked = trial_store->load_ranked(t);
          on_trial(art, true);
        }
        results.push_back(std::move(*done));
        continue;
      }
    }
    auto trial = run_trial(store, gold, config, t, seed);
    if (trial_store) {
      trial_store->save(trial, key, store, config.ranked_top_k);
      trial.result.model_ref = std::filesystem::path(trial_stem("model", t) + ".json").string();
    }
    if (on_trial) on_trial(trial, false);
    results.push_back(trial.result);
  }
  return results;
}

FeatureImportance permutation_importance(const ForestModel& model, const PairSet& test_pairs,
                                         std::span<const std::string> metrics, Rng& rng, int repeats) {
  if (model.schema() != test_pairs.schema)
    throw Error(ErrorCode::SchemaMismatch, "model and test pairs use different feature schemas");
  if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");

  FeatureImportance out;
  out.features = test_pairs.schema.names();
  out.metrics.assign(metrics.begin(), metrics.end());
  const auto n_features = static_cast<Eigen::Index>(out.features.size());
  const auto n_metrics = static_cast<Eigen::Index>(out.metrics.size());
  out.importance = Eigen::MatrixXd::Zero(n_features, n_metrics);

  const auto base_ranks = group_ranks(test_pairs, model.predict_proba(test_pairs.features));
  std::vector<double> baseline;
  for (const auto& m : out.metrics) baseline.push_back(metric_from_ranks(m, base_ranks));

  FeatureMatrix work = test_pairs.features;
  const std::size_t n_rows = test_pairs.size();
  for (Eigen::Index f = 0; f < n_features; ++f) {
    for (int rep = 0; rep < repeats; ++rep) {
      const auto perm = rng.permutation(n_rows);
      for (std::size_t r = 0; r < n_rows; ++r)
        work(static_cast<Eigen::Index>(r), f) = test_pairs.features(static_cast<Eigen::Index>(perm[r]), f);
      const auto ranks = group_ranks(test_pairs, model.predict_proba(work));
      for (Eigen::Index m = 0; m < n_metrics; ++m)
        out.importance(f, m) += baseline[static_cast<std::size_t>(m)] -
                                metric_from_ranks(out.metrics[static_cast<std::size_t>(m)], ranks);
    }
    work.col(f) = test_pairs.features.col(f);
  }
  out.importance /= static_cast<double>(repeats);

  out.rank.resize(n_features, n_metrics);
  for (Eigen::Index m = 0; m < n_metrics; ++m) {
    const Eigen::VectorXd column = out.importance.col(m);
    const auto ranks = assign_ranks(std::span<const double>(column.data(), static_cast<std::size_t>(column.size())));
    for (Eigen::Index f = 0; f < n_features; ++f) out.rank(f, m) = ranks[static_cast<std::size_t>(f)];
  }
  return out;
}

std::vector<ImportanceRow> summarize_importance(std::span<const FeatureImportance> trials) {
  if (trials.empty()) return {};
  const auto& first = trials.front();
  Eigen::MatrixXd imp = Eigen::MatrixXd::Zero(first.importance.rows(), first.importance.cols());
  Eigen::MatrixXd rank = Eigen::MatrixXd::Zero(first.rank.rows(), first.rank.cols());
  for (const auto& t : trials) {
    if (t.features != first.features || t.metrics != first.metrics)
      throw Error(ErrorCode::SchemaMismatch, "importance trials disagree on features or metrics");
    imp += t.importance;
    rank += t.rank;
  }
  imp /= static_cast<double>(trials.size());
  rank /= static_cast<double>(trials.size());

  std::vector<ImportanceRow> rows;
  for (std::size_t m = 0; m < first.metrics.size(); ++m) {
    std::vector<std::size_t> order(first.features.size());
    for (std::size_t f = 0; f < order.size(); ++f) order[f] = f;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return imp(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m)) >
             imp(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(m));
    });
    for (auto f : order)
      rows.push_back({first.features[f], first.metrics[m],
                      imp(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(m)),
                      rank(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(m))});
  }
  return rows;
}

void validate_partition(const FeatureSchema& schema, const FeatureGroups& groups) {
  std::unordered_map<std::string, std::string> owner;
  for (const auto& [group, features] : groups) {
    for (const auto& f : features) {
      if (!schema.index_of(f)) throw Error(ErrorCode::InvalidArgument, "group " + group + " names unknown feature " + f);
      auto [it, inserted] = owner.emplace(f, group);
      if (!inserted)
        throw Error(ErrorCode::InvalidArgument, "feature " + f + " appears in groups " + it->second + " and " + group);
    }
  }
  for (const auto& name : schema.names())
    if (!owner.contains(name)) throw Error(ErrorCode::InvalidArgument, "feature " + name + " is in no group");
}

AblationOutcome ablation(const FeatureStore& store, const GoldPairs& gold, const ExperimentConfig& config,
                         std::span<const std::string> metrics) {
  validate_partition(store.schema(), config.feature_groups);
  const std::vector<std::string> default_metrics = {"HR-30", "HR-20", "HR-10", "HR-5", "MRR"};
  if (metrics.empty()) metrics = default_metrics;

  AblationOutcome out;
  out.full = run_trials(store, gold, config);
  for (const auto& [group, features] : config.feature_groups) {
    const std::unordered_set<std::string> dropped(features.begin(), features.end());
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < store.schema().size(); ++c)
      if (!dropped.contains(store.schema().names()[c])) keep.push_back(c);
    if (keep.empty()) throw Error(ErrorCode::InvalidArgument, "dropping group " + group + " leaves no features");
    const auto partial_store = store.select_columns(keep);
    auto& partial = out.partial[group];
    partial = run_trials(partial_store, gold, config);

    for (const auto& metric : metrics) {
      const auto full_series = metric_series(out.full, "RandomForest", metric);
      const auto part_series = metric_series(partial, "RandomForest", metric);
      AblationRow row;
      row.group = group;
      row.metric = metric;
      row.full_mean = mean(full_series);
      row.partial_mean = mean(part_series);
      row.test = paired_t_test(full_series, part_series);
      out.rows.push_back(row);
    }
  }
  return out;
}

std::vector<LowRankRow> report_low_ranked(std::span<const RankedList> lists, double cutoff,
                                          const DataDictionary* sources, const DataDictionary* targets) {
  auto label_of = [](const DataDictionary* dict, const std::string& name) {
    if (!dict) return std::string();
    const auto* rec = dict->find(name);
    return rec ? rec->label : std::string();
  };
  std::vector<LowRankRow> rows;
  for (const auto& list : lists) {
    std::vector<std::pair<std::string, double>> competitors;
    for (const auto& e : list.entries) {
      if (competitors.size() == 3) break;
      if (!e.gold) competitors.emplace_back(e.target, e.score);
    }
    for (const auto& e : list.entries) {
      if (!e.gold || !(e.rank > cutoff)) continue;
      rows.push_back({list.source, e.target, e.rank, label_of(sources, list.source), label_of(targets, e.target),
                      competitors});
    }
  }
  return rows;
}

csv::Table trial_metrics_table(std::span<const TrialResult> trials) {
  csv::Table t;
  t.header = {"trial", "seed", "method"};
  for (const auto& m : kReportMetrics) t.header.push_back(m);
  for (const auto& r : trials) {
    auto add = [&](const std::string& method, const MetricReport& rep) {
      std::vector<std::string> row = {std::to_string(r.trial_id), std::to_string(r.seed), method};
      for (const auto& m : kReportMetrics) row.push_back(num(rep.metric(m)));
      t.rows.push_back(std::move(row));
    };
    add("RandomForest", r.ensemble);
    for (const auto& [name, rep] : r.baselines) add(name, rep);
  }
  return t;
}

csv::Table method_summary_table(std::span<const TrialResult> trials) {
  csv::Table t;
  t.header = {"method", "n_trials"};
  for (const auto& m : {"HR-30", "HR-20", "HR-10", "HR-5", "MRR"}) {
    t.header.push_back(std::string(m) + "_mean");
    t.header.push_back(std::string(m) + "_sd");
  }
  if (trials.empty()) return t;
  std::vector<std::string> methods = {"RandomForest"};
  for (const auto& [name, rep] : trials.front().baselines) methods.push_back(name);
  for (const auto& method : methods) {
    std::vector<std::string> row = {method, std::to_string(trials.size())};
    for (const auto& m : {"HR-30", "HR-20", "HR-10", "HR-5", "MRR"}) {
      const auto series = metric_series(trials, method, m);
      row.push_back(num(mean(series)));
      row.push_back(num(sample_sd(series)));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string best_baseline(std::span<const TrialResult> trials) {
  if (trials.empty() || trials.front().baselines.empty())
    throw Error(ErrorCode::InvalidArgument, "no baselines to compare");
  std::string best;
  double best_mrr = -1.0;
  for (const auto& [name, rep] : trials.front().baselines) {
    const double m = mean(metric_series(trials, name, "MRR"));
    if (m > best_mrr) {
      best_mrr = m;
      best = name;
    }
  }
  return best;
}

csv::Table comparison_table(std::span<const TrialResult> trials) {
  csv::Table t;
  t.header = {"metric", "rf_mean", "rf_sd", "baseline", "baseline_mean", "baseline_sd",
              "mean_diff", "ci95_low", "ci95_high", "t_stat", "df", "p_value"};
  if (trials.size() < 2) return t;
  const auto base = best_baseline(trials);
  for (const auto& m : {"HR-30", "HR-20", "HR-10", "HR-5", "MRR"}) {
    const auto rf = metric_series(trials, "RandomForest", m);
    const auto bl = metric_series(trials, base, m);
    const auto test = paired_t_test(rf, bl);
    t.rows.push_back({m, num(test.mean_a), num(test.sd_a), base, num(test.mean_b), num(test.sd_b),
                      num(test.mean_diff), num(test.ci_low), num(test.ci_high), io::general(test.t_stat, 6),
                      io::general(test.df, 6), io::general(test.p_value, 6)});
  }
  return t;
}

csv::Table coverage_table(std::span<const TrialResult> trials, std::span<const std::string> all_sources) {
  std::map<std::string, int> count;
  for (const auto& s : all_sources) count[s] = 0;
  for (const auto& r : trials)
    for (const auto& s : r.test_sources) ++count[s];
  csv::Table t;
  t.header = {"source", "times_in_test"};
  for (const auto& s : all_sources) t.rows.push_back({s, std::to_string(count[s])});
  return t;
}

csv::Table importance_table(std::span<const ImportanceRow> rows) {
  csv::Table t;
  t.header = {"feature", "metric", "mean_importance", "mean_rank"};
  for (const auto& r : rows) t.rows.push_back({r.feature, r.metric, num(r.mean_importance), num(r.mean_rank)});
  return t;
}

csv::Table ablation_table(std::span<const AblationRow> rows) {
  csv::Table t;
  t.header = {"dropped_group", "metric", "full_mean", "partial_mean", "mean_drop",
              "ci95_low", "ci95_high", "t_stat", "p_value"};
  for (const auto& r : rows)
    t.rows.push_back({r.group, r.metric, num(r.full_mean), num(r.partial_mean), num(r.test.mean_diff),
                      num(r.test.ci_low), num(r.test.ci_high), io::general(r.test.t_stat, 6),
                      io::general(r.test.p_value, 6)});
  return t;
}

csv::Table low_rank_table(std::span<const LowRankRow> rows) {
  csv::Table t;
  t.header = {"source", "gold_target", "rank", "source_label", "target_label"};
  for (int i = 1; i <= 3; ++i) {
    t.header.push_back("competitor_" + std::to_string(i));
    t.header.push_back("competitor_" + std::to_string(i) + "_score");
  }
  for (const auto& r : rows) {
    std::vector<std::string> row = {r.source, r.gold_target, io::exact(r.rank), r.source_label, r.target_label};
    for (std::size_t i = 0; i < 3; ++i) {
      if (i < r.competitors.size()) {
        row.push_back(r.competitors[i].first);
        row.push_back(num(r.competitors[i].second));
      } else {
        row.push_back("");
        row.push_back("");
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace harmony
