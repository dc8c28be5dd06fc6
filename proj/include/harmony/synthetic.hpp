#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "harmony/dictionary.hpp"
#include "harmony/features.hpp"

namespace harmony {

/// Generated matching corpus. Every target has its own three concept words,
/// a topic shared with about nine other targets (its sheet text) and two
/// rule words. A source restates its gold target's concept, topic and rule
/// words; with probability `noise` each restated word is swapped for a
/// paraphrase token that shares nothing with the original.
struct SyntheticSpec {
  std::size_t n_sources = 60;
  std::size_t n_targets = 300;
  double noise = 0.5;
  double multi_gold_fraction = 0.2;  // sources whose gold also covers a near-duplicate target
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  DataDictionary sources;
  DataDictionary targets;
  GoldPairs gold;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec);

/// Feature store with the standard schema filled directly: every column is
/// uniform noise on [0, 1) except `signal` columns, where gold pairs draw
/// from [0.7, 1) and the rest from [0, 0.5), and `constant` columns, which
/// are 0 everywhere. One gold target per source.
struct PlantedSpec {
  std::size_t n_sources = 50;
  std::size_t n_targets = 100;
  std::vector<std::string> signal;
  std::vector<std::string> constant;
  std::uint64_t seed = 0;
};

struct PlantedFixture {
  FeatureStore store;
  GoldPairs gold;
};

PlantedFixture make_planted_fixture(const PlantedSpec& spec);

/// E[1/R] for the best of `n_gold` gold items under a uniformly random
/// ordering of `n` items.
double random_ranking_mrr(std::size_t n, std::size_t n_gold);

}  // namespace harmony
