#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rbflow/io_util.hpp"
#include "rbflow/training.hpp"

namespace rbflow {

/// Flat real-valued gene vector laid out as
/// [W_hidden_1 .. W_hidden_N, b_hidden_1 .. b_hidden_N, W_output, b_output],
/// matrices flattened row-major. With includes_geometry set, every layer's
/// centers (unit by unit) and widths follow at the end.
struct Chromosome {
  std::vector<double> genes;
  std::uint64_t spec_fingerprint = 0;
  bool includes_geometry = false;

  friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

enum class CrossoverKind { OnePoint, TwoPoint };

inline CrossoverKind crossover_kind_from_string(const std::string& s) {
  if (s == "one_point") return CrossoverKind::OnePoint;
  if (s == "two_point") return CrossoverKind::TwoPoint;
  throw ParseError("unknown crossover kind: " + s);
}

struct GaConfig {
  std::size_t population_size = 100;
  double mutation_rate = 0.1;
  std::size_t num_generations = 100;
  CrossoverKind crossover = CrossoverKind::OnePoint;
  double mutation_sigma = 0.25;
  std::size_t elitism = 1;
  std::size_t tournament_size = 3;
  bool evolve_geometry = false;
  std::uint64_t seed = 0;
};

inline void validate(const GaConfig& cfg) {
  if (cfg.population_size < 1) throw ValueError("ga config: population_size must be >= 1");
  if (cfg.mutation_rate < 0.0 || cfg.mutation_rate > 1.0) {
    throw ValueError("ga config: mutation_rate must be in [0, 1]");
  }
  if (cfg.num_generations < 1) throw ValueError("ga config: num_generations must be >= 1");
  if (!(cfg.mutation_sigma >= 0.0)) throw ValueError("ga config: mutation_sigma must be >= 0");
  if (cfg.elitism >= cfg.population_size) {
    throw ValueError("ga config: elitism must be < population_size");
  }
  if (cfg.tournament_size < 1 || cfg.tournament_size > cfg.population_size) {
    throw ValueError("ga config: tournament size must be in [1, population_size]");
  }
}

/// Row g is the population after g generations (row 0 = initial population).
struct FitnessHistory {
  std::vector<double> best;
  std::vector<double> mean;
};

/// Structural hash binding a chromosome to the only architecture it decodes
/// against. Widths and the default-width hyperparameter do not change gene
/// count and are excluded.
inline std::uint64_t spec_fingerprint(const NetworkSpec& spec, bool includes_geometry) {
  std::uint64_t h = fnv1a("rbfn-spec");
  auto mix = [&h](std::uint64_t v) { h = fnv1a(&v, sizeof(v), h); };
  mix(spec.input_dim);
  mix(spec.hidden_unit_counts.size());
  for (std::size_t n : spec.hidden_unit_counts) mix(n);
  for (std::size_t n : spec.hidden_output_dims) mix(n);
  mix(spec.output_dim);
  mix(static_cast<std::uint64_t>(spec.output_activation));
  mix(includes_geometry ? 1 : 0);
  return h;
}

/// Frozen centers/widths a weight-only chromosome decodes onto.
struct NetworkGeometry {
  std::vector<std::vector<RbfUnit>> layers;
};

inline NetworkGeometry extract_geometry(const RbfNetwork& net) {
  NetworkGeometry g;
  for (const RbfLayer& layer : net.hidden_layers) g.layers.push_back(layer.units);
  return g;
}

inline std::size_t weight_gene_count(const NetworkSpec& spec) {
  std::size_t count = 0;
  std::size_t in_dim = spec.input_dim;
  for (std::size_t li = 0; li < spec.hidden_unit_counts.size(); ++li) {
    count += spec.hidden_output_dims[li] * spec.hidden_unit_counts[li];  // W
    count += spec.hidden_output_dims[li];                                // b
    in_dim = spec.hidden_output_dims[li];
  }
  count += spec.output_dim * in_dim + spec.output_dim;
  return count;
}

inline std::size_t geometry_gene_count(const NetworkSpec& spec) {
  std::size_t count = 0;
  std::size_t in_dim = spec.input_dim;
  for (std::size_t li = 0; li < spec.hidden_unit_counts.size(); ++li) {
    count += spec.hidden_unit_counts[li] * (in_dim + 1);  // centers + width
    in_dim = spec.hidden_output_dims[li];
  }
  return count;
}

inline std::size_t gene_count(const NetworkSpec& spec, bool includes_geometry) {
  return weight_gene_count(spec) + (includes_geometry ? geometry_gene_count(spec) : 0);
}

inline Chromosome encode_chromosome(const RbfNetwork& net, bool include_geometry = false) {
  Chromosome c;
  c.includes_geometry = include_geometry;
  c.spec_fingerprint = spec_fingerprint(spec_of(net), include_geometry);
  c.genes.reserve(gene_count(spec_of(net), include_geometry));
  for (const RbfLayer& layer : net.hidden_layers) {
    c.genes.insert(c.genes.end(), layer.weights.data().begin(), layer.weights.data().end());
  }
  for (const RbfLayer& layer : net.hidden_layers) {
    c.genes.insert(c.genes.end(), layer.biases.begin(), layer.biases.end());
  }
  c.genes.insert(c.genes.end(), net.output_weights.data().begin(), net.output_weights.data().end());
  c.genes.insert(c.genes.end(), net.output_biases.begin(), net.output_biases.end());
  if (include_geometry) {
    for (const RbfLayer& layer : net.hidden_layers) {
      for (const RbfUnit& u : layer.units) {
        c.genes.insert(c.genes.end(), u.center.begin(), u.center.end());
        c.genes.push_back(u.width);
      }
    }
  }
  return c;
}

/// Rebuilds a network from genes plus the supplied frozen geometry. With
/// includes_geometry the geometry comes from the tail genes instead; width
/// genes pass through |g| with a 1e-12 floor so mutated geometry stays valid
/// while valid networks round-trip exactly.
inline RbfNetwork decode_chromosome(const Chromosome& chrom, const NetworkSpec& spec,
                                    const NetworkGeometry& geometry) {
  validate(spec);
  if (chrom.spec_fingerprint != spec_fingerprint(spec, chrom.includes_geometry)) {
    throw ValueError("decode_chromosome: fingerprint does not match spec");
  }
  const std::size_t expected = gene_count(spec, chrom.includes_geometry);
  if (chrom.genes.size() != expected) {
    throw ValueError("decode_chromosome: expected " + std::to_string(expected) + " genes, got " +
                     std::to_string(chrom.genes.size()));
  }
  if (!chrom.includes_geometry && geometry.layers.size() != spec.hidden_unit_counts.size()) {
    throw ValueError("decode_chromosome: geometry layer count does not match spec");
  }

  RbfNetwork net;
  net.input_dim = spec.input_dim;
  net.output_activation = spec.output_activation;
  std::size_t pos = 0;
  auto take = [&chrom, &pos]() { return chrom.genes[pos++]; };

  const std::size_t n_layers = spec.hidden_unit_counts.size();
  net.hidden_layers.resize(n_layers);
  for (std::size_t li = 0; li < n_layers; ++li) {
    RbfLayer& layer = net.hidden_layers[li];
    layer.weights = Matrix(spec.hidden_output_dims[li], spec.hidden_unit_counts[li]);
    for (double& v : layer.weights.data()) v = take();
  }
  for (std::size_t li = 0; li < n_layers; ++li) {
    RbfLayer& layer = net.hidden_layers[li];
    layer.biases.resize(spec.hidden_output_dims[li]);
    for (double& v : layer.biases) v = take();
  }
  const std::size_t last_dim = n_layers == 0 ? spec.input_dim : spec.hidden_output_dims.back();
  net.output_weights = Matrix(spec.output_dim, last_dim);
  for (double& v : net.output_weights.data()) v = take();
  net.output_biases.resize(spec.output_dim);
  for (double& v : net.output_biases) v = take();

  std::size_t in_dim = spec.input_dim;
  for (std::size_t li = 0; li < n_layers; ++li) {
    RbfLayer& layer = net.hidden_layers[li];
    if (chrom.includes_geometry) {
      layer.units.resize(spec.hidden_unit_counts[li]);
      for (RbfUnit& u : layer.units) {
        u.center.resize(in_dim);
        for (double& v : u.center) v = take();
        const double w = std::fabs(take());
        u.width = w < 1e-12 ? 1e-12 : w;
      }
    } else {
      if (geometry.layers[li].size() != spec.hidden_unit_counts[li]) {
        throw ValueError("decode_chromosome: geometry unit count mismatch at layer " +
                         std::to_string(li));
      }
      layer.units = geometry.layers[li];
    }
    in_dim = spec.hidden_output_dims[li];
  }
  validate(net);
  return net;
}

/// Mean loss of the decoded network over the dataset; lower is fitter.
inline double fitness(const Chromosome& chrom, const SampleSet& dataset, LossKind loss_kind,
                      const NetworkSpec& spec, const NetworkGeometry& geometry) {
  if (dataset.empty()) throw ValueError("fitness: empty dataset");
  return dataset_loss(decode_chromosome(chrom, spec, geometry), dataset, loss_kind);
}

namespace detail {

/// Tournament over k distinct uniformly drawn individuals (partial
/// Fisher-Yates); lowest loss wins, ties broken by lowest population index.
/// Sampling without replacement makes a full-size tournament always return
/// the global best.
inline std::size_t tournament_pick(const std::vector<double>& scores, Rng& rng, std::size_t k,
                                   std::vector<std::size_t>& pool) {
  const std::size_t n = scores.size();
  pool.resize(n);
  std::iota(pool.begin(), pool.end(), 0);
  std::size_t best = n;  // sentinel
  for (std::size_t i = 0; i < k && i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
    const std::size_t cand = pool[i];
    if (best == n || scores[cand] < scores[best] ||
        (scores[cand] == scores[best] && cand < best)) {
      best = cand;
    }
  }
  return best;
}

}  // namespace detail

/// Enough tournament-selected pairs to refill the population after elites.
inline std::vector<std::pair<std::size_t, std::size_t>> select_parents(
    const std::vector<Chromosome>& population, const std::vector<double>& scores, Rng& rng,
    const GaConfig& config) {
  if (population.empty() || population.size() != scores.size()) {
    throw ValueError("select_parents: population and scores must align and be non-empty");
  }
  const std::size_t offspring =
      config.population_size > config.elitism ? config.population_size - config.elitism : 0;
  const std::size_t pairs = (offspring + 1) / 2;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(pairs);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t a = detail::tournament_pick(scores, rng, config.tournament_size, pool);
    const std::size_t b = detail::tournament_pick(scores, rng, config.tournament_size, pool);
    out.emplace_back(a, b);
  }
  return out;
}

/// One-point: cut at i in [1, len-1]. Two-point: two cuts sorted, middle
/// segment swapped (equal cuts leave the parents unchanged). Chromosomes
/// shorter than 2 genes cannot be cut and come back as clones.
inline std::pair<Chromosome, Chromosome> crossover(const Chromosome& p1, const Chromosome& p2,
                                                   Rng& rng, CrossoverKind kind) {
  if (p1.genes.size() != p2.genes.size() || p1.spec_fingerprint != p2.spec_fingerprint) {
    throw ValueError("crossover: parents have different layouts");
  }
  Chromosome c1 = p1;
  Chromosome c2 = p2;
  const std::size_t len = p1.genes.size();
  if (len < 2) return {c1, c2};
  std::uniform_int_distribution<std::size_t> cut(1, len - 1);
  if (kind == CrossoverKind::OnePoint) {
    const std::size_t i = cut(rng);
    for (std::size_t k = i; k < len; ++k) {
      c1.genes[k] = p2.genes[k];
      c2.genes[k] = p1.genes[k];
    }
  } else {
    std::size_t i = cut(rng);
    std::size_t j = cut(rng);
    if (j < i) std::swap(i, j);
    for (std::size_t k = i; k < j; ++k) {
      c1.genes[k] = p2.genes[k];
      c2.genes[k] = p1.genes[k];
    }
  }
  return {c1, c2};
}

/// Each gene independently receives additive N(0, sigma_mut) noise with the
/// given probability.
inline Chromosome mutate(const Chromosome& chrom, double rate, double sigma_mut, Rng& rng) {
  if (rate < 0.0 || rate > 1.0) throw ValueError("mutate: rate must be in [0, 1]");
  if (!(sigma_mut >= 0.0)) throw ValueError("mutate: sigma_mut must be >= 0");
  Chromosome out = chrom;
  if (rate == 0.0) return out;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, sigma_mut > 0.0 ? sigma_mut : 1.0);
  for (double& g : out.genes) {
    if (uni(rng) < rate && sigma_mut > 0.0) g += noise(rng);
  }
  return out;
}

struct EvolveResult {
  RbfNetwork best_network;
  Chromosome best_chromosome;
  double best_fitness = 0.0;
  FitnessHistory history;
};

namespace detail {

/// Fresh weight genes on the fixed geometry: uniform +-1/sqrt(fan_in) for
/// weights, zero biases, layout order. Geometry tail copied verbatim.
inline Chromosome random_chromosome(const NetworkSpec& spec, const NetworkGeometry& geometry,
                                    bool include_geometry, Rng& rng) {
  Chromosome c;
  c.includes_geometry = include_geometry;
  c.spec_fingerprint = spec_fingerprint(spec, include_geometry);
  c.genes.reserve(gene_count(spec, include_geometry));
  auto draw_block = [&](std::size_t count, std::size_t fan_in) {
    std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(static_cast<double>(fan_in)),
                                                1.0 / std::sqrt(static_cast<double>(fan_in)));
    for (std::size_t k = 0; k < count; ++k) c.genes.push_back(dist(rng));
  };
  std::size_t in_dim = spec.input_dim;
  for (std::size_t li = 0; li < spec.hidden_unit_counts.size(); ++li) {
    draw_block(spec.hidden_output_dims[li] * spec.hidden_unit_counts[li],
               spec.hidden_unit_counts[li]);
    in_dim = spec.hidden_output_dims[li];
  }
  for (std::size_t li = 0; li < spec.hidden_unit_counts.size(); ++li) {
    c.genes.insert(c.genes.end(), spec.hidden_output_dims[li], 0.0);
  }
  draw_block(spec.output_dim * in_dim, in_dim);
  c.genes.insert(c.genes.end(), spec.output_dim, 0.0);
  if (include_geometry) {
    for (const auto& units : geometry.layers) {
      for (const RbfUnit& u : units) {
        c.genes.insert(c.genes.end(), u.center.begin(), u.center.end());
        c.genes.push_back(u.width);
      }
    }
  }
  return c;
}

}  // namespace detail

/// Generational loop: evaluate, carry elites, tournament-select, crossover,
/// mutate, replace. Deterministic for a fixed seed: one generator drives
/// every draw and fitness is evaluated in population order. Returns the
/// best-ever individual, not merely the last generation's best.
inline EvolveResult evolve(const NetworkSpec& spec, const NetworkGeometry& geometry,
                           const SampleSet& dataset, const GaConfig& config, LossKind loss_kind) {
  validate(spec);
  validate(config);
  if (dataset.empty()) throw ValueError("evolve: empty dataset");
  if (geometry.layers.size() != spec.hidden_unit_counts.size()) {
    throw ValueError("evolve: geometry layer count does not match spec");
  }

  Rng rng = make_rng(config.seed);
  std::vector<Chromosome> population;
  population.reserve(config.population_size);
  for (std::size_t i = 0; i < config.population_size; ++i) {
    population.push_back(
        detail::random_chromosome(spec, geometry, config.evolve_geometry, rng));
  }

  EvolveResult result;
  result.best_fitness = std::numeric_limits<double>::infinity();

  std::vector<double> scores(config.population_size);
  auto evaluate_all = [&]() {
    double sum = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < population.size(); ++i) {
      scores[i] = fitness(population[i], dataset, loss_kind, spec, geometry);
      sum += scores[i];
      if (scores[i] < best) best = scores[i];
      if (scores[i] < result.best_fitness) {
        result.best_fitness = scores[i];
        result.best_chromosome = population[i];
      }
    }
    result.history.best.push_back(best);
    result.history.mean.push_back(sum / static_cast<double>(population.size()));
  };

  evaluate_all();  // generation 0

  std::vector<std::size_t> ranked(config.population_size);
  for (std::size_t gen = 0; gen < config.num_generations; ++gen) {
    std::iota(ranked.begin(), ranked.end(), 0);
    std::sort(ranked.begin(), ranked.end(), [&scores](std::size_t a, std::size_t b) {
      return scores[a] != scores[b] ? scores[a] < scores[b] : a < b;
    });

    std::vector<Chromosome> next;
    next.reserve(config.population_size);
    for (std::size_t e = 0; e < config.elitism; ++e) next.push_back(population[ranked[e]]);

    const auto parents = select_parents(population, scores, rng, config);
    for (const auto& [a, b] : parents) {
      auto [c1, c2] = crossover(population[a], population[b], rng, config.crossover);
      next.push_back(mutate(c1, config.mutation_rate, config.mutation_sigma, rng));
      if (next.size() < config.population_size) {
        next.push_back(mutate(c2, config.mutation_rate, config.mutation_sigma, rng));
      }
    }
    population = std::move(next);
    evaluate_all();
  }

  result.best_network = decode_chromosome(result.best_chromosome, spec, geometry);
  return result;
}

}  // namespace rbflow
