#include "kltext/ga_reduce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace kltext {

Chromosome Chromosome::from_string(std::string_view bits) {
  Chromosome c;
  c.genes.reserve(bits.size());
  for (char b : bits) {
    if (b != '0' && b != '1') throw Error(ErrorCode::FormatError, "gene string must contain only 0 and 1");
    c.genes.push_back(b == '1' ? 1 : 0);
  }
  return c;
}

std::size_t Chromosome::count_ones() const {
  return static_cast<std::size_t>(std::count(genes.begin(), genes.end(), std::uint8_t{1}));
}

std::string Chromosome::to_string() const {
  std::string s;
  s.reserve(genes.size());
  for (auto g : genes) s.push_back(g ? '1' : '0');
  return s;
}

Eigen::ArrayXd Chromosome::as_array() const {
  Eigen::ArrayXd a(static_cast<Eigen::Index>(genes.size()));
  for (std::size_t i = 0; i < genes.size(); ++i) a[static_cast<Eigen::Index>(i)] = genes[i];
  return a;
}

void GaConfig::validate() const {
  if (population_size < 2 || population_size % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "population size must be even and >= 2");
  }
  if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "mutation probability must lie in [0, 1]");
  }
  if (max_generations < 0 || stagnation_limit < 1) {
    throw Error(ErrorCode::InvalidArgument, "generation limits must be positive");
  }
  if (!(containment_threshold >= 0.0 && containment_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "containment threshold must lie in [0, 1]");
  }
  if (!(reduction_weight >= 0.0 && reduction_weight <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "reduction weight must lie in [0, 1]");
  }
}

ClassProblem make_class_problem(const LabeledDataset& dataset, std::span<const Centroid> centroids,
                                const std::string& class_id) {
  const auto& own = find_centroid(centroids, class_id);
  std::vector<TermId> term_map;
  term_map.reserve(own.vector.size());
  for (const auto& e : own.vector.entries()) term_map.push_back(e.first);
  return make_class_problem(dataset, centroids, class_id, std::move(term_map));
}

ClassProblem make_class_problem(const LabeledDataset& dataset, std::span<const Centroid> centroids,
                                const std::string& class_id, std::vector<TermId> term_map) {
  const auto& own = find_centroid(centroids, class_id);
  ClassProblem p;
  p.class_id = class_id;
  p.term_map = std::move(term_map);

  const auto& info = dataset.class_info(class_id);
  p.docs.resize(static_cast<Eigen::Index>(info.members.size()), static_cast<Eigen::Index>(p.term_map.size()));
  for (std::size_t i = 0; i < info.members.size(); ++i) {
    p.docs.row(static_cast<Eigen::Index>(i)) = gather(dataset.documents[info.members[i]].unit, p.term_map).transpose();
  }
  p.own_centroid = gather(own.vector, p.term_map);
  p.other_centroids.resize(static_cast<Eigen::Index>(centroids.size() - 1), p.length());
  Eigen::Index row = 0;
  for (const auto& c : centroids) {
    if (c.class_id == class_id) continue;
    p.other_centroids.row(row++) = gather(c.vector, p.term_map).transpose();
  }
  return p;
}

MaskedVector mask_apply(const Chromosome& mask, const Eigen::VectorXd& b) {
  if (static_cast<Eigen::Index>(mask.size()) != b.size()) {
    throw Error(ErrorCode::LengthMismatch, "mask length " + std::to_string(mask.size()) + " vs vector length " +
                                               std::to_string(b.size()));
  }
  MaskedVector out;
  out.unit = (b.array() * mask.as_array()).matrix();
  out.raw_norm = out.unit.norm();
  if (out.raw_norm > 0.0) out.unit /= out.raw_norm;
  return out;
}

FitnessParts evaluate_parts(const Chromosome& mask, const ClassProblem& problem) {
  const auto own = mask_apply(mask, problem.own_centroid);
  const Eigen::ArrayXd m = mask.as_array();
  const Eigen::MatrixXd masked = (problem.docs.array().rowwise() * m.transpose()).matrix();

  FitnessParts parts;
  parts.degenerate = own.degenerate();
  parts.reduction = mask.size() == 0 ? 0.0 : static_cast<double>(mask.count_zeros()) / static_cast<double>(mask.size());
  const double base_energy = problem.docs.squaredNorm();
  parts.energy = base_energy > 0.0 ? masked.squaredNorm() / base_energy : 0.0;
  if (parts.degenerate || problem.doc_count() == 0) return parts;

  const Eigen::VectorXd own_scores = masked * own.unit;
  const Eigen::MatrixXd other_scores = masked * problem.other_centroids.transpose();
  std::size_t satisfied = 0;
  for (Eigen::Index i = 0; i < masked.rows(); ++i) {
    const double norm = masked.row(i).norm();
    if (norm == 0.0) continue;
    const double own_sim = own_scores[i] / norm;
    const double other_sim = other_scores.cols() > 0 ? other_scores.row(i).maxCoeff() / norm
                                                     : -std::numeric_limits<double>::infinity();
    if (own_sim > other_sim + kTieTolerance) ++satisfied;
  }
  parts.containment = static_cast<double>(satisfied) / static_cast<double>(problem.doc_count());
  return parts;
}

Allowance is_allowed(const Chromosome& mask, const ClassProblem& problem) {
  if (static_cast<Eigen::Index>(mask.size()) != problem.length()) {
    throw Error(ErrorCode::LengthMismatch, "mask length does not match class dimension");
  }
  const auto parts = evaluate_parts(mask, problem);
  Allowance a;
  a.satisfied = static_cast<std::size_t>(std::llround(parts.containment * static_cast<double>(problem.doc_count())));
  a.allowed = !parts.degenerate && a.satisfied == static_cast<std::size_t>(problem.doc_count());
  return a;
}

double composite_fitness(const FitnessParts& parts, double theta, double rho) {
  if (parts.degenerate || parts.containment < theta) return parts.containment;
  return theta + rho * parts.reduction + (1.0 - rho) * parts.energy * kEnergyWeight;
}

double fitness(const Chromosome& mask, const ClassProblem& problem, const GaConfig& cfg) {
  return composite_fitness(evaluate_parts(mask, problem), cfg.containment_threshold, cfg.reduction_weight);
}

std::vector<std::pair<std::size_t, std::size_t>> select_parents(std::span<const double> fitnesses, Rng& rng) {
  if (fitnesses.empty()) throw Error(ErrorCode::InvalidArgument, "empty population");
  const double mean = std::accumulate(fitnesses.begin(), fitnesses.end(), 0.0) / static_cast<double>(fitnesses.size());
  // The mean of equal values can round above them; allow for that.
  const double threshold = mean - 1e-12 * std::max(1.0, std::abs(mean));
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < fitnesses.size(); ++i) {
    if (fitnesses[i] >= threshold) eligible.push_back(i);
  }
  if (eligible.size() < 2) {
    eligible.resize(fitnesses.size());
    std::iota(eligible.begin(), eligible.end(), std::size_t{0});
  }

  const std::size_t pair_count = std::max<std::size_t>(1, fitnesses.size() / 2);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(pair_count);
  for (std::size_t p = 0; p < pair_count; ++p) {
    const std::size_t a = rng.uniform_index(eligible.size());
    std::size_t b = a;
    if (eligible.size() >= 2) {
      b = rng.uniform_index(eligible.size() - 1);
      if (b >= a) ++b;
    }
    pairs.emplace_back(eligible[a], eligible[b]);
  }
  return pairs;
}

std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& x, const Chromosome& y, std::size_t point) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "parents differ in length");
  if (point > x.size()) throw Error(ErrorCode::IndexOutOfRange, "break point beyond chromosome");
  Chromosome a = x;
  Chromosome b = y;
  std::swap_ranges(a.genes.begin() + static_cast<std::ptrdiff_t>(point), a.genes.end(),
                   b.genes.begin() + static_cast<std::ptrdiff_t>(point));
  return {std::move(a), std::move(b)};
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& x, const Chromosome& y, Rng& rng) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "parents differ in length");
  if (x.size() < 2) throw Error(ErrorCode::LengthMismatch, "crossover needs at least two genes");
  const std::size_t point = 1 + rng.uniform_index(x.size() - 1);
  return crossover_at(x, y, point);
}

Chromosome mutate(Chromosome c, double probability, Rng& rng) {
  if (c.genes.empty()) return c;
  if (rng.bernoulli(probability)) {
    auto& g = c.genes[rng.uniform_index(c.size())];
    g = g ? 0 : 1;
  }
  return c;
}

namespace {

bool ranks_before(const Scored& a, const Scored& b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  const auto ones_a = a.chromosome.count_ones();
  const auto ones_b = b.chromosome.count_ones();
  if (ones_a != ones_b) return ones_a < ones_b;
  return a.chromosome.genes < b.chromosome.genes;
}

}  // namespace

std::vector<Scored> next_generation(std::vector<Scored> parents, std::span<const Chromosome> offspring,
                                    const FitnessFn& fitness_fn) {
  const std::size_t n = parents.size();
  parents.reserve(n + offspring.size());
  for (const auto& c : offspring) parents.push_back({c, fitness_fn(c)});
  std::stable_sort(parents.begin(), parents.end(), ranks_before);
  // Repeated chromosomes rank behind every distinct one, so copies of the
  // leader cannot crowd out the runners-up.
  std::set<std::vector<std::uint8_t>> seen;
  std::stable_partition(parents.begin(), parents.end(),
                        [&](const Scored& s) { return seen.insert(s.chromosome.genes).second; });
  parents.resize(n);
  return parents;
}

GaResult run_ga(const ClassProblem& problem, const GaConfig& cfg) {
  cfg.validate();
  const auto length = static_cast<std::size_t>(problem.length());
  if (length == 0 || problem.doc_count() == 0) {
    throw Error(ErrorCode::EmptyClass, "class '" + problem.class_id + "' has nothing to reduce");
  }

  Rng rng(cfg.seed);
  double best_containment = 0.0;
  const FitnessFn fitness_fn = [&](const Chromosome& c) {
    const auto parts = evaluate_parts(c, problem);
    best_containment = std::max(best_containment, parts.containment);
    return composite_fitness(parts, cfg.containment_threshold, cfg.reduction_weight);
  };

  // Initial population: the identity control plus random controls that keep
  // each gene with probability 0.9.
  std::vector<Chromosome> initial;
  initial.reserve(static_cast<std::size_t>(cfg.population_size));
  initial.push_back(Chromosome::ones(length));
  for (int i = 1; i < cfg.population_size; ++i) {
    Chromosome c;
    c.genes.resize(length);
    for (auto& g : c.genes) g = rng.bernoulli(0.9) ? 1 : 0;
    initial.push_back(std::move(c));
  }
  std::vector<Scored> population;
  population.reserve(initial.size());
  for (auto& c : initial) {
    const double f = fitness_fn(c);
    population.push_back({std::move(c), f});
  }
  std::stable_sort(population.begin(), population.end(), ranks_before);

  GaResult result;
  result.fitness_history.push_back(population.front().fitness);
  int stagnant = 0;
  std::vector<double> fitnesses;
  std::vector<Chromosome> offspring;
  while (result.generations_run < cfg.max_generations && stagnant < cfg.stagnation_limit) {
    fitnesses.clear();
    for (const auto& s : population) fitnesses.push_back(s.fitness);
    const auto pairs = select_parents(fitnesses, rng);

    offspring.clear();
    for (const auto& [i, j] : pairs) {
      auto [a, b] = length >= 2 ? crossover(population[i].chromosome, population[j].chromosome, rng)
                                : std::pair{population[i].chromosome, population[j].chromosome};
      offspring.push_back(mutate(std::move(a), cfg.mutation_probability, rng));
      offspring.push_back(mutate(std::move(b), cfg.mutation_probability, rng));
    }
    const double previous = population.front().fitness;
    population = next_generation(std::move(population), offspring, fitness_fn);
    ++result.generations_run;
    stagnant = population.front().fitness > previous ? 0 : stagnant + 1;
    result.fitness_history.push_back(population.front().fitness);
  }

  result.best = population.front().chromosome;
  result.best_fitness = population.front().fitness;
  const auto parts = evaluate_parts(result.best, problem);
  result.containment = parts.containment;
  result.reduction = parts.reduction;

  const auto identity = evaluate_parts(Chromosome::ones(length), problem);
  if (identity.degenerate || identity.containment < cfg.containment_threshold) {
    throw InfeasibleClassError(problem.class_id, result, best_containment);
  }
  return result;
}

}  // namespace kltext
