#ifndef KLTEXT_GA_REDUCE_HPP
#define KLTEXT_GA_REDUCE_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kltext/centroid.hpp"
#include "kltext/corpus.hpp"
#include "kltext/error.hpp"
#include "kltext/rng.hpp"

namespace kltext {

/// Binary control vector over the nonzero coordinates of a class centroid.
/// Gene i keeps (1) or zeroes (0) class-local coordinate i.
struct Chromosome {
  std::vector<std::uint8_t> genes;

  static Chromosome ones(std::size_t length) { return {std::vector<std::uint8_t>(length, 1)}; }
  static Chromosome from_string(std::string_view bits);

  std::size_t size() const { return genes.size(); }
  std::size_t count_ones() const;
  std::size_t count_zeros() const { return size() - count_ones(); }
  std::string to_string() const;
  Eigen::ArrayXd as_array() const;

  friend auto operator<=>(const Chromosome&, const Chromosome&) = default;
};

struct GaConfig {
  int population_size = 64;
  double mutation_probability = 0.2;
  int max_generations = 200;
  int stagnation_limit = 30;
  double containment_threshold = 0.9;  // theta
  double reduction_weight = 0.5;       // rho
  std::uint64_t seed = 42;

  void validate() const;

  friend bool operator==(const GaConfig&, const GaConfig&) = default;
};

/// Weight of retained energy among feasible chromosomes; only breaks ties
/// between equal reductions.
inline constexpr double kEnergyWeight = 0.01;

/// Everything the fitness of a chromosome depends on, over class-local
/// coordinates (the support of the class centroid).
struct ClassProblem {
  std::string class_id;
  std::vector<TermId> term_map;
  Eigen::MatrixXd docs;             // one unit document per row
  Eigen::VectorXd own_centroid;     // unit
  Eigen::MatrixXd other_centroids;  // one row per other class, restricted, never masked

  Eigen::Index length() const { return own_centroid.size(); }
  Eigen::Index doc_count() const { return docs.rows(); }
};

/// Class-local coordinates are the support of the class centroid.
ClassProblem make_class_problem(const LabeledDataset& dataset, std::span<const Centroid> centroids,
                                const std::string& class_id);
/// Same, over explicit coordinates (strictly increasing term ids).
ClassProblem make_class_problem(const LabeledDataset& dataset, std::span<const Centroid> centroids,
                                const std::string& class_id, std::vector<TermId> term_map);

struct MaskedVector {
  Eigen::VectorXd unit;  // masked vector rescaled to unit length (zero when degenerate)
  double raw_norm = 0.0;
  bool degenerate() const { return raw_norm == 0.0; }
};

/// Coordinate-wise product of the mask with `b`, renormalized.
MaskedVector mask_apply(const Chromosome& mask, const Eigen::VectorXd& b);

struct Allowance {
  bool allowed = false;
  std::size_t satisfied = 0;
};

/// Separation test under a mask: a document counts as satisfied when its
/// masked unit vector is strictly closer to the masked own centroid than to
/// every (unmasked) other-class centroid. Degenerate masks satisfy nothing.
Allowance is_allowed(const Chromosome& mask, const ClassProblem& problem);

struct FitnessParts {
  double containment = 0.0;  // satisfied / class size
  double reduction = 0.0;    // zeros / L
  double energy = 0.0;       // sum ||mask b||^2 / sum ||b||^2
  bool degenerate = false;   // mask zeroes the own centroid
};

FitnessParts evaluate_parts(const Chromosome& mask, const ClassProblem& problem);

/// containment                                     when infeasible (c < theta or degenerate)
/// theta + rho * reduction + (1 - rho) * energy * kEnergyWeight   otherwise
double composite_fitness(const FitnessParts& parts, double theta, double rho);

double fitness(const Chromosome& mask, const ClassProblem& problem, const GaConfig& cfg);

/// population_size / 2 parent pairs drawn from the individuals whose fitness
/// is at least the population mean (everyone when fewer than two qualify).
std::vector<std::pair<std::size_t, std::size_t>> select_parents(std::span<const double> fitnesses, Rng& rng);

/// Single-point crossover at a break point drawn from 1..L-1.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& x, const Chromosome& y, Rng& rng);
std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& x, const Chromosome& y, std::size_t point);

/// With probability `probability`, flips one uniformly chosen gene.
Chromosome mutate(Chromosome c, double probability, Rng& rng);

struct Scored {
  Chromosome chromosome;
  double fitness = 0.0;
};

using FitnessFn = std::function<double(const Chromosome&)>;

/// Elite survival: parents and evaluated offspring are pooled and the best
/// |parents| kept (ties: fewer ones, then lexicographic gene order).
/// Repeated chromosomes survive only after every distinct one.
std::vector<Scored> next_generation(std::vector<Scored> parents, std::span<const Chromosome> offspring,
                                    const FitnessFn& fitness_fn);

struct GaResult {
  Chromosome best;
  double best_fitness = 0.0;
  double containment = 0.0;
  double reduction = 0.0;
  int generations_run = 0;
  std::vector<double> fitness_history;  // best fitness, index 0 is the initial population

  friend bool operator==(const GaResult&, const GaResult&) = default;
};

/// Raised when even the all-ones control leaves containment below theta.
/// Carries the best result the search reached anyway.
class InfeasibleClassError : public Error {
 public:
  InfeasibleClassError(const std::string& class_id, GaResult result, double best_containment)
      : Error(ErrorCode::InfeasibleClass, "class '" + class_id + "' is inseparable at the requested threshold"),
        result_(std::move(result)),
        best_containment_(best_containment) {}

  const GaResult& result() const { return result_; }
  double best_containment() const { return best_containment_; }

 private:
  GaResult result_;
  double best_containment_;
};

GaResult run_ga(const ClassProblem& problem, const GaConfig& cfg);

}  // namespace kltext

#endif  // KLTEXT_GA_REDUCE_HPP
