#ifndef KLTEXT_SYNTHETIC_HPP
#define KLTEXT_SYNTHETIC_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace kltext {

/// Seeded generator of labeled corpora with planted structure. Class c owns
/// a disjoint block of `signal_terms` wordforms; `noise_terms` wordforms are
/// shared by every class. Each token is a signal term with probability
/// signal_share (uniform within the class block), otherwise a noise term.
struct SyntheticConfig {
  int classes = 3;
  int docs_per_class = 20;
  int signal_terms = 20;
  int noise_terms = 40;
  int min_length = 40;   // tokens per document, inclusive bounds
  int max_length = 80;
  double signal_share = 0.8;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SyntheticDocument {
  std::string relative_path;  // "<class>/<doc>.txt"
  std::string text;
};

std::string synthetic_class_id(int c);
std::string synthetic_signal_term(int c, int j);
std::string synthetic_noise_term(int j);

/// Documents in class order, then document order.
std::vector<SyntheticDocument> generate_synthetic(const SyntheticConfig& cfg);

/// Writes the corpus under `root` (created if missing). Throws IoError.
void write_synthetic(const std::filesystem::path& root, const SyntheticConfig& cfg);

}  // namespace kltext

#endif  // KLTEXT_SYNTHETIC_HPP
