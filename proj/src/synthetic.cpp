#include "kltext/synthetic.hpp"

#include <cstdio>
#include <fstream>

#include "kltext/error.hpp"
#include "kltext/rng.hpp"

namespace kltext {

namespace fs = std::filesystem;

void SyntheticConfig::validate() const {
  if (classes < 1 || docs_per_class < 1 || signal_terms < 1) {
    throw Error(ErrorCode::InvalidArgument, "classes, docs-per-class and signal-terms must be >= 1");
  }
  if (noise_terms < 0) throw Error(ErrorCode::InvalidArgument, "noise-terms must be >= 0");
  if (min_length < 1 || max_length < min_length) {
    throw Error(ErrorCode::InvalidArgument, "document length bounds must satisfy 1 <= min <= max");
  }
  if (!(signal_share > 0.0 && signal_share <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "signal share must lie in (0, 1]");
  }
}

namespace {

std::string numbered(const char* prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, value);
  return buf;
}

}  // namespace

std::string synthetic_class_id(int c) { return numbered("class", c, 2); }

std::string synthetic_signal_term(int c, int j) { return numbered("c", c, 2) + numbered("sig", j, 3); }

std::string synthetic_noise_term(int j) { return numbered("noise", j, 3); }

std::vector<SyntheticDocument> generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<SyntheticDocument> out;
  out.reserve(static_cast<std::size_t>(cfg.classes) * static_cast<std::size_t>(cfg.docs_per_class));
  const auto span = static_cast<std::uint64_t>(cfg.max_length - cfg.min_length + 1);
  for (int c = 0; c < cfg.classes; ++c) {
    for (int k = 0; k < cfg.docs_per_class; ++k) {
      const int length = cfg.min_length + static_cast<int>(rng.uniform_index(span));
      std::string text;
      for (int t = 0; t < length; ++t) {
        const bool signal = cfg.noise_terms == 0 || rng.bernoulli(cfg.signal_share);
        if (t > 0) text += (t % 12 == 0) ? '\n' : ' ';
        if (signal) {
          text += synthetic_signal_term(c, static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cfg.signal_terms))));
        } else {
          text += synthetic_noise_term(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cfg.noise_terms))));
        }
      }
      text += '\n';
      out.push_back({synthetic_class_id(c) + "/" + numbered("doc", k, 3) + ".txt", std::move(text)});
    }
  }
  return out;
}

void write_synthetic(const fs::path& root, const SyntheticConfig& cfg) {
  const auto docs = generate_synthetic(cfg);
  std::error_code ec;
  for (const auto& doc : docs) {
    const fs::path file = root / doc.relative_path;
    fs::create_directories(file.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + file.parent_path().string() + ": " + ec.message());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << doc.text;
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  }
}

}  // namespace kltext
