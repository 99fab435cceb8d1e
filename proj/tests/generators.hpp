#pragma once

// Seeded generators shared by the unit and acceptance suites. They use
// std::mt19937_64, not the library's SplitMix64, so generated inputs stay
// independent of the code under test.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "synthner/corpus.hpp"
#include "synthner/unicode.hpp"

namespace testgen {

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}

  std::size_t below(std::size_t n) {
    return n == 0 ? 0 : std::uniform_int_distribution<std::size_t>(0, n - 1)(engine);
  }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine); }
  bool coin(double p = 0.5) { return uniform() < p; }
};

// Characters that may appear in surface text: letters, umlauts, digits,
// whitespace and punctuation, never '<' or '>'.
inline const std::u32string& alphabet() {
  static const std::u32string a =
      U"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZäöüÄÖÜßé0123456789"
      U"      .,;:!?()[]-/'\"%+µ\t";
  return a;
}

inline std::u32string random_text(Rng& rng, std::size_t max_len) {
  std::u32string t;
  const std::size_t len = rng.below(max_len + 1);
  for (std::size_t i = 0; i < len; ++i) t.push_back(alphabet()[rng.below(alphabet().size())]);
  return t;
}

// A valid sentence: sorted, non-empty, non-overlapping spans with labels from ls.
inline synthner::AnnotatedSentence random_sentence(Rng& rng, const synthner::LabelSet& ls,
                                                   std::string id, std::size_t max_len = 60) {
  synthner::AnnotatedSentence s;
  s.id = std::move(id);
  const std::u32string text = random_text(rng, max_len);
  s.text = synthner::unicode::encode(text);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t gap = rng.below(6);
    const std::size_t start = pos + gap;
    if (start >= text.size()) break;
    const std::size_t len = 1 + rng.below(std::min<std::size_t>(12, text.size() - start));
    if (rng.coin(0.7)) {
      s.spans.push_back(synthner::Span{start, start + len,
                                       ls.labels()[rng.below(ls.size())]});
    }
    pos = start + len;
  }
  return s;
}

inline std::vector<synthner::AnnotatedSentence> random_sentences(Rng& rng, std::size_t n,
                                                                 const synthner::LabelSet& ls) {
  std::vector<synthner::AnnotatedSentence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_sentence(rng, ls, "s" + std::to_string(i)));
  return out;
}

}  // namespace testgen
