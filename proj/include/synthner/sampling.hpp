#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace synthner::sampling {

struct SamplingParams {
  double temperature = 1.0;  // > 0
  double top_p = 1.0;        // in (0, 1]
  std::uint32_t max_tokens = 1;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

// Output of tempered_softmax sums to 1 within this bound.
inline constexpr double kProbSumTolerance = 1e-12;

// softmax(l_i / temperature), stabilized by subtracting max_j(l_j / temperature).
// Throws on empty or non-finite logits or temperature <= 0.
std::vector<double> tempered_softmax(std::span<const double> logits, double temperature);

// Nucleus filter. Indices are ranked by probability descending, ties by
// ascending index; the minimal prefix whose cumulative mass reaches top_p is
// kept and renormalized, everything else is zeroed. Index positions are
// preserved. The comparison against top_p allows kProbSumTolerance of slack
// so that a prefix summing to exactly top_p is not lost to rounding.
std::vector<double> top_p_filter(std::span<const double> probs, double top_p);

// SplitMix64. The state is a plain value; callers thread it through.
struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next();
  // Uniform in [0, 1) from the top 53 bits of next().
  double next_double();
};

// Inverse-CDF draw: smallest i with cumulative(probs)[i] > u.
std::size_t sample_with_uniform(std::span<const double> probs, double u);

struct TokenDraw {
  std::size_t index = 0;
  std::uint64_t next_state = 0;
};

TokenDraw sample_token(std::span<const double> probs, std::uint64_t rng_state);

// Independent stream per sample: seed XOR sample_index.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t sample_index) {
  return seed ^ sample_index;
}

}  // namespace synthner::sampling
