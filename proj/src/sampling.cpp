#include "synthner/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace synthner::sampling {

void SamplingParams::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("temperature must be positive and finite");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) throw std::invalid_argument("top_p must be in (0, 1]");
  if (max_tokens == 0) throw std::invalid_argument("max_tokens must be positive");
}

std::vector<double> tempered_softmax(std::span<const double> logits, double temperature) {
  if (logits.empty()) throw std::invalid_argument("logit vector is empty");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("temperature must be positive and finite");
  }
  std::vector<double> out(logits.size());
  double max_scaled = -INFINITY;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) throw std::invalid_argument("logits must be finite");
    out[i] = logits[i] / temperature;
    max_scaled = std::max(max_scaled, out[i]);
  }
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - max_scaled);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> top_p_filter(std::span<const double> probs, double top_p) {
  if (!(top_p > 0.0 && top_p <= 1.0)) throw std::invalid_argument("top_p must be in (0, 1]");
  if (probs.empty()) throw std::invalid_argument("probability vector is empty");

  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });

  std::size_t keep = 0;
  double cumulative = 0.0;
  while (keep < order.size()) {
    cumulative += probs[order[keep]];
    ++keep;
    if (cumulative >= top_p - kProbSumTolerance) break;
  }

  std::vector<double> out(probs.size(), 0.0);
  double kept_mass = 0.0;
  for (std::size_t k = 0; k < keep; ++k) kept_mass += probs[order[k]];
  if (kept_mass <= 0.0) throw std::invalid_argument("probability vector has no mass");
  for (std::size_t k = 0; k < keep; ++k) out[order[k]] = probs[order[k]] / kept_mass;
  return out;
}

std::uint64_t SplitMix64::next() {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::next_double() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::size_t sample_with_uniform(std::span<const double> probs, double u) {
  if (probs.empty()) throw std::invalid_argument("probability vector is empty");
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (probs[i] > 0.0) last_positive = i;
    if (cumulative > u) return i;
  }
  // Rounding left the total just below u.
  return last_positive;
}

TokenDraw sample_token(std::span<const double> probs, std::uint64_t rng_state) {
  SplitMix64 rng{rng_state};
  const double u = rng.next_double();
  return {sample_with_uniform(probs, u), rng.state};
}

}  // namespace synthner::sampling
