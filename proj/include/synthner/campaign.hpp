#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "synthner/backend.hpp"
#include "synthner/markup.hpp"
#include "synthner/prompt.hpp"
#include "synthner/sampling.hpp"

namespace synthner::campaign {

struct Stage {
  std::size_t n_samples = 0;
  sampling::SamplingParams params;
};

struct CampaignSpec {
  std::vector<Stage> stages;
  Prompt prompt;
  std::string backend_id;

  std::size_t total_samples() const;
  // Throws std::invalid_argument if a stage is empty or has bad parameters.
  void validate() const;
};

// 1000 samples at temperature 0.8 plus 100 at 0.9, top_p 0.9, 768 tokens.
std::vector<Stage> reference_stages(std::uint64_t seed);

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{500};
  // Delay before attempt k+1 is base_delay * 2^(k-1). Replaceable in tests.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct CampaignOptions {
  std::size_t concurrency = 2;
  RetryPolicy retry;
  // When set, committed samples are journaled to "<output>.partial" and the
  // final file is written atomically once every sample has been attempted.
  std::filesystem::path output;
  // Skip sample indices already present in the journal or the output file.
  bool resume = false;
  std::function<void(const std::string&)> on_event;
};

struct SampleFailure {
  std::uint64_t sample_index = 0;
  backend::ErrorKind kind = backend::ErrorKind::Transport;
  int attempts = 0;
  std::string message;
};

struct CampaignResult {
  // Sorted by sample_index. Transport failures leave gaps; malformed
  // responses are kept as empty samples.
  std::vector<markup::RawSample> samples;
  std::vector<SampleFailure> failures;
  std::size_t resumed = 0;
};

// Provenance for the sample at a global index (stages numbered consecutively).
SampleProvenance provenance_for(const CampaignSpec& spec, std::uint64_t sample_index);

// Runs every stage with up to options.concurrency requests in flight. Samples
// are committed in sample_index order regardless of completion order. Throws
// backend::BackendError on a fatal backend error.
CampaignResult run_campaign(const CampaignSpec& spec, backend::CompletionBackend& backend,
                            const CampaignOptions& options = {});

}  // namespace synthner::campaign
