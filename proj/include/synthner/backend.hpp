#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "synthner/sampling.hpp"

namespace synthner::backend {

enum class ErrorKind {
  Transport,          // retried with backoff
  Authentication,     // fatal
  Configuration,      // fatal: endpoint rejects the request itself
  MalformedResponse,  // sample recorded empty
};

std::string_view to_string(ErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  bool fatal() const {
    return kind_ == ErrorKind::Authentication || kind_ == ErrorKind::Configuration;
  }

 private:
  ErrorKind kind_;
};

struct CompletionRequest {
  std::string_view prompt;
  sampling::SamplingParams params;
  // Lets a backend derive a per-sample stream; remote backends ignore it.
  std::uint64_t sample_index = 0;
};

// complete() may be called from several threads at once.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Mock generator

// Sentence templates use {Label} placeholders filled from per-label lexicons,
// e.g. "Der Patient erhält {Medikation} {Dosis} gegen {Diagnose}.".
struct MockProfile {
  double missing_close = 0.0;
  double invalid_syntax = 0.0;
  double unknown_label = 0.0;
  double no_annotation = 0.0;
  double duplicate = 0.0;

  std::vector<std::string> templates;
  std::map<std::string, std::vector<std::string>> lexicons;
  std::vector<std::string> foreign_labels{"Symptom"};
  std::size_t sentences_per_sample = 8;
  // Template and lexicon choices are drawn through the tempered softmax over
  // logits -rank_decay * rank, so temperature and top_p shape diversity.
  double rank_decay = 0.05;

  static MockProfile german_medical();
  void validate() const;
};

MockProfile mock_profile_from_json(std::string_view contents, const std::string& source);

// Deterministic: the output depends only on the profile, the sampling
// parameters and stream_seed(seed, sample_index). The completion continues an
// open "<s>", so it starts with sentence text.
class MockBackend final : public CompletionBackend {
 public:
  explicit MockBackend(MockProfile profile);
  std::string complete(const CompletionRequest& request) override;
  const MockProfile& profile() const { return profile_; }

 private:
  MockProfile profile_;
};

// ---------------------------------------------------------------------------
// Completion-style HTTP client

struct HttpBackendConfig {
  std::string url;  // e.g. http://localhost:8000/v1/completions
  std::string model;
  std::string api_key;
  std::chrono::seconds timeout{600};
};

inline constexpr const char* kApiKeyEnvVar = "SYNTHNER_API_KEY";

// {"prompt","max_tokens","temperature","top_p","n":1} plus "model" when set.
std::string completion_request_body(std::string_view prompt,
                                    const sampling::SamplingParams& params,
                                    std::string_view model);

// Extracts choices[0].text; throws BackendError(MalformedResponse) otherwise.
std::string completion_text_from_response(std::string_view body);

class HttpBackend final : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  std::string complete(const CompletionRequest& request) override;

 private:
  HttpBackendConfig config_;
  std::string origin_;
  std::string path_;
};

}  // namespace synthner::backend
