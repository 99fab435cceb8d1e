#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "synthner/campaign.hpp"

namespace synthner::config {

// Campaign file, a TOML subset: top-level `key = value` pairs and one
// `[[stage]]` table per sampling stage. Values are "strings", integers,
// floats or booleans; `#` starts a comment. Relative paths are resolved
// against the directory of the config file.
//
//   backend = "mock"            # or "http"
//   url = "http://localhost:8000/v1/completions"
//   model = "EleutherAI/gpt-neox-20b"
//   prompt = "fewshot_prompt.txt"  # verbatim prompt, or: examples = "x.jsonl"
//   output = "raw.jsonl"
//   concurrency = 2
//
//   [[stage]]
//   samples = 1000
//   temperature = 0.8
//   top_p = 0.9
//   max_tokens = 768
//   seed = 42
struct CampaignConfig {
  std::string backend = "mock";
  std::string backend_id;
  std::string url;
  std::string model;
  std::filesystem::path prompt;
  std::filesystem::path examples;
  std::filesystem::path output;
  std::filesystem::path mock_profile;
  std::size_t concurrency = 2;
  long timeout_seconds = 600;
  long retry_base_ms = 500;
  std::vector<campaign::Stage> stages;
};

// Throws DataError with the offending line number.
CampaignConfig parse_campaign_config(std::string_view text, const std::string& source,
                                     const std::filesystem::path& base_dir);
CampaignConfig load_campaign_config(const std::filesystem::path& path);

}  // namespace synthner::config
