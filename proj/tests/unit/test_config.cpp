#include <doctest.h>

#include "synthner/config.hpp"
#include "synthner/error.hpp"

using namespace synthner;
using namespace synthner::config;

namespace {

std::size_t error_line(const std::string& text) {
  try {
    parse_campaign_config(text, "c.toml", "/base");
  } catch (const DataError& e) {
    return e.line();
  }
  FAIL("expected a DataError");
  return 0;
}

const std::string kStage = "[[stage]]\nsamples = 3\ntemperature = 0.8\ntop_p = 0.9\nmax_tokens = 64\nseed = 5\n";

}  // namespace

TEST_CASE("the reference campaign file") {
  const auto cfg = load_campaign_config(SYNTHNER_FIXTURES "/reference_campaign.toml");
  CHECK(cfg.backend == "http");
  CHECK(cfg.model == "EleutherAI/gpt-neox-20b");
  CHECK(cfg.backend_id == "EleutherAI/gpt-neox-20b");
  CHECK(cfg.prompt == std::filesystem::path(SYNTHNER_FIXTURES) / "fewshot_prompt.txt");
  REQUIRE(cfg.stages.size() == 2);
  CHECK(cfg.stages[0].n_samples == 1000);
  CHECK(cfg.stages[0].params.temperature == 0.8);
  CHECK(cfg.stages[1].n_samples == 100);
  CHECK(cfg.stages[1].params.temperature == 0.9);
  CHECK(cfg.stages[1].params.top_p == 0.9);
  CHECK(cfg.stages[1].params.max_tokens == 768);
  CHECK(cfg.stages[1].params.seed == 20221018u);
}

TEST_CASE("values, comments and path resolution") {
  const auto cfg = parse_campaign_config(
      "backend = \"mock\"  # offline\nexamples = \"ex # 1.jsonl\"\noutput = \"/abs/out.jsonl\"\n"
      "concurrency = 8\nretry_base_ms = 0\n" + kStage,
      "c.toml", "/base");
  CHECK(cfg.examples == std::filesystem::path("/base/ex # 1.jsonl"));
  CHECK(cfg.output == std::filesystem::path("/abs/out.jsonl"));
  CHECK(cfg.concurrency == 8);
  CHECK(cfg.retry_base_ms == 0);
  CHECK(cfg.backend_id == "mock");
  CHECK(cfg.stages.at(0).params.max_tokens == 64);
}

TEST_CASE("errors carry line numbers") {
  CHECK(error_line("backend = \"mock\"\nbogus = 1\n") == 2);
  CHECK(error_line("backend = \"mock\"\n\nconcurrency = \"two\"\n") == 3);
  CHECK(error_line("prompt = \"p\"\n[[stage]]\nsamples = 0\n") == 3);
  CHECK(error_line("prompt = \"p\"\n[[stage]]\nwarmth = 1\n") == 3);
  CHECK(error_line("[table]\n") == 1);
  CHECK(error_line("just words\n") == 1);
  CHECK(error_line("temperature = 0.8x\n") == 1);
}

TEST_CASE("whole-file checks") {
  CHECK_THROWS_AS(parse_campaign_config("backend = \"mock\"\n" + kStage, "c", "/"), DataError);
  CHECK_THROWS_AS(parse_campaign_config("prompt = \"p\"\nexamples = \"e\"\n" + kStage, "c", "/"),
                  DataError);
  CHECK_THROWS_AS(parse_campaign_config("prompt = \"p\"\n", "c", "/"), DataError);
  CHECK_THROWS_AS(parse_campaign_config("backend = \"http\"\nprompt = \"p\"\n" + kStage, "c", "/"),
                  DataError);
  CHECK_THROWS_AS(parse_campaign_config("backend = \"gpt\"\nprompt = \"p\"\n" + kStage, "c", "/"),
                  DataError);
  CHECK_THROWS_AS(parse_campaign_config("prompt = \"p\"\n[[stage]]\nsamples = 2\ntop_p = 1.5\n", "c", "/"),
                  DataError);
}
