#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "synthner/campaign.hpp"
#include "synthner/io.hpp"

using namespace synthner;
using namespace synthner::campaign;
using backend::BackendError;
using backend::ErrorKind;

namespace {

CampaignSpec small_spec(std::uint64_t seed = 9) {
  CampaignSpec spec;
  spec.stages = {Stage{12, {0.8, 0.9, 768, seed}}, Stage{5, {0.9, 0.9, 768, seed}}};
  spec.prompt = Prompt{"<s>Kein Befund.</s>\n<s>", 1};
  spec.backend_id = "fake";
  return spec;
}

RetryPolicy no_sleep(std::vector<std::chrono::milliseconds>* log = nullptr) {
  RetryPolicy r;
  r.sleep = [log](std::chrono::milliseconds d) {
    if (log) log->push_back(d);
  };
  return r;
}

// Echoes the request and jitters its latency so completion order differs from index order.
class EchoBackend : public backend::CompletionBackend {
 public:
  std::string complete(const backend::CompletionRequest& r) override {
    calls++;
    std::this_thread::sleep_for(std::chrono::microseconds((r.sample_index * 7919) % 1500));
    return "s" + std::to_string(r.sample_index) + " t" + std::to_string(r.params.temperature) + "</s>";
  }
  std::atomic<int> calls{0};
};

// Fails each sample a set number of times before succeeding.
class FlakyBackend : public backend::CompletionBackend {
 public:
  explicit FlakyBackend(int failures, ErrorKind kind = ErrorKind::Transport)
      : failures_(failures), kind_(kind) {}
  std::string complete(const backend::CompletionRequest& r) override {
    std::lock_guard lock(mu_);
    if (seen_[r.sample_index]++ < failures_) throw BackendError(kind_, "boom");
    return "ok</s>";
  }
  int attempts(std::uint64_t i) {
    std::lock_guard lock(mu_);
    return seen_[i];
  }

 private:
  int failures_;
  ErrorKind kind_;
  std::mutex mu_;
  std::map<std::uint64_t, int> seen_;
};

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("synthner_campaign_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("reference stages") {
  const auto s = reference_stages(1);
  REQUIRE(s.size() == 2);
  CHECK(s[0].n_samples == 1000);
  CHECK(s[0].params.temperature == 0.8);
  CHECK(s[1].n_samples == 100);
  CHECK(s[1].params.temperature == 0.9);
  for (const auto& st : s) {
    CHECK(st.params.top_p == 0.9);
    CHECK(st.params.max_tokens == 768);
  }
}

TEST_CASE("provenance follows the stage layout") {
  const auto spec = small_spec();
  CHECK(provenance_for(spec, 0).temperature == 0.8);
  CHECK(provenance_for(spec, 11).temperature == 0.8);
  CHECK(provenance_for(spec, 12).temperature == 0.9);
  CHECK(provenance_for(spec, 16).sample_index == 16);
  CHECK_THROWS_AS(provenance_for(spec, 17), std::out_of_range);
}

TEST_CASE("spec validation") {
  auto spec = small_spec();
  spec.stages[0].params.top_p = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_spec();
  spec.backend_id.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("results do not depend on concurrency") {
  const auto spec = small_spec();
  EchoBackend b1, b8;
  CampaignOptions o1;
  o1.concurrency = 1;
  o1.retry = no_sleep();
  CampaignOptions o8 = o1;
  o8.concurrency = 8;
  const auto r1 = run_campaign(spec, b1, o1);
  const auto r8 = run_campaign(spec, b8, o8);
  REQUIRE(r1.samples.size() == 17);
  REQUIRE(r8.samples.size() == 17);
  for (std::size_t i = 0; i < 17; ++i) {
    CHECK(r1.samples[i].sample_index == i);
    CHECK(r1.samples[i].text == r8.samples[i].text);
    CHECK(r1.samples[i].provenance == provenance_for(spec, i));
  }
  CHECK(r1.samples[0].text.rfind("<s>s0 ", 0) == 0);
  CHECK(b8.calls == 17);
}

TEST_CASE("committed output is in index order and complete") {
  const auto dir = temp_dir("order");
  const auto spec = small_spec();
  EchoBackend b;
  CampaignOptions o;
  o.concurrency = 4;
  o.retry = no_sleep();
  o.output = dir / "raw.jsonl";
  run_campaign(spec, b, o);
  CHECK_FALSE(std::filesystem::exists(dir / "raw.jsonl.partial"));
  const auto back = io::read_raw_samples(o.output);
  REQUIRE(back.size() == 17);
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i].sample_index == i);
}

TEST_CASE("transport errors are retried with exponential backoff") {
  std::vector<std::chrono::milliseconds> delays;
  FlakyBackend b(2);
  CampaignSpec spec = small_spec();
  spec.stages = {Stage{1, {0.8, 0.9, 768, 1}}};
  CampaignOptions o;
  o.concurrency = 1;
  o.retry = no_sleep(&delays);
  o.retry.base_delay = std::chrono::milliseconds(100);
  const auto r = run_campaign(spec, b, o);
  CHECK(r.samples.size() == 1);
  CHECK(r.failures.empty());
  CHECK(b.attempts(0) == 3);
  CHECK(delays == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(100),
                                                          std::chrono::milliseconds(200)});
}

TEST_CASE("retries stop after max attempts and leave a gap") {
  std::vector<std::chrono::milliseconds> delays;
  FlakyBackend b(100);
  CampaignSpec spec = small_spec();
  spec.stages = {Stage{2, {0.8, 0.9, 768, 1}}};
  CampaignOptions o;
  o.concurrency = 1;
  o.retry = no_sleep(&delays);
  const auto r = run_campaign(spec, b, o);
  CHECK(r.samples.empty());
  REQUIRE(r.failures.size() == 2);
  CHECK(r.failures[0].attempts == 5);
  CHECK(b.attempts(0) == 5);
  CHECK(delays.size() == 8);
  CHECK(delays[3] == std::chrono::milliseconds(4000));
}

TEST_CASE("a success is not retried") {
  FlakyBackend b(0);
  CampaignOptions o;
  o.retry = no_sleep();
  run_campaign(small_spec(), b, o);
  for (std::uint64_t i = 0; i < 17; ++i) CHECK(b.attempts(i) == 1);
}

TEST_CASE("malformed responses are kept as empty samples") {
  FlakyBackend b(100, ErrorKind::MalformedResponse);
  CampaignSpec spec = small_spec();
  spec.stages = {Stage{3, {0.8, 0.9, 768, 1}}};
  CampaignOptions o;
  o.retry = no_sleep();
  const auto r = run_campaign(spec, b, o);
  REQUIRE(r.samples.size() == 3);
  CHECK(r.samples[1].text.empty());
  CHECK(r.failures.size() == 3);
  CHECK(b.attempts(1) == 1);
}

TEST_CASE("fatal errors abort the campaign") {
  FlakyBackend b(100, ErrorKind::Authentication);
  CampaignOptions o;
  o.retry = no_sleep();
  CHECK_THROWS_AS(run_campaign(small_spec(), b, o), BackendError);
  int total = 0;
  for (std::uint64_t i = 0; i < 17; ++i) total += b.attempts(i);
  CHECK(total <= 2);
}

TEST_CASE("resume skips samples already on disk") {
  const auto dir = temp_dir("resume");
  const auto spec = small_spec();
  const auto out = dir / "raw.jsonl";

  // Simulate an interrupted run: a journal holding the first 6 samples.
  {
    EchoBackend b;
    CampaignOptions o;
    o.retry = no_sleep();
    const auto full = run_campaign(spec, b, o);
    std::string journal;
    for (std::size_t i = 0; i < 6; ++i) journal += io::raw_sample_to_json_line(full.samples[i]) + "\n";
    io::atomic_write_file(std::filesystem::path(out.string() + ".partial"), journal);
  }

  EchoBackend b;
  CampaignOptions o;
  o.retry = no_sleep();
  o.output = out;
  o.resume = true;
  const auto r = run_campaign(spec, b, o);
  CHECK(r.resumed == 6);
  CHECK(b.calls == 11);
  const auto back = io::read_raw_samples(out);
  REQUIRE(back.size() == 17);
  std::set<std::uint64_t> ids;
  for (const auto& s : back) ids.insert(s.sample_index);
  CHECK(ids.size() == 17);

  // Resuming a finished run does nothing.
  EchoBackend again;
  const auto r2 = run_campaign(spec, again, o);
  CHECK(r2.resumed == 17);
  CHECK(again.calls == 0);
}

TEST_CASE("resume refuses samples produced with other parameters") {
  const auto dir = temp_dir("mismatch");
  const auto out = dir / "raw.jsonl";
  EchoBackend b;
  CampaignOptions o;
  o.retry = no_sleep();
  o.output = out;
  run_campaign(small_spec(1), b, o);
  o.resume = true;
  CHECK_THROWS_AS(run_campaign(small_spec(2), b, o), DataError);
}
