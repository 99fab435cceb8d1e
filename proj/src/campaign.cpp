#include "synthner/campaign.hpp"

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "synthner/io.hpp"

namespace synthner::campaign {
namespace {

struct Outcome {
  std::optional<markup::RawSample> sample;
  std::optional<SampleFailure> failure;
};

bool ends_with_open_tag(const std::string& prompt) {
  return prompt.size() >= markup::kSentenceOpen.size() &&
         prompt.compare(prompt.size() - markup::kSentenceOpen.size(),
                        markup::kSentenceOpen.size(), markup::kSentenceOpen) == 0;
}

std::filesystem::path journal_path(const std::filesystem::path& output) {
  auto p = output;
  p += ".partial";
  return p;
}

void load_existing(const std::filesystem::path& path, const CampaignSpec& spec,
                   std::map<std::uint64_t, markup::RawSample>& done) {
  if (!std::filesystem::exists(path)) return;
  for (auto& r : io::read_raw_samples(path)) {
    if (r.sample_index >= spec.total_samples()) {
      throw DataError(path.string(), 0,
                      "sample_index " + std::to_string(r.sample_index) + " outside campaign");
    }
    if (!(r.provenance == provenance_for(spec, r.sample_index))) {
      throw DataError(path.string(), 0,
                      "sample " + std::to_string(r.sample_index) +
                          " was produced with different parameters; cannot resume");
    }
    done.emplace(r.sample_index, std::move(r));
  }
}

}  // namespace

std::size_t CampaignSpec::total_samples() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.n_samples;
  return n;
}

void CampaignSpec::validate() const {
  if (stages.empty()) throw std::invalid_argument("campaign has no stages");
  for (const auto& s : stages) {
    if (s.n_samples == 0) throw std::invalid_argument("campaign stage with zero samples");
    s.params.validate();
  }
  if (backend_id.empty()) throw std::invalid_argument("campaign needs a backend id");
}

std::vector<Stage> reference_stages(std::uint64_t seed) {
  return {
      Stage{1000, sampling::SamplingParams{0.8, 0.9, 768, seed}},
      Stage{100, sampling::SamplingParams{0.9, 0.9, 768, seed}},
  };
}

SampleProvenance provenance_for(const CampaignSpec& spec, std::uint64_t sample_index) {
  std::uint64_t offset = 0;
  for (const auto& s : spec.stages) {
    if (sample_index < offset + s.n_samples) {
      return SampleProvenance{sample_index, s.params.temperature, s.params.top_p,
                              s.params.max_tokens, s.params.seed, spec.backend_id};
    }
    offset += s.n_samples;
  }
  throw std::out_of_range("sample index " + std::to_string(sample_index) + " outside campaign");
}

CampaignResult run_campaign(const CampaignSpec& spec, backend::CompletionBackend& backend,
                            const CampaignOptions& options) {
  spec.validate();
  const std::size_t total = spec.total_samples();
  const std::string prefix =
      ends_with_open_tag(spec.prompt.text) ? std::string(markup::kSentenceOpen) : std::string();
  auto notify = [&](const std::string& msg) {
    if (options.on_event) options.on_event(msg);
  };
  auto sleep = options.retry.sleep ? options.retry.sleep : [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };

  std::map<std::uint64_t, markup::RawSample> done;
  std::ofstream journal;
  if (!options.output.empty()) {
    const auto jpath = journal_path(options.output);
    if (options.resume) {
      load_existing(options.output, spec, done);
      load_existing(jpath, spec, done);
    }
    journal.open(jpath, options.resume ? std::ios::app : std::ios::trunc);
    if (!journal) throw std::runtime_error("cannot open journal " + jpath.string());
  }
  CampaignResult result;
  result.resumed = done.size();
  if (result.resumed > 0) notify("resuming: " + std::to_string(result.resumed) + " samples on disk");

  std::vector<std::uint64_t> todo;
  for (std::uint64_t i = 0; i < total; ++i) {
    if (!done.count(i)) todo.push_back(i);
  }

  std::vector<std::optional<Outcome>> slots(todo.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::optional<backend::BackendError> fatal;

  auto attempt_sample = [&](std::uint64_t index) -> std::optional<Outcome> {
    const SampleProvenance prov = provenance_for(spec, index);
    backend::CompletionRequest req{
        spec.prompt.text, sampling::SamplingParams{prov.temperature, prov.top_p,
                                                   prov.max_tokens, prov.seed},
        index};
    for (int attempt = 1;; ++attempt) {
      try {
        std::string text = backend.complete(req);
        return Outcome{markup::RawSample{index, prefix + text, prov}, std::nullopt};
      } catch (const backend::BackendError& e) {
        if (e.fatal()) {
          std::lock_guard lock(mu);
          if (!fatal) fatal = e;
          abort = true;
          cv.notify_all();
          return std::nullopt;
        }
        if (e.kind() == backend::ErrorKind::MalformedResponse) {
          return Outcome{markup::RawSample{index, std::string(), prov},
                         SampleFailure{index, e.kind(), attempt, e.what()}};
        }
        if (attempt >= options.retry.max_attempts) {
          return Outcome{std::nullopt, SampleFailure{index, e.kind(), attempt, e.what()}};
        }
      } catch (const std::exception& e) {
        if (attempt >= options.retry.max_attempts) {
          return Outcome{std::nullopt,
                         SampleFailure{index, backend::ErrorKind::Transport, attempt, e.what()}};
        }
      }
      if (abort) return std::nullopt;
      sleep(options.retry.base_delay * (1LL << (attempt - 1)));
    }
  };

  auto worker = [&] {
    while (!abort) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      auto outcome = attempt_sample(todo[k]);
      if (!outcome) return;
      std::lock_guard lock(mu);
      slots[k] = std::move(outcome);
      cv.notify_all();
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(options.concurrency, todo.size()));
  std::vector<std::thread> workers;
  workers.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers && !todo.empty(); ++w) workers.emplace_back(worker);

  // Single writer: commit strictly in sample_index order.
  for (std::size_t k = 0; k < todo.size(); ++k) {
    Outcome outcome;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return slots[k].has_value() || abort.load(); });
      if (!slots[k]) break;
      outcome = std::move(*slots[k]);
      slots[k].reset();
    }
    if (outcome.failure) {
      notify("sample " + std::to_string(outcome.failure->sample_index) + " failed (" +
             std::string(backend::to_string(outcome.failure->kind)) + ", " +
             std::to_string(outcome.failure->attempts) + " attempts): " +
             outcome.failure->message);
      result.failures.push_back(*outcome.failure);
    }
    if (outcome.sample) {
      if (journal.is_open()) {
        journal << io::raw_sample_to_json_line(*outcome.sample) << '\n';
        journal.flush();
      }
      done.emplace(outcome.sample->sample_index, std::move(*outcome.sample));
    }
    if ((k + 1) % 100 == 0) notify(std::to_string(k + 1) + "/" + std::to_string(todo.size()) + " samples");
  }
  for (auto& t : workers) t.join();
  if (fatal) throw *fatal;

  for (auto& [index, sample] : done) result.samples.push_back(std::move(sample));
  if (!options.output.empty()) {
    journal.close();
    std::string contents;
    for (const auto& s : result.samples) contents += io::raw_sample_to_json_line(s) + "\n";
    io::atomic_write_file(options.output, contents);
    std::filesystem::remove(journal_path(options.output));
  }
  return result;
}

}  // namespace synthner::campaign
