// synthner: prompt -> synth -> curate -> split/stats/export -> eval.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 backend error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "synthner/backend.hpp"
#include "synthner/campaign.hpp"
#include "synthner/config.hpp"
#include "synthner/curation.hpp"
#include "synthner/eval.hpp"
#include "synthner/io.hpp"
#include "synthner/prompt.hpp"

namespace fs = std::filesystem;
using namespace synthner;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("missing ") + what);
  if (!fs::is_regular_file(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

void require_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (!fs::is_directory(p)) throw UsageError("cannot create output directory " + p.string());
}

Corpus load_valid_corpus(const fs::path& jsonl, const fs::path& labels) {
  Corpus c = io::read_corpus(jsonl, labels);
  const auto violations = validate_corpus(c);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw DataError(jsonl.string(), v.sentence_index + 1,
                    std::string(to_string(v.violation.kind)) + ": " + v.violation.detail +
                        (violations.size() > 1
                             ? " (and " + std::to_string(violations.size() - 1) + " more)"
                             : ""));
  }
  return c;
}

// ---------------------------------------------------------------------------

struct PromptArgs {
  fs::path examples;
  fs::path labels;
  bool raw = false;
};

int cmd_prompt(const PromptArgs& a) {
  require_file(a.examples, "examples file");
  const std::string contents = io::read_file(a.examples);
  Prompt p;
  if (a.raw) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < contents.size()) {
      auto nl = contents.find('\n', pos);
      if (nl == std::string::npos) nl = contents.size();
      std::string line = contents.substr(pos, nl - pos);
      if (!line.empty() && line != markup::kSentenceOpen) lines.push_back(std::move(line));
      pos = nl + 1;
    }
    if (lines.empty()) throw UsageError("examples file has no encoded sentences");
    p = assemble_prompt(lines);
  } else {
    const auto examples = io::sentences_from_jsonl(contents, a.examples.string());
    if (examples.empty()) throw UsageError("examples file has no sentences");
    std::vector<std::string> names;
    if (!a.labels.empty()) {
      require_file(a.labels, "labels file");
      const LabelSet ls = io::labelset_from_json(io::read_file(a.labels), a.labels.string());
      for (const auto& l : ls.labels()) names.push_back(l.name());
    } else {
      for (const auto& s : examples) {
        for (const auto& sp : s.spans) {
          if (std::find(names.begin(), names.end(), sp.label.name()) == names.end()) {
            names.push_back(sp.label.name());
          }
        }
      }
      if (names.empty()) names.push_back("O");
    }
    const Corpus c{examples, LabelSet::from_names(names)};
    for (const auto& v : validate_corpus(c)) {
      throw DataError(a.examples.string(), v.sentence_index + 1,
                      std::string(to_string(v.violation.kind)) + ": " + v.violation.detail);
    }
    try {
      p = build_prompt(c.sentences);
    } catch (const markup::EncodeError& e) {
      throw DataError(a.examples.string(), 0, e.what());
    }
  }
  std::cout << p.text << std::flush;
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  fs::path config;
  fs::path output;
  fs::path mock_profile;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
  bool resume = false;
};

int cmd_synth(const SynthArgs& a) {
  require_file(a.config, "campaign config");
  auto cfg = config::load_campaign_config(a.config);
  if (!a.output.empty()) cfg.output = a.output;
  if (!a.mock_profile.empty()) cfg.mock_profile = a.mock_profile;
  if (a.jobs > 0) cfg.concurrency = a.jobs;
  if (a.seed) {
    for (auto& st : cfg.stages) st.params.seed = *a.seed;
  }
  if (cfg.output.empty()) throw UsageError("campaign config has no output path (use --output)");

  campaign::CampaignSpec spec;
  spec.stages = cfg.stages;
  spec.backend_id = cfg.backend_id;
  if (!cfg.prompt.empty()) {
    require_file(cfg.prompt, "prompt file");
    spec.prompt.text = io::read_file(cfg.prompt);
  } else {
    require_file(cfg.examples, "examples file");
    const auto examples = io::sentences_from_jsonl(io::read_file(cfg.examples), cfg.examples.string());
    spec.prompt = build_prompt(examples);
  }

  std::unique_ptr<backend::CompletionBackend> be;
  if (cfg.backend == "mock") {
    auto profile = backend::MockProfile::german_medical();
    if (!cfg.mock_profile.empty()) {
      require_file(cfg.mock_profile, "mock profile");
      profile = backend::mock_profile_from_json(io::read_file(cfg.mock_profile),
                                                cfg.mock_profile.string());
    }
    be = std::make_unique<backend::MockBackend>(std::move(profile));
  } else {
    const char* key = std::getenv(backend::kApiKeyEnvVar);
    be = std::make_unique<backend::HttpBackend>(backend::HttpBackendConfig{
        cfg.url, cfg.model, key ? key : "", std::chrono::seconds(cfg.timeout_seconds)});
  }

  campaign::CampaignOptions opts;
  opts.concurrency = cfg.concurrency;
  opts.output = cfg.output;
  opts.resume = a.resume;
  opts.retry.base_delay = std::chrono::milliseconds(cfg.retry_base_ms);
  opts.on_event = [](const std::string& msg) { std::cerr << "synth: " << msg << '\n'; };

  std::cerr << "synth: " << spec.total_samples() << " samples requested from " << cfg.backend
            << " backend " << spec.backend_id << '\n';
  const auto result = campaign::run_campaign(spec, *be, opts);
  std::cerr << "synth: wrote " << result.samples.size() << " samples to " << cfg.output.string()
            << " (" << result.failures.size() << " failures, " << result.resumed << " resumed)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CurateArgs {
  fs::path input;
  fs::path input_text;
  fs::path labels;
  fs::path out_dir;
  std::string stage_order = "table";
};

int cmd_curate(const CurateArgs& a) {
  if (a.input.empty() == a.input_text.empty()) throw UsageError("give exactly one of --input or --input-text");
  require_file(a.input.empty() ? a.input_text : a.input, "input file");
  require_file(a.labels, "labels file");
  require_dir(a.out_dir);
  const LabelSet ls = io::labelset_from_json(io::read_file(a.labels), a.labels.string());

  std::vector<markup::RawSample> raws;
  if (!a.input.empty()) {
    raws = io::read_raw_samples(a.input);
  } else {
    markup::RawSample r;
    r.text = io::read_file(a.input_text);
    r.provenance.backend_id = "text";
    raws.push_back(std::move(r));
  }
  const auto order = a.stage_order == "prose" ? curation::StageOrder::Prose : curation::StageOrder::Table;
  const auto result = curation::apply_filters(raws, ls, order);

  io::write_corpus(result.corpus, a.out_dir / "corpus.jsonl", a.out_dir / "labels.json");
  io::atomic_write_file(a.out_dir / "report.json", result.report.to_json());
  io::atomic_write_file(a.out_dir / "report.tsv", result.report.to_tsv());
  std::cout << result.report.to_tsv();
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CorpusArgs {
  fs::path corpus;
  fs::path labels;
};

struct SplitArgs {
  CorpusArgs in;
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::vector<double> ratios{0.8, 0.1, 0.1};
};

int cmd_split(const SplitArgs& a) {
  require_file(a.in.corpus, "corpus file");
  require_file(a.in.labels, "labels file");
  require_dir(a.out_dir);
  if (a.ratios.size() != 3) throw UsageError("--ratios takes train,validation,test");
  const Corpus c = load_valid_corpus(a.in.corpus, a.in.labels);
  if (c.sentences.empty()) throw DataError(a.in.corpus.string(), 0, "corpus is empty");
  curation::SplitSpec spec{a.ratios[0], a.ratios[1], a.ratios[2], a.seed};
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto parts = curation::split(c, spec);
  io::write_corpus(parts.train, a.out_dir / "train.jsonl", a.out_dir / "labels.json");
  io::write_corpus(parts.validation, a.out_dir / "validation.jsonl");
  io::write_corpus(parts.test, a.out_dir / "test.jsonl");
  std::cout << "train\t" << parts.train.sentences.size() << "\nvalidation\t"
            << parts.validation.sentences.size() << "\ntest\t" << parts.test.sentences.size() << '\n';
  return kExitOk;
}

struct StatsArgs {
  CorpusArgs in;
  fs::path json;
};

int cmd_stats(const StatsArgs& a) {
  require_file(a.in.corpus, "corpus file");
  require_file(a.in.labels, "labels file");
  const Corpus c = load_valid_corpus(a.in.corpus, a.in.labels);
  const auto st = curation::corpus_stats(c);
  if (!a.json.empty()) io::atomic_write_file(a.json, st.to_json());
  std::cout << "sentences\t" << st.sentence_count << "\ntokens\t" << st.token_count << "\nspans\t"
            << st.span_count << '\n';
  for (const auto& [label, n] : st.entity_counts) std::cout << label << '\t' << n << '\n';
  return kExitOk;
}

struct ExportArgs {
  CorpusArgs in;
  std::string format = "jsonl";
  fs::path output;
};

int cmd_export(const ExportArgs& a) {
  require_file(a.in.corpus, "corpus file");
  require_file(a.in.labels, "labels file");
  if (a.output.empty()) throw UsageError("missing --output");
  const Corpus c = load_valid_corpus(a.in.corpus, a.in.labels);
  curation::export_corpus(c, a.format == "bio" ? curation::ExportFormat::Bio : curation::ExportFormat::Jsonl,
                          a.output);
  return kExitOk;
}

struct EvalArgs {
  fs::path gold;
  fs::path gold_labels;
  fs::path pred;
  fs::path pred_labels;
  fs::path alias;
  fs::path json;
  std::string weighting = "chars";
  bool entity_level = false;
};

int cmd_eval(const EvalArgs& a) {
  require_file(a.gold, "gold corpus");
  require_file(a.gold_labels, "gold labels file");
  require_file(a.pred, "prediction corpus");
  const fs::path pred_labels = a.pred_labels.empty() ? a.gold_labels : a.pred_labels;
  require_file(pred_labels, "prediction labels file");
  if (!a.alias.empty()) require_file(a.alias, "alias file");

  const Corpus gold = load_valid_corpus(a.gold, a.gold_labels);
  const Corpus pred = io::read_corpus(a.pred, pred_labels);

  eval::ScoreReport report;
  try {
    if (a.entity_level) {
      report = eval::score_entities(gold, pred);
    } else {
      eval::ScoreOptions opts;
      opts.weighting = a.weighting == "entities" ? eval::Weighting::GoldEntities
                                                 : eval::Weighting::GoldCharacters;
      if (!a.alias.empty()) opts.alias = io::alias_map_from_json(io::read_file(a.alias), a.alias.string());
      report = eval::score(gold, pred, opts);
    }
  } catch (const std::invalid_argument& e) {
    throw DataError(a.pred.string(), 0, e.what());
  }
  if (!a.json.empty()) io::atomic_write_file(a.json, report.to_json());
  std::cout << report.to_table();
  if (report.dropped_pred_spans > 0) {
    std::cerr << "eval: dropped " << report.dropped_pred_spans << " predicted spans with unmapped labels\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize, curate and evaluate silver-standard NER corpora"};
  app.require_subcommand(1);

  PromptArgs prompt;
  auto* sp = app.add_subcommand("prompt", "Print the few-shot prompt for a set of examples");
  sp->add_option("examples", prompt.examples, "Examples corpus JSONL (or encoded lines with --raw)")->required();
  sp->add_option("--labels", prompt.labels, "labels.json to validate example labels against");
  sp->add_flag("--raw", prompt.raw, "Examples file holds one encoded sentence per line, used verbatim");

  SynthArgs synth;
  auto* ss = app.add_subcommand("synth", "Run a sampling campaign and persist raw samples");
  ss->add_option("config", synth.config, "Campaign config file")->required();
  ss->add_option("--output", synth.output, "Override the output path");
  ss->add_option("--mock-profile", synth.mock_profile, "Mock profile JSON");
  ss->add_option("--seed", synth.seed, "Override every stage seed");
  ss->add_option("--jobs", synth.jobs, "Concurrent requests");
  ss->add_flag("--resume", synth.resume, "Continue an interrupted campaign");

  CurateArgs curate;
  auto* sc = app.add_subcommand("curate", "Parse and filter raw samples into a corpus");
  sc->add_option("--input", curate.input, "Raw-sample JSONL");
  sc->add_option("--input-text", curate.input_text, "Plain markup text treated as one sample");
  sc->add_option("--labels", curate.labels, "labels.json")->required();
  sc->add_option("--out-dir", curate.out_dir, "Output directory")->required();
  sc->add_option("--stage-order", curate.stage_order, "table (default) or prose")
      ->check(CLI::IsMember({"table", "prose"}));

  SplitArgs split;
  auto* sl = app.add_subcommand("split", "Split a corpus into train/validation/test");
  sl->add_option("--corpus", split.in.corpus)->required();
  sl->add_option("--labels", split.in.labels)->required();
  sl->add_option("--out-dir", split.out_dir)->required();
  sl->add_option("--seed", split.seed)->required();
  sl->add_option("--ratios", split.ratios, "train validation test")->delimiter(',')->expected(3);

  StatsArgs stats;
  auto* st = app.add_subcommand("stats", "Sentence, token and entity counts");
  st->add_option("--corpus", stats.in.corpus)->required();
  st->add_option("--labels", stats.in.labels)->required();
  st->add_option("--json", stats.json, "Also write the statistics as JSON");

  ExportArgs exp;
  auto* se = app.add_subcommand("export", "Write a corpus as JSONL or BIO");
  se->add_option("--corpus", exp.in.corpus)->required();
  se->add_option("--labels", exp.in.labels)->required();
  se->add_option("--format", exp.format)->check(CLI::IsMember({"jsonl", "bio"}));
  se->add_option("--output", exp.output)->required();

  EvalArgs ev;
  auto* sv = app.add_subcommand("eval", "Character-wise strict NER scoring");
  sv->add_option("--gold", ev.gold)->required();
  sv->add_option("--labels", ev.gold_labels, "Gold labels.json")->required();
  sv->add_option("--pred", ev.pred)->required();
  sv->add_option("--pred-labels", ev.pred_labels, "Prediction labels.json (default: gold)");
  sv->add_option("--alias", ev.alias, "Alias map JSON, e.g. {\"Drug\": \"Medikation\"}");
  sv->add_option("--weighting", ev.weighting, "chars (default) or entities")
      ->check(CLI::IsMember({"chars", "entities"}));
  sv->add_flag("--entity-level", ev.entity_level, "Exact-span scoring instead of character-wise");
  sv->add_option("--json", ev.json, "Also write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sp) return cmd_prompt(prompt);
    if (*ss) return cmd_synth(synth);
    if (*sc) return cmd_curate(curate);
    if (*sl) return cmd_split(split);
    if (*st) return cmd_stats(stats);
    if (*se) return cmd_export(exp);
    if (*sv) return cmd_eval(ev);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const backend::BackendError& e) {
    std::cerr << "backend error (" << backend::to_string(e.kind()) << "): " << e.what() << '\n';
    return kExitBackend;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
