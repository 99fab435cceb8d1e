#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synthner/corpus.hpp"
#include "synthner/markup.hpp"

namespace synthner::curation {

// ---------------------------------------------------------------------------
// Filtering and accounting

inline constexpr std::string_view kStageMissingClose = "no </s> tag";
inline constexpr std::string_view kStageDuplicates = "duplicates removal";
inline constexpr std::string_view kStageInvalidSyntax = "invalid syntax removal";
inline constexpr std::string_view kStageInvalidLabels = "invalid or no labels";

enum class StageOrder {
  // missing close, duplicates, syntax, labels
  Table,
  // missing close, syntax, labels, duplicates
  Prose,
};

struct StageCount {
  std::string name;
  std::size_t remaining = 0;
  int pct_of_baseline = 0;
  int impact = 0;
};

struct FilterReport {
  std::size_t baseline_count = 0;
  std::vector<StageCount> stages;
  std::size_t final_count = 0;
  // Breakdown of the labels stage.
  std::size_t removed_no_annotation = 0;
  std::size_t removed_unknown_label = 0;

  // Fills in percentages from per-stage remaining counts. Throws
  // std::invalid_argument if the counts increase or exceed the baseline.
  static FilterReport from_counts(std::size_t baseline,
                                  const std::vector<std::pair<std::string, std::size_t>>& remaining);

  std::string to_json() const;
  // Applied Filter / #Sentences / % of Baseline / Impact
  std::string to_tsv() const;
};

// round(100 * num / den), halves away from zero; 0 when den is 0.
int round_percent(std::size_t num, std::size_t den);

// NFC, whitespace runs collapsed to one space, trimmed. Case-sensitive.
std::string dedup_key(std::string_view text);
inline std::string dedup_key(const AnnotatedSentence& s) { return dedup_key(s.text); }

struct FilterResult {
  Corpus corpus;
  FilterReport report;
};

// Parses every segment of every raw sample (ordered by sample_index, then
// segment_index) and keeps the sentences that pass all four stages. The
// first occurrence of a duplicate survives.
FilterResult apply_filters(std::span<const markup::RawSample> raws, const LabelSet& ls,
                           StageOrder order = StageOrder::Table);

// One raw sample per sentence, carrying the encoded sentence.
std::vector<markup::RawSample> to_raw_samples(const Corpus& c);

// ---------------------------------------------------------------------------
// Tokens and statistics

struct Token {
  std::size_t start = 0;  // code points
  std::size_t end = 0;
  std::string text;

  friend bool operator==(const Token&, const Token&) = default;
};

inline constexpr std::u32string_view kSplitPunctuation = U".,;:!?()[]{}\"'/\\-";

// Whitespace-separated chunks; punctuation from kSplitPunctuation at either
// edge of a chunk that also contains other characters becomes its own token.
std::vector<Token> tokenize(std::string_view text);

struct CorpusStats {
  std::size_t sentence_count = 0;
  std::size_t token_count = 0;
  std::size_t span_count = 0;
  // Labelset order first, then any other label seen, in first-seen order.
  std::vector<std::pair<std::string, std::size_t>> entity_counts;

  std::size_t entities(std::string_view label) const;
  std::string to_json() const;
};

CorpusStats corpus_stats(const Corpus& c);

// ---------------------------------------------------------------------------
// Splitting

struct SplitSpec {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitResult {
  Corpus train;
  Corpus validation;
  Corpus test;
};

// Seeded Fisher-Yates shuffle; validation takes floor(n * validation) and test
// floor(n * test) sentences, train the remainder. Each part keeps corpus order.
SplitResult split(const Corpus& c, const SplitSpec& spec);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Export

enum class ExportFormat { Jsonl, Bio };

// A token takes a span's label when at least half of its characters lie in
// the span; the first token of a run gets B-, the rest I-.
std::vector<std::string> bio_tags(const AnnotatedSentence& s, std::span<const Token> tokens);

// Spans from BIO tags; an I- tag that does not continue its label opens a span.
std::vector<Span> decode_bio(std::span<const Token> tokens, std::span<const std::string> tags);

// token<TAB>tag lines, a blank line after each sentence.
std::string to_bio(const Corpus& c);

void export_corpus(const Corpus& c, ExportFormat format, const std::filesystem::path& path);

}  // namespace synthner::curation
