#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synthner/corpus.hpp"

// Character-wise strict NER scoring: every code point is one classification
// decision, so partially overlapping spans earn partial credit.
namespace synthner::eval {

// One entry per code point of the sentence text; nullopt is "outside".
using CharLabeling = std::vector<std::optional<std::string>>;

// Throws std::invalid_argument if spans overlap or leave the text.
CharLabeling char_labels(const AnnotatedSentence& s);

// External label name -> internal label name, e.g. {"Drug": "Medikation"}.
using LabelAliasMap = std::map<std::string, std::string>;

// Throws std::invalid_argument if a target is not in the label set.
void validate_alias(const LabelAliasMap& alias, const LabelSet& targets);

struct AliasResult {
  Corpus corpus;
  std::size_t dropped = 0;
};

// Renames mapped labels; unmapped labels outside keep_labels are dropped and
// counted. The result's label set is keep_labels.
AliasResult apply_alias(const Corpus& pred, const LabelAliasMap& alias, const LabelSet& keep_labels);

enum class Weighting { GoldCharacters, GoldEntities };

struct ScoreRow {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t gold_chars = 0;
  std::size_t gold_entities = 0;
  // Set when the corresponding denominator was zero (value reported as 0).
  bool precision_undefined = false;
  bool recall_undefined = false;
};

struct ScoreReport {
  std::vector<ScoreRow> rows;
  ScoreRow total;
  Weighting weighting = Weighting::GoldCharacters;
  std::size_t dropped_pred_spans = 0;

  const ScoreRow* row(std::string_view label) const;
  std::string to_json() const;
  // Rows Pr / Re / F1, one column per label plus Total, three decimals.
  std::string to_table() const;
};

struct ScoreOptions {
  std::optional<LabelAliasMap> alias;
  Weighting weighting = Weighting::GoldCharacters;
};

// Gold and pred are aligned by sentence id and must carry identical text per
// id; a mismatch throws std::invalid_argument. Rows cover the gold label set
// plus any predicted label; with a non-empty alias map they are restricted to the alias
// targets. The alias map renames labels on both sides, so an external gold
// corpus (e.g. "Drug") can be scored against internal predictions.
ScoreReport score(const Corpus& gold, const Corpus& pred, const ScoreOptions& options = {});

// Auxiliary exact-span scoring: a predicted span counts only if its start,
// end and label all match a gold span.
ScoreReport score_entities(const Corpus& gold, const Corpus& pred);

}  // namespace synthner::eval
