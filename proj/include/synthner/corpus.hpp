#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace synthner {

// An entity class name such as "Medikation". Never empty, never contains
// '<', '>', '"' or a newline, so it always fits inside a class attribute.
class Label {
 public:
  explicit Label(std::string name);

  static bool is_valid_name(std::string_view name);

  const std::string& name() const { return name_; }

  friend bool operator==(const Label&, const Label&) = default;
  friend auto operator<=>(const Label&, const Label&) = default;

 private:
  std::string name_;
};

// Ordered, unique, non-empty.
class LabelSet {
 public:
  explicit LabelSet(std::vector<Label> labels);
  static LabelSet from_names(const std::vector<std::string>& names);

  const std::vector<Label>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool contains(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<Label> labels_;
};

// Half-open code point interval [start, end) of a sentence's surface text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  Label label;

  std::size_t length() const { return end > start ? end - start : 0; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct SampleProvenance {
  std::uint64_t sample_index = 0;
  double temperature = 1.0;
  double top_p = 1.0;
  std::uint32_t max_tokens = 0;
  std::uint64_t seed = 0;
  std::string backend_id;

  friend bool operator==(const SampleProvenance&, const SampleProvenance&) = default;
};

struct AnnotatedSentence {
  std::string id;
  std::string text;
  std::vector<Span> spans;
  std::optional<SampleProvenance> provenance;

  friend bool operator==(const AnnotatedSentence&, const AnnotatedSentence&) = default;
};

struct Corpus {
  std::vector<AnnotatedSentence> sentences;
  LabelSet labelset;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

enum class ViolationKind {
  EmptySpan,
  SpanOutOfBounds,
  SpansOverlap,
  SpansUnsorted,
  UnknownLabel,
  MarkupResidue,
  DuplicateId,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  // Index of the offending span (or sentence, for corpus-level checks).
  std::size_t index = 0;
  std::string detail;
};

// Reports every broken invariant; an empty result means the sentence is valid.
std::vector<Violation> validate_sentence(const AnnotatedSentence& s, const LabelSet& ls);

struct CorpusViolation {
  std::size_t sentence_index = 0;
  Violation violation;
};

std::vector<CorpusViolation> validate_corpus(const Corpus& c);

// Default id for synthesized sentences: "{backend_id}:{sample_index}:{ordinal}".
std::string make_sentence_id(std::string_view backend_id, std::uint64_t sample_index,
                             std::size_t ordinal);

}  // namespace synthner
