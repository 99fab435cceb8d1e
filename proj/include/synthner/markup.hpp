#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "synthner/corpus.hpp"

// The inline annotation markup used in prompts and generations:
//
//   <s>Gabe von <class="Medikation">Ibuprofen</class> empfohlen.</s>
//
// Tags are matched exactly (case-sensitive, no inner whitespace, attribute
// quoted with '"'). Nested or overlapping class tags are not representable.
namespace synthner::markup {

inline constexpr std::string_view kSentenceOpen = "<s>";
inline constexpr std::string_view kSentenceClose = "</s>";
inline constexpr std::string_view kClassOpenPrefix = "<class=\"";
inline constexpr std::string_view kClassOpenSuffix = "\">";
inline constexpr std::string_view kClassClose = "</class>";

enum class DiagnosticKind {
  MissingSentenceClose,
  UnclosedClassTag,
  StrayClose,
  NestedOpen,
  MalformedTag,
  UnknownAttribute,
};

std::string_view to_string(DiagnosticKind kind);
std::optional<DiagnosticKind> diagnostic_kind_from_string(std::string_view name);

struct ParseDiagnostic {
  std::uint64_t sample_index = 0;
  std::size_t segment_index = 0;
  DiagnosticKind kind = DiagnosticKind::MalformedTag;
  // Code point offset into the raw segment.
  std::size_t position = 0;

  friend bool operator==(const ParseDiagnostic&, const ParseDiagnostic&) = default;
};

struct RawSample {
  std::uint64_t sample_index = 0;
  std::string text;
  SampleProvenance provenance;

  friend bool operator==(const RawSample&, const RawSample&) = default;
};

class EncodeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws EncodeError if the text contains '<' or '>' or the spans are not
// sorted, non-empty, non-overlapping and in bounds.
std::string encode_sentence(const AnnotatedSentence& s);

using SentenceParse = std::variant<AnnotatedSentence, ParseDiagnostic>;

// Parses one segment starting at "<s>". The first grammar violation wins.
// Labels are taken verbatim; whether they belong to a label set is decided
// during curation. Anything after "</s>" is ignored.
SentenceParse parse_sentence(std::string_view markup);

// Per-segment outcome, kept so curation can account for every segment.
struct Segment {
  std::size_t segment_index = 0;
  std::string markup;
  std::optional<AnnotatedSentence> sentence;
  std::optional<ParseDiagnostic> diagnostic;

  bool has_close() const {
    return !diagnostic || diagnostic->kind != DiagnosticKind::MissingSentenceClose;
  }
};

struct DocumentParse {
  std::vector<AnnotatedSentence> sentences;
  std::vector<ParseDiagnostic> diagnostics;
  std::vector<Segment> segments;
};

// Splits on every "<s>" and parses each segment independently; text before
// the first "<s>" is ignored. Parsed sentences get provenance from the sample
// and ids "{backend_id}:{sample_index}:{segment_index}".
DocumentParse parse_document(const RawSample& raw);

// Markup text with every tag-like "<...>" run removed and everything from the
// first "</s>" on dropped. Used to key segments that failed to parse.
std::string strip_markup(std::string_view markup);

}  // namespace synthner::markup
