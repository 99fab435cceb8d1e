#include "synthner/corpus.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "synthner/unicode.hpp"

namespace synthner {

Label::Label(std::string name) : name_(std::move(name)) {
  if (!is_valid_name(name_)) {
    throw std::invalid_argument("invalid label name: \"" + name_ + "\"");
  }
}

bool Label::is_valid_name(std::string_view name) {
  if (name.empty()) return false;
  return name.find_first_of("<>\"\n\r") == std::string_view::npos;
}

LabelSet::LabelSet(std::vector<Label> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw std::invalid_argument("label set must not be empty");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l.name()).second) {
      throw std::invalid_argument("duplicate label in label set: " + l.name());
    }
  }
}

LabelSet LabelSet::from_names(const std::vector<std::string>& names) {
  std::vector<Label> labels;
  labels.reserve(names.size());
  for (const auto& n : names) labels.emplace_back(n);
  return LabelSet(std::move(labels));
}

bool LabelSet::contains(std::string_view name) const { return index_of(name).has_value(); }

std::optional<std::size_t> LabelSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].name() == name) return i;
  }
  return std::nullopt;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::EmptySpan: return "EmptySpan";
    case ViolationKind::SpanOutOfBounds: return "SpanOutOfBounds";
    case ViolationKind::SpansOverlap: return "SpansOverlap";
    case ViolationKind::SpansUnsorted: return "SpansUnsorted";
    case ViolationKind::UnknownLabel: return "UnknownLabel";
    case ViolationKind::MarkupResidue: return "MarkupResidue";
    case ViolationKind::DuplicateId: return "DuplicateId";
  }
  return "Unknown";
}

std::vector<Violation> validate_sentence(const AnnotatedSentence& s, const LabelSet& ls) {
  std::vector<Violation> out;
  const std::size_t len = unicode::length(s.text);

  for (const std::string_view residue : {"<s>", "</s>", "<class="}) {
    if (s.text.find(residue) != std::string::npos) {
      out.push_back({ViolationKind::MarkupResidue, 0,
                     "text contains markup residue " + std::string(residue)});
    }
  }

  for (std::size_t i = 0; i < s.spans.size(); ++i) {
    const Span& sp = s.spans[i];
    if (sp.start >= sp.end) {
      out.push_back({ViolationKind::EmptySpan, i,
                     "span [" + std::to_string(sp.start) + "," + std::to_string(sp.end) +
                         ") is empty"});
    }
    if (sp.end > len) {
      out.push_back({ViolationKind::SpanOutOfBounds, i,
                     "span end " + std::to_string(sp.end) + " exceeds text length " +
                         std::to_string(len)});
    }
    if (!ls.contains(sp.label.name())) {
      out.push_back({ViolationKind::UnknownLabel, i, "label " + sp.label.name()});
    }
  }

  // Overlap is checked pairwise so unsorted input is still fully diagnosed.
  for (std::size_t i = 0; i < s.spans.size(); ++i) {
    for (std::size_t j = i + 1; j < s.spans.size(); ++j) {
      const Span& a = s.spans[i];
      const Span& b = s.spans[j];
      if (a.start < b.end && b.start < a.end) {
        out.push_back({ViolationKind::SpansOverlap, j,
                       "spans " + std::to_string(i) + " and " + std::to_string(j) +
                           " overlap"});
      }
    }
    if (i > 0 && s.spans[i].start < s.spans[i - 1].start) {
      out.push_back({ViolationKind::SpansUnsorted, i, "spans not sorted by start"});
    }
  }
  return out;
}

std::vector<CorpusViolation> validate_corpus(const Corpus& c) {
  std::vector<CorpusViolation> out;
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < c.sentences.size(); ++i) {
    const auto& s = c.sentences[i];
    if (!ids.insert(s.id).second) {
      out.push_back({i, {ViolationKind::DuplicateId, i, "duplicate id " + s.id}});
    }
    for (auto& v : validate_sentence(s, c.labelset)) out.push_back({i, std::move(v)});
  }
  return out;
}

std::string make_sentence_id(std::string_view backend_id, std::uint64_t sample_index,
                             std::size_t ordinal) {
  std::string id(backend_id);
  id += ':';
  id += std::to_string(sample_index);
  id += ':';
  id += std::to_string(ordinal);
  return id;
}

}  // namespace synthner
