#include "synthner/markup.hpp"

#include <algorithm>

#include "synthner/unicode.hpp"

namespace synthner::markup {
namespace {

bool starts_with_at(std::u32string_view s, std::size_t pos, std::string_view ascii) {
  if (pos + ascii.size() > s.size()) return false;
  for (std::size_t k = 0; k < ascii.size(); ++k) {
    if (s[pos + k] != static_cast<char32_t>(static_cast<unsigned char>(ascii[k]))) return false;
  }
  return true;
}

bool is_label_char(char32_t c) {
  return c != U'"' && c != U'<' && c != U'>' && c != U'\n' && c != U'\r';
}

ParseDiagnostic diag(DiagnosticKind kind, std::size_t position) {
  ParseDiagnostic d;
  d.kind = kind;
  d.position = position;
  return d;
}

}  // namespace

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::MissingSentenceClose: return "MissingSentenceClose";
    case DiagnosticKind::UnclosedClassTag: return "UnclosedClassTag";
    case DiagnosticKind::StrayClose: return "StrayClose";
    case DiagnosticKind::NestedOpen: return "NestedOpen";
    case DiagnosticKind::MalformedTag: return "MalformedTag";
    case DiagnosticKind::UnknownAttribute: return "UnknownAttribute";
  }
  return "MalformedTag";
}

std::optional<DiagnosticKind> diagnostic_kind_from_string(std::string_view name) {
  for (auto k : {DiagnosticKind::MissingSentenceClose, DiagnosticKind::UnclosedClassTag,
                 DiagnosticKind::StrayClose, DiagnosticKind::NestedOpen,
                 DiagnosticKind::MalformedTag, DiagnosticKind::UnknownAttribute}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string encode_sentence(const AnnotatedSentence& s) {
  if (s.text.find_first_of("<>") != std::string::npos) {
    throw EncodeError("sentence " + s.id + " contains '<' or '>' and cannot be encoded");
  }
  const std::u32string text = unicode::decode(s.text);
  std::size_t prev_end = 0;
  for (const Span& sp : s.spans) {
    if (sp.start >= sp.end || sp.end > text.size() || sp.start < prev_end) {
      throw EncodeError("sentence " + s.id + " has empty, overlapping or out-of-bounds spans");
    }
    prev_end = sp.end;
  }

  std::string out(kSentenceOpen);
  std::size_t cursor = 0;
  for (const Span& sp : s.spans) {
    out += unicode::encode(std::u32string_view(text).substr(cursor, sp.start - cursor));
    out += kClassOpenPrefix;
    out += sp.label.name();
    out += kClassOpenSuffix;
    out += unicode::encode(std::u32string_view(text).substr(sp.start, sp.end - sp.start));
    out += kClassClose;
    cursor = sp.end;
  }
  out += unicode::encode(std::u32string_view(text).substr(cursor));
  out += kSentenceClose;
  return out;
}

SentenceParse parse_sentence(std::string_view markup) {
  const std::u32string m = unicode::decode(markup);
  if (!starts_with_at(m, 0, kSentenceOpen)) return diag(DiagnosticKind::MalformedTag, 0);

  std::u32string text;
  std::vector<Span> spans;
  std::optional<std::string> open_label;
  std::size_t open_start = 0;

  std::size_t i = kSentenceOpen.size();
  while (i < m.size()) {
    const char32_t c = m[i];
    if (c == U'>') return diag(DiagnosticKind::MalformedTag, i);
    if (c != U'<') {
      text.push_back(c);
      ++i;
      continue;
    }

    if (starts_with_at(m, i, kSentenceClose)) {
      if (open_label) return diag(DiagnosticKind::UnclosedClassTag, i);
      AnnotatedSentence s;
      s.text = unicode::encode(text);
      s.spans = std::move(spans);
      return s;
    }
    if (starts_with_at(m, i, kClassClose)) {
      if (!open_label) return diag(DiagnosticKind::StrayClose, i);
      if (text.size() == open_start) return diag(DiagnosticKind::MalformedTag, i);
      spans.push_back(Span{open_start, text.size(), Label(*open_label)});
      open_label.reset();
      i += kClassClose.size();
      continue;
    }
    if (starts_with_at(m, i, "<class")) {
      if (open_label) return diag(DiagnosticKind::NestedOpen, i);
      const std::size_t after = i + 6;
      if (after < m.size() && unicode::is_space(m[after])) {
        return diag(DiagnosticKind::UnknownAttribute, i);
      }
      if (!starts_with_at(m, i, kClassOpenPrefix)) return diag(DiagnosticKind::MalformedTag, i);
      std::size_t j = i + kClassOpenPrefix.size();
      while (j < m.size() && is_label_char(m[j])) ++j;
      if (j == i + kClassOpenPrefix.size() || j >= m.size() || m[j] != U'"') {
        return diag(DiagnosticKind::MalformedTag, i);
      }
      if (j + 1 < m.size() && unicode::is_space(m[j + 1])) {
        return diag(DiagnosticKind::UnknownAttribute, i);
      }
      if (j + 1 >= m.size() || m[j + 1] != U'>') return diag(DiagnosticKind::MalformedTag, i);
      open_label = unicode::encode(
          std::u32string_view(m).substr(i + kClassOpenPrefix.size(),
                                        j - i - kClassOpenPrefix.size()));
      open_start = text.size();
      i = j + 2;
      continue;
    }
    if (starts_with_at(m, i, kSentenceOpen)) {
      return diag(DiagnosticKind::MissingSentenceClose, i);
    }
    return diag(DiagnosticKind::MalformedTag, i);
  }
  return diag(DiagnosticKind::MissingSentenceClose, m.size());
}

DocumentParse parse_document(const RawSample& raw) {
  DocumentParse out;
  std::vector<std::size_t> starts;
  for (std::size_t pos = raw.text.find(kSentenceOpen); pos != std::string::npos;
       pos = raw.text.find(kSentenceOpen, pos + kSentenceOpen.size())) {
    starts.push_back(pos);
  }

  for (std::size_t k = 0; k < starts.size(); ++k) {
    const std::size_t end = k + 1 < starts.size() ? starts[k + 1] : raw.text.size();
    Segment seg;
    seg.segment_index = k;
    seg.markup = raw.text.substr(starts[k], end - starts[k]);

    SentenceParse parsed = parse_sentence(seg.markup);
    if (auto* s = std::get_if<AnnotatedSentence>(&parsed)) {
      s->id = make_sentence_id(raw.provenance.backend_id, raw.sample_index, k);
      s->provenance = raw.provenance;
      s->provenance->sample_index = raw.sample_index;
      out.sentences.push_back(*s);
      seg.sentence = std::move(*s);
    } else {
      auto d = std::get<ParseDiagnostic>(parsed);
      d.sample_index = raw.sample_index;
      d.segment_index = k;
      out.diagnostics.push_back(d);
      seg.diagnostic = d;
    }
    out.segments.push_back(std::move(seg));
  }
  return out;
}

std::string strip_markup(std::string_view markup) {
  const std::size_t close = markup.find(kSentenceClose);
  const std::string_view body = markup.substr(0, close);
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '<') {
      const std::size_t gt = body.find('>', i);
      if (gt == std::string_view::npos) break;
      i = gt;
      continue;
    }
    out.push_back(body[i]);
  }
  return out;
}

}  // namespace synthner::markup
