#include "synthner/curation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "synthner/io.hpp"
#include "synthner/sampling.hpp"
#include "synthner/unicode.hpp"

namespace synthner::curation {
namespace {

struct Item {
  const markup::Segment* segment;
  std::string surface;
};

bool is_split_punct(char32_t c) { return kSplitPunctuation.find(c) != std::u32string_view::npos; }

enum class LabelVerdict { Ok, NoAnnotation, UnknownLabel };

LabelVerdict check_labels(const AnnotatedSentence& s, const LabelSet& ls) {
  if (s.spans.empty()) return LabelVerdict::NoAnnotation;
  for (const auto& sp : s.spans) {
    if (!ls.contains(sp.label.name())) return LabelVerdict::UnknownLabel;
  }
  return LabelVerdict::Ok;
}

}  // namespace

int round_percent(std::size_t num, std::size_t den) {
  if (den == 0) return 0;
  // Exact integer arithmetic: floor((200 * num + den) / (2 * den)).
  const auto n = static_cast<unsigned long long>(num);
  const auto d = static_cast<unsigned long long>(den);
  return static_cast<int>((200ULL * n + d) / (2ULL * d));
}

FilterReport FilterReport::from_counts(
    std::size_t baseline, const std::vector<std::pair<std::string, std::size_t>>& remaining) {
  FilterReport r;
  r.baseline_count = baseline;
  std::size_t prev = baseline;
  for (const auto& [name, count] : remaining) {
    if (count > prev) throw std::invalid_argument("stage counts must be non-increasing");
    prev = count;
  }
  r.final_count = prev;
  const std::size_t total_removed = baseline - r.final_count;
  prev = baseline;
  for (const auto& [name, count] : remaining) {
    r.stages.push_back(StageCount{name, count, round_percent(count, baseline),
                                  round_percent(prev - count, total_removed)});
    prev = count;
  }
  return r;
}

std::string FilterReport::to_json() const {
  nlohmann::ordered_json j;
  j["baseline"] = baseline_count;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : stages) {
    nlohmann::ordered_json o;
    o["name"] = s.name;
    o["remaining"] = s.remaining;
    o["pct_of_baseline"] = s.pct_of_baseline;
    o["impact"] = s.impact;
    j["stages"].push_back(std::move(o));
  }
  j["final"] = final_count;
  j["removed_no_annotation"] = removed_no_annotation;
  j["removed_unknown_label"] = removed_unknown_label;
  return j.dump(2) + "\n";
}

std::string FilterReport::to_tsv() const {
  std::string out = "Applied Filter\t#Sentences\t% of Baseline\tImpact\n";
  out += "Baseline\t" + std::to_string(baseline_count) + "\t" +
         std::to_string(round_percent(baseline_count, baseline_count)) + "%\t\n";
  for (const auto& s : stages) {
    out += s.name + "\t" + std::to_string(s.remaining) + "\t" + std::to_string(s.pct_of_baseline) +
           "%\t" + std::to_string(s.impact) + "%\n";
  }
  out += "Final\t" + std::to_string(final_count) + "\t" +
         std::to_string(round_percent(final_count, baseline_count)) + "%\t\n";
  return out;
}

std::string dedup_key(std::string_view text) {
  const std::u32string cps = unicode::decode(unicode::nfc(text));
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t c : cps) {
    if (unicode::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return unicode::encode(out);
}

FilterResult apply_filters(std::span<const markup::RawSample> raws, const LabelSet& ls,
                           StageOrder order) {
  std::vector<const markup::RawSample*> sorted;
  sorted.reserve(raws.size());
  for (const auto& r : raws) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return a->sample_index < b->sample_index;
  });

  std::vector<markup::DocumentParse> docs;
  docs.reserve(sorted.size());
  for (const auto* r : sorted) docs.push_back(markup::parse_document(*r));

  std::vector<Item> items;
  for (const auto& d : docs) {
    for (const auto& seg : d.segments) {
      items.push_back(Item{&seg, seg.sentence ? seg.sentence->text : markup::strip_markup(seg.markup)});
    }
  }

  FilterResult result{Corpus{{}, ls}, {}};
  const std::size_t baseline = items.size();

  auto keep_if = [&items](auto pred) {
    items.erase(std::remove_if(items.begin(), items.end(), [&](const Item& it) { return !pred(it); }),
                items.end());
    return items.size();
  };
  auto close_stage = [&] { return keep_if([](const Item& it) { return it.segment->has_close(); }); };
  auto dedup_stage = [&] {
    std::unordered_set<std::string> seen;
    return keep_if([&](const Item& it) { return seen.insert(dedup_key(it.surface)).second; });
  };
  auto syntax_stage = [&] { return keep_if([](const Item& it) { return it.segment->sentence.has_value(); }); };
  auto labels_stage = [&] {
    return keep_if([&](const Item& it) {
      // Stage order guarantees parsed sentences here.
      const auto verdict = check_labels(*it.segment->sentence, ls);
      if (verdict == LabelVerdict::NoAnnotation) ++result.report.removed_no_annotation;
      if (verdict == LabelVerdict::UnknownLabel) ++result.report.removed_unknown_label;
      return verdict == LabelVerdict::Ok;
    });
  };

  std::vector<std::pair<std::string, std::size_t>> counts;
  counts.emplace_back(kStageMissingClose, close_stage());
  if (order == StageOrder::Table) {
    counts.emplace_back(kStageDuplicates, dedup_stage());
    counts.emplace_back(kStageInvalidSyntax, syntax_stage());
    counts.emplace_back(kStageInvalidLabels, labels_stage());
  } else {
    counts.emplace_back(kStageInvalidSyntax, syntax_stage());
    counts.emplace_back(kStageInvalidLabels, labels_stage());
    counts.emplace_back(kStageDuplicates, dedup_stage());
  }

  const auto no_annotation = result.report.removed_no_annotation;
  const auto unknown_label = result.report.removed_unknown_label;
  result.report = FilterReport::from_counts(baseline, counts);
  result.report.removed_no_annotation = no_annotation;
  result.report.removed_unknown_label = unknown_label;

  result.corpus.sentences.reserve(items.size());
  for (const auto& it : items) result.corpus.sentences.push_back(*it.segment->sentence);
  return result;
}

std::vector<markup::RawSample> to_raw_samples(const Corpus& c) {
  std::vector<markup::RawSample> out;
  out.reserve(c.sentences.size());
  for (std::size_t i = 0; i < c.sentences.size(); ++i) {
    const auto& s = c.sentences[i];
    markup::RawSample r;
    r.sample_index = i;
    r.text = markup::encode_sentence(s);
    if (s.provenance) r.provenance = *s.provenance;
    r.provenance.sample_index = i;
    if (r.provenance.backend_id.empty()) r.provenance.backend_id = "corpus";
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  const std::u32string cps = unicode::decode(text);
  std::vector<Token> out;
  auto emit = [&](std::size_t a, std::size_t b) {
    out.push_back(Token{a, b, unicode::encode(std::u32string_view(cps).substr(a, b - a))});
  };

  std::size_t i = 0;
  while (i < cps.size()) {
    if (unicode::is_space(cps[i])) {
      ++i;
      continue;
    }
    std::size_t a = i;
    while (i < cps.size() && !unicode::is_space(cps[i])) ++i;
    std::size_t b = i;

    const bool all_punct =
        std::all_of(cps.begin() + static_cast<std::ptrdiff_t>(a),
                    cps.begin() + static_cast<std::ptrdiff_t>(b), is_split_punct);
    if (all_punct) {
      emit(a, b);
      continue;
    }
    while (is_split_punct(cps[a])) {
      emit(a, a + 1);
      ++a;
    }
    std::size_t core_end = b;
    while (is_split_punct(cps[core_end - 1])) --core_end;
    emit(a, core_end);
    for (std::size_t k = core_end; k < b; ++k) emit(k, k + 1);
  }
  return out;
}

std::size_t CorpusStats::entities(std::string_view label) const {
  for (const auto& [name, n] : entity_counts) {
    if (name == label) return n;
  }
  return 0;
}

std::string CorpusStats::to_json() const {
  nlohmann::ordered_json j;
  j["sentence_count"] = sentence_count;
  j["token_count"] = token_count;
  j["span_count"] = span_count;
  j["entity_counts"] = nlohmann::ordered_json::object();
  for (const auto& [name, n] : entity_counts) j["entity_counts"][name] = n;
  return j.dump(2) + "\n";
}

CorpusStats corpus_stats(const Corpus& c) {
  CorpusStats st;
  for (const auto& l : c.labelset.labels()) st.entity_counts.emplace_back(l.name(), 0);
  for (const auto& s : c.sentences) {
    ++st.sentence_count;
    st.token_count += tokenize(s.text).size();
    for (const auto& sp : s.spans) {
      ++st.span_count;
      auto it = std::find_if(st.entity_counts.begin(), st.entity_counts.end(),
                             [&](const auto& e) { return e.first == sp.label.name(); });
      if (it == st.entity_counts.end()) {
        st.entity_counts.emplace_back(sp.label.name(), 1);
      } else {
        ++it->second;
      }
    }
  }
  return st;
}

void SplitSpec::validate() const {
  for (double r : {train, validation, test}) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("split ratios must lie in (0, 1)");
  }
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1");
  }
}

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  // The epsilon keeps exact products such as 10 * 0.1 from flooring to 0.
  const auto part = [n](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9));
  };
  SplitSizes sz;
  sz.validation = part(spec.validation);
  sz.test = part(spec.test);
  sz.train = n - sz.validation - sz.test;
  return sz;
}

SplitResult split(const Corpus& c, const SplitSpec& spec) {
  if (c.sentences.empty()) throw std::invalid_argument("cannot split an empty corpus");
  const SplitSizes sz = split_sizes(c.sentences.size(), spec);

  std::vector<std::size_t> perm(c.sentences.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  sampling::SplitMix64 rng{spec.seed};
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.next_double() * static_cast<double>(i + 1));
    std::swap(perm[i], perm[std::min(j, i)]);
  }

  auto take = [&](std::size_t from, std::size_t count) {
    std::vector<std::size_t> idx(perm.begin() + static_cast<std::ptrdiff_t>(from),
                                 perm.begin() + static_cast<std::ptrdiff_t>(from + count));
    std::sort(idx.begin(), idx.end());
    Corpus part{{}, c.labelset};
    part.sentences.reserve(idx.size());
    for (auto i : idx) part.sentences.push_back(c.sentences[i]);
    return part;
  };
  SplitResult out{take(sz.validation + sz.test, sz.train), take(0, sz.validation),
                  take(sz.validation, sz.test)};
  return out;
}

std::vector<std::string> bio_tags(const AnnotatedSentence& s, std::span<const Token> tokens) {
  std::vector<std::string> tags;
  tags.reserve(tokens.size());
  std::optional<std::size_t> prev_span;
  for (const auto& tok : tokens) {
    std::optional<std::size_t> best;
    std::size_t best_overlap = 0;
    const std::size_t len = tok.end - tok.start;
    for (std::size_t k = 0; k < s.spans.size(); ++k) {
      const auto& sp = s.spans[k];
      const std::size_t lo = std::max(sp.start, tok.start);
      const std::size_t hi = std::min(sp.end, tok.end);
      const std::size_t overlap = hi > lo ? hi - lo : 0;
      if (overlap > 0 && 2 * overlap >= len && overlap > best_overlap) {
        best = k;
        best_overlap = overlap;
      }
    }
    if (!best) {
      tags.emplace_back("O");
    } else {
      const bool inside = prev_span && *prev_span == *best;
      tags.push_back((inside ? "I-" : "B-") + s.spans[*best].label.name());
    }
    prev_span = best;
  }
  return tags;
}

std::vector<Span> decode_bio(std::span<const Token> tokens, std::span<const std::string> tags) {
  if (tokens.size() != tags.size()) throw std::invalid_argument("token/tag count mismatch");
  std::vector<Span> out;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& t = tags[i];
    if (t == "O") {
      open = false;
      continue;
    }
    if (t.size() < 3 || (t[0] != 'B' && t[0] != 'I') || t[1] != '-') {
      throw std::invalid_argument("bad BIO tag: " + t);
    }
    const std::string label = t.substr(2);
    if (t[0] == 'I' && open && out.back().label.name() == label) {
      out.back().end = tokens[i].end;
      continue;
    }
    out.push_back(Span{tokens[i].start, tokens[i].end, Label(label)});
    open = true;
  }
  return out;
}

std::string to_bio(const Corpus& c) {
  std::string out;
  for (const auto& s : c.sentences) {
    const auto tokens = tokenize(s.text);
    const auto tags = bio_tags(s, tokens);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      out += tokens[i].text;
      out += '\t';
      out += tags[i];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

void export_corpus(const Corpus& c, ExportFormat format, const std::filesystem::path& path) {
  switch (format) {
    case ExportFormat::Jsonl:
      io::atomic_write_file(path, io::corpus_to_jsonl(c.sentences));
      return;
    case ExportFormat::Bio:
      io::atomic_write_file(path, to_bio(c));
      return;
  }
}

}  // namespace synthner::curation
