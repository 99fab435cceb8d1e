#include "synthner/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "synthner/unicode.hpp"

namespace synthner::eval {
namespace {

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0, gold_chars = 0, gold_entities = 0;
};

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  undefined = den == 0;
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

ScoreRow make_row(const std::string& label, const Counts& c) {
  ScoreRow row;
  row.label = label;
  row.tp = c.tp;
  row.fp = c.fp;
  row.fn = c.fn;
  row.gold_chars = c.gold_chars;
  row.gold_entities = c.gold_entities;
  row.precision = ratio(c.tp, c.tp + c.fp, row.precision_undefined);
  row.recall = ratio(c.tp, c.tp + c.fn, row.recall_undefined);
  row.f1 = harmonic(row.precision, row.recall);
  return row;
}

ScoreRow weighted_total(const std::vector<ScoreRow>& rows, Weighting weighting) {
  ScoreRow total;
  total.label = "Total";
  double weight_sum = 0.0;
  for (const auto& r : rows) {
    const double w = static_cast<double>(weighting == Weighting::GoldCharacters ? r.gold_chars
                                                                                : r.gold_entities);
    total.precision += w * r.precision;
    total.recall += w * r.recall;
    total.f1 += w * r.f1;
    weight_sum += w;
    total.tp += r.tp;
    total.fp += r.fp;
    total.fn += r.fn;
    total.gold_chars += r.gold_chars;
    total.gold_entities += r.gold_entities;
  }
  if (weight_sum > 0.0) {
    total.precision /= weight_sum;
    total.recall /= weight_sum;
    total.f1 /= weight_sum;
  } else {
    total.precision_undefined = true;
    total.recall_undefined = true;
  }
  return total;
}

// Gold sentence index -> pred sentence index, checking ids and texts.
std::vector<std::size_t> align(const Corpus& gold, const Corpus& pred) {
  if (gold.sentences.size() != pred.sentences.size()) {
    throw std::invalid_argument("gold has " + std::to_string(gold.sentences.size()) +
                                " sentences, pred has " + std::to_string(pred.sentences.size()));
  }
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < pred.sentences.size(); ++i) {
    if (!by_id.emplace(pred.sentences[i].id, i).second) {
      throw std::invalid_argument("duplicate prediction id " + pred.sentences[i].id);
    }
  }
  std::vector<std::size_t> out;
  out.reserve(gold.sentences.size());
  for (const auto& g : gold.sentences) {
    const auto it = by_id.find(g.id);
    if (it == by_id.end()) throw std::invalid_argument("no prediction for sentence " + g.id);
    if (pred.sentences[it->second].text != g.text) {
      throw std::invalid_argument("text mismatch for sentence " + g.id);
    }
    out.push_back(it->second);
  }
  return out;
}

Corpus rename_labels(const Corpus& c, const LabelAliasMap& alias) {
  auto mapped = [&](const std::string& name) {
    const auto it = alias.find(name);
    return it == alias.end() ? name : it->second;
  };
  std::vector<std::string> names;
  for (const auto& l : c.labelset.labels()) {
    const auto m = mapped(l.name());
    if (std::find(names.begin(), names.end(), m) == names.end()) names.push_back(m);
  }
  Corpus out{c.sentences, LabelSet::from_names(names)};
  for (auto& s : out.sentences) {
    for (auto& sp : s.spans) sp.label = Label(mapped(sp.label.name()));
  }
  return out;
}

void add_unique(std::vector<std::string>& names, const std::string& n) {
  if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
}

}  // namespace

CharLabeling char_labels(const AnnotatedSentence& s) {
  CharLabeling out(unicode::length(s.text));
  for (const auto& sp : s.spans) {
    if (sp.start >= sp.end || sp.end > out.size()) {
      throw std::invalid_argument("span out of bounds in sentence " + s.id);
    }
    for (std::size_t i = sp.start; i < sp.end; ++i) {
      if (out[i]) throw std::invalid_argument("overlapping spans in sentence " + s.id);
      out[i] = sp.label.name();
    }
  }
  return out;
}

void validate_alias(const LabelAliasMap& alias, const LabelSet& targets) {
  for (const auto& [from, to] : alias) {
    if (!targets.contains(to)) {
      throw std::invalid_argument("alias target " + to + " (for " + from + ") is not a known label");
    }
  }
}

AliasResult apply_alias(const Corpus& pred, const LabelAliasMap& alias, const LabelSet& keep_labels) {
  AliasResult out{Corpus{{}, keep_labels}, 0};
  out.corpus.sentences.reserve(pred.sentences.size());
  for (const auto& s : pred.sentences) {
    AnnotatedSentence t = s;
    t.spans.clear();
    for (const auto& sp : s.spans) {
      const auto it = alias.find(sp.label.name());
      if (it != alias.end()) {
        t.spans.push_back(Span{sp.start, sp.end, Label(it->second)});
      } else if (keep_labels.contains(sp.label.name())) {
        t.spans.push_back(sp);
      } else {
        ++out.dropped;
      }
    }
    out.corpus.sentences.push_back(std::move(t));
  }
  return out;
}

const ScoreRow* ScoreReport::row(std::string_view label) const {
  for (const auto& r : rows) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

ScoreReport score(const Corpus& gold_in, const Corpus& pred_in, const ScoreOptions& options) {
  Corpus gold = gold_in;
  Corpus pred = pred_in;
  ScoreReport report;
  report.weighting = options.weighting;

  std::vector<std::string> row_labels;
  if (options.alias) {
    std::vector<std::string> known;
    for (const auto& l : gold.labelset.labels()) add_unique(known, l.name());
    for (const auto& l : pred.labelset.labels()) add_unique(known, l.name());
    validate_alias(*options.alias, LabelSet::from_names(known));
    gold = rename_labels(gold, *options.alias);
    auto aliased = apply_alias(pred, *options.alias, gold.labelset);
    pred = std::move(aliased.corpus);
    report.dropped_pred_spans = aliased.dropped;
    for (const auto& l : gold.labelset.labels()) {
      for (const auto& [from, to] : *options.alias) {
        if (to == l.name()) add_unique(row_labels, to);
      }
    }
  }
  if (row_labels.empty()) {
    for (const auto& l : gold.labelset.labels()) add_unique(row_labels, l.name());
    for (const auto& l : pred.labelset.labels()) add_unique(row_labels, l.name());
    for (const auto& s : pred.sentences) {
      for (const auto& sp : s.spans) add_unique(row_labels, sp.label.name());
    }
  }

  const auto pairing = align(gold, pred);
  std::unordered_map<std::string, Counts> counts;
  for (std::size_t gi = 0; gi < gold.sentences.size(); ++gi) {
    const auto& gs = gold.sentences[gi];
    const auto g = char_labels(gs);
    const auto p = char_labels(pred.sentences[pairing[gi]]);
    for (const auto& sp : gs.spans) ++counts[sp.label.name()].gold_entities;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i]) ++counts[*g[i]].gold_chars;
      if (g[i] && p[i] && *g[i] == *p[i]) {
        ++counts[*g[i]].tp;
        continue;
      }
      if (p[i]) ++counts[*p[i]].fp;
      if (g[i]) ++counts[*g[i]].fn;
    }
  }

  for (const auto& label : row_labels) report.rows.push_back(make_row(label, counts[label]));
  report.total = weighted_total(report.rows, options.weighting);
  return report;
}

ScoreReport score_entities(const Corpus& gold, const Corpus& pred) {
  const auto pairing = align(gold, pred);
  std::vector<std::string> row_labels;
  for (const auto& l : gold.labelset.labels()) add_unique(row_labels, l.name());
  std::unordered_map<std::string, Counts> counts;
  for (std::size_t gi = 0; gi < gold.sentences.size(); ++gi) {
    const auto& gs = gold.sentences[gi].spans;
    const auto& ps = pred.sentences[pairing[gi]].spans;
    for (const auto& g : gs) {
      ++counts[g.label.name()].gold_entities;
      counts[g.label.name()].gold_chars += g.length();
      if (std::find(ps.begin(), ps.end(), g) != ps.end()) {
        ++counts[g.label.name()].tp;
      } else {
        ++counts[g.label.name()].fn;
      }
    }
    for (const auto& p : ps) {
      add_unique(row_labels, p.label.name());
      if (std::find(gs.begin(), gs.end(), p) == gs.end()) ++counts[p.label.name()].fp;
    }
  }
  ScoreReport report;
  report.weighting = Weighting::GoldEntities;
  for (const auto& label : row_labels) report.rows.push_back(make_row(label, counts[label]));
  report.total = weighted_total(report.rows, Weighting::GoldEntities);
  return report;
}

std::string ScoreReport::to_json() const {
  auto row_json = [](const ScoreRow& r) {
    nlohmann::ordered_json j;
    j["label"] = r.label;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["tp"] = r.tp;
    j["fp"] = r.fp;
    j["fn"] = r.fn;
    j["gold_chars"] = r.gold_chars;
    j["gold_entities"] = r.gold_entities;
    j["precision_undefined"] = r.precision_undefined;
    j["recall_undefined"] = r.recall_undefined;
    return j;
  };
  nlohmann::ordered_json j;
  j["weighting"] = weighting == Weighting::GoldCharacters ? "gold_characters" : "gold_entities";
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) j["rows"].push_back(row_json(r));
  j["total"] = row_json(total);
  j["dropped_pred_spans"] = dropped_pred_spans;
  return j.dump(2) + "\n";
}

std::string ScoreReport::to_table() const {
  std::vector<const ScoreRow*> cols;
  for (const auto& r : rows) cols.push_back(&r);
  if (rows.size() != 1) cols.push_back(&total);

  std::size_t width = 6;
  for (const auto* c : cols) width = std::max(width, c->label.size() + 2);
  auto pad = [width](const std::string& s) {
    return std::string(width > s.size() ? width - s.size() : 0, ' ') + s;
  };

  std::string out = "    ";
  for (const auto* c : cols) out += pad(c->label);
  out += '\n';
  const std::pair<const char*, double ScoreRow::*> metrics[] = {
      {"Pr", &ScoreRow::precision}, {"Re", &ScoreRow::recall}, {"F1", &ScoreRow::f1}};
  for (const auto& [name, field] : metrics) {
    out += name;
    out += "  ";
    for (const auto* c : cols) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", c->*field);
      out += pad(buf);
    }
    out += '\n';
  }
  return out;
}

}  // namespace synthner::eval
