#include <algorithm>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "synthner/backend.hpp"
#include "synthner/corpus.hpp"
#include "synthner/error.hpp"
#include "synthner/markup.hpp"

namespace synthner::backend {
namespace {

using sampling::SplitMix64;

struct Piece {
  std::string text;
  std::optional<std::string> label;
};

// Draws from n ranked choices through the same decoding path a model would use.
std::size_t draw_ranked(std::size_t n, double rank_decay, const sampling::SamplingParams& params,
                        SplitMix64& rng) {
  std::vector<double> logits(n);
  for (std::size_t k = 0; k < n; ++k) logits[k] = -rank_decay * static_cast<double>(k);
  const auto probs = sampling::top_p_filter(sampling::tempered_softmax(logits, params.temperature),
                                            params.top_p);
  const auto draw = sampling::sample_token(probs, rng.state);
  rng.state = draw.next_state;
  return draw.index;
}

bool chance(double rate, SplitMix64& rng) {
  const double u = rng.next_double();
  return u < rate;
}

std::size_t count_tokens(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    const bool space = c == ' ' || c == '\n' || c == '\t';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::vector<Piece> render_template(const MockProfile& profile, const std::string& tmpl,
                                   const sampling::SamplingParams& params, SplitMix64& rng) {
  std::vector<Piece> pieces;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find('{', pos);
    if (open == std::string::npos) {
      pieces.push_back({tmpl.substr(pos), std::nullopt});
      break;
    }
    const std::size_t close = tmpl.find('}', open);
    if (open > pos) pieces.push_back({tmpl.substr(pos, open - pos), std::nullopt});
    const std::string label = tmpl.substr(open + 1, close - open - 1);
    const auto& words = profile.lexicons.at(label);
    const std::size_t k = draw_ranked(words.size(), profile.rank_decay, params, rng);
    pieces.push_back({words[k], label});
    pos = close + 1;
  }
  return pieces;
}

std::string render_markup(const std::vector<Piece>& pieces) {
  std::string out;
  for (const auto& p : pieces) {
    if (p.label) {
      out += markup::kClassOpenPrefix;
      out += *p.label;
      out += markup::kClassOpenSuffix;
      out += p.text;
      out += markup::kClassClose;
    } else {
      out += p.text;
    }
  }
  return out;
}

// Corrupts a sentence body the way generations typically go wrong.
std::string corrupt_syntax(const std::vector<Piece>& pieces, SplitMix64& rng) {
  const auto annotated = std::find_if(pieces.begin(), pieces.end(),
                                      [](const Piece& p) { return p.label.has_value(); });
  if (annotated == pieces.end()) return render_markup(pieces) + std::string(markup::kClassClose);

  const auto variant = rng.next() % 3;
  std::string out;
  for (auto it = pieces.begin(); it != pieces.end(); ++it) {
    if (it != annotated || !it->label) {
      std::vector<Piece> single{*it};
      out += render_markup(single);
      continue;
    }
    const std::string open = std::string(markup::kClassOpenPrefix) + *it->label +
                             std::string(markup::kClassOpenSuffix);
    switch (variant) {
      case 0:  // open tag where the close tag belongs
        out += open + it->text + open;
        break;
      case 1:  // misspelled tag
        out += "<clas=\"" + *it->label + "\">" + it->text + std::string(markup::kClassClose);
        break;
      default:  // close tag without an opening one
        out += it->text + std::string(markup::kClassClose);
        break;
    }
  }
  return out;
}

void check_rate(double r, const char* name) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::invalid_argument(std::string("mock rate ") + name + " must be in [0, 1]");
  }
}

}  // namespace

MockProfile MockProfile::german_medical() {
  MockProfile p;
  p.templates = {
      "Der Patient erhält {Medikation} {Dosis} gegen {Diagnose}.",
      "{Medikation} {Dosis} 1-0-1",
      "Bei {Diagnose} wurde {Medikation} in einer Dosis von {Dosis} verordnet.",
      "Aufgrund einer {Diagnose} nimmt die Patientin täglich {Dosis} {Medikation} ein.",
      "Entlassung: {Medikation} {Dosis} wegen {Diagnose}",
      "Die Untersuchung ergab den Befund einer {Diagnose}.",
      "Zur Behandlung der {Diagnose} wird {Medikation} empfohlen.",
      "{Medikation} {Dosis} p.o. morgens",
      "Seit Beginn der Therapie mit {Medikation} ist die {Diagnose} rückläufig.",
      "Die Gabe von {Dosis} {Medikation} wurde wegen {Diagnose} pausiert.",
  };
  p.lexicons["Medikation"] = {"Ibuprofen", "Metoprolol", "Pantoprazol", "Ramipril",
                              "Amoxicillin", "Insulin", "Cortison", "Nifedipin",
                              "Simvastatin", "Levothyroxin", "Metformin", "Lidocain"};
  p.lexicons["Dosis"] = {"400 mg", "47,5 mg", "40mg", "5 mg", "1000 mg", "12 IE",
                         "100mg", "20 mg", "75 µg", "500mg", "2,5 mg", "10ml"};
  p.lexicons["Diagnose"] = {"Hypertonie", "Pneumonie", "Diabetes mellitus Typ 2",
                            "Vorhofflimmern", "Refluxösophagitis", "Hypothyreose",
                            "Migräne", "Sepsis", "Niereninsuffizienz", "Mandelentzündung",
                            "Herzinsuffizienz", "Zervizitis"};
  return p;
}

void MockProfile::validate() const {
  check_rate(missing_close, "missing_close");
  check_rate(invalid_syntax, "invalid_syntax");
  check_rate(unknown_label, "unknown_label");
  check_rate(no_annotation, "no_annotation");
  check_rate(duplicate, "duplicate");
  if (templates.empty()) throw std::invalid_argument("mock profile has no templates");
  if (sentences_per_sample == 0) throw std::invalid_argument("sentences_per_sample must be > 0");
  if (!(rank_decay >= 0.0)) throw std::invalid_argument("rank_decay must be >= 0");
  for (const auto& t : templates) {
    if (t.find_first_of("<>\n") != std::string::npos) {
      throw std::invalid_argument("template contains '<', '>' or a newline: " + t);
    }
    std::size_t pos = 0;
    while ((pos = t.find('{', pos)) != std::string::npos) {
      const std::size_t close = t.find('}', pos);
      if (close == std::string::npos) throw std::invalid_argument("unterminated placeholder: " + t);
      const std::string label = t.substr(pos + 1, close - pos - 1);
      if (!Label::is_valid_name(label)) throw std::invalid_argument("bad placeholder: " + t);
      const auto it = lexicons.find(label);
      if (it == lexicons.end() || it->second.empty()) {
        throw std::invalid_argument("no lexicon for placeholder {" + label + "}");
      }
      pos = close + 1;
    }
  }
  for (const auto& [label, words] : lexicons) {
    for (const auto& w : words) {
      if (w.empty() || w.find_first_of("<>\n{}") != std::string::npos) {
        throw std::invalid_argument("unusable lexicon entry for " + label + ": \"" + w + "\"");
      }
    }
  }
  if (unknown_label > 0.0 && foreign_labels.empty()) {
    throw std::invalid_argument("unknown_label rate set but no foreign labels given");
  }
  for (const auto& f : foreign_labels) {
    if (!Label::is_valid_name(f)) throw std::invalid_argument("bad foreign label: " + f);
  }
}

MockProfile mock_profile_from_json(std::string_view contents, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(contents);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(source, 0, std::string("invalid JSON: ") + e.what());
  }
  MockProfile p = MockProfile::german_medical();
  try {
    if (j.contains("rates")) {
      const auto& r = j.at("rates");
      p.missing_close = r.value("missing_close", 0.0);
      p.invalid_syntax = r.value("invalid_syntax", 0.0);
      p.unknown_label = r.value("unknown_label", 0.0);
      p.no_annotation = r.value("no_annotation", 0.0);
      p.duplicate = r.value("duplicate", 0.0);
    }
    if (j.contains("templates")) p.templates = j.at("templates").get<std::vector<std::string>>();
    if (j.contains("lexicons")) {
      p.lexicons = j.at("lexicons").get<std::map<std::string, std::vector<std::string>>>();
    }
    if (j.contains("foreign_labels")) {
      p.foreign_labels = j.at("foreign_labels").get<std::vector<std::string>>();
    }
    p.sentences_per_sample = j.value("sentences_per_sample", p.sentences_per_sample);
    p.rank_decay = j.value("rank_decay", p.rank_decay);
    p.validate();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source, 0, std::string("mock profile: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(source, 0, std::string("mock profile: ") + e.what());
  }
  return p;
}

MockBackend::MockBackend(MockProfile profile) : profile_(std::move(profile)) {
  profile_.validate();
}

std::string MockBackend::complete(const CompletionRequest& request) {
  request.params.validate();
  SplitMix64 rng{sampling::stream_seed(request.params.seed, request.sample_index)};

  std::vector<std::string> emitted;
  std::string out;
  std::size_t tokens = 0;
  for (std::size_t n = 0; n < profile_.sentences_per_sample; ++n) {
    std::string sentence;
    if (!emitted.empty() && chance(profile_.duplicate, rng)) {
      sentence = emitted[rng.next() % emitted.size()];
    } else {
      const std::size_t t =
          draw_ranked(profile_.templates.size(), profile_.rank_decay, request.params, rng);
      auto pieces = render_template(profile_, profile_.templates[t], request.params, rng);

      std::vector<std::size_t> annotated;
      for (std::size_t k = 0; k < pieces.size(); ++k) {
        if (pieces[k].label) annotated.push_back(k);
      }
      if (!annotated.empty() && chance(profile_.unknown_label, rng)) {
        const auto k = annotated[rng.next() % annotated.size()];
        pieces[k].label = profile_.foreign_labels[rng.next() % profile_.foreign_labels.size()];
      }
      if (chance(profile_.no_annotation, rng)) {
        for (auto& p : pieces) p.label.reset();
      }
      const std::string body = chance(profile_.invalid_syntax, rng)
                                   ? corrupt_syntax(pieces, rng)
                                   : render_markup(pieces);
      const bool close = !chance(profile_.missing_close, rng);
      sentence = close ? body + std::string(markup::kSentenceClose) : body;
    }

    const std::string chunk =
        out.empty() ? sentence : "\n" + std::string(markup::kSentenceOpen) + sentence;
    const std::size_t chunk_tokens = count_tokens(chunk);
    if (tokens + chunk_tokens > request.params.max_tokens) break;
    tokens += chunk_tokens;
    out += chunk;
    emitted.push_back(std::move(sentence));
  }
  return out;
}

}  // namespace synthner::backend
