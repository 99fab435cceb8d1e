#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "synthner/campaign.hpp"
#include "synthner/curation.hpp"
#include "synthner/eval.hpp"
#include "synthner/io.hpp"
#include "synthner/markup.hpp"
#include "synthner/prompt.hpp"
#include "synthner/sampling.hpp"

namespace py = pybind11;
using namespace synthner;

namespace {

LabelSet labelset(const std::vector<std::string>& names) { return LabelSet::from_names(names); }

std::vector<markup::RawSample> raw_samples(const std::string& jsonl) {
  return io::raw_samples_from_jsonl(jsonl, "<raw samples>");
}

}  // namespace

PYBIND11_MODULE(_synthner, m) {
  m.doc() = "Core operations of the synthner corpus toolkit";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<markup::EncodeError>(m, "EncodeError", PyExc_ValueError);

  py::class_<Span>(m, "Span")
      .def(py::init([](std::size_t start, std::size_t end, const std::string& label) {
             return Span{start, end, Label(label)};
           }),
           py::arg("start"), py::arg("end"), py::arg("label"))
      .def_readwrite("start", &Span::start)
      .def_readwrite("end", &Span::end)
      .def_property(
          "label", [](const Span& s) { return s.label.name(); },
          [](Span& s, const std::string& l) { s.label = Label(l); })
      .def("__eq__", [](const Span& a, const Span& b) { return a == b; })
      .def("__repr__", [](const Span& s) {
        return "Span(" + std::to_string(s.start) + ", " + std::to_string(s.end) + ", '" +
               s.label.name() + "')";
      });

  py::class_<AnnotatedSentence>(m, "Sentence")
      .def(py::init([](std::string text, std::vector<Span> spans, std::string id) {
             return AnnotatedSentence{std::move(id), std::move(text), std::move(spans), std::nullopt};
           }),
           py::arg("text"), py::arg("spans") = std::vector<Span>{}, py::arg("id") = "")
      .def_readwrite("id", &AnnotatedSentence::id)
      .def_readwrite("text", &AnnotatedSentence::text)
      .def_readwrite("spans", &AnnotatedSentence::spans)
      .def("__eq__", [](const AnnotatedSentence& a, const AnnotatedSentence& b) {
        return a.text == b.text && a.spans == b.spans;
      })
      .def("__repr__", [](const AnnotatedSentence& s) {
        return "Sentence(" + py::repr(py::str(s.text)).cast<std::string>() + ", " +
               std::to_string(s.spans.size()) + " spans)";
      });

  py::class_<markup::ParseDiagnostic>(m, "Diagnostic")
      .def_property_readonly("kind",
                             [](const markup::ParseDiagnostic& d) { return std::string(to_string(d.kind)); })
      .def_readonly("position", &markup::ParseDiagnostic::position)
      .def_readonly("segment_index", &markup::ParseDiagnostic::segment_index)
      .def_readonly("sample_index", &markup::ParseDiagnostic::sample_index)
      .def("__repr__", [](const markup::ParseDiagnostic& d) {
        return "Diagnostic(" + std::string(to_string(d.kind)) + " at " + std::to_string(d.position) + ")";
      });

  m.def("encode_sentence", &markup::encode_sentence, py::arg("sentence"));
  m.def("parse_sentence", [](const std::string& s) -> py::object {
    auto r = markup::parse_sentence(s);
    if (auto* ok = std::get_if<AnnotatedSentence>(&r)) return py::cast(std::move(*ok));
    return py::cast(std::get<markup::ParseDiagnostic>(r));
  }, py::arg("markup"), "Returns a Sentence, or a Diagnostic for the first error.");
  m.def("parse_document", [](const std::string& text) {
    const auto d = markup::parse_document(markup::RawSample{0, text, {}});
    return py::make_tuple(d.sentences, d.diagnostics);
  }, py::arg("text"), "Parses every <s> segment; returns (sentences, diagnostics).");
  m.def("strip_markup", &markup::strip_markup, py::arg("markup"));

  m.def("build_prompt", [](const std::vector<AnnotatedSentence>& ex) { return build_prompt(ex).text; },
        py::arg("examples"));
  m.def("assemble_prompt", [](const std::vector<std::string>& lines) { return assemble_prompt(lines).text; },
        py::arg("encoded_lines"));

  m.def("tempered_softmax", [](const std::vector<double>& l, double t) {
    return sampling::tempered_softmax(l, t);
  }, py::arg("logits"), py::arg("temperature"));
  m.def("top_p_filter", [](const std::vector<double>& p, double top_p) {
    return sampling::top_p_filter(p, top_p);
  }, py::arg("probs"), py::arg("top_p"));
  m.def("sample_token", [](const std::vector<double>& p, std::uint64_t state) {
    const auto d = sampling::sample_token(p, state);
    return py::make_tuple(d.index, d.next_state);
  }, py::arg("probs"), py::arg("rng_state"), "Returns (index, next_state).");

  m.def("mock_completion", [](const std::string& prompt, double temperature, double top_p,
                              std::uint32_t max_tokens, std::uint64_t seed, std::uint64_t sample_index) {
    backend::MockBackend b(backend::MockProfile::german_medical());
    return b.complete(backend::CompletionRequest{prompt, {temperature, top_p, max_tokens, seed}, sample_index});
  }, py::arg("prompt"), py::arg("temperature") = 0.8, py::arg("top_p") = 0.9,
     py::arg("max_tokens") = 768, py::arg("seed") = 0, py::arg("sample_index") = 0);

  m.def("_apply_filters", [](const std::string& raw_jsonl, const std::vector<std::string>& labels,
                             const std::string& order) {
    const auto raws = raw_samples(raw_jsonl);
    const auto r = curation::apply_filters(
        raws, labelset(labels), order == "prose" ? curation::StageOrder::Prose : curation::StageOrder::Table);
    return py::make_tuple(r.corpus.sentences, r.report.to_json());
  });
  m.def("dedup_key", [](const std::string& t) { return curation::dedup_key(t); }, py::arg("text"));
  m.def("tokenize", [](const std::string& text) {
    std::vector<std::tuple<std::size_t, std::size_t, std::string>> out;
    for (const auto& t : curation::tokenize(text)) out.emplace_back(t.start, t.end, t.text);
    return out;
  }, py::arg("text"), "Returns (start, end, text) tuples in code points.");
  m.def("bio_tags", [](const AnnotatedSentence& s) {
    return curation::bio_tags(s, curation::tokenize(s.text));
  }, py::arg("sentence"));
  m.def("_corpus_stats", [](const std::vector<AnnotatedSentence>& s, const std::vector<std::string>& labels) {
    return curation::corpus_stats(Corpus{s, labelset(labels)}).to_json();
  });
  m.def("split_sizes", [](std::size_t n, double train, double validation, double test) {
    const auto sz = curation::split_sizes(n, curation::SplitSpec{train, validation, test, 0});
    return py::make_tuple(sz.train, sz.validation, sz.test);
  }, py::arg("n"), py::arg("train") = 0.8, py::arg("validation") = 0.1, py::arg("test") = 0.1);
  m.def("split", [](const std::vector<AnnotatedSentence>& s, const std::vector<std::string>& labels,
                    std::uint64_t seed, double train, double validation, double test) {
    const auto r = curation::split(Corpus{s, labelset(labels)},
                                   curation::SplitSpec{train, validation, test, seed});
    return py::make_tuple(r.train.sentences, r.validation.sentences, r.test.sentences);
  }, py::arg("sentences"), py::arg("labels"), py::arg("seed"), py::arg("train") = 0.8,
     py::arg("validation") = 0.1, py::arg("test") = 0.1);

  m.def("_score", [](const std::vector<AnnotatedSentence>& gold, const std::vector<std::string>& gold_labels,
                     const std::vector<AnnotatedSentence>& pred, const std::vector<std::string>& pred_labels,
                     std::optional<std::map<std::string, std::string>> alias, bool by_entities) {
    eval::ScoreOptions opts;
    opts.alias = std::move(alias);
    opts.weighting = by_entities ? eval::Weighting::GoldEntities : eval::Weighting::GoldCharacters;
    return eval::score(Corpus{gold, labelset(gold_labels)}, Corpus{pred, labelset(pred_labels)}, opts)
        .to_json();
  });

  m.def("read_corpus_jsonl", [](const std::string& contents) {
    return io::sentences_from_jsonl(contents, "<corpus>");
  }, py::arg("contents"));
  m.def("corpus_to_jsonl", &io::corpus_to_jsonl, py::arg("sentences"));
}
