#include "synthner/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace synthner::io {
namespace {

using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

template <typename T>
T require(const json& obj, const char* key, const std::string& source, std::size_t line_no) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw DataError(source, line_no, std::string("missing field \"") + key + "\"");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(source, line_no, std::string("field \"") + key + "\" has the wrong type");
  }
}

json parse_json(std::string_view text, const std::string& source, std::size_t line_no) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(source, line_no, std::string("invalid JSON: ") + e.what());
  }
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

template <typename F>
void for_each_line(std::string_view contents, F&& f) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    ++line_no;
    const std::string_view line = contents.substr(pos, nl - pos);
    if (!is_blank(line)) f(line, line_no);
    pos = nl + 1;
  }
}

ordered_json provenance_to_json(const SampleProvenance& p, bool with_index) {
  ordered_json j;
  if (with_index) j["sample_index"] = p.sample_index;
  j["temperature"] = p.temperature;
  j["top_p"] = p.top_p;
  j["max_tokens"] = p.max_tokens;
  j["seed"] = p.seed;
  j["backend_id"] = p.backend_id;
  return j;
}

SampleProvenance provenance_from_json(const json& j, bool with_index, const std::string& source,
                                      std::size_t line_no) {
  if (!j.is_object()) throw DataError(source, line_no, "provenance must be an object or null");
  SampleProvenance p;
  if (with_index) p.sample_index = require<std::uint64_t>(j, "sample_index", source, line_no);
  p.temperature = require<double>(j, "temperature", source, line_no);
  p.top_p = require<double>(j, "top_p", source, line_no);
  if (j.contains("max_tokens")) p.max_tokens = require<std::uint32_t>(j, "max_tokens", source, line_no);
  p.seed = require<std::uint64_t>(j, "seed", source, line_no);
  p.backend_id = require<std::string>(j, "backend_id", source, line_no);
  if (!(p.temperature > 0.0)) throw DataError(source, line_no, "provenance temperature must be > 0");
  if (!(p.top_p > 0.0 && p.top_p <= 1.0)) {
    throw DataError(source, line_no, "provenance top_p must be in (0, 1]");
  }
  return p;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write_file(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                             ec.message());
  }
}

std::string sentence_to_json_line(const AnnotatedSentence& s) {
  ordered_json j;
  j["id"] = s.id;
  j["text"] = s.text;
  j["spans"] = ordered_json::array();
  for (const auto& sp : s.spans) {
    ordered_json o;
    o["start"] = sp.start;
    o["end"] = sp.end;
    o["label"] = sp.label.name();
    j["spans"].push_back(std::move(o));
  }
  j["provenance"] = s.provenance ? provenance_to_json(*s.provenance, true) : ordered_json(nullptr);
  return j.dump();
}

AnnotatedSentence sentence_from_json_line(std::string_view line, const std::string& source,
                                          std::size_t line_no) {
  const json j = parse_json(line, source, line_no);
  AnnotatedSentence s;
  s.id = require<std::string>(j, "id", source, line_no);
  s.text = require<std::string>(j, "text", source, line_no);
  const json spans = require<json>(j, "spans", source, line_no);
  if (!spans.is_array()) throw DataError(source, line_no, "\"spans\" must be an array");
  for (const auto& o : spans) {
    const auto name = require<std::string>(o, "label", source, line_no);
    if (!Label::is_valid_name(name)) {
      throw DataError(source, line_no, "invalid label name \"" + name + "\"");
    }
    s.spans.push_back(Span{require<std::size_t>(o, "start", source, line_no),
                           require<std::size_t>(o, "end", source, line_no), Label(name)});
  }
  if (j.contains("provenance") && !j.at("provenance").is_null()) {
    s.provenance = provenance_from_json(j.at("provenance"), true, source, line_no);
  }
  return s;
}

std::string corpus_to_jsonl(const std::vector<AnnotatedSentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += sentence_to_json_line(s);
    out += '\n';
  }
  return out;
}

std::vector<AnnotatedSentence> sentences_from_jsonl(std::string_view contents,
                                                    const std::string& source) {
  std::vector<AnnotatedSentence> out;
  for_each_line(contents, [&](std::string_view line, std::size_t line_no) {
    out.push_back(sentence_from_json_line(line, source, line_no));
  });
  return out;
}

std::string labelset_to_json(const LabelSet& ls) {
  ordered_json j;
  j["labels"] = ordered_json::array();
  for (const auto& l : ls.labels()) j["labels"].push_back(l.name());
  return j.dump() + "\n";
}

LabelSet labelset_from_json(std::string_view contents, const std::string& source) {
  const json j = parse_json(contents, source, 1);
  const auto names = require<std::vector<std::string>>(j, "labels", source, 1);
  try {
    return LabelSet::from_names(names);
  } catch (const std::invalid_argument& e) {
    throw DataError(source, 1, e.what());
  }
}

Corpus read_corpus(const std::filesystem::path& jsonl, const std::filesystem::path& labels) {
  LabelSet ls = labelset_from_json(read_file(labels), labels.string());
  auto sentences = sentences_from_jsonl(read_file(jsonl), jsonl.string());
  return Corpus{std::move(sentences), std::move(ls)};
}

void write_corpus(const Corpus& c, const std::filesystem::path& jsonl,
                  const std::filesystem::path& labels) {
  atomic_write_file(jsonl, corpus_to_jsonl(c.sentences));
  if (!labels.empty()) atomic_write_file(labels, labelset_to_json(c.labelset));
}

std::string raw_sample_to_json_line(const markup::RawSample& r) {
  ordered_json j;
  j["sample_index"] = r.sample_index;
  j["text"] = r.text;
  j["provenance"] = provenance_to_json(r.provenance, false);
  return j.dump();
}

markup::RawSample raw_sample_from_json_line(std::string_view line, const std::string& source,
                                            std::size_t line_no) {
  const json j = parse_json(line, source, line_no);
  markup::RawSample r;
  r.sample_index = require<std::uint64_t>(j, "sample_index", source, line_no);
  r.text = require<std::string>(j, "text", source, line_no);
  r.provenance = provenance_from_json(require<json>(j, "provenance", source, line_no), false,
                                      source, line_no);
  r.provenance.sample_index = r.sample_index;
  return r;
}

std::vector<markup::RawSample> raw_samples_from_jsonl(std::string_view contents,
                                                      const std::string& source) {
  std::vector<markup::RawSample> out;
  for_each_line(contents, [&](std::string_view line, std::size_t line_no) {
    out.push_back(raw_sample_from_json_line(line, source, line_no));
  });
  return out;
}

std::vector<markup::RawSample> read_raw_samples(const std::filesystem::path& path) {
  return raw_samples_from_jsonl(read_file(path), path.string());
}

std::map<std::string, std::string> alias_map_from_json(std::string_view contents,
                                                       const std::string& source) {
  const json j = parse_json(contents, source, 1);
  if (!j.is_object()) throw DataError(source, 1, "alias map must be a JSON object");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw DataError(source, 1, "alias target for \"" + k + "\" must be a string");
    out[k] = v.get<std::string>();
  }
  return out;
}

}  // namespace synthner::io
