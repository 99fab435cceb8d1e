#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "synthner/corpus.hpp"
#include "synthner/error.hpp"
#include "synthner/markup.hpp"

// File formats. Every reader throws DataError carrying the 1-based line number
// of the offending record; every writer goes through atomic_write_file.
namespace synthner::io {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over path, so a failed
// write never leaves partial output behind.
void atomic_write_file(const std::filesystem::path& path, std::string_view contents);

// Corpus JSONL: {"id","text","spans":[{"start","end","label"}],"provenance":{...}|null}
std::string sentence_to_json_line(const AnnotatedSentence& s);
AnnotatedSentence sentence_from_json_line(std::string_view line, const std::string& source,
                                          std::size_t line_no);
std::string corpus_to_jsonl(const std::vector<AnnotatedSentence>& sentences);
std::vector<AnnotatedSentence> sentences_from_jsonl(std::string_view contents,
                                                    const std::string& source);

// labels.json: {"labels": [...]}
std::string labelset_to_json(const LabelSet& ls);
LabelSet labelset_from_json(std::string_view contents, const std::string& source);

Corpus read_corpus(const std::filesystem::path& jsonl, const std::filesystem::path& labels);
// Writes the JSONL and, when labels is non-empty, the companion labels.json.
void write_corpus(const Corpus& c, const std::filesystem::path& jsonl,
                  const std::filesystem::path& labels = {});

// Raw-sample JSONL: {"sample_index","text","provenance":{"temperature","top_p",
// "max_tokens","seed","backend_id"}}
std::string raw_sample_to_json_line(const markup::RawSample& r);
markup::RawSample raw_sample_from_json_line(std::string_view line, const std::string& source,
                                            std::size_t line_no);
std::vector<markup::RawSample> raw_samples_from_jsonl(std::string_view contents,
                                                      const std::string& source);
std::vector<markup::RawSample> read_raw_samples(const std::filesystem::path& path);

// Alias map: {"Drug": "Medikation"}
std::map<std::string, std::string> alias_map_from_json(std::string_view contents,
                                                       const std::string& source);

}  // namespace synthner::io
