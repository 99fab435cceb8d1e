#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "synthner/corpus.hpp"

namespace synthner {

struct Prompt {
  std::string text;
  std::size_t example_count = 0;
};

inline constexpr std::string_view kPromptLineSeparator = "\n";

// One encoded sentence per line, then an open "<s>" for the model to continue.
// No newline follows the trailing "<s>". Throws on an empty example list or an
// unencodable example.
Prompt build_prompt(std::span<const AnnotatedSentence> examples);

// Same layout over already-encoded lines, taken verbatim. This is how a
// hand-written prompt containing malformed lines is reproduced exactly.
Prompt assemble_prompt(std::span<const std::string> encoded_lines);

}  // namespace synthner
