#include "synthner/prompt.hpp"

#include <stdexcept>
#include <vector>

#include "synthner/markup.hpp"

namespace synthner {

Prompt build_prompt(std::span<const AnnotatedSentence> examples) {
  if (examples.empty()) throw std::invalid_argument("prompt needs at least one example");
  std::vector<std::string> lines;
  lines.reserve(examples.size());
  for (const auto& e : examples) lines.push_back(markup::encode_sentence(e));
  return assemble_prompt(lines);
}

Prompt assemble_prompt(std::span<const std::string> encoded_lines) {
  if (encoded_lines.empty()) throw std::invalid_argument("prompt needs at least one example");
  Prompt p;
  for (const auto& line : encoded_lines) {
    if (line.find('\n') != std::string::npos) {
      throw std::invalid_argument("encoded example spans multiple lines");
    }
    p.text += line;
    p.text += kPromptLineSeparator;
  }
  p.text += markup::kSentenceOpen;
  p.example_count = encoded_lines.size();
  return p;
}

}  // namespace synthner
