#include "synthner/config.hpp"

#include <charconv>
#include <cstdint>
#include <variant>

#include "synthner/error.hpp"
#include "synthner/io.hpp"

namespace synthner::config {
namespace {

using Value = std::variant<std::string, std::int64_t, double, bool>;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment, ignoring '#' inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

Value parse_value(std::string_view raw, const std::string& source, std::size_t line_no) {
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 2 < raw.size()) {
        const char next = raw[++i];
        out.push_back(next == 'n' ? '\n' : next == 't' ? '\t' : next);
      } else {
        out.push_back(raw[i]);
      }
    }
    return out;
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  std::string digits;
  for (char c : raw) {
    if (c != '_') digits.push_back(c);
  }
  if (digits.find_first_of(".eE") == std::string::npos) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec == std::errc() && p == digits.data() + digits.size()) return v;
  }
  try {
    std::size_t used = 0;
    const double d = std::stod(digits, &used);
    if (used == digits.size()) return d;
  } catch (const std::exception&) {
  }
  throw DataError(source, line_no, "cannot parse value: " + std::string(raw));
}

struct Reader {
  const std::string& source;
  std::size_t line_no;

  std::string string(const Value& v, std::string_view key) const {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw DataError(source, line_no, std::string(key) + " must be a string");
  }
  std::int64_t integer(const Value& v, std::string_view key) const {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw DataError(source, line_no, std::string(key) + " must be an integer");
  }
  std::int64_t positive(const Value& v, std::string_view key) const {
    const auto i = integer(v, key);
    if (i <= 0) throw DataError(source, line_no, std::string(key) + " must be positive");
    return i;
  }
  double real(const Value& v, std::string_view key) const {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw DataError(source, line_no, std::string(key) + " must be a number");
  }
};

}  // namespace

CampaignConfig parse_campaign_config(std::string_view text, const std::string& source,
                                     const std::filesystem::path& base_dir) {
  CampaignConfig cfg;
  bool in_stage = false;
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    const std::string_view line = trim(strip_comment(text.substr(pos, nl - pos)));
    pos = nl + 1;
    if (line.empty()) continue;

    if (line == "[[stage]]") {
      cfg.stages.emplace_back();
      in_stage = true;
      continue;
    }
    if (line.front() == '[') {
      throw DataError(source, line_no, "unsupported table " + std::string(line));
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError(source, line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const Value value = parse_value(trim(line.substr(eq + 1)), source, line_no);
    const Reader r{source, line_no};

    if (in_stage) {
      auto& st = cfg.stages.back();
      if (key == "samples") st.n_samples = static_cast<std::size_t>(r.positive(value, key));
      else if (key == "temperature") st.params.temperature = r.real(value, key);
      else if (key == "top_p") st.params.top_p = r.real(value, key);
      else if (key == "max_tokens") st.params.max_tokens = static_cast<std::uint32_t>(r.positive(value, key));
      else if (key == "seed") st.params.seed = static_cast<std::uint64_t>(r.integer(value, key));
      else throw DataError(source, line_no, "unknown stage key " + key);
      continue;
    }
    if (key == "backend") cfg.backend = r.string(value, key);
    else if (key == "backend_id") cfg.backend_id = r.string(value, key);
    else if (key == "url") cfg.url = r.string(value, key);
    else if (key == "model") cfg.model = r.string(value, key);
    else if (key == "prompt") cfg.prompt = resolve(r.string(value, key));
    else if (key == "examples") cfg.examples = resolve(r.string(value, key));
    else if (key == "output") cfg.output = resolve(r.string(value, key));
    else if (key == "mock_profile") cfg.mock_profile = resolve(r.string(value, key));
    else if (key == "concurrency") cfg.concurrency = static_cast<std::size_t>(r.positive(value, key));
    else if (key == "timeout_seconds") cfg.timeout_seconds = static_cast<long>(r.positive(value, key));
    else if (key == "retry_base_ms") cfg.retry_base_ms = static_cast<long>(r.integer(value, key));
    else throw DataError(source, line_no, "unknown key " + key);
  }

  if (cfg.backend != "mock" && cfg.backend != "http") {
    throw DataError(source, 0, "backend must be \"mock\" or \"http\"");
  }
  if (cfg.backend == "http" && cfg.url.empty()) throw DataError(source, 0, "http backend needs url");
  if (cfg.prompt.empty() == cfg.examples.empty()) {
    throw DataError(source, 0, "set exactly one of prompt or examples");
  }
  if (cfg.stages.empty()) throw DataError(source, 0, "no [[stage]] tables");
  for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
    try {
      if (cfg.stages[i].n_samples == 0) throw std::invalid_argument("samples missing");
      cfg.stages[i].params.validate();
    } catch (const std::invalid_argument& e) {
      throw DataError(source, 0, "stage " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (cfg.backend_id.empty()) cfg.backend_id = cfg.backend == "mock" ? "mock" : cfg.model;
  if (cfg.backend_id.empty()) cfg.backend_id = "http";
  return cfg;
}

CampaignConfig load_campaign_config(const std::filesystem::path& path) {
  return parse_campaign_config(io::read_file(path), path.string(), path.parent_path());
}

}  // namespace synthner::config
