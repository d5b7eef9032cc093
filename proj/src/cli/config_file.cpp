#include "gdegan/config_file.hpp"

#include "gdegan/errors.hpp"

#include <charconv>

namespace gdegan {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T number(std::string_view key, std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError("bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no);
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    out.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

RunSettings apply_settings(RunSettings s, std::string_view text) {
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "tau") s.tau = number<double>(key, value);
    else if (key == "bandwidth") s.bandwidth = number<double>(key, value);
    else if (key == "threshold") s.threshold = number<double>(key, value);
    else if (key == "jobs") s.jobs = number<int>(key, value);
    else s.model = apply_config_entry(s.model, key, value);
  }
  if (s.tau) s.model.tau = *s.tau;
  return s;
}

}  // namespace gdegan
