#pragma once

// Plain-text key=value configuration shared by every command. Model keys
// mirror ModelConfig field names; run keys cover the pipeline knobs.

#include "gdegan/model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gdegan {

struct RunSettings {
  ModelConfig model;
  std::optional<double> tau;  // unset: take the checkpoint's value
  double bandwidth = 8.0;
  double threshold = 4.0;
  int jobs = 1;
};

/// key=value lines; '#' starts a comment, blank lines are skipped. A line
/// without '=' or with an empty key throws ParseError with its line number.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

/// Applies config-file entries on top of `base`. Unknown keys throw
/// ConfigError.
RunSettings apply_settings(RunSettings base, std::string_view text);

}  // namespace gdegan
