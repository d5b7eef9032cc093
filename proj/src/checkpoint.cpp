#include "gdegan/errors.hpp"
#include "gdegan/model.hpp"

#include <bit>
#include <charconv>
#include <cstdint>

namespace gdegan {

namespace {

constexpr std::string_view kMagic = "GDEGAN-CHECKPOINT 1";

struct ManifestEntry {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

Eigen::Index parse_dim(std::string_view text) {
  long long v = -1;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || v < 0) throw CorruptCheckpoint("bad tensor dimension");
  return static_cast<Eigen::Index>(v);
}

}  // namespace

std::string save_checkpoint(const ModelWeights& w) {
  std::string out(kMagic);
  out += "\n";
  const std::string cfg = format_config(w.cfg);
  std::size_t start = 0;
  while (start < cfg.size()) {
    const std::size_t eol = cfg.find('\n', start);
    out += "config " + cfg.substr(start, eol - start) + "\n";
    start = eol + 1;
  }
  const auto tensors = w.tensors();
  for (const auto& [name, t] : tensors) {
    out += "tensor " + name + " " + std::to_string(t->rows()) + " " + std::to_string(t->cols()) + "\n";
  }
  out += "end\n";
  for (const auto& [name, t] : tensors) {
    // row-major within each tensor
    for (Eigen::Index r = 0; r < t->rows(); ++r) {
      for (Eigen::Index c = 0; c < t->cols(); ++c) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>((*t)(r, c)));
        for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
      }
    }
  }
  return out;
}

ModelWeights load_checkpoint(std::string_view bytes, const ModelConfig* expected) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string_view {
    const std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) throw CorruptCheckpoint("manifest not terminated");
    const auto line = bytes.substr(pos, eol - pos);
    pos = eol + 1;
    return line;
  };

  if (next_line() != kMagic) throw CorruptCheckpoint("not a checkpoint (bad magic line)");

  ModelConfig cfg;
  std::vector<ManifestEntry> manifest;
  for (;;) {
    const auto line = next_line();
    if (line == "end") break;
    if (line.starts_with("config ")) {
      const auto kv = line.substr(7);
      const auto eq = kv.find('=');
      if (eq == std::string_view::npos) throw CorruptCheckpoint("bad config line");
      try {
        cfg = apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      } catch (const ConfigError& e) {
        throw CorruptCheckpoint(e.what());
      }
    } else if (line.starts_with("tensor ")) {
      const auto rest = line.substr(7);
      const auto s1 = rest.find(' ');
      const auto s2 = rest.find(' ', s1 == std::string_view::npos ? s1 : s1 + 1);
      if (s1 == std::string_view::npos || s2 == std::string_view::npos) {
        throw CorruptCheckpoint("bad tensor line");
      }
      manifest.push_back({std::string(rest.substr(0, s1)), parse_dim(rest.substr(s1 + 1, s2 - s1 - 1)),
                          parse_dim(rest.substr(s2 + 1))});
    } else {
      throw CorruptCheckpoint("unexpected manifest line '" + std::string(line) + "'");
    }
  }

  ModelWeights w;
  try {
    w = ModelWeights(cfg);
  } catch (const ConfigError& e) {
    throw CorruptCheckpoint(std::string("invalid config: ") + e.what());
  }
  auto tensors = w.tensors();
  if (tensors.size() != manifest.size()) {
    throw CorruptCheckpoint("manifest lists " + std::to_string(manifest.size()) + " tensors, config implies " +
                            std::to_string(tensors.size()));
  }
  std::size_t total = 0;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const auto& [name, t] = tensors[k];
    const auto& m = manifest[k];
    if (m.name != name) throw CorruptCheckpoint("unexpected tensor '" + m.name + "', wanted '" + name + "'");
    if (m.rows != t->rows() || m.cols != t->cols()) {
      throw CorruptCheckpoint("tensor '" + name + "' shape disagrees with config");
    }
    total += static_cast<std::size_t>(t->size());
  }
  if (bytes.size() - pos != total * 4) {
    throw CorruptCheckpoint("blob holds " + std::to_string(bytes.size() - pos) + " bytes, manifest needs " +
                            std::to_string(total * 4));
  }

  if (expected) {
    ModelWeights want(*expected);
    const auto want_tensors = want.tensors();
    bool same = want_tensors.size() == tensors.size();
    for (std::size_t k = 0; same && k < tensors.size(); ++k) {
      same = want_tensors[k].first == tensors[k].first &&
             want_tensors[k].second->rows() == tensors[k].second->rows() &&
             want_tensors[k].second->cols() == tensors[k].second->cols();
    }
    if (!same) throw ShapeError("checkpoint tensor shapes do not match the requested config");
  }

  const char* p = bytes.data() + pos;
  for (auto& [name, t] : tensors) {
    for (Eigen::Index r = 0; r < t->rows(); ++r) {
      for (Eigen::Index c = 0; c < t->cols(); ++c) {
        std::uint32_t bits = 0;
        for (int b = 3; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(p[b]);
        (*t)(r, c) = std::bit_cast<float>(bits);
        p += 4;
      }
    }
  }
  return w;
}

}  // namespace gdegan
