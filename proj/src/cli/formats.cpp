#include "gdegan/formats.hpp"

#include "gdegan/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gdegan {

namespace {

struct Line {
  int number;
  std::vector<std::string_view> fields;
};

// Non-comment, non-blank lines split on whitespace.
std::vector<Line> data_lines(std::string_view text) {
  std::vector<Line> out;
  int number = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++number;
    if (!line.empty() && line.front() == '#') continue;
    Line l{number, {}};
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t\r", pos);
      if (start == std::string_view::npos) break;
      const auto end = line.find_first_of(" \t\r", start);
      l.fields.push_back(line.substr(start, end == std::string_view::npos ? end : end - start));
      pos = end == std::string_view::npos ? line.size() : end;
    }
    if (!l.fields.empty()) out.push_back(std::move(l));
  }
  return out;
}

template <class T>
T field(const Line& l, std::size_t k) {
  if (k >= l.fields.size()) throw ParseError("missing field " + std::to_string(k + 1), l.number);
  T value{};
  const auto s = l.fields[k];
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("bad number '" + std::string(s) + "'", l.number);
  }
  return value;
}

void expect_fields(const Line& l, std::size_t n) {
  if (l.fields.size() != n) {
    throw ParseError("expected " + std::to_string(n) + " fields, got " + std::to_string(l.fields.size()), l.number);
  }
}

ResidueKey key_field(const Line& l, std::size_t k) {
  if (k >= l.fields.size() || l.fields[k].size() != 1) throw ParseError("bad chain identifier", l.number);
  return {chain_from_text(l.fields[k]), field<std::int32_t>(l, k + 1)};
}

std::string printf_line(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

}  // namespace

char chain_from_text(std::string_view s) { return s == "_" ? ' ' : s.front(); }
char chain_to_text(char chain) { return chain == ' ' ? '_' : chain; }

std::string manifest_header(const RunManifest& m) {
  std::string out = "# gdegan " + std::string(kVersion) + "\n";
  out += "# command: " + m.command + "\n";
  out += "# config: " + (m.config.empty() ? std::string("-") : m.config) + "\n";
  out += "# inputs:";
  for (const auto& in : m.inputs) out += " " + in;
  out += "\n# seed: " + std::to_string(m.seed) + "\n";
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string format_pockets(const std::string& protein, const PocketPrediction& pred, const ProteinGraph& g,
                           const Eigen::VectorXd& probs) {
  std::string out = "# protein: " + protein + "\n";
  out += "pockets " + std::to_string(pred.pockets.size()) + "\n";
  std::vector<int> rank_of(g.n, 0);
  for (std::size_t r = 0; r < pred.pockets.size(); ++r) {
    const auto& p = pred.pockets[r];
    out += printf_line("%zu %.3f %.3f %.3f %zu %.4f\n", r + 1, p.center.x(), p.center.y(), p.center.z(),
                       p.members.size(), p.score);
    for (int m : p.members) rank_of[m] = static_cast<int>(r + 1);
  }
  int assigned = 0;
  for (int i = 0; i < g.n; ++i) assigned += rank_of[i] > 0;
  out += "residues " + std::to_string(assigned) + "\n";
  for (int i = 0; i < g.n; ++i) {
    if (rank_of[i] == 0) continue;
    out += printf_line("%c %d %.6f %d\n", chain_to_text(g.keys[i].chain), g.keys[i].seq, probs[i], rank_of[i]);
  }
  return out;
}

std::string format_probabilities(const ProteinGraph& g, const Eigen::VectorXd& probs) {
  std::string out = "index chain resseq prob\n";
  for (int i = 0; i < g.n; ++i) {
    out += printf_line("%d %c %d %.6f\n", i, chain_to_text(g.keys[i].chain), g.keys[i].seq, probs[i]);
  }
  return out;
}

std::string format_variance(const ProteinGraph& g, const Eigen::VectorXd& probs, const Eigen::VectorXd& sigma2) {
  std::string out = "index chain resseq prob sigma2\n";
  for (int i = 0; i < g.n; ++i) {
    out += printf_line("%d %c %d %.6f %.9g\n", i, chain_to_text(g.keys[i].chain), g.keys[i].seq, probs[i],
                       sigma2[i]);
  }
  return out;
}

std::string format_attention(const std::string& protein, int layer, const ProteinGraph& g, const Matrix& alpha) {
  std::string out;
  Matrix dense(g.n, g.n);
  for (int h = 0; h < alpha.cols(); ++h) {
    dense.setZero();
    for (int i = 0; i < g.n; ++i)
      for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e) dense(i, g.senders[e]) = alpha(e, h);
    out += "protein " + protein + " layer " + std::to_string(layer) + " head " + std::to_string(h) + "\n";
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < g.n; ++j) {
        if (j > 0) out += ' ';
        out += printf_line("%.6f", dense(i, j));
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<Vec3> parse_pocket_centers(std::string_view text) {
  const auto lines = data_lines(text);
  if (lines.empty() || lines[0].fields[0] != "pockets") throw ParseError("expected 'pockets <count>'", 1);
  expect_fields(lines[0], 2);
  const int count = field<int>(lines[0], 1);
  if (count < 0 || static_cast<std::size_t>(count) + 1 > lines.size()) {
    throw ParseError("pocket count exceeds file", lines[0].number);
  }
  std::vector<Vec3> centers;
  for (int r = 1; r <= count; ++r) {
    const Line& l = lines[r];
    expect_fields(l, 6);
    if (field<int>(l, 0) != r) throw ParseError("pockets must be listed in rank order", l.number);
    centers.emplace_back(field<double>(l, 1), field<double>(l, 2), field<double>(l, 3));
  }
  return centers;
}

std::vector<VarianceRow> parse_variance(std::string_view text) {
  std::vector<VarianceRow> rows;
  for (const auto& l : data_lines(text)) {
    if (l.fields[0] == "index") continue;
    expect_fields(l, 5);
    rows.push_back({key_field(l, 1), field<double>(l, 3), field<double>(l, 4)});
  }
  return rows;
}

std::vector<std::pair<ResidueKey, int>> parse_labels(std::string_view text) {
  std::vector<std::pair<ResidueKey, int>> out;
  for (const auto& l : data_lines(text)) {
    if (l.fields[0] == "chain") continue;
    expect_fields(l, 3);
    const int y = field<int>(l, 2);
    if (y != 0 && y != 1) throw ParseError("label must be 0 or 1", l.number);
    out.emplace_back(key_field(l, 0), y);
  }
  return out;
}

}  // namespace gdegan
