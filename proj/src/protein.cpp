#include "gdegan/protein.hpp"

#include "gdegan/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <map>
#include <tuple>

namespace gdegan {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view field(std::string_view line, std::size_t col1, std::size_t width) {
  const std::size_t start = col1 - 1;
  if (start >= line.size()) return {};
  return line.substr(start, width);
}

double parse_coord(std::string_view line, std::size_t col1, int line_no) {
  const auto text = trim(field(line, col1, 8));
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ParseError("malformed coordinate field '" + std::string(text) + "'", line_no);
  }
  return value;
}

int parse_seq(std::string_view line, int line_no) {
  const auto text = trim(field(line, 23, 4));
  int value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError("malformed residue sequence number '" + std::string(text) + "'", line_no);
  }
  return value;
}

std::string element_of(std::string_view line, std::string_view atom_name) {
  std::string el(trim(field(line, 77, 2)));
  if (el.empty()) {
    for (char c : atom_name) {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        el = std::string(1, c);
        break;
      }
    }
  }
  for (auto& c : el) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return el;
}

bool is_hydrogen(const std::string& element) { return element == "H" || element == "D"; }

}  // namespace

std::string Ligand::id() const {
  return name + ":" + std::string(1, chain == ' ' ? '_' : chain) + ":" + std::to_string(seq);
}

std::string ResidueKey::str() const {
  return std::string(1, chain == ' ' ? '_' : chain) + ":" + std::to_string(seq);
}

Structure parse_structure(std::string_view text) {
  Structure s;
  std::vector<Residue> residues;
  std::map<std::tuple<std::string, char, int>, std::size_t> ligand_index;
  std::string current_icode;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto record = trim(field(line, 1, 6));
    if (record == "ENDMDL") break;
    const bool atom = record == "ATOM";
    const bool hetatm = record == "HETATM";
    if (!atom && !hetatm) continue;
    if (line.size() < 54) throw ParseError("coordinate record shorter than 54 columns", line_no);

    const std::string name(trim(field(line, 13, 4)));
    const std::string resname(trim(field(line, 18, 3)));
    const std::string_view chain_field = field(line, 22, 1);
    const char chain = chain_field.empty() ? ' ' : chain_field[0];
    const int seq = parse_seq(line, line_no);
    const std::string icode(field(line, 27, 1));
    const Vec3 p(parse_coord(line, 31, line_no), parse_coord(line, 39, line_no),
                 parse_coord(line, 47, line_no));
    const std::string element = element_of(line, name);
    if (is_hydrogen(element)) continue;

    if (hetatm) {
      if (resname == "HOH") continue;
      const auto key = std::make_tuple(resname, chain, seq);
      auto it = ligand_index.find(key);
      if (it == ligand_index.end()) {
        it = ligand_index.emplace(key, s.ligands.size()).first;
        s.ligands.push_back({resname, chain, seq, {}});
      }
      s.ligands[it->second].atoms.push_back(p);
      continue;
    }

    if (residues.empty() || residues.back().chain != chain || residues.back().seq != seq ||
        residues.back().name != resname || current_icode != icode) {
      residues.push_back({chain, seq, resname, {}, -1});
      current_icode = icode;
    }
    Residue& res = residues.back();
    // alternate locations: the first occurrence of an atom name wins
    const bool seen = std::any_of(res.atoms.begin(), res.atoms.end(),
                                  [&](const Atom& a) { return a.name == name; });
    if (seen) continue;
    if (name == "CA" && element == "C") res.ca = static_cast<int>(res.atoms.size());
    res.atoms.push_back({name, element, p});
  }

  for (auto& r : residues) {
    if (r.ca < 0) {
      ++s.dropped_residues;
      continue;
    }
    s.residues.push_back(std::move(r));
  }
  if (s.residues.empty()) throw EmptyStructure("no residues with a CA atom");
  return s;
}

std::vector<int> label_binding(const Structure& s, double d_bind) {
  const double cut2 = d_bind * d_bind;
  std::vector<int> labels(s.residues.size(), 0);
  for (std::size_t i = 0; i < s.residues.size(); ++i) {
    for (const auto& a : s.residues[i].atoms) {
      for (const auto& lig : s.ligands) {
        for (const auto& b : lig.atoms) {
          if ((a.pos - b).squaredNorm() < cut2) {
            labels[i] = 1;
            goto next_residue;
          }
        }
      }
    }
  next_residue:;
  }
  return labels;
}

TrueDirections true_directions(const Structure& s) {
  const bool any = std::any_of(s.ligands.begin(), s.ligands.end(),
                               [](const Ligand& l) { return !l.atoms.empty(); });
  if (!any) throw MissingLigand("structure has no ligand atoms");

  TrueDirections out;
  out.dirs.assign(s.residues.size(), Vec3::Zero());
  out.defined.assign(s.residues.size(), 0);
  for (std::size_t i = 0; i < s.residues.size(); ++i) {
    const Vec3& ca = s.residues[i].ca_pos();
    double best = std::numeric_limits<double>::infinity();
    Vec3 nearest = Vec3::Zero();
    for (const auto& lig : s.ligands) {
      for (const auto& b : lig.atoms) {
        const double d2 = (b - ca).squaredNorm();
        if (d2 < best) {
          best = d2;
          nearest = b;
        }
      }
    }
    const Vec3 diff = nearest - ca;
    const double d = diff.norm();
    if (d > 1e-6) {
      out.dirs[i] = diff / d;
      out.defined[i] = 1;
    }
  }
  return out;
}

ProteinGraph make_graph(std::vector<Vec3> positions, Eigen::MatrixXd features, double r_c,
                        int max_neighbors, Exec exec) {
  const int n = static_cast<int>(positions.size());
  if (features.rows() != n) throw ShapeError("feature rows do not match residue count");
  if (!(r_c > 0.0)) throw ConfigError("cutoff must be positive");
  if (max_neighbors < 1) throw ConfigError("max_neighbors must be >= 1");

  struct Neighbor {
    double d;
    int j;
  };
  std::vector<std::vector<Neighbor>> lists(n);
  for_each_index(n, exec, [&](int i) {
    auto& list = lists[i];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      // lower index first so d_ij and d_ji are bitwise identical
      const Vec3 diff = i < j ? Vec3(positions[i] - positions[j]) : Vec3(positions[j] - positions[i]);
      const double d = std::sqrt(diff.squaredNorm());
      // coincident CAs carry no direction and are not connected
      if (d < r_c && d > 1e-9) list.push_back({d, j});
    }
    std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.d < b.d || (a.d == b.d && a.j < b.j);
    });
    if (static_cast<int>(list.size()) > max_neighbors) list.resize(max_neighbors);
  });

  ProteinGraph g;
  g.n = n;
  g.cutoff = r_c;
  g.max_neighbors = max_neighbors;
  g.offsets.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + static_cast<int>(lists[i].size());
  const int ne = g.offsets[n];
  g.receivers.resize(ne);
  g.senders.resize(ne);
  g.dist.resize(ne);
  g.unit.resize(ne);
  for (int i = 0; i < n; ++i) {
    int e = g.offsets[i];
    for (const auto& nb : lists[i]) {
      g.receivers[e] = i;
      g.senders[e] = nb.j;
      g.dist[e] = nb.d;
      const int a = std::min(i, nb.j), b = std::max(i, nb.j);
      const Vec3 u = (positions[a] - positions[b]) / nb.d;
      g.unit[e] = i < nb.j ? u : Vec3(-u);
      ++e;
    }
  }
  g.pos = std::move(positions);
  g.features = std::move(features);
  g.labels.assign(n, 0);
  g.true_dirs.assign(n, Vec3::Zero());
  g.dir_defined.assign(n, 0);
  return g;
}

ProteinGraph build_graph(const Structure& s, const EmbeddingTable& e, double r_c, int max_neighbors,
                         Exec exec) {
  if (e.d == 0) throw EmptyEmbedding("embedding width is zero");
  const int n = static_cast<int>(s.residues.size());
  std::vector<Vec3> positions(n);
  std::vector<ResidueKey> keys(n);
  Eigen::MatrixXd features(n, e.d);
  std::vector<std::string> missing;
  for (int i = 0; i < n; ++i) {
    const auto& r = s.residues[i];
    positions[i] = r.ca_pos();
    keys[i] = {r.chain, r.seq};
    const auto row = e.find(keys[i]);
    if (!row) {
      missing.push_back(keys[i].str());
      continue;
    }
    const auto values = e.row(*row);
    for (std::uint32_t c = 0; c < e.d; ++c) features(i, c) = values[c];
  }
  if (!missing.empty()) throw KeyMismatch(std::move(missing));

  ProteinGraph g = make_graph(std::move(positions), std::move(features), r_c, max_neighbors, exec);
  g.keys = std::move(keys);
  g.labels = label_binding(s);
  const bool has_ligand = std::any_of(s.ligands.begin(), s.ligands.end(),
                                      [](const Ligand& l) { return !l.atoms.empty(); });
  if (has_ligand) {
    auto dirs = true_directions(s);
    g.true_dirs = std::move(dirs.dirs);
    g.dir_defined = std::move(dirs.defined);
  }
  return g;
}

}  // namespace gdegan
