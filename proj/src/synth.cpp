#include "gdegan/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace gdegan {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
  for (;;) {
    const Vec3 v(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    const double n = v.norm();
    if (n > 1e-6) return v / n;
  }
}

}  // namespace

std::vector<Vec3> random_chain(int n, std::mt19937_64& rng) {
  constexpr double kStep = 3.8;
  constexpr double kMinSeparation = 3.0;
  std::vector<Vec3> pts;
  pts.reserve(n);
  Vec3 dir = random_unit(rng);
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      pts.push_back(Vec3::Zero());
      continue;
    }
    Vec3 candidate;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const Vec3 d = (dir + 0.9 * random_unit(rng)).normalized();
      candidate = pts.back() + kStep * d;
      bool clash = false;
      for (const auto& p : pts) clash = clash || (p - candidate).norm() < kMinSeparation;
      if (!clash) {
        dir = d;
        break;
      }
    }
    pts.push_back(candidate);
  }
  return pts;
}

ProteinGraph random_graph(int n, int n_d, std::uint64_t seed, double r_c, int max_neighbors) {
  std::mt19937_64 rng(seed);
  auto pos = random_chain(n, rng);
  Eigen::MatrixXd features(n, n_d);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < n_d; ++c) features(i, c) = standard_normal(rng);
  return make_graph(std::move(pos), std::move(features), r_c, max_neighbors);
}

EmbeddingTable fake_embeddings(const Structure& s, int d, std::uint64_t seed) {
  EmbeddingTable t;
  t.n = static_cast<std::uint32_t>(s.residues.size());
  t.d = static_cast<std::uint32_t>(d);
  t.values.reserve(std::size_t{t.n} * t.d);
  for (std::size_t i = 0; i < s.residues.size(); ++i) {
    t.keys.push_back({s.residues[i].chain, s.residues[i].seq});
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + i);
    for (int c = 0; c < d; ++c) t.values.push_back(static_cast<float>(standard_normal(rng)));
  }
  return t;
}

std::string write_pdb(const Structure& s) {
  std::string out;
  char buf[96];
  int serial = 1;
  auto emit = [&](const char* record, const std::string& name, const std::string& resname, char chain,
                  int seq, const Vec3& p, const std::string& element) {
    const std::string padded = name.size() < 4 ? " " + name : name;
    std::snprintf(buf, sizeof buf, "%-6s%5d %-4s %3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2s\n",
                  record, serial++, padded.c_str(), resname.c_str(), chain, seq, p.x(), p.y(), p.z(), 1.0,
                  0.0, element.c_str());
    out += buf;
  };
  for (const auto& r : s.residues)
    for (const auto& a : r.atoms) emit("ATOM", a.name, r.name, r.chain, r.seq, a.pos, a.element);
  for (const auto& lig : s.ligands) {
    int k = 1;
    for (const auto& p : lig.atoms) emit("HETATM", "C" + std::to_string(k++), lig.name, lig.chain, lig.seq, p, "C");
  }
  out += "END\n";
  return out;
}

Structure toy_complex(std::uint64_t seed) {
  static const char* kNames[] = {"ALA", "GLY", "SER", "LEU", "ASP", "LYS", "PHE", "THR", "VAL", "GLU"};
  std::mt19937_64 rng(seed);
  const auto ca = random_chain(10, rng);

  Structure raw;
  for (int i = 0; i < 10; ++i) {
    Residue r;
    r.chain = 'A';
    r.seq = i + 1;
    r.name = kNames[i];
    r.atoms.push_back({"CA", "C", ca[i]});
    r.atoms.push_back({"CB", "C", ca[i] + 1.53 * random_unit(rng)});
    r.ca = 0;
    raw.residues.push_back(std::move(r));
  }

  // ligand pressed against residues 4-6
  const Vec3 mid = (ca[3] + ca[4] + ca[5]) / 3.0;
  const Vec3 center = mid + 2.5 * random_unit(rng);
  Ligand lig{"LIG", 'A', 901, {}};
  for (int k = 0; k < 4; ++k) lig.atoms.push_back(center + 1.2 * random_unit(rng));
  raw.ligands.push_back(std::move(lig));

  return parse_structure(write_pdb(raw));
}

ModelConfig toy_config() {
  ModelConfig c;
  c.n_d = 8;
  c.h_d = 8;
  c.e_d = 8;
  c.K = 8;
  c.H = 2;
  c.L = 1;
  c.L_max = 2;
  return c;
}

}  // namespace gdegan
