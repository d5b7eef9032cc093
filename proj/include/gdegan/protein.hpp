#pragma once

// Structure ingestion and the residue-level geometric graph.

#include "gdegan/geom.hpp"
#include "gdegan/parallel.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gdegan {

inline constexpr double kBindingDistance = 4.0;  // Å
inline constexpr double kDefaultCutoff = 10.0;   // Å
inline constexpr int kDefaultMaxNeighbors = 32;

struct Atom {
  std::string name;
  std::string element;
  Vec3 pos;
};

struct Residue {
  char chain = ' ';
  int seq = 0;
  std::string name;
  std::vector<Atom> atoms;  // heavy atoms only
  int ca = -1;              // index into atoms

  const Vec3& ca_pos() const { return atoms[ca].pos; }
};

struct Ligand {
  std::string name;
  char chain = ' ';
  int seq = 0;
  std::vector<Vec3> atoms;  // heavy atoms in file order

  std::string id() const;
};

struct Structure {
  std::vector<Residue> residues;  // file order
  std::vector<Ligand> ligands;    // first-appearance order
  int dropped_residues = 0;       // residues without a CA
};

/// Parses the fixed-column ATOM/HETATM subset. Only the first model is read.
Structure parse_structure(std::string_view text);

/// y_i = 1 iff any heavy atom of residue i lies strictly closer than d_bind
/// to any ligand heavy atom.
std::vector<int> label_binding(const Structure& s, double d_bind = kBindingDistance);

struct TrueDirections {
  std::vector<Vec3> dirs;          // zero where undefined
  std::vector<std::uint8_t> defined;
};

/// Unit vector from each CA to its nearest ligand heavy atom (first in file
/// order on ties). A CA within 1e-6 Å of that atom gets an undefined entry.
/// Throws MissingLigand when the structure has no ligand atoms.
TrueDirections true_directions(const Structure& s);

struct ResidueKey {
  char chain = ' ';
  std::int32_t seq = 0;

  auto operator<=>(const ResidueKey&) const = default;
  std::string str() const;
};

/// Per-residue embedding rows, float32, row-major.
struct EmbeddingTable {
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  std::vector<ResidueKey> keys;
  std::vector<float> values;

  std::span<const float> row(std::size_t i) const { return {values.data() + i * d, d}; }
  std::optional<std::size_t> find(const ResidueKey& key) const;
};

/// GDE1 codec. Layout: "GDE1", u32 n, u32 d, n x (u8 chain, i32 seq),
/// n*d f32 row-major; all little-endian.
EmbeddingTable load_embeddings(std::span<const char> bytes);
std::string write_embeddings(const EmbeddingTable& table);

/// Directed residue graph in CSR form, grouped by receiver i. For each i the
/// senders j are sorted by ascending distance (ties by index) and truncated
/// to max_neighbors, so the stored graph may be asymmetric after truncation.
struct ProteinGraph {
  int n = 0;
  double cutoff = kDefaultCutoff;
  int max_neighbors = kDefaultMaxNeighbors;

  std::vector<Vec3> pos;
  Eigen::MatrixXd features;  // n x n_d

  std::vector<int> offsets;  // n + 1
  std::vector<int> receivers;
  std::vector<int> senders;
  std::vector<double> dist;
  std::vector<Vec3> unit;    // (p_i - p_j) / |p_i - p_j|

  std::vector<int> labels;
  std::vector<Vec3> true_dirs;
  std::vector<std::uint8_t> dir_defined;
  std::vector<ResidueKey> keys;

  int num_edges() const { return static_cast<int>(senders.size()); }
  int degree(int i) const { return offsets[i + 1] - offsets[i]; }
  int feature_dim() const { return static_cast<int>(features.cols()); }
};

/// Neighbor lists only; labels zero and directions undefined.
ProteinGraph make_graph(std::vector<Vec3> positions, Eigen::MatrixXd features, double r_c,
                        int max_neighbors, Exec exec = Exec::Parallel);

/// Full graph from a parsed structure and its embeddings. Labels and ground
/// truth directions are attached when the structure carries ligands.
ProteinGraph build_graph(const Structure& s, const EmbeddingTable& e, double r_c = kDefaultCutoff,
                         int max_neighbors = kDefaultMaxNeighbors, Exec exec = Exec::Parallel);

}  // namespace gdegan
