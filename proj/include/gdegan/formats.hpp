#pragma once

// Text formats written and read by the command-line tool. Every output file
// starts with a run manifest of '#' lines; readers skip them.
//
// Pocket file (<stem>.pockets):
//   pockets <count>
//   rank x y z members score        (one line per pocket, centers 3 decimals)
//   residues <count>
//   chain resseq prob pocket        (candidate residues, pocket = rank)
// Probability file (<stem>.probs):  index chain resseq prob
// Variance dump (<stem>.variance):  index chain resseq prob sigma2
// Attention dump (<stem>.layer<k>.attention): per head a line
//   "protein <id> layer <k> head <h>" then n rows of n values; row i is the
//   receiver, column j the sender, zero where (i, j) is not an edge.
// Blank chain identifiers are written as '_'.

#include "gdegan/model.hpp"
#include "gdegan/pocket.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gdegan {

struct RunManifest {
  std::string command;
  std::string config;  // "-" when none
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
};

inline constexpr const char* kVersion = "0.1.0";

std::string manifest_header(const RunManifest& m);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string format_pockets(const std::string& protein, const PocketPrediction& pockets,
                           const ProteinGraph& g, const Eigen::VectorXd& probs);
std::string format_probabilities(const ProteinGraph& g, const Eigen::VectorXd& probs);
std::string format_variance(const ProteinGraph& g, const Eigen::VectorXd& probs, const Eigen::VectorXd& sigma2);
std::string format_attention(const std::string& protein, int layer, const ProteinGraph& g, const Matrix& alpha);

/// Pocket centers in rank order.
std::vector<Vec3> parse_pocket_centers(std::string_view text);

struct VarianceRow {
  ResidueKey key;
  double prob = 0.0;
  double sigma2 = 0.0;
};

std::vector<VarianceRow> parse_variance(std::string_view text);

/// "chain resseq label" lines, label 0 or 1.
std::vector<std::pair<ResidueKey, int>> parse_labels(std::string_view text);

char chain_from_text(std::string_view s);
char chain_to_text(char chain);

}  // namespace gdegan
