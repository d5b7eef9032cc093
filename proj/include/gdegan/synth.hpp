#pragma once

// Deterministic synthetic inputs: protein-like CA chains, model-free
// embedding files and the micro complex used by the toy trainer.

#include "gdegan/model.hpp"
#include "gdegan/protein.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gdegan {

/// Uniform [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng);
/// Box-Muller on uniform01.
double standard_normal(std::mt19937_64& rng);

/// Self-avoiding-ish random walk with 3.8 Å steps (CA-CA spacing).
std::vector<Vec3> random_chain(int n, std::mt19937_64& rng);

/// Random chain with N(0,1) features.
ProteinGraph random_graph(int n, int n_d, std::uint64_t seed, double r_c = kDefaultCutoff,
                          int max_neighbors = kDefaultMaxNeighbors);

/// Pseudo-random embeddings, one row per residue in structure order. Rows
/// depend only on (seed, row index), never on a language model.
EmbeddingTable fake_embeddings(const Structure& s, int d, std::uint64_t seed);

/// Fixed-column PDB text for a structure (ATOM records, then HETATM).
std::string write_pdb(const Structure& s);

/// The 10-residue complex with a 4-atom ligand used by the trainer tests.
Structure toy_complex(std::uint64_t seed = 7);

/// Micro configuration matching toy_complex: h_d 8, L 1, H 2.
ModelConfig toy_config();

}  // namespace gdegan
