#pragma once

// DCC / DCA success metrics, failure rate, and the statistics relating the
// learned neighborhood variance to binding labels.

#include "gdegan/geom.hpp"
#include "gdegan/protein.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gdegan {

inline constexpr double kSuccessThreshold = 4.0;  // Å

/// Distance from `center` to the unweighted heavy-atom centroid.
double dcc(const Vec3& center, std::span<const Vec3> ligand);
/// Distance from `center` to the closest ligand atom.
double dca(const Vec3& center, std::span<const Vec3> ligand);

struct LigandOutcome {
  std::string protein;
  std::string ligand;
  int rank = 0;  // 1-based pocket rank, 0 when no pocket was matched
  double dcc = 0.0;
  double dca = 0.0;
  bool dcc_hit = false;
  bool dca_hit = false;
};

/// One pocket-to-ligand pairing; indices into the ranked pocket list and
/// the ligand list.
struct Match {
  int pocket;
  int ligand;
};

/// Greedy matching of the top-m ranked pockets to m ligands: repeatedly take
/// the globally smallest DCC among unmatched pairs (ties: lower pocket rank,
/// then lower ligand index).
std::vector<Match> greedy_match(const std::vector<std::vector<double>>& dcc_matrix);

/// Per-ligand outcomes for one complex. `centers` are in rank order.
std::vector<LigandOutcome> evaluate_complex(const std::string& protein, const std::vector<Vec3>& centers,
                                            const std::vector<Ligand>& ligands,
                                            double threshold = kSuccessThreshold);

struct SuccessRates {
  double dcc_rate = 0.0;
  double dca_rate = 0.0;
  std::size_t ligands = 0;
};

/// Ligand-count denominator pooled over all complexes.
SuccessRates success_rates(const std::vector<LigandOutcome>& outcomes);

/// Fraction of proteins with zero predicted pockets.
double failure_rate(std::span<const std::size_t> pocket_counts);

struct GroupSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
};

struct VarianceStats {
  double pearson = 0.0;
  double spearman = 0.0;
  double point_biserial = 0.0;
  double mann_whitney_u = 0.0;  // for the binding group
  double mann_whitney_z = 0.0;  // tie-corrected normal approximation
  std::optional<double> t_statistic;  // pooled-variance two-sample t
  std::optional<double> cohens_d;
  GroupSummary binding;
  GroupSummary non_binding;
};

/// Throws DegenerateGroup when either label group is empty (correlations
/// undefined). t and d are left empty when a group has fewer than two
/// members or the pooled SD is zero.
VarianceStats variance_label_stats(std::span<const double> sigma2, std::span<const int> labels);

double pearson(std::span<const double> x, std::span<const double> y);
/// Average ranks (1-based), ties share the mean rank.
std::vector<double> average_ranks(std::span<const double> x);

}  // namespace gdegan
