#include "gdegan/eval.hpp"

#include "gdegan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gdegan {

double dcc(const Vec3& center, std::span<const Vec3> ligand) {
  if (ligand.empty()) throw EmptyLigand("ligand has no atoms");
  Vec3 centroid = Vec3::Zero();
  for (const auto& a : ligand) centroid += a;
  centroid /= static_cast<double>(ligand.size());
  return (center - centroid).norm();
}

double dca(const Vec3& center, std::span<const Vec3> ligand) {
  if (ligand.empty()) throw EmptyLigand("ligand has no atoms");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : ligand) best = std::min(best, (center - a).norm());
  return best;
}

std::vector<Match> greedy_match(const std::vector<std::vector<double>>& d) {
  const int pockets = static_cast<int>(d.size());
  const int ligands = pockets == 0 ? 0 : static_cast<int>(d.front().size());
  std::vector<bool> pocket_used(pockets, false), ligand_used(ligands, false);
  std::vector<Match> out;
  const int rounds = std::min(pockets, ligands);
  for (int r = 0; r < rounds; ++r) {
    Match best{-1, -1};
    double best_d = std::numeric_limits<double>::infinity();
    for (int p = 0; p < pockets; ++p) {
      if (pocket_used[p]) continue;
      for (int l = 0; l < ligands; ++l) {
        if (ligand_used[l]) continue;
        if (best.pocket < 0 || d[p][l] < best_d) {
          best = {p, l};
          best_d = d[p][l];
        }
      }
    }
    pocket_used[best.pocket] = true;
    ligand_used[best.ligand] = true;
    out.push_back(best);
  }
  return out;
}

std::vector<LigandOutcome> evaluate_complex(const std::string& protein, const std::vector<Vec3>& centers,
                                            const std::vector<Ligand>& ligands, double threshold) {
  if (!(threshold > 0.0)) throw DomainError("success threshold must be positive");
  const std::size_t m = ligands.size();
  const std::size_t top = std::min(m, centers.size());

  std::vector<std::vector<double>> dist(top, std::vector<double>(m));
  for (std::size_t p = 0; p < top; ++p)
    for (std::size_t l = 0; l < m; ++l) dist[p][l] = dcc(centers[p], ligands[l].atoms);

  std::vector<LigandOutcome> out(m);
  for (std::size_t l = 0; l < m; ++l) {
    out[l].protein = protein;
    out[l].ligand = ligands[l].id();
    out[l].dcc = std::numeric_limits<double>::infinity();
    out[l].dca = std::numeric_limits<double>::infinity();
  }
  for (const auto& match : greedy_match(dist)) {
    auto& o = out[match.ligand];
    o.rank = match.pocket + 1;
    o.dcc = dist[match.pocket][match.ligand];
    o.dca = dca(centers[match.pocket], ligands[match.ligand].atoms);
    o.dcc_hit = o.dcc < threshold;
    o.dca_hit = o.dca < threshold;
  }
  return out;
}

SuccessRates success_rates(const std::vector<LigandOutcome>& outcomes) {
  SuccessRates r;
  r.ligands = outcomes.size();
  if (outcomes.empty()) return r;
  std::size_t dcc_hits = 0, dca_hits = 0;
  for (const auto& o : outcomes) {
    dcc_hits += o.dcc_hit;
    dca_hits += o.dca_hit;
  }
  r.dcc_rate = static_cast<double>(dcc_hits) / static_cast<double>(outcomes.size());
  r.dca_rate = static_cast<double>(dca_hits) / static_cast<double>(outcomes.size());
  return r;
}

double failure_rate(std::span<const std::size_t> pocket_counts) {
  if (pocket_counts.empty()) throw EmptyInput("failure rate needs at least one protein");
  const auto failed = std::count(pocket_counts.begin(), pocket_counts.end(), std::size_t{0});
  return static_cast<double>(failed) / static_cast<double>(pocket_counts.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DegenerateGroup("pearson needs two equal-length samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateGroup("correlation undefined for a constant sample");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

namespace {

GroupSummary summarize(const std::vector<double>& v) {
  GroupSummary s;
  s.count = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace

VarianceStats variance_label_stats(std::span<const double> sigma2, std::span<const int> labels) {
  if (sigma2.size() != labels.size()) throw ShapeError("one label per variance value expected");
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(sigma2[i]);
  if (pos.empty() || neg.empty()) throw DegenerateGroup("labels are constant; both groups must be non-empty");

  VarianceStats st;
  st.binding = summarize(pos);
  st.non_binding = summarize(neg);

  std::vector<double> y(labels.begin(), labels.end());
  st.pearson = pearson(sigma2, y);
  const auto rx = average_ranks(sigma2);
  st.spearman = pearson(rx, average_ranks(y));

  // point-biserial through its own closed form
  const double n = static_cast<double>(sigma2.size());
  const double mean_all = std::accumulate(sigma2.begin(), sigma2.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sigma2) ss += (v - mean_all) * (v - mean_all);
  const double sd_pop = std::sqrt(ss / n);
  const double p = static_cast<double>(pos.size()) / n;
  st.point_biserial = (st.binding.mean - st.non_binding.mean) / sd_pop * std::sqrt(p * (1.0 - p));

  const double n1 = static_cast<double>(pos.size()), n0 = static_cast<double>(neg.size());
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 1) rank_sum += rx[i];
  st.mann_whitney_u = rank_sum - n1 * (n1 + 1.0) / 2.0;
  auto sorted = rx;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double var_u = n1 * n0 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  st.mann_whitney_z = var_u > 0.0 ? (st.mann_whitney_u - n1 * n0 / 2.0) / std::sqrt(var_u) : 0.0;

  if (pos.size() >= 2 && neg.size() >= 2) {
    const double pooled_var = ((n1 - 1.0) * st.binding.sd * st.binding.sd +
                               (n0 - 1.0) * st.non_binding.sd * st.non_binding.sd) /
                              (n1 + n0 - 2.0);
    if (pooled_var > 0.0) {
      const double sp = std::sqrt(pooled_var);
      const double diff = st.binding.mean - st.non_binding.mean;
      st.cohens_d = diff / sp;
      st.t_statistic = diff / (sp * std::sqrt(1.0 / n1 + 1.0 / n0));
    }
  }
  return st;
}

}  // namespace gdegan
