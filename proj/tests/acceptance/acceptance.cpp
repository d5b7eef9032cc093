// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include "gdegan/cli.hpp"
#include "gdegan/equivariance.hpp"
#include "gdegan/eval.hpp"
#include "gdegan/formats.hpp"
#include "gdegan/model.hpp"
#include "gdegan/pocket.hpp"
#include "gdegan/synth.hpp"

#include "oracle.hpp"
#include "testing.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace gdegan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome se3_suite(EquivarianceReport& report) {
  const auto start = std::chrono::steady_clock::now();
  EquivarianceOptions opt;  // 5 graphs x 20 motions x 30 residues
  opt.seed = 1;
  report = check_equivariance(ModelConfig{}, opt);
  const double elapsed = seconds_since(start);
  double steer = 0.0;
  for (double s : report.steerable) steer = std::max(steer, s);
  const bool pass = report.probs <= 1e-5 && steer <= 1e-5 && report.directions <= 1e-4 && report.harmonics <= 1e-8 &&
                    elapsed < 60.0;
  return {pass, fmt("%d graphs x %d motions; probs %.1e, steerable %.1e, directions %.1e; %.1f s", report.graphs,
                    report.motions, report.probs, steer, report.directions, elapsed)};
}

Outcome mirror(const EquivarianceReport& report) {
  const bool pass = report.mirror_scalars <= 1e-5 && report.mirror_parity <= 1e-5 && report.plane_mirror <= 1e-5;
  return {pass, fmt("inversion scalars %.1e, l=1 parity %.1e, plane mirror %.1e", report.mirror_scalars,
                    report.mirror_parity, report.plane_mirror)};
}

Outcome attention_contracts() {
  testkit::Gen gen(11);
  double worst_sum = 0.0;
  for (int c = 0; c < 1000; ++c) {
    const int heads = gen.integer(1, 4);
    const ProteinGraph g = testkit::micro_graph(gen.integer(2, 20), 1, 5000 + c, gen.uniform(4, 16));
    GdaParams p(heads);
    for (int h = 0; h < heads; ++h) p.xi_raw(0, h) = gen.uniform(-6, 6);
    const Matrix d = gen.matrix(g.num_edges(), heads * gen.integer(1, 4), gen.uniform(0.1, 30.0));
    const Matrix alpha = gaussian_attention(g, d, p);
    for (int i = 0; i < g.n; ++i) {
      if (g.degree(i) == 0) continue;
      for (int h = 0; h < heads; ++h) {
        double total = 0.0;
        for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e) total += alpha(e, h);
        worst_sum = std::max(worst_sum, std::abs(total - 1.0));
      }
    }
  }

  // identical neighbor features: every neighbor of the hub gets 1/deg
  double worst_uniform = 0.0;
  for (int leaves = 1; leaves <= 16; ++leaves) {
    std::vector<Vec3> pos{Vec3::Zero()};
    for (int k = 0; k < leaves; ++k) pos.push_back(gen.uniform(1.5, 9.0) * gen.unit());
    const ProteinGraph g = make_graph(pos, Matrix::Zero(leaves + 1, 1), 10.0, 32);
    Matrix h(leaves + 1, 4);
    h.row(0) = gen.matrix(1, 4);
    const Matrix shared = gen.matrix(1, 4);
    for (int k = 1; k <= leaves; ++k) h.row(k) = shared;
    GdaParams p(2);
    const auto st = neighborhood_stats(g, h);
    const Matrix alpha = gaussian_attention(g, scaled_differences(g, h, st.var, p.eps), p);
    if (g.degree(0) != leaves) worst_uniform = std::numeric_limits<double>::infinity();
    for (int e = g.offsets[0]; e < g.offsets[1]; ++e)
      for (int hd = 0; hd < 2; ++hd) worst_uniform = std::max(worst_uniform, std::abs(alpha(e, hd) - 1.0 / leaves));
  }

  // two neighbors with squared scaled distances 0 and 2 at xi = 1
  const ProteinGraph g = make_graph({Vec3::Zero(), Vec3(3, 0, 0), Vec3(0, 4, 0)}, Matrix::Zero(3, 1), 10.0, 32);
  GdaParams p(1);
  p.xi_raw(0, 0) = inverse_softplus(1.0);
  Matrix d = Matrix::Zero(g.num_edges(), 2);
  d.row(1) << 1.0, 1.0;
  const Matrix alpha = gaussian_attention(g, d, p);
  const double example = std::max(std::abs(alpha(0, 0) - 0.7311), std::abs(alpha(1, 0) - 0.2689));

  const bool pass = worst_sum <= 1e-6 && worst_uniform <= 1e-9 && example <= 1e-4;
  return {pass, fmt("1000 fuzz |sum-1| %.1e; uniform %.1e; worked example (%.4f, %.4f)", worst_sum, worst_uniform,
                    alpha(0, 0), alpha(1, 0))};
}

oracle::State to_oracle(const LayerState& s) {
  oracle::State o;
  o.h = oracle::from_eigen(s.h);
  o.t = oracle::from_eigen(s.t);
  for (int l = 1; l <= s.l_max(); ++l) o.x.push_back(oracle::unstack(s.x[l - 1], l));
  return o;
}

double state_diff(const LayerState& a, const oracle::State& b) {
  double worst = std::max(testkit::max_abs_diff(a.h, oracle::to_eigen(b.h)),
                          testkit::max_abs_diff(a.t, oracle::to_eigen(b.t)));
  for (int l = 1; l <= a.l_max(); ++l)
    worst = std::max(worst, testkit::max_abs_diff(a.x[l - 1], oracle::stack(b.x[l - 1])));
  return worst;
}

Outcome micro_oracle() {
  using testkit::max_abs_diff;
  double worst = 0.0;
  int cases = 0;
  for (int h_d : {2, 4}) {
    for (int l_max = 1; l_max <= 2; ++l_max) {
      for (int n = 2; n <= 4; ++n) {
        ++cases;
        const ModelConfig cfg = testkit::micro_config(h_d, 2, l_max, 2);
        const std::uint64_t seed = 100 * h_d + 10 * l_max + n;
        const ProteinGraph g = testkit::micro_graph(n, cfg.n_d, seed, 5.0);
        const oracle::Graph og = oracle::from_library(g);
        const ModelWeights w = testkit::random_weights(cfg, seed + 1);

        // embedding block
        const LayerState init = initial_state(g, w.init, l_max, Exec::Serial);
        const Matrix m = aggregate_neighborhood(g, init.geo, w.init);
        worst = std::max(worst, max_abs_diff(m, oracle::to_eigen(oracle::aggregate(og, w.init))));
        worst = std::max(worst, state_diff(init, oracle::initial(og, w.init, l_max)));

        // each block operation from a random state
        const LayerState s = testkit::random_state(g, cfg, seed + 2);
        const oracle::State os = to_oracle(s);
        const auto st = neighborhood_stats(g, s.h);
        const auto ost = oracle::stats(og, os.h);
        worst = std::max({worst, max_abs_diff(st.mean, oracle::to_eigen(ost.mean)),
                          max_abs_diff(st.var, oracle::to_eigen(ost.var))});
        const Matrix d = scaled_differences(g, s.h, st.var, w.attention[0].eps);
        const auto od = oracle::scaled(og, os.h, ost.var, w.attention[0].eps);
        worst = std::max(worst, max_abs_diff(d, oracle::to_eigen(od)));
        const Matrix alpha = gaussian_attention(g, d, w.attention[0]);
        const auto oalpha = oracle::attention(og, od, w.attention[0]);
        worst = std::max(worst, max_abs_diff(alpha, oracle::to_eigen(oalpha)));
        const Messages msg = attention_messages(g, alpha, s, w.blocks[0]);
        const auto omsg = oracle::messages(og, oalpha, os, w.blocks[0], cfg.K);
        worst = std::max(worst, max_abs_diff(msg.scalar, oracle::to_eigen(omsg[0])));
        for (int l = 1; l <= l_max; ++l) {
          worst = std::max(worst, max_abs_diff(msg.dir[l - 1], oracle::to_eigen(omsg[l])));
          worst = std::max(worst, max_abs_diff(msg.tensor[l - 1], oracle::to_eigen(omsg[l_max + l])));
        }
        LayerState updated = s;
        update_features(g, msg, updated);
        const oracle::State oupdated = oracle::update(og, omsg, os);
        worst = std::max(worst, state_diff(updated, oupdated));
        const Matrix t = hierarchical_refinement(g, updated.x, s.t, w.blocks[0]);
        worst = std::max(worst, max_abs_diff(t, oracle::to_eigen(oracle::refine(og, oupdated, os.t, w.blocks[0]))));
        LayerState ff = s;
        eqff(ff, w.blocks[0]);
        worst = std::max(worst, state_diff(ff, oracle::feed_forward(os, w.blocks[0])));
        LayerDiagnostics diag;
        const LayerState next = layer_forward(s, g, w.attention[0], w.blocks[0], Exec::Serial, &diag);
        const auto onext = oracle::layer(og, os, w.attention[0], w.blocks[0], cfg.K);
        worst = std::max({worst, state_diff(next, onext.state), max_abs_diff(diag.alpha, oracle::to_eigen(onext.alpha)),
                          max_abs_diff(diag.var, oracle::to_eigen(onext.var))});

        // whole network, including the head and direction read-out
        const Prediction p = forward(g, w, Exec::Serial);
        const auto op = oracle::forward(og, w);
        for (int i = 0; i < n; ++i) {
          worst = std::max(worst, std::abs(p.probs[i] - op.probs[i]));
          for (int a = 0; a < 3; ++a) worst = std::max(worst, std::abs(p.dirs[i][a] - op.dirs[i][a]));
        }
        for (int l = 1; l <= l_max && cfg.L > 0; ++l)
          worst = std::max(worst, max_abs_diff(p.steerable[l - 1], oracle::stack(op.state.x[l - 1])));
      }
    }
  }
  return {worst <= 1e-10, fmt("%d micro cases (h_d <= 4, n <= 4), max deviation %.1e", cases, worst)};
}

Outcome toy_trainability() {
  const auto start = std::chrono::steady_clock::now();
  const Structure s = toy_complex();
  const ModelConfig cfg = toy_config();
  const ProteinGraph g = build_graph(s, fake_embeddings(s, cfg.n_d, 0), cfg.r_c, cfg.max_neighbors, Exec::Serial);
  TrainOptions opt;  // 200 steps
  const TrainResult r = toy_train(g, init_model(cfg, 0), opt);
  const double reduction = (r.trace.front() - r.trace.back()) / r.trace.front();

  double worst_grad = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) worst_grad = std::max(worst_grad, testkit::temperature_gradient(seed).relative_error());
  const double elapsed = seconds_since(start);
  const bool pass = reduction >= 0.5 && worst_grad <= 1e-4 && elapsed < 300.0;
  return {pass, fmt("loss %.4f -> %.4f (%.1f%% in %d steps); xi gradient rel err %.1e; %.1f s", r.trace.front(),
                    r.trace.back(), 100.0 * reduction, opt.steps, worst_grad, elapsed)};
}

Outcome metrics_oracle() {
  testkit::Gen gen(21);
  bool exact = true;
  for (int c = 0; c < 100; ++c) {
    std::vector<Vec3> lig;
    const int n = gen.integer(1, 30);
    for (int k = 0; k < n; ++k) lig.push_back(gen.vec3(4.0));
    const Vec3 center = gen.vec3(10.0);
    double sx = 0, sy = 0, sz = 0, nearest = std::numeric_limits<double>::infinity();
    for (const auto& a : lig) {
      sx += a.x();
      sy += a.y();
      sz += a.z();
      nearest = std::min(nearest, (center - a).norm());
    }
    const Vec3 centroid = Vec3(sx, sy, sz) / static_cast<double>(n);
    exact = exact && dcc(center, lig) == (center - centroid).norm() && dca(center, lig) == nearest;
  }

  int matrices = 0;
  bool greedy_ok = true;
  for (int p = 1; p <= 3; ++p) {
    for (int l = 1; l <= 3; ++l) {
      for (int c = 0; c < 200; ++c, ++matrices) {
        std::vector<std::vector<double>> d(p, std::vector<double>(l));
        for (auto& row : d)
          for (double& v : row) v = gen.uniform(0, 1) < 0.25 ? 3.0 : gen.uniform(0, 12);
        std::vector<std::pair<int, int>> pairs;
        for (const auto& m : greedy_match(d)) pairs.emplace_back(m.pocket, m.ligand);
        greedy_ok = greedy_ok && oracle::assignment_profile(d, pairs) == oracle::best_assignment_profile(d);
      }
    }
  }

  const std::vector<std::size_t> one_of_four{0, 2, 1, 3};
  const double failure = failure_rate(one_of_four);
  return {exact && greedy_ok && failure == 0.25,
          fmt("dcc/dca exact on 100 fixtures: %s; greedy = exhaustive on %d matrices up to 3x3: %s; failure %.2f",
              exact ? "yes" : "no", matrices, greedy_ok ? "yes" : "no", failure)};
}

Outcome mean_shift_clusters() {
  testkit::Gen gen(31);
  std::vector<Vec3> pts;
  const Vec3 a(0, 0, 0), b(40, 0, 0);
  Vec3 mean_a = Vec3::Zero(), mean_b = Vec3::Zero();
  for (int k = 0; k < 10; ++k) {
    pts.push_back(a + gen.vec3(1.0));
    mean_a += pts.back() / 10.0;
  }
  for (int k = 0; k < 10; ++k) {
    pts.push_back(b + gen.vec3(1.0));
    mean_b += pts.back() / 10.0;
  }
  const MeanShiftResult r = mean_shift(pts, 8.0, Exec::Serial);
  double off = std::numeric_limits<double>::infinity();
  if (r.centers.size() == 2) {
    const double direct = std::max((r.centers[0] - mean_a).norm(), (r.centers[1] - mean_b).norm());
    const double swapped = std::max((r.centers[0] - mean_b).norm(), (r.centers[1] - mean_a).norm());
    off = std::min(direct, swapped);
  }

  double iso = 0.0;
  for (int c = 0; c < 20; ++c) {
    const Rotation rot = gen.rotation();
    const Vec3 t = gen.vec3(25.0);
    std::vector<Vec3> moved;
    for (const auto& p : pts) moved.push_back(rot * p + t);
    const MeanShiftResult m = mean_shift(moved, 8.0, Exec::Serial);
    if (m.centers.size() != r.centers.size()) {
      iso = std::numeric_limits<double>::infinity();
      break;
    }
    for (std::size_t k = 0; k < m.centers.size(); ++k) iso = std::max(iso, (rot * r.centers[k] + t - m.centers[k]).norm());
  }
  return {r.centers.size() == 2 && off <= 0.5 && iso <= 1e-6,
          fmt("%zu centers, max offset from blob means %.2e A, isometry deviation %.1e A", r.centers.size(), off, iso)};
}

Outcome variance_statistics() {
  const std::vector<double> s{1, 2, 3, 4};
  const std::vector<int> y{0, 0, 1, 1};
  const VarianceStats st = variance_label_stats(s, y);
  testkit::Gen gen(41);
  double worst = 0.0;
  for (int c = 0; c < 200; ++c) {
    const int n = gen.integer(4, 60);
    std::vector<double> v(n);
    std::vector<int> lab(n);
    for (int i = 0; i < n; ++i) {
      v[i] = gen.uniform(0, 10);
      lab[i] = i < 2 ? i : gen.uniform(0, 1) < 0.3;
    }
    const VarianceStats r = variance_label_stats(v, lab);
    worst = std::max(worst, std::abs(r.point_biserial - r.pearson));
  }
  worst = std::max(worst, std::abs(st.point_biserial - st.pearson));
  return {std::abs(st.pearson - 0.8944) <= 1e-4 && worst <= 1e-12,
          fmt("pearson %.6f; max |point-biserial - pearson| %.1e over 201 samples", st.pearson, worst)};
}

std::size_t block_params(const ModelConfig& cfg) {
  BlockWeights b(cfg.h_d, cfg.e_d, cfg.L_max);
  TensorRefs refs;
  append_tensors(refs, "b", b);
  std::size_t total = 0;
  for (const auto& [name, t] : refs) total += static_cast<std::size_t>(t->size());
  return total;
}

Outcome parameter_count() {
  const ModelConfig cfg;
  const std::size_t total = count_params(ModelWeights(cfg));
  // each extra layer costs one block plus the attention temperatures
  bool per_layer = true;
  std::size_t added = 0;
  for (int layers = 0; layers < 6; ++layers) {
    ModelConfig a = cfg, b = cfg;
    a.L = layers;
    b.L = layers + 1;
    added = count_params(ModelWeights(b)) - count_params(ModelWeights(a)) - block_params(cfg);
    per_layer = per_layer && added == static_cast<std::size_t>(cfg.H);
  }
  return {total >= 1400000 && total <= 2400000 && per_layer,
          fmt("%zu parameters (default config); attention adds %zu scalars per layer (H = %d)", total, added, cfg.H)};
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gdegan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str() + err.str()};
}

Outcome determinism() {
  const fs::path dir = testkit::scratch_dir("acceptance_determinism");
  testkit::write_text(dir / "model.cfg", "n_d=16\nh_d=16\ne_d=16\nK=8\nH=4\nL=2\nL_max=2\n");
  if (cli({"init-checkpoint", "--out", (dir / "model.ckpt").string(), "--config", (dir / "model.cfg").string(),
           "--seed", "5"})
          .code != kExitOk)
    return {false, "could not write checkpoint"};
  std::vector<std::string> args{"predict"};
  for (int k = 0; k < 4; ++k) {
    const fs::path pdb = dir / ("p" + std::to_string(k) + ".pdb");
    const fs::path gde = dir / ("p" + std::to_string(k) + ".gde");
    if (cli({"make-fixture", "--out", pdb.string(), "--seed", std::to_string(40 + k)}).code != kExitOk ||
        cli({"fake-embeddings", pdb.string(), "--out", gde.string(), "--dim", "16"}).code != kExitOk)
      return {false, "could not write fixtures"};
    args.push_back(pdb.string());
  }
  args.insert(args.end(), {"--checkpoint", (dir / "model.ckpt").string(), "--tau", "0.3", "--dump-attention",
                           "--dump-variance", "--jobs"});
  auto predict = [&](const std::string& out, const std::string& jobs) {
    std::vector<std::string> full = args;
    full.push_back(jobs);
    full.insert(full.end(), {"--out", (dir / out).string()});
    return cli(full);
  };
  const CliRun a = predict("a", "1"), b = predict("b", "1"), c = predict("c", "4");
  bool same = a.code == b.code && a.code == c.code && a.out == b.out && a.out == c.out;
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    ++files;
    const std::string ref = read_file(entry.path());
    for (const char* other : {"b", "c"}) {
      const fs::path p = dir / other / entry.path().filename();
      same = same && fs::exists(p) && read_file(p) == ref;
    }
  }
  return {same && files > 0,
          fmt("%d output files byte-identical across two serial runs and --jobs 4 (exit %d)", files, a.code)};
}

}  // namespace

int main() {
  omp_set_num_threads(1);
  EquivarianceReport report;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"SE(3) equivariance suite", [&] { return se3_suite(report); }},
      {"Mirror test", [&] { return mirror(report); }},
      {"Attention contracts", attention_contracts},
      {"Micro-oracle equivalence", micro_oracle},
      {"Toy trainability", toy_trainability},
      {"Metrics oracle", metrics_oracle},
      {"Mean-shift planted clusters", mean_shift_clusters},
      {"Variance statistics", variance_statistics},
      {"Parameter count", parameter_count},
      {"Determinism", [] {
         omp_set_num_threads(4);
         const Outcome o = determinism();
         omp_set_num_threads(1);
         return o;
       }},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
