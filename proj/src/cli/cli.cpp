#include "gdegan/cli.hpp"

#include "gdegan/config_file.hpp"
#include "gdegan/equivariance.hpp"
#include "gdegan/errors.hpp"
#include "gdegan/eval.hpp"
#include "gdegan/formats.hpp"
#include "gdegan/model.hpp"
#include "gdegan/pocket.hpp"
#include "gdegan/synth.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gdegan {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int decimals) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

RunSettings settings_for(const ModelConfig& model) {
  RunSettings s;
  s.model = model;
  return s;
}

RunSettings load_settings(RunSettings base, const std::string& config_path) {
  if (config_path.empty()) return base;
  return apply_settings(std::move(base), read_file(config_path));
}

int checked_jobs(int jobs) {
  if (jobs < 1) throw ConfigError("--jobs must be >= 1");
  return jobs;
}

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::vector<std::string> structures;
  std::string embeddings;
  std::string embeddings_dir;
  std::string checkpoint;
  std::string out_dir = ".";
  std::string config;
  std::optional<double> tau;
  std::optional<double> bandwidth;
  std::optional<int> jobs;
  std::uint64_t seed = 0;
  bool dump_attention = false;
  bool dump_variance = false;
};

struct ProteinResult {
  std::string error;
  std::size_t pockets = 0;
};

ProteinResult predict_one(const PredictArgs& a, const fs::path& structure_path, const fs::path& embedding_path,
                          const ModelWeights& w, double tau, double bandwidth, Exec exec) {
  ProteinResult result;
  try {
    const std::string stem = structure_path.stem().string();
    const Structure s = parse_structure(read_file(structure_path));
    const std::string emb_bytes = read_file(embedding_path);
    const EmbeddingTable e = load_embeddings(emb_bytes);
    const ProteinGraph g = build_graph(s, e, w.cfg.r_c, w.cfg.max_neighbors, exec);
    const bool diagnostics = a.dump_attention || a.dump_variance;
    if (diagnostics && w.cfg.L == 0) throw ConfigError("diagnostic dumps need at least one layer");
    const Prediction pred = forward(g, w, exec, diagnostics);
    const PocketPrediction pockets = predict_pockets(pred.probs, g, tau, bandwidth, exec);
    result.pockets = pockets.pockets.size();

    const RunManifest m{"predict", a.config, {structure_path.string(), embedding_path.string(), a.checkpoint}, a.seed};
    const std::string header = manifest_header(m) + "# tau: " + fixed(tau, 6) + "\n# bandwidth: " +
                               fixed(bandwidth, 6) + "\n";
    const fs::path out = a.out_dir;
    write_file_atomic(out / (stem + ".pockets"), header + format_pockets(stem, pockets, g, pred.probs));
    write_file_atomic(out / (stem + ".probs"), header + format_probabilities(g, pred.probs));
    if (a.dump_variance) {
      const Eigen::VectorXd sigma2 = pred.layers.back().var.rowwise().mean();
      write_file_atomic(out / (stem + ".variance"), header + format_variance(g, pred.probs, sigma2));
    }
    if (a.dump_attention) {
      for (std::size_t k = 0; k < pred.layers.size(); ++k) {
        const int layer = static_cast<int>(k) + 1;
        write_file_atomic(out / (stem + ".layer" + std::to_string(layer) + ".attention"),
                          header + format_attention(stem, layer, g, pred.layers[k].alpha));
      }
    }
  } catch (const std::exception& ex) {
    result.error = ex.what();
  }
  return result;
}

int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream& err) {
  if (!a.embeddings.empty() && a.structures.size() != 1) {
    throw ConfigError("--embeddings takes a single structure; use --embeddings-dir for batches");
  }
  const std::string ck_bytes = read_file(a.checkpoint);
  ModelWeights w = load_checkpoint(ck_bytes);
  RunSettings s = load_settings(settings_for(w.cfg), a.config);
  if (!(s.model == w.cfg)) {
    load_checkpoint(ck_bytes, &s.model);  // shape check only
    w.cfg.r_c = s.model.r_c;
    w.cfg.max_neighbors = s.model.max_neighbors;
    w.cfg.tau = s.model.tau;
  }
  const double tau = a.tau.value_or(w.cfg.tau);
  const double bandwidth = a.bandwidth.value_or(s.bandwidth);
  const int jobs = checked_jobs(a.jobs.value_or(s.jobs));
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("--tau must lie in (0, 1]");
  if (!(bandwidth > 0.0)) throw ConfigError("--bandwidth must be positive");
  fs::create_directories(a.out_dir);

  const int n = static_cast<int>(a.structures.size());
  std::vector<fs::path> emb_paths(n);
  for (int k = 0; k < n; ++k) {
    const fs::path sp = a.structures[k];
    if (!a.embeddings.empty()) emb_paths[k] = a.embeddings;
    else {
      const fs::path dir = a.embeddings_dir.empty() ? sp.parent_path() : fs::path(a.embeddings_dir);
      emb_paths[k] = dir / (sp.stem().string() + ".gde");
    }
  }

  omp_set_num_threads(jobs);
  std::vector<ProteinResult> results(n);
  if (n > 1 && jobs > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (int k = 0; k < n; ++k) {
      results[k] = predict_one(a, a.structures[k], emb_paths[k], w, tau, bandwidth, Exec::Serial);
    }
  } else {
    for (int k = 0; k < n; ++k) {
      results[k] = predict_one(a, a.structures[k], emb_paths[k], w, tau, bandwidth, Exec::Parallel);
    }
  }

  bool failed = false, empty = false;
  for (int k = 0; k < n; ++k) {
    const std::string stem = fs::path(a.structures[k]).stem().string();
    if (!results[k].error.empty()) {
      err << "error: " << a.structures[k] << ": " << results[k].error << "\n";
      failed = true;
      continue;
    }
    out << stem << " pockets " << results[k].pockets << "\n";
    empty = empty || results[k].pockets == 0;
  }
  if (failed) return kExitInput;
  return empty ? kExitNoPockets : kExitOk;
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string predictions;
  std::string structures;
  std::string report;
  std::string config;
  std::optional<double> threshold;
  std::optional<int> jobs;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const RunSettings s = load_settings(RunSettings{}, a.config);
  const double threshold = a.threshold.value_or(s.threshold);
  const int jobs = checked_jobs(a.jobs.value_or(s.jobs));
  if (!(threshold > 0.0)) throw ConfigError("--threshold must be positive");

  const auto structures = files_with_extension(a.structures, ".pdb");
  const auto predictions = files_with_extension(a.predictions, ".pockets");
  if (structures.empty()) throw EmptyInput("no .pdb structures in " + a.structures);

  std::map<std::string, fs::path> by_stem;
  for (const auto& p : predictions) by_stem[p.stem().string()] = p;
  int warnings = 0;
  for (const auto& [stem, path] : by_stem) {
    const bool known = std::any_of(structures.begin(), structures.end(),
                                   [&](const fs::path& sp) { return sp.stem().string() == stem; });
    if (!known) {
      err << "warning: skipping " << path.string() << " (no matching structure)\n";
      ++warnings;
    }
  }

  const int n = static_cast<int>(structures.size());
  std::vector<std::vector<LigandOutcome>> outcomes(n);
  std::vector<std::size_t> pocket_counts(n, 0);
  std::vector<std::string> errors(n);
  std::vector<std::uint8_t> missing(n, 0);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (int k = 0; k < n; ++k) {
    try {
      const std::string stem = structures[k].stem().string();
      const Structure st = parse_structure(read_file(structures[k]));
      std::vector<Vec3> centers;
      if (const auto it = by_stem.find(stem); it != by_stem.end()) {
        centers = parse_pocket_centers(read_file(it->second));
      } else {
        missing[k] = 1;
      }
      pocket_counts[k] = centers.size();
      outcomes[k] = evaluate_complex(stem, centers, st.ligands, threshold);
    } catch (const std::exception& ex) {
      errors[k] = ex.what();
    }
  }

  bool failed = false;
  std::vector<LigandOutcome> pooled;
  for (int k = 0; k < n; ++k) {
    if (!errors[k].empty()) {
      err << "error: " << structures[k].string() << ": " << errors[k] << "\n";
      failed = true;
    }
    if (missing[k]) {
      err << "warning: no prediction for " << structures[k].string() << "; counted as zero pockets\n";
      ++warnings;
    }
    pooled.insert(pooled.end(), outcomes[k].begin(), outcomes[k].end());
  }
  if (failed) return kExitInput;
  if (warnings > 0) err << "warning: " << warnings << " unmatched file(s)\n";

  const SuccessRates rates = success_rates(pooled);
  const double failure = failure_rate(pocket_counts);

  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-16s %5s %9s %9s %4s %4s\n", "protein", "ligand", "rank", "dcc", "dca",
                "dcc", "dca");
  out << buf;
  for (const auto& o : pooled) {
    std::snprintf(buf, sizeof buf, "%-16s %-16s %5d %9s %9s %4s %4s\n", o.protein.c_str(), o.ligand.c_str(), o.rank,
                  fixed(o.dcc, 3).c_str(), fixed(o.dca, 3).c_str(), o.dcc_hit ? "hit" : "-",
                  o.dca_hit ? "hit" : "-");
    out << buf;
  }
  out << "proteins " << n << "\n";
  out << "ligands " << rates.ligands << "\n";
  out << "DCC success rate " << fixed(rates.dcc_rate, 4) << "\n";
  out << "DCA success rate " << fixed(rates.dca_rate, 4) << "\n";
  out << "failure rate " << fixed(failure, 4) << "\n";

  if (!a.report.empty()) {
    const RunManifest m{"evaluate", a.config, {a.predictions, a.structures}, 0};
    std::string tsv = manifest_header(m) + "# threshold: " + fixed(threshold, 6) + "\n";
    tsv += "protein\tligand\trank\tdcc\tdca\tdcc_hit\tdca_hit\n";
    for (const auto& o : pooled) {
      tsv += o.protein + "\t" + o.ligand + "\t" + std::to_string(o.rank) + "\t" + fixed(o.dcc, 4) + "\t" +
             fixed(o.dca, 4) + "\t" + (o.dcc_hit ? "1" : "0") + "\t" + (o.dca_hit ? "1" : "0") + "\n";
    }
    tsv += "# dcc_rate " + fixed(rates.dcc_rate, 4) + "\n# dca_rate " + fixed(rates.dca_rate, 4) +
           "\n# failure_rate " + fixed(failure, 4) + "\n";
    write_file_atomic(a.report, tsv);
  }
  return kExitOk;
}

// ------------------------------------------------------ check-equivariance

struct EquivarianceArgs {
  std::string config;
  std::uint64_t seed = 0;
  int trials = 20;
  int graphs = 5;
  int residues = 30;
  bool corrupt_wigner = false;
};

int cmd_check_equivariance(const EquivarianceArgs& a, std::ostream& out, std::ostream& err) {
  if (a.trials < 1 || a.graphs < 1 || a.residues < 2) {
    err << "error: --trials and --graphs must be >= 1, --residues >= 2\n";
    return kExitInput;
  }
  const RunSettings s = load_settings(RunSettings{}, a.config);
  EquivarianceOptions opt;
  opt.graphs = a.graphs;
  opt.motions = a.trials;
  opt.residues = a.residues;
  opt.seed = a.seed;
  opt.corrupt_wigner = a.corrupt_wigner;
  const EquivarianceReport rep = check_equivariance(s.model, opt);
  out << rep.format();
  return rep.passed() ? kExitOk : kExitCheckFailed;
}

// -------------------------------------------------------------- toy-train

struct TrainArgs {
  std::string fixture;
  std::string embeddings;
  std::string checkpoint;
  std::string trace;
  std::string config;
  int steps = 200;
  double lr = 0.01;
  std::uint64_t seed = 0;
  std::optional<int> inject_nan;
};

int cmd_toy_train(const TrainArgs& a, std::ostream& out, std::ostream&) {
  const RunSettings s = load_settings(settings_for(toy_config()), a.config);
  s.model.validate();
  if (a.steps < 0) throw ConfigError("--steps must be >= 0");
  const Structure st = parse_structure(read_file(a.fixture));
  if (st.ligands.empty()) throw MissingLigand("toy training needs a fixture with a ligand");
  const EmbeddingTable e = a.embeddings.empty() ? fake_embeddings(st, s.model.n_d, a.seed)
                                                : load_embeddings(read_file(a.embeddings));
  const ProteinGraph g = build_graph(st, e, s.model.r_c, s.model.max_neighbors, Exec::Serial);

  TrainOptions opt;
  opt.steps = a.steps;
  opt.lr = a.lr;
  opt.inject_nan_at = a.inject_nan;
  const TrainResult r = toy_train(g, init_model(s.model, a.seed), opt);

  const RunManifest m{"toy-train", a.config, {a.fixture, a.embeddings.empty() ? "fake" : a.embeddings}, a.seed};
  if (!a.trace.empty()) {
    std::string text = manifest_header(m) + "# steps: " + std::to_string(a.steps) + " lr: " + fixed(a.lr, 6) + "\n";
    char buf[48];
    for (double v : r.trace) {
      std::snprintf(buf, sizeof buf, "%.10g\n", v);
      text += buf;
    }
    write_file_atomic(a.trace, text);
  }
  if (!a.checkpoint.empty()) write_file_atomic(a.checkpoint, save_checkpoint(r.weights));

  const double first = r.trace.front(), last = r.trace.back();
  out << "initial loss " << fixed(first, 6) << "\n";
  out << "final loss " << fixed(last, 6) << "\n";
  out << "reduction " << fixed(first > 0.0 ? 100.0 * (first - last) / first : 0.0, 2) << "%\n";
  return kExitOk;
}

// -------------------------------------------------------- analyze-variance

struct VarianceArgs {
  std::string dump;
  std::string labels;
  std::string structure;
};

int cmd_analyze_variance(const VarianceArgs& a, std::ostream& out, std::ostream& err) {
  if (a.labels.empty() == a.structure.empty()) {
    err << "error: give exactly one of --labels or --structure\n";
    return kExitInput;
  }
  const auto rows = parse_variance(read_file(a.dump));
  if (rows.empty()) {
    err << "error: " << a.dump << " holds no residues\n";
    return kExitInput;
  }
  std::map<ResidueKey, int> label_of;
  if (!a.labels.empty()) {
    for (const auto& [key, y] : parse_labels(read_file(a.labels))) label_of[key] = y;
  } else {
    const Structure st = parse_structure(read_file(a.structure));
    const auto y = label_binding(st);
    for (std::size_t i = 0; i < st.residues.size(); ++i) label_of[{st.residues[i].chain, st.residues[i].seq}] = y[i];
  }

  std::vector<double> sigma2;
  std::vector<int> labels;
  std::vector<std::string> missing;
  for (const auto& r : rows) {
    const auto it = label_of.find(r.key);
    if (it == label_of.end()) {
      missing.push_back(r.key.str());
      continue;
    }
    sigma2.push_back(r.sigma2);
    labels.push_back(it->second);
  }
  if (!missing.empty()) throw KeyMismatch(std::move(missing));

  const VarianceStats st = variance_label_stats(sigma2, labels);
  auto opt = [](const std::optional<double>& v) { return v ? fixed(*v, 4) : std::string("n/a"); };
  out << "residues " << sigma2.size() << " (binding " << st.binding.count << ", non-binding "
      << st.non_binding.count << ")\n";
  out << "binding sigma2      " << fixed(st.binding.mean, 4) << " +- " << fixed(st.binding.sd, 4) << "\n";
  out << "non-binding sigma2  " << fixed(st.non_binding.mean, 4) << " +- " << fixed(st.non_binding.sd, 4) << "\n";
  out << "pearson r           " << fixed(st.pearson, 4) << "\n";
  out << "spearman rho        " << fixed(st.spearman, 4) << "\n";
  out << "point-biserial      " << fixed(st.point_biserial, 4) << "\n";
  out << "t statistic         " << opt(st.t_statistic) << "\n";
  out << "mann-whitney U      " << fixed(st.mann_whitney_u, 1) << " (z " << fixed(st.mann_whitney_z, 4) << ")\n";
  out << "cohen's d           " << opt(st.cohens_d) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"GDEGAN ligand binding-site prediction", "gdegan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Predict ranked pockets for one or more structures");
  predict->add_option("structures", pa.structures, "Structure files (.pdb)")->required();
  predict->add_option("--embeddings", pa.embeddings, "GDE1 embedding file (single structure)");
  predict->add_option("--embeddings-dir", pa.embeddings_dir, "Directory holding <stem>.gde files");
  predict->add_option("--checkpoint", pa.checkpoint, "Model checkpoint")->required();
  predict->add_option("--out", pa.out_dir, "Output directory");
  predict->add_option("--config", pa.config, "key=value config file");
  predict->add_option("--tau", pa.tau, "Candidate probability threshold");
  predict->add_option("--bandwidth", pa.bandwidth, "Mean-shift bandwidth in Angstrom");
  predict->add_option("--jobs", pa.jobs, "Worker threads");
  predict->add_option("--seed", pa.seed, "Seed echoed into the manifest");
  predict->add_flag("--dump-attention", pa.dump_attention, "Write per-layer attention matrices");
  predict->add_flag("--dump-variance", pa.dump_variance, "Write per-residue probability and sigma^2");

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "DCC/DCA success and failure rates");
  evaluate->add_option("--predictions", ea.predictions, "Directory of .pockets files")->required();
  evaluate->add_option("--structures", ea.structures, "Directory of .pdb files with ligands")->required();
  evaluate->add_option("--threshold", ea.threshold, "Success threshold in Angstrom");
  evaluate->add_option("--report", ea.report, "Per-ligand TSV report");
  evaluate->add_option("--config", ea.config, "key=value config file");
  evaluate->add_option("--jobs", ea.jobs, "Worker threads");

  EquivarianceArgs qa;
  auto* check = app.add_subcommand("check-equivariance", "Run the symmetry property suite");
  check->add_option("--config", qa.config, "key=value config file");
  check->add_option("--seed", qa.seed, "Seed for graphs, weights and motions");
  check->add_option("--trials", qa.trials, "Rigid motions per graph");
  check->add_option("--graphs", qa.graphs, "Random graphs");
  check->add_option("--residues", qa.residues, "Residues per graph");
  check->add_flag("--corrupt-wigner", qa.corrupt_wigner)->group("");

  TrainArgs ta;
  auto* train = app.add_subcommand("toy-train", "Finite-difference descent on a micro fixture");
  train->add_option("fixture", ta.fixture, "Structure with a ligand")->required();
  train->add_option("--embeddings", ta.embeddings, "GDE1 file; pseudo-random rows when omitted");
  train->add_option("--steps", ta.steps, "Gradient steps");
  train->add_option("--lr", ta.lr, "Learning rate");
  train->add_option("--checkpoint", ta.checkpoint, "Output checkpoint");
  train->add_option("--trace", ta.trace, "Output loss trace");
  train->add_option("--config", ta.config, "key=value config file (micro defaults)");
  train->add_option("--seed", ta.seed, "Initialization seed");
  train->add_option("--inject-nan", ta.inject_nan)->group("");

  VarianceArgs va;
  auto* variance = app.add_subcommand("analyze-variance", "Variance-label dependency statistics");
  variance->add_option("dump", va.dump, "Variance dump from predict --dump-variance")->required();
  auto* labels_opt = variance->add_option("--labels", va.labels, "chain resseq label file");
  auto* structure_opt = variance->add_option("--structure", va.structure, "Structure to label from");
  labels_opt->excludes(structure_opt);

  std::string fixture_out;
  std::uint64_t fixture_seed = 7;
  auto* make_fixture = app.add_subcommand("make-fixture", "Write the 10-residue toy complex");
  make_fixture->add_option("--out", fixture_out, "Output .pdb")->required();
  make_fixture->add_option("--seed", fixture_seed, "Geometry seed");

  std::string fake_in, fake_out;
  int fake_dim = 1280;
  std::uint64_t fake_seed = 0;
  auto* fake = app.add_subcommand("fake-embeddings", "Write deterministic pseudo-random embeddings");
  fake->add_option("structure", fake_in, "Structure file")->required();
  fake->add_option("--out", fake_out, "Output GDE1 file")->required();
  fake->add_option("--dim", fake_dim, "Embedding width")->check(CLI::PositiveNumber);
  fake->add_option("--seed", fake_seed, "Row seed");

  std::string init_out, init_config;
  std::uint64_t init_seed = 0;
  auto* init = app.add_subcommand("init-checkpoint", "Write a randomly initialized checkpoint");
  init->add_option("--out", init_out, "Output checkpoint")->required();
  init->add_option("--config", init_config, "key=value config file");
  init->add_option("--seed", init_seed, "Initialization seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*predict) return cmd_predict(pa, out, err);
    if (*evaluate) return cmd_evaluate(ea, out, err);
    if (*check) return cmd_check_equivariance(qa, out, err);
    if (*train) return cmd_toy_train(ta, out, err);
    if (*variance) return cmd_analyze_variance(va, out, err);
    if (*make_fixture) {
      write_file_atomic(fixture_out, write_pdb(toy_complex(fixture_seed)));
      return kExitOk;
    }
    if (*fake) {
      const Structure st = parse_structure(read_file(fake_in));
      write_file_atomic(fake_out, write_embeddings(fake_embeddings(st, fake_dim, fake_seed)));
      return kExitOk;
    }
    if (*init) {
      RunSettings s = load_settings(RunSettings{}, init_config);
      s.model.seed = init_seed;
      const ModelWeights w = init_model(s.model, init_seed);
      write_file_atomic(init_out, save_checkpoint(w));
      out << "parameters " << count_params(w) << "\n";
      return kExitOk;
    }
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace gdegan
