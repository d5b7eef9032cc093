#include "gdegan/cli.hpp"
#include "gdegan/config_file.hpp"
#include "gdegan/errors.hpp"
#include "gdegan/eval.hpp"
#include "gdegan/formats.hpp"
#include "gdegan/synth.hpp"

#include "testing.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <sstream>

using namespace gdegan;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "gdegan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kMicroConfig = "n_d=8\nh_d=8\ne_d=8\nK=8\nH=2\nL=1\nL_max=2\n";

// Toy complexes, their embeddings and a micro checkpoint under `dir`.
void populate(const fs::path& dir, int proteins) {
  testkit::write_text(dir / "micro.cfg", kMicroConfig);
  ASSERT_EQ(run({"init-checkpoint", "--out", (dir / "model.ckpt").string(), "--config", (dir / "micro.cfg").string(),
                 "--seed", "3"})
                .code,
            kExitOk);
  for (int k = 0; k < proteins; ++k) {
    const std::string stem = "p" + std::to_string(k);
    const fs::path pdb = dir / (stem + ".pdb");
    ASSERT_EQ(run({"make-fixture", "--out", pdb.string(), "--seed", std::to_string(11 + k)}).code, kExitOk);
    ASSERT_EQ(run({"fake-embeddings", pdb.string(), "--out", (dir / (stem + ".gde")).string(), "--dim", "8"}).code,
              kExitOk);
  }
}

std::string pocket_text(const std::vector<Vec3>& centers) {
  std::string out = "# hand written\npockets " + std::to_string(centers.size()) + "\n";
  char buf[128];
  for (std::size_t r = 0; r < centers.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%zu %.3f %.3f %.3f 1 0.9000\n", r + 1, centers[r].x(), centers[r].y(),
                  centers[r].z());
    out += buf;
  }
  return out + "residues 0\n";
}

Vec3 centroid(const Ligand& l) {
  Vec3 c = Vec3::Zero();
  for (const auto& a : l.atoms) c += a;
  return c / static_cast<double>(l.atoms.size());
}

}  // namespace

TEST(ConfigFile, KeyValuesWithComments) {
  const auto kv = parse_key_values("# header\n h_d = 16 \n\nH=4 # trailing\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"h_d", "16"}));
  EXPECT_EQ(kv[1].second, "4");
}

TEST(ConfigFile, MalformedLinesReportTheirNumber) {
  try {
    parse_key_values("h_d=4\n\nnonsense\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_key_values("=4\n"), ParseError);
}

TEST(ConfigFile, RunAndModelKeys) {
  const RunSettings s = apply_settings(RunSettings{}, "tau=0.3\nbandwidth=6\nthreshold=5\njobs=3\nh_d=16\nH=4\n");
  EXPECT_EQ(*s.tau, 0.3);
  EXPECT_EQ(s.model.tau, 0.3);
  EXPECT_EQ(s.bandwidth, 6.0);
  EXPECT_EQ(s.threshold, 5.0);
  EXPECT_EQ(s.jobs, 3);
  EXPECT_EQ(s.model.h_d, 16);
  EXPECT_THROW(apply_settings(RunSettings{}, "color=blue\n"), ConfigError);
  EXPECT_THROW(apply_settings(RunSettings{}, "jobs=two\n"), ConfigError);
}

TEST(Formats, ManifestHeader) {
  const std::string h = manifest_header({"predict", "", {"a.pdb", "a.gde"}, 9});
  EXPECT_EQ(h, "# gdegan 0.1.0\n# command: predict\n# config: -\n# inputs: a.pdb a.gde\n# seed: 9\n");
}

TEST(Formats, PocketsRoundTripCenters) {
  const Structure s = toy_complex();
  const ProteinGraph g = build_graph(s, fake_embeddings(s, 4, 1));
  Eigen::VectorXd probs = Eigen::VectorXd::Constant(g.n, 0.2);
  probs.head(4).setConstant(0.9);
  const PocketPrediction p = predict_pockets(probs, g, 0.5, 8.0);
  const std::string text = format_pockets("toy", p, g, probs);
  const auto centers = parse_pocket_centers(text);
  ASSERT_EQ(centers.size(), p.pockets.size());
  for (std::size_t k = 0; k < centers.size(); ++k) EXPECT_LT((centers[k] - p.pockets[k].center).norm(), 1e-3);
  EXPECT_NE(text.find("residues 4\n"), std::string::npos);
}

TEST(Formats, PocketParserRejectsDisorder) {
  EXPECT_THROW(parse_pocket_centers("pockets 2\n2 0 0 0 1 1\n1 0 0 0 1 1\n"), ParseError);
  EXPECT_THROW(parse_pocket_centers("pockets 3\n1 0 0 0 1 1\n"), ParseError);
  EXPECT_THROW(parse_pocket_centers("nothing\n"), ParseError);
  EXPECT_THROW(parse_pocket_centers("pockets 1\n1 0 zero 0 1 1\n"), ParseError);
  EXPECT_TRUE(parse_pocket_centers("# c\npockets 0\nresidues 0\n").empty());
}

TEST(Formats, VarianceAndLabels) {
  const Structure s = toy_complex();
  const ProteinGraph g = build_graph(s, fake_embeddings(s, 4, 1));
  const Eigen::VectorXd probs = Eigen::VectorXd::LinSpaced(g.n, 0.0, 1.0);
  const Eigen::VectorXd sigma2 = Eigen::VectorXd::LinSpaced(g.n, 0.125, 3.0);
  const auto rows = parse_variance(format_variance(g, probs, sigma2));
  ASSERT_EQ(rows.size(), static_cast<std::size_t>(g.n));
  for (int i = 0; i < g.n; ++i) {
    EXPECT_EQ(rows[i].key, g.keys[i]);
    EXPECT_NEAR(rows[i].sigma2, sigma2[i], 1e-8 * sigma2[i]);
  }
  const auto labels = parse_labels("chain resseq label\nA 3 1\n_ -2 0\n");
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels[1].first.chain, ' ');
  EXPECT_EQ(labels[1].first.seq, -2);
  EXPECT_THROW(parse_labels("A 3 2\n"), ParseError);
  EXPECT_THROW(parse_labels("AB 3 1\n"), ParseError);
}

TEST(Formats, AttentionRowsSumToOne) {
  const Structure s = toy_complex();
  const ProteinGraph g = build_graph(s, fake_embeddings(s, 4, 1));
  Matrix alpha(g.num_edges(), 1);
  for (int i = 0; i < g.n; ++i)
    for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e) alpha(e, 0) = 1.0 / g.degree(i);
  std::istringstream in(format_attention("toy", 1, g, alpha));
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "protein toy layer 1 head 0");
  for (int i = 0; i < g.n; ++i) {
    double total = 0.0, v = 0.0;
    for (int j = 0; j < g.n; ++j) {
      in >> v;
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-5);
  }
}

TEST(Formats, FilesAndChains) {
  const fs::path dir = testkit::scratch_dir("files");
  write_file_atomic(dir / "a.txt", "hello");
  EXPECT_EQ(read_file(dir / "a.txt"), "hello");
  EXPECT_FALSE(fs::exists(dir / "a.txt.tmp"));
  EXPECT_THROW(read_file(dir / "missing"), IoError);
  EXPECT_EQ(chain_to_text(' '), '_');
  EXPECT_EQ(chain_from_text("_"), ' ');
  EXPECT_EQ(chain_from_text("B"), 'B');
}

TEST(Cli, PredictWritesOutputsAndReportsPockets) {
  const fs::path dir = testkit::scratch_dir("predict");
  populate(dir, 1);
  const CliRun r = run({"predict", (dir / "p0.pdb").string(), "--checkpoint", (dir / "model.ckpt").string(), "--out",
                     (dir / "out").string(), "--tau", "0.01", "--dump-variance", "--dump-attention"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("p0 pockets ", 0), 0u);
  for (const char* ext : {".pockets", ".probs", ".variance", ".layer1.attention"})
    EXPECT_TRUE(fs::exists(dir / "out" / (std::string("p0") + ext))) << ext;
  const std::string pockets = read_file(dir / "out" / "p0.pockets");
  EXPECT_EQ(pockets.rfind("# gdegan 0.1.0\n# command: predict\n", 0), 0u);
  EXPECT_FALSE(parse_pocket_centers(pockets).empty());

  const CliRun stats = run({"analyze-variance", (dir / "out" / "p0.variance").string(), "--structure",
                         (dir / "p0.pdb").string()});
  ASSERT_EQ(stats.code, kExitOk) << stats.err;
  EXPECT_NE(stats.out.find("point-biserial"), std::string::npos);
}

TEST(Cli, PredictIsByteDeterministicAcrossJobCounts) {
  const fs::path dir = testkit::scratch_dir("determinism");
  populate(dir, 3);
  auto predict = [&](const std::string& out, const std::string& jobs) {
    return run({"predict", (dir / "p0.pdb").string(), (dir / "p1.pdb").string(), (dir / "p2.pdb").string(),
                "--checkpoint", (dir / "model.ckpt").string(), "--out", (dir / out).string(), "--tau", "0.05",
                "--dump-attention", "--jobs", jobs});
  };
  const CliRun a = predict("a", "1"), b = predict("b", "2"), c = predict("c", "1");
  EXPECT_EQ(a.code, b.code);
  EXPECT_EQ(a.out, b.out);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    EXPECT_EQ(read_file(entry.path()), read_file(dir / "b" / name)) << name;
    EXPECT_EQ(read_file(entry.path()), read_file(dir / "c" / name)) << name;
  }
}

TEST(Cli, ZeroPocketsExitCode) {
  const fs::path dir = testkit::scratch_dir("zero");
  populate(dir, 1);
  const CliRun r = run({"predict", (dir / "p0.pdb").string(), "--checkpoint", (dir / "model.ckpt").string(), "--out",
                     (dir / "out").string(), "--tau", "1.0"});
  EXPECT_EQ(r.code, kExitNoPockets);
  EXPECT_EQ(parse_pocket_centers(read_file(dir / "out" / "p0.pockets")).size(), 0u);
}

TEST(Cli, InputErrorsExitWithTwo) {
  const fs::path dir = testkit::scratch_dir("errors");
  populate(dir, 1);
  EXPECT_EQ(run({"predict", (dir / "p0.pdb").string(), "--checkpoint", (dir / "nope.ckpt").string()}).code, kExitInput);
  EXPECT_EQ(run({"predict", (dir / "p0.pdb").string(), "--checkpoint", (dir / "model.ckpt").string(), "--tau", "0"})
                .code,
            kExitInput);
  testkit::write_text(dir / "wide.cfg", "n_d=8\nh_d=16\ne_d=16\nK=8\nH=2\nL=1\nL_max=2\n");
  EXPECT_EQ(run({"predict", (dir / "p0.pdb").string(), "--checkpoint", (dir / "model.ckpt").string(), "--config",
                 (dir / "wide.cfg").string(), "--out", (dir / "o").string()})
                .code,
            kExitInput);
  EXPECT_EQ(run({"predict", (dir / "p0.pdb").string(), "--checkpoint", (dir / "model.ckpt").string(), "--embeddings",
                 (dir / "p0.pdb").string(), "--out", (dir / "o").string()})
                .code,
            kExitInput);
  EXPECT_EQ(run({"frobnicate"}).code, kExitInput);
  EXPECT_EQ(run({}).code, kExitInput);
  EXPECT_EQ(run({"check-equivariance", "--trials", "0"}).code, kExitInput);
  EXPECT_EQ(run({"analyze-variance", "x.variance"}).code, kExitInput);
}

TEST(Cli, CheckEquivarianceExitCodes) {
  const fs::path dir = testkit::scratch_dir("equi");
  testkit::write_text(dir / "micro.cfg", kMicroConfig);
  const std::string cfg = (dir / "micro.cfg").string();
  const CliRun ok = run({"check-equivariance", "--config", cfg, "--trials", "2", "--graphs", "1", "--residues", "12"});
  EXPECT_EQ(ok.code, kExitOk) << ok.out;
  EXPECT_NE(ok.out.find("PASS"), std::string::npos);
  const CliRun bad = run({"check-equivariance", "--config", cfg, "--trials", "2", "--graphs", "1", "--residues", "12",
                       "--corrupt-wigner"});
  EXPECT_EQ(bad.code, kExitCheckFailed);
}

TEST(Cli, ToyTrainTraceAndDivergence) {
  const fs::path dir = testkit::scratch_dir("train");
  ASSERT_EQ(run({"make-fixture", "--out", (dir / "toy.pdb").string()}).code, kExitOk);
  const CliRun r = run({"toy-train", (dir / "toy.pdb").string(), "--steps", "1", "--trace", (dir / "trace.txt").string(),
                     "--checkpoint", (dir / "toy.ckpt").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("reduction"), std::string::npos);
  std::istringstream trace(read_file(dir / "trace.txt"));
  std::string line;
  int values = 0;
  while (std::getline(trace, line))
    if (!line.empty() && line[0] != '#') ++values;
  EXPECT_EQ(values, 2);
  EXPECT_NO_THROW(load_checkpoint(read_file(dir / "toy.ckpt")));
  EXPECT_EQ(run({"toy-train", (dir / "toy.pdb").string(), "--steps", "2", "--inject-nan", "1"}).code, kExitDiverged);
}

TEST(Cli, EvaluateCountsHitsMissesAndMissingPredictions) {
  const fs::path dir = testkit::scratch_dir("evaluate");
  fs::create_directories(dir / "pdb");
  fs::create_directories(dir / "pred");
  std::vector<Structure> complexes;
  for (int k = 0; k < 3; ++k) {
    complexes.push_back(toy_complex(20 + k));
    testkit::write_text(dir / "pdb" / ("c" + std::to_string(k) + ".pdb"), write_pdb(complexes.back()));
  }
  const Vec3 hit = centroid(complexes[0].ligands[0]) + Vec3(1.0, 0, 0);
  const Vec3 miss = centroid(complexes[1].ligands[0]) + Vec3(0, 9.0, 0);
  testkit::write_text(dir / "pred" / "c0.pockets", pocket_text({hit}));
  testkit::write_text(dir / "pred" / "c1.pockets", pocket_text({miss, hit}));
  testkit::write_text(dir / "pred" / "stray.pockets", pocket_text({hit}));

  const CliRun r = run({"evaluate", "--predictions", (dir / "pred").string(), "--structures", (dir / "pdb").string(),
                     "--report", (dir / "report.tsv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("proteins 3\n"), std::string::npos);
  EXPECT_NE(r.out.find("ligands 3\n"), std::string::npos);
  EXPECT_NE(r.out.find("DCC success rate 0.3333\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("failure rate 0.3333\n"), std::string::npos);
  EXPECT_NE(r.err.find("stray"), std::string::npos);
  EXPECT_NE(r.err.find("c2.pdb"), std::string::npos);
  const std::string tsv = read_file(dir / "report.tsv");
  EXPECT_NE(tsv.find("protein\tligand\trank\tdcc\tdca\tdcc_hit\tdca_hit\n"), std::string::npos);
  EXPECT_NE(tsv.find("c0\tLIG:A:901\t1\t"), std::string::npos) << tsv;
}

TEST(Cli, EvaluateWithNoPredictionsFailsEverything) {
  const fs::path dir = testkit::scratch_dir("evaluate_empty");
  fs::create_directories(dir / "pdb");
  fs::create_directories(dir / "pred");
  for (int k = 0; k < 2; ++k)
    testkit::write_text(dir / "pdb" / ("c" + std::to_string(k) + ".pdb"), write_pdb(toy_complex(30 + k)));
  const CliRun r = run({"evaluate", "--predictions", (dir / "pred").string(), "--structures", (dir / "pdb").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("failure rate 1.0000\n"), std::string::npos);
  EXPECT_NE(r.out.find("DCC success rate 0.0000\n"), std::string::npos);
}

TEST(Cli, AnalyzeVarianceFromLabelFile) {
  const fs::path dir = testkit::scratch_dir("variance");
  testkit::write_text(dir / "v.variance",
                      "# x\nindex chain resseq prob sigma2\n0 A 1 0.1 1\n1 A 2 0.2 2\n2 A 3 0.3 3\n3 A 4 0.4 4\n");
  testkit::write_text(dir / "labels.txt", "A 1 0\nA 2 0\nA 3 1\nA 4 1\n");
  const CliRun r = run({"analyze-variance", (dir / "v.variance").string(), "--labels", (dir / "labels.txt").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("pearson r           0.8944"), std::string::npos) << r.out;
  testkit::write_text(dir / "short.txt", "A 1 0\n");
  EXPECT_EQ(run({"analyze-variance", (dir / "v.variance").string(), "--labels", (dir / "short.txt").string()}).code,
            kExitInput);
}
