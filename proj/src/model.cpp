#include "gdegan/model.hpp"

#include "gdegan/errors.hpp"
#include "gdegan/geom.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>

namespace gdegan {

namespace {

constexpr double kDirectionEps = 1e-12;

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError("bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (n_d < 1) fail("n_d must be >= 1");
  if (h_d < 1) fail("h_d must be >= 1");
  if (e_d != h_d) fail("e_d must equal h_d");
  if (K < 1) fail("K must be >= 1");
  if (H < 1 || h_d % H != 0) fail("H must divide h_d");
  if (L < 0) fail("L must be >= 0");
  if (L_max < 1 || L_max > kMaxDegree) fail("L_max must be 1 or 2");
  if (!(r_c > 0.0)) fail("r_c must be positive");
  if (max_neighbors < 1) fail("max_neighbors must be >= 1");
  if (!(eps > 0.0)) fail("eps must be positive");
  if (!(tau > 0.0 && tau <= 1.0)) fail("tau must lie in (0, 1]");
}

std::string format_config(const ModelConfig& c) {
  std::string out;
  auto put = [&](const char* k, const std::string& v) { out += std::string(k) + "=" + v + "\n"; };
  put("n_d", std::to_string(c.n_d));
  put("h_d", std::to_string(c.h_d));
  put("e_d", std::to_string(c.e_d));
  put("K", std::to_string(c.K));
  put("H", std::to_string(c.H));
  put("L", std::to_string(c.L));
  put("L_max", std::to_string(c.L_max));
  put("r_c", format_double(c.r_c));
  put("max_neighbors", std::to_string(c.max_neighbors));
  put("eps", format_double(c.eps));
  put("tau", format_double(c.tau));
  put("seed", std::to_string(c.seed));
  return out;
}

ModelConfig apply_config_entry(ModelConfig c, std::string_view key, std::string_view value) {
  if (key == "n_d") c.n_d = parse_number<int>(key, value);
  else if (key == "h_d") c.h_d = parse_number<int>(key, value);
  else if (key == "e_d") c.e_d = parse_number<int>(key, value);
  else if (key == "K") c.K = parse_number<int>(key, value);
  else if (key == "H") c.H = parse_number<int>(key, value);
  else if (key == "L") c.L = parse_number<int>(key, value);
  else if (key == "L_max") c.L_max = parse_number<int>(key, value);
  else if (key == "r_c") c.r_c = parse_number<double>(key, value);
  else if (key == "max_neighbors") c.max_neighbors = parse_number<int>(key, value);
  else if (key == "eps") c.eps = parse_number<double>(key, value);
  else if (key == "tau") c.tau = parse_number<double>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
  return c;
}

namespace {

const ModelConfig& validated(const ModelConfig& c) {
  c.validate();
  return c;
}

}  // namespace

ModelWeights::ModelWeights(const ModelConfig& c)
    : cfg(validated(c)), init(c.n_d, c.h_d, c.K, c.e_d), head(c.h_d, c.h_d, 1) {
  for (int layer = 0; layer < c.L; ++layer) {
    attention.emplace_back(c.H, c.eps);
    blocks.emplace_back(c.h_d, c.e_d, c.L_max);
  }
}

TensorRefs ModelWeights::tensors() {
  TensorRefs out;
  append_tensors(out, "init", init);
  for (std::size_t layer = 0; layer < blocks.size(); ++layer) {
    const std::string p = "layer" + std::to_string(layer);
    append_tensors(out, p + ".gda", attention[layer]);
    append_tensors(out, p, blocks[layer]);
  }
  append_tensors(out, "head", head);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelWeights::tensors() const {
  auto refs = const_cast<ModelWeights*>(this)->tensors();
  return {refs.begin(), refs.end()};
}

ModelWeights init_model(const ModelConfig& cfg, std::uint64_t seed) {
  ModelWeights w(cfg);
  std::mt19937_64 rng(seed);
  // explicit 53-bit mantissa draw; std distributions are not portable
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  Eigen::Index fan_in = 1;
  for (auto& [name, t] : w.tensors()) {
    if (ends_with(name, ".scale") || ends_with(name, ".shift") || ends_with(name, ".xi_raw")) continue;
    if (!ends_with(name, ".bias")) fan_in = t->rows();
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index k = 0; k < t->size(); ++k) {
      t->data()[k] = static_cast<float>((2.0 * uniform() - 1.0) * bound);
    }
  }
  return w;
}

std::size_t count_params(const ModelWeights& w) {
  std::size_t total = 0;
  for (const auto& [name, t] : w.tensors()) total += static_cast<std::size_t>(t->size());
  return total;
}

Prediction forward(const ProteinGraph& g, const ModelWeights& w, Exec exec, bool keep_diagnostics) {
  const ModelConfig& cfg = w.cfg;
  if (g.feature_dim() != cfg.n_d) {
    throw ShapeError("graph features have width " + std::to_string(g.feature_dim()) +
                     ", model expects " + std::to_string(cfg.n_d));
  }
  LayerState state = initial_state(g, w.init, cfg.L_max, exec);
  Prediction pred;
  for (std::size_t layer = 0; layer < w.blocks.size(); ++layer) {
    LayerDiagnostics diag;
    state = layer_forward(state, g, w.attention[layer], w.blocks[layer], exec,
                          keep_diagnostics ? &diag : nullptr);
    if (keep_diagnostics) pred.layers.push_back(std::move(diag));
  }

  const Matrix logits = w.head(state.h);
  pred.probs.resize(g.n);
  for (int i = 0; i < g.n; ++i) pred.probs[i] = sigmoid(logits(i, 0));

  pred.dirs.assign(g.n, Vec3::Zero());
  const Matrix& x1 = state.x[0];
  for (int i = 0; i < g.n; ++i) {
    // harmonic order (y, z, x) -> Cartesian
    const Eigen::Vector3d mean = x1.middleRows(i * 3, 3).rowwise().mean();
    const Vec3 v(mean[2], mean[0], mean[1]);
    pred.dirs[i] = v / (v.norm() + kDirectionEps);
  }
  pred.h = std::move(state.h);
  pred.steerable = std::move(state.x);
  return pred;
}

double dice_loss(const Eigen::VectorXd& probs, const std::vector<int>& labels, double smooth) {
  if (static_cast<std::size_t>(probs.size()) != labels.size()) {
    throw ShapeError("dice_loss: prediction and label lengths differ");
  }
  double inter = 0.0, sum_p = 0.0, sum_y = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    inter += probs[i] * labels[i];
    sum_p += probs[i];
    sum_y += labels[i];
  }
  return 1.0 - (2.0 * inter + smooth) / (sum_p + sum_y + smooth);
}

double directional_loss(const std::vector<Vec3>& predicted, const std::vector<Vec3>& truth,
                        const std::vector<std::uint8_t>& mask) {
  if (predicted.size() != truth.size() || truth.size() != mask.size()) {
    throw ShapeError("directional_loss: length mismatch");
  }
  double total = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    total += 1.0 - predicted[i].dot(truth[i]);
    ++count;
  }
  return count == 0 ? 0.0 : total / count;
}

std::vector<std::uint8_t> direction_mask(const ProteinGraph& g) {
  std::vector<std::uint8_t> mask(g.n, 0);
  for (int i = 0; i < g.n; ++i) mask[i] = g.labels[i] == 1 && g.dir_defined[i];
  return mask;
}

double total_loss(const ProteinGraph& g, const Prediction& pred) {
  return dice_loss(pred.probs, g.labels) + directional_loss(pred.dirs, g.true_dirs, direction_mask(g));
}

}  // namespace gdegan
