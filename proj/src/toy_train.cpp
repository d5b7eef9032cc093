#include "gdegan/errors.hpp"
#include "gdegan/model.hpp"

#include <cmath>
#include <limits>

namespace gdegan {

Eigen::VectorXd finite_difference_gradient(ModelWeights& w,
                                           const std::function<double(const ModelWeights&)>& objective,
                                           double step) {
  auto tensors = w.tensors();
  Eigen::VectorXd grad(static_cast<Eigen::Index>(count_params(w)));
  Eigen::Index k = 0;
  for (auto& [name, t] : tensors) {
    for (Eigen::Index i = 0; i < t->size(); ++i, ++k) {
      double& v = t->data()[i];
      const double saved = v;
      v = saved + step;
      const double plus = objective(w);
      v = saved - step;
      const double minus = objective(w);
      v = saved;
      grad[k] = (plus - minus) / (2.0 * step);
    }
  }
  return grad;
}

TrainResult toy_train(const ProteinGraph& g, ModelWeights w, const TrainOptions& opt) {
  auto loss_of = [&g](const ModelWeights& m) { return total_loss(g, forward(g, m, Exec::Serial)); };
  auto check = [](double loss, int step) {
    if (!std::isfinite(loss)) {
      throw DivergenceError("loss became non-finite at step " + std::to_string(step));
    }
  };

  TrainResult result;
  result.trace.push_back(loss_of(w));
  check(result.trace.back(), 0);
  for (int step = 0; step < opt.steps; ++step) {
    if (opt.inject_nan_at && *opt.inject_nan_at == step) {
      w.tensors().front().second->data()[0] = std::numeric_limits<double>::quiet_NaN();
    }
    const Eigen::VectorXd grad = finite_difference_gradient(w, loss_of, opt.fd_step);
    Eigen::Index k = 0;
    for (auto& [name, t] : w.tensors()) {
      for (Eigen::Index i = 0; i < t->size(); ++i, ++k) {
        // keep parameters float-representable so checkpoints stay exact
        t->data()[i] = static_cast<float>(t->data()[i] - opt.lr * grad[k]);
      }
    }
    result.trace.push_back(loss_of(w));
    check(result.trace.back(), step + 1);
  }
  result.weights = std::move(w);
  return result;
}

}  // namespace gdegan
