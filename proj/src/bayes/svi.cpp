#include "seqdec/bayes/svi.hpp"

#include <algorithm>
#include <cmath>

#include "seqdec/errors.hpp"

namespace seqdec {

std::vector<double> elbo_window_means(const std::vector<double>& elbo,
                                      int window) {
  std::vector<double> means;
  for (size_t start = 0; start + window <= elbo.size();
       start += static_cast<size_t>(window)) {
    double total = 0.0;
    for (int i = 0; i < window; ++i) total += elbo[start + i];
    means.push_back(total / window);
  }
  return means;
}

bool elbo_windows_nondecreasing(const std::vector<double>& elbo, int window,
                                double fraction, double slack) {
  const auto means = elbo_window_means(elbo, window);
  if (means.size() < 2) return true;
  const size_t first =
      static_cast<size_t>((1.0 - fraction) * static_cast<double>(means.size()));
  for (size_t i = first + 1; i < means.size(); ++i) {
    if (means[i] < means[i - 1] - slack) return false;
  }
  return true;
}

namespace {

// Factors are optimised in (log mean, log shape) space, which decouples the
// location of the factor from its concentration.
struct FactorState {
  double log_mean;
  double log_shape;
  double grad_sq_mean = 0.0;  // AdaGrad accumulators
  double grad_sq_shape = 0.0;

  GammaParams params() const {
    const double shape = std::exp(log_shape);
    return {shape, shape / std::exp(log_mean)};
  }
};

double clamp(double x, double lo, double hi) {
  return std::min(hi, std::max(lo, x));
}

}  // namespace

std::vector<GammaParams> run_svi(const SviModel& model,
                                 std::vector<GammaParams> init,
                                 const SviOptions& options, SviTrace* trace) {
  const int k_latents = static_cast<int>(init.size());
  if (k_latents == 0) throw ContractError("run_svi needs at least one latent");
  const int n_mc = options.mc_samples;
  if (n_mc < 2) throw ConfigError("mc_samples must be >= 2");

  std::vector<FactorState> state(init.size());
  for (int k = 0; k < k_latents; ++k) {
    state[k].log_mean = std::log(init[k].mean());
    state[k].log_shape = std::log(init[k].shape);
  }

  Rng rng(options.seed);
  std::vector<GammaParams> q(k_latents);
  Eigen::ArrayXXd draws(n_mc, k_latents);
  Eigen::ArrayXXd log_q(n_mc, k_latents);

  if (trace && options.record_elbo) trace->elbo.reserve(options.steps);

  for (int step = 0; step < options.steps; ++step) {
    for (int k = 0; k < k_latents; ++k) q[k] = state[k].params();
    if (model.refresh) model.refresh(q);

    for (int i = 0; i < n_mc; ++i) {
      for (int k = 0; k < k_latents; ++k) {
        double z = q[k].sample(rng);
        if (z < 1e-290) z = 1e-290;
        draws(i, k) = z;
        log_q(i, k) = q[k].log_pdf(z);
      }
    }

    const double lr = options.learning_rate /
                      std::pow(1.0 + step / options.decay_t0, options.decay_kappa);

    for (int k = 0; k < k_latents; ++k) {
      const double shape = q[k].shape;
      const double mean = shape / q[k].rate;
      const double psi_shape = digamma(shape);
      const double log_shape = std::log(shape);
      const double log_mean = std::log(mean);

      // Score components in (log mean, log shape) space and the learning
      // signal W = blanket - log q for each Monte Carlo draw.
      Eigen::ArrayXd h_m(n_mc), h_k(n_mc), w(n_mc);
      for (int i = 0; i < n_mc; ++i) {
        const double z = draws(i, k);
        h_m[i] = shape * (z / mean - 1.0);
        h_k[i] = shape * (log_shape - log_mean + 1.0 - psi_shape +
                          std::log(z) - z / mean);
        Eigen::ArrayXd z_row = draws.row(i);
        w[i] = model.blanket(k, z_row) - log_q(i, k);
      }

      // Optimal scalar control variate per parameter: Cov(hW, h)/Var(h).
      auto cv_grad = [&](const Eigen::ArrayXd& h) {
        const double h_mean = h.mean();
        const Eigen::ArrayXd hc = h - h_mean;
        const double var = (hc * hc).mean();
        double c = 0.0;
        if (var > 1e-12) {
          const Eigen::ArrayXd g = h * w;
          c = (hc * (g - g.mean())).mean() / var;
        }
        return (h * (w - c)).mean();
      };

      const double grad_m = cv_grad(h_m);
      const double grad_k = cv_grad(h_k);

      // AdaGrad keeps steps scale-free; the raw signal spans many orders of
      // magnitude across models and early/late optimisation.
      state[k].grad_sq_mean += grad_m * grad_m;
      state[k].grad_sq_shape += grad_k * grad_k;
      const double step_m =
          lr * grad_m / std::sqrt(state[k].grad_sq_mean + 1e-12);
      const double step_k =
          lr * grad_k / std::sqrt(state[k].grad_sq_shape + 1e-12);

      state[k].log_mean =
          clamp(state[k].log_mean + clamp(step_m, -options.grad_clip, options.grad_clip),
                options.min_log_param, options.max_log_param);
      state[k].log_shape =
          clamp(state[k].log_shape + clamp(step_k, -options.grad_clip, options.grad_clip),
                std::log(0.05), 16.0);
    }

    if (trace && options.record_elbo) {
      double elbo = 0.0;
      for (int i = 0; i < n_mc; ++i) {
        Eigen::ArrayXd z_row = draws.row(i);
        elbo += model.log_joint(z_row) - log_q.row(i).sum();
      }
      elbo /= n_mc;
      if (model.elbo_rest) elbo += model.elbo_rest();
      trace->elbo.push_back(elbo);
    }
  }

  std::vector<GammaParams> result(k_latents);
  for (int k = 0; k < k_latents; ++k) result[k] = state[k].params();
  if (model.refresh) model.refresh(result);
  return result;
}

}  // namespace seqdec
