#pragma once

#include <functional>
#include <vector>

#include "seqdec/bayes/gamma.hpp"

namespace seqdec {

struct SviOptions {
  int steps = 5000;
  int mc_samples = 16;
  double learning_rate = 0.05;
  // Robbins-Monro schedule: lr_t = learning_rate / (1 + t/decay_t0)^decay_kappa
  double decay_t0 = 1000.0;
  double decay_kappa = 0.75;
  double grad_clip = 25.0;
  uint64_t seed = 7;
  // Bounds on log(shape) and log(rate) of the variational factors.
  double min_log_param = -12.0;
  double max_log_param = 18.0;
  // ELBO tracing costs one extra pass per step; callers that only need the
  // fitted factors can turn it off.
  bool record_elbo = true;
};

struct SviTrace {
  std::vector<double> elbo;
};

// Disjoint window means of an ELBO trace (window size in steps).
std::vector<double> elbo_window_means(const std::vector<double>& elbo,
                                      int window);

// True when successive window means over the final `fraction` of the trace
// never drop by more than `slack`.
bool elbo_windows_nondecreasing(const std::vector<double>& elbo, int window,
                                double fraction, double slack);

// A variational problem over K Gamma-distributed scalar latents, optimised
// with score-function (REINFORCE) gradients and per-parameter control
// variates. Conjugate factors live outside: `refresh` is called once per
// step so closed-form updates stay in sync with the current scalars.
struct SviModel {
  // Log-joint terms containing latent k, evaluated at the sampled scalars z.
  std::function<double(int k, const Eigen::ArrayXd& z)> blanket;
  // All log-joint terms involving the scalars, each counted once (ELBO).
  std::function<double(const Eigen::ArrayXd& z)> log_joint;
  // Optional: conjugate-factor refresh given the current factors.
  std::function<void(const std::vector<GammaParams>& q)> refresh;
  // Optional: analytic ELBO terms that do not involve the scalars.
  std::function<double()> elbo_rest;
};

std::vector<GammaParams> run_svi(const SviModel& model,
                                 std::vector<GammaParams> init,
                                 const SviOptions& options,
                                 SviTrace* trace = nullptr);

}  // namespace seqdec
