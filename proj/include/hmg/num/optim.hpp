#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hmg/num/rng.hpp"
#include "hmg/num/tape.hpp"

namespace hmg::num {

struct AdamConfig {
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam step; weight decay enters as an L2 gradient term.
/// Gradients are zeroed afterwards. Throws on non-finite gradients.
void adam_step(const std::vector<Parameter*>& params, const AdamConfig& config);

struct GradientCheckConfig {
  double step = 1e-5;
  // check at most this many coordinates per parameter (seeded sample);
  // unset = all coordinates
  std::optional<int> max_coords_per_param;
  std::uint64_t seed = 0;
};

/// Central finite differences against the analytic gradients of `loss`
/// (a deterministic fragment: dropout off, batch norm in eval mode).
/// `loss` must populate Parameter::grad when `with_grad` is true and always
/// return the loss value. Returns the max relative error.
double gradient_check(const std::vector<Parameter*>& params,
                      const std::function<double(bool with_grad)>& loss,
                      const GradientCheckConfig& config = {});

}  // namespace hmg::num
