#include "hmg/num/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmg::num {

void adam_step(const std::vector<Parameter*>& params, const AdamConfig& config) {
  for (Parameter* param : params) {
    Matrix grad = param->grad;
    if (!grad.allFinite()) {
      throw std::runtime_error("non-finite gradient in parameter '" +
                               param->name + "'");
    }
    if (config.weight_decay != 0.0) {
      grad += config.weight_decay * param->value;
    }
    param->step_count += 1;
    const double t = static_cast<double>(param->step_count);
    param->adam_m = config.beta1 * param->adam_m + (1.0 - config.beta1) * grad;
    param->adam_v = config.beta2 * param->adam_v +
                    (1.0 - config.beta2) * grad.cwiseAbs2();
    const double m_correction = 1.0 - std::pow(config.beta1, t);
    const double v_correction = 1.0 - std::pow(config.beta2, t);
    param->value -=
        (config.learning_rate *
         (param->adam_m / m_correction).array() /
         ((param->adam_v / v_correction).array().sqrt() + config.eps))
            .matrix();
    param->zero_grad();
  }
}

double gradient_check(const std::vector<Parameter*>& params,
                      const std::function<double(bool with_grad)>& loss,
                      const GradientCheckConfig& config) {
  for (Parameter* param : params) param->zero_grad();
  loss(true);
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (Parameter* param : params) {
    analytic.push_back(param->grad);
    param->zero_grad();
  }

  Rng rng(config.seed);
  double max_rel_error = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Parameter& param = *params[p];
    const Eigen::Index total = param.value.size();
    std::vector<Eigen::Index> coords;
    if (config.max_coords_per_param &&
        total > *config.max_coords_per_param) {
      for (int i = 0; i < *config.max_coords_per_param; ++i) {
        coords.push_back(static_cast<Eigen::Index>(
            rng.index(static_cast<std::size_t>(total))));
      }
    } else {
      coords.resize(total);
      for (Eigen::Index i = 0; i < total; ++i) coords[i] = i;
    }
    for (Eigen::Index coord : coords) {
      double* cell = param.value.data() + coord;
      const double saved = *cell;
      *cell = saved + config.step;
      const double up = loss(false);
      *cell = saved - config.step;
      const double down = loss(false);
      *cell = saved;
      const double numeric = (up - down) / (2.0 * config.step);
      const double exact = analytic[p].data()[coord];
      const double denom =
          std::max({std::abs(numeric) + std::abs(exact), 1e-8});
      max_rel_error =
          std::max(max_rel_error, std::abs(numeric - exact) / denom);
    }
  }
  return max_rel_error;
}

}  // namespace hmg::num
