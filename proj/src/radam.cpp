#include "vwgan/radam.hpp"

#include <cmath>

#include "vwgan/errors.hpp"

namespace vwgan {

void RAdamConfig::validate() const {
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw ValueError("radam betas must lie in [0, 1)");
  if (eps <= 0.0) throw ValueError("radam eps must be positive");
}

double radam_rho_inf(double beta2) { return 2.0 / (1.0 - beta2) - 1.0; }

double radam_rho_t(double beta2, int64_t t) {
  const double b2t = std::pow(beta2, static_cast<double>(t));
  return radam_rho_inf(beta2) - 2.0 * static_cast<double>(t) * b2t / (1.0 - b2t);
}

void radam_init(RAdamState& state, const std::vector<Tensor*>& params) {
  state.t = 0;
  state.m.clear();
  state.v.clear();
  for (const Tensor* p : params) {
    state.m.emplace_back(p->shape);
    state.v.emplace_back(p->shape);
  }
}

void radam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
                const std::vector<std::string>& names, RAdamState& state, double lr,
                const RAdamConfig& cfg) {
  cfg.validate();
  if (params.size() != grads.size() || params.size() != names.size() ||
      params.size() != state.m.size())
    throw ValueError("radam_step: parameter, gradient and state counts differ");

  for (size_t i = 0; i < grads.size(); i++) {
    for (double g : grads[i]->data) {
      if (!std::isfinite(g))
        throw NumericError("non-finite gradient in parameter '" + names[i] + "'");
    }
  }

  state.t++;
  const int64_t t = state.t;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double b1t = std::pow(b1, static_cast<double>(t));
  const double b2t = std::pow(b2, static_cast<double>(t));
  const double rho_inf = radam_rho_inf(b2);
  const double rho_t = rho_inf - 2.0 * static_cast<double>(t) * b2t / (1.0 - b2t);
  const bool rectified = rho_t > 4.0;
  double r_t = 1.0;
  if (rectified) {
    r_t = std::sqrt(((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) /
                    ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
  }

  for (size_t i = 0; i < params.size(); i++) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    if (g.shape != p.shape)
      throw ShapeError("radam_step: gradient shape mismatch for '" + names[i] + "'");
    const int64_t n = p.numel();
    for (int64_t j = 0; j < n; j++) {
      m.data[j] = b1 * m.data[j] + (1.0 - b1) * g.data[j];
      v.data[j] = b2 * v.data[j] + (1.0 - b2) * g.data[j] * g.data[j];
      const double m_hat = m.data[j] / (1.0 - b1t);
      if (rectified) {
        const double v_hat = std::sqrt(v.data[j] / (1.0 - b2t));
        p.data[j] -= lr * r_t * m_hat / (v_hat + cfg.eps);
      } else {
        p.data[j] -= lr * m_hat;
      }
    }
  }
}

}  // namespace vwgan
