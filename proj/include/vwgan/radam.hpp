#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vwgan/tensor.hpp"

namespace vwgan {

struct RAdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-6;

  void validate() const;
};

double radam_rho_inf(double beta2);
double radam_rho_t(double beta2, int64_t t);

struct RAdamState {
  int64_t t = 0;
  std::vector<Tensor> m, v;  // first and second moments, one slot per parameter
};

void radam_init(RAdamState& state, const std::vector<Tensor*>& params);

// One update over all parameters; t advances by one. Throws NumericError
// naming the first parameter whose gradient is non-finite.
void radam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
                const std::vector<std::string>& names, RAdamState& state, double lr,
                const RAdamConfig& cfg);

}  // namespace vwgan
