#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "vwgan/radam.hpp"
#include "vwgan/rng.hpp"
#include "vwgan/train_config.hpp"

using namespace vwgan;

namespace {

struct Opt {
  Tensor p{std::vector<int>{4}};
  Tensor g{std::vector<int>{4}};
  RAdamState state;
  RAdamConfig cfg;

  Opt() { radam_init(state, {&p}); }
  void step(double lr = 1e-3) { radam_step({&p}, {&g}, {"p"}, state, lr, cfg); }
};

}  // namespace

// Acceptance criterion 8 (schedule): 1e-4 until 200k steps, then halved every
// further 200k.
TEST_CASE("learning rate schedule halves every lr_half_every steps") {
  TrainConfig cfg;  // lr_init 1e-4, lr_half_every 200000
  CHECK(lr_at(0, cfg) == 1e-4);
  CHECK(lr_at(1, cfg) == 1e-4);
  CHECK(lr_at(199999, cfg) == 1e-4);
  CHECK(lr_at(200000, cfg) == 5e-5);
  CHECK(lr_at(399999, cfg) == 5e-5);
  CHECK(lr_at(400000, cfg) == 2.5e-5);
  cfg.lr_half_every = 10;
  cfg.lr_init = 8.0;
  CHECK(lr_at(35, cfg) == 1.0);
}

TEST_CASE("radam rho sequence and rectification threshold") {
  CHECK(radam_rho_inf(0.999) == doctest::Approx(1999.0).epsilon(1e-9));
  CHECK(radam_rho_t(0.999, 1) == doctest::Approx(1.0).epsilon(1e-6));
  // Variance rectification is undefined (rho <= 4) for the first four steps
  // and switches on at t = 5.
  for (int64_t t = 1; t <= 4; t++) CHECK(radam_rho_t(0.999, t) <= 4.0);
  for (int64_t t = 5; t <= 12; t++) CHECK(radam_rho_t(0.999, t) > 4.0);
  // Monotone approach to rho_inf.
  CHECK(radam_rho_t(0.999, 1000) < radam_rho_t(0.999, 10000));
  CHECK(radam_rho_t(0.999, 10000) < radam_rho_inf(0.999));
}

TEST_CASE("unrectified steps are plain bias-corrected momentum") {
  // Before rectification the update must be linear in the gradient: no
  // second-moment normalization. Scaling the gradient by 100 scales the step
  // by 100.
  Opt a, b;
  for (int64_t j = 0; j < 4; j++) {
    a.p[j] = b.p[j] = 1.0;
    a.g[j] = 0.01 * static_cast<double>(j + 1);
    b.g[j] = 100.0 * a.g[j];
  }
  a.step();
  b.step();
  for (int64_t j = 0; j < 4; j++) {
    const double da = 1.0 - a.p[j], db = 1.0 - b.p[j];
    CHECK(db == doctest::Approx(100.0 * da).epsilon(1e-12));
    // t = 1: m_hat = g exactly, so the step is lr * g.
    CHECK(da == doctest::Approx(1e-3 * a.g[j]).epsilon(1e-12));
  }

  // From t = 5 the step is normalized by sqrt(v_hat): scaling the gradient
  // history by 100 leaves the rectified (5th) increment essentially unchanged.
  Opt e, f;
  for (int64_t j = 0; j < 4; j++) {
    e.g[j] = 0.01;
    f.g[j] = 1.0;
  }
  double e4 = 0.0, f4 = 0.0;
  for (int t = 0; t < 4; t++) {
    e.step();
    f.step();
  }
  e4 = e.p[0];
  f4 = f.p[0];
  e.step();
  f.step();
  const double inc_e = e4 - e.p[0], inc_f = f4 - f.p[0];
  CHECK(inc_e > 0.0);
  CHECK(inc_f > 0.0);
  CHECK(inc_f / inc_e < 2.0);  // not the 100x a linear step would give
}

TEST_CASE("radam matches a scalar reimplementation over ten steps") {
  RAdamConfig cfg;
  Tensor p({3});
  p[0] = 1.0;
  p[1] = -0.5;
  p[2] = 2.0;
  Tensor g({3});
  RAdamState state;
  radam_init(state, {&p});
  double m[3] = {0, 0, 0}, v[3] = {0, 0, 0};
  double q[3] = {1.0, -0.5, 2.0};
  Rng rng(17);
  const double lr = 3e-3;
  for (int64_t t = 1; t <= 10; t++) {
    for (int64_t j = 0; j < 3; j++) g[j] = rng.gaussian();
    radam_step({&p}, {&g}, {"p"}, state, lr, cfg);

    const double b1t = std::pow(cfg.beta1, static_cast<double>(t));
    const double b2t = std::pow(cfg.beta2, static_cast<double>(t));
    const double rho_inf = radam_rho_inf(cfg.beta2);
    const double rho_t = rho_inf - 2.0 * static_cast<double>(t) * b2t / (1.0 - b2t);
    for (int j = 0; j < 3; j++) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / (1.0 - b1t);
      if (rho_t > 4.0) {
        const double r_t = std::sqrt(((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) /
                                     ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
        q[j] -= lr * r_t * m_hat / (std::sqrt(v[j] / (1.0 - b2t)) + cfg.eps);
      } else {
        q[j] -= lr * m_hat;
      }
      CHECK(p[j] == doctest::Approx(q[j]).epsilon(1e-14));
    }
  }
  CHECK(state.t == 10);
}

TEST_CASE("zero gradients leave parameters untouched") {
  Opt o;
  for (int64_t j = 0; j < 4; j++) o.p[j] = 0.25 * static_cast<double>(j) - 0.5;
  const Tensor before = o.p;
  for (int t = 0; t < 8; t++) o.step();
  for (int64_t j = 0; j < 4; j++) CHECK(o.p[j] == before[j]);
}

TEST_CASE("non-finite gradients abort with the parameter name") {
  Opt o;
  o.g[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(o.step(), "non-finite gradient in parameter 'p'", NumericError);
  o.g[2] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(o.step(), NumericError);
}

TEST_CASE("radam input validation") {
  RAdamConfig cfg;
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValueError);
  cfg = RAdamConfig{};
  cfg.eps = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValueError);

  Opt o;
  Tensor extra({4});
  CHECK_THROWS_AS(radam_step({&o.p, &extra}, {&o.g}, {"p"}, o.state, 1e-3, RAdamConfig{}),
                  ValueError);
  Tensor bad_shape({3});
  CHECK_THROWS_AS(radam_step({&o.p}, {&bad_shape}, {"p"}, o.state, 1e-3, RAdamConfig{}),
                  ShapeError);

  RAdamState st;
  radam_init(st, {&o.p});
  CHECK(st.t == 0);
  REQUIRE(st.m.size() == 1);
  CHECK(st.m[0].shape == o.p.shape);
  for (double x : st.v[0].data) CHECK(x == 0.0);
}
