#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "lmlcc/common/error.hpp"
#include "lmlcc/diffkit/adam.hpp"
#include "lmlcc/diffkit/grad_check.hpp"
#include "lmlcc/diffkit/ops.hpp"
#include "lmlcc/huwindow/window.hpp"

using namespace lmlcc;

TEST_SUITE_BEGIN("huwindow");

namespace {

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

CutVector random_cuts(int n, std::uint64_t seed, double tau = 0.05) {
  return CutVector::make(n, CutsInit::Random, CutsMode::Learnable, seed, tau);
}

// Loss sum_i sum_x branch_i(x)^2 computed directly from the mask definition.
double branch_energy(const std::vector<double>& x, const std::vector<double>& theta, double tau) {
  const auto c = cuts_from_theta(theta);
  const std::size_t n = theta.size();
  double acc = 0.0;
  for (const double v : x) {
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = i == 0 ? 1.0 : sig((v - c[i - 1]) / tau);
      const double hi = i + 1 == n ? 0.0 : sig((v - c[i]) / tau);
      acc += std::pow(v * (lo - hi), 2);
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("cuts from theta") {
  const auto c3 = cuts_from_theta(CutVector::make(3, CutsInit::Constant, CutsMode::Learnable, 0));
  REQUIRE(c3.size() == 2);
  CHECK(c3[0] == doctest::Approx(1.0 / 3.0));
  CHECK(c3[1] == doctest::Approx(2.0 / 3.0));
  const auto c2 = cuts_from_theta(CutVector::make(2, CutsInit::Constant, CutsMode::Learnable, 0));
  REQUIRE(c2.size() == 1);
  CHECK(c2[0] == doctest::Approx(0.5));
  CHECK(cuts_from_theta(CutVector::make(1, CutsInit::Constant, CutsMode::Learnable, 0)).empty());

  const std::vector<double> theta{0.0, std::log(std::exp(1.0) - 1.0)};
  const double d1 = std::log(2.0) + 1e-4;
  const double d2 = 1.0 + 1e-4;
  CHECK(cuts_from_theta(theta)[0] == doctest::Approx(d1 / (d1 + d2)));
  CHECK(cuts_from_theta(theta)[0] == doctest::Approx(0.4094).epsilon(1e-4));

  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(softplus(800.0) == doctest::Approx(800.0));
  CHECK(softplus(-800.0) >= 0.0);
  CHECK_THROWS_AS(CutVector::make(0, CutsInit::Constant, CutsMode::Learnable, 0), ConfigError);
}

TEST_CASE("random init draws theta in [-1, 1] deterministically") {
  const auto a = random_cuts(6, 42);
  const auto b = random_cuts(6, 42);
  CHECK(a.theta == b.theta);
  CHECK(random_cuts(6, 43).theta != a.theta);
  for (const double t : a.theta) {
    CHECK(t >= -1.0);
    CHECK(t <= 1.0);
  }
}

TEST_CASE("cuts stay ordered for extreme theta") {
  for (const std::vector<double>& theta : {std::vector<double>{-50, -50, 30, -50}, std::vector<double>{40, -40, 40},
                                           std::vector<double>{-700, -700}, std::vector<double>{700, 700, 700}}) {
    const auto c = cuts_from_theta(theta);
    double prev = 0.0;
    for (const double v : c) {
      CHECK(v > prev);
      prev = v;
    }
    CHECK(prev < 1.0);
  }
}

TEST_CASE("cuts backward matches numeric Jacobian") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto cv = random_cuts(4, seed);
    const std::vector<double> g{0.3, -1.2, 0.7};
    const auto analytic = cuts_backward(cv.theta, g);
    for (std::size_t j = 0; j < cv.theta.size(); ++j) {
      auto tp = cv.theta, tm = cv.theta;
      tp[j] += 1e-5;
      tm[j] -= 1e-5;
      const auto cp = cuts_from_theta(tp), cm = cuts_from_theta(tm);
      double num = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) num += g[k] * (cp[k] - cm[k]) / 2e-5;
      CHECK(analytic[j] == doctest::Approx(num).epsilon(1e-6));
    }
  }
}

TEST_CASE("window mask values") {
  const double tau = 0.05;
  const double w = window_mask(0.5, 0.25, 0.75, tau, false, false);
  CHECK(w == doctest::Approx(1.0 - 2.0 * sig(-5.0)));
  CHECK(w >= 0.986);
  for (const double x : {0.0, 0.3, 0.99}) CHECK(window_mask(x, 0.0, 1.0, tau, true, true) == 1.0);
  CHECK(window_mask(0.4, 0.4, 10.0, tau, false, true) == doctest::Approx(0.5));
  CHECK(hard_window_mask(0.3, 0.2, 0.5, false, false) == 1.0);
  CHECK(hard_window_mask(0.5, 0.2, 0.5, false, false) == 0.0);
  CHECK(hard_window_mask(0.1, 0.2, 0.5, false, false) == 0.0);
  CHECK(hard_window_mask(-3.0, 0.2, 0.5, true, false) == 1.0);
}

TEST_CASE("interior window is unimodal") {
  const auto cuts = cuts_from_theta(random_cuts(5, 8).theta);
  for (std::size_t i = 1; i + 1 < 5; ++i) {
    bool falling = false;
    double prev = window_mask(0.0, cuts[i - 1], cuts[i], 0.05, false, false);
    for (int k = 1; k <= 2000; ++k) {
      const double w = window_mask(k / 2000.0, cuts[i - 1], cuts[i], 0.05, false, false);
      if (w < prev) falling = true;
      if (falling) CHECK(w <= prev);
      prev = w;
    }
  }
}

TEST_CASE("soft windows converge to the hard partition") {
  const auto cv = random_cuts(4, 3);
  const auto c = cuts_from_theta(cv.theta);
  const double tau = 1e-4;
  double worst = 0.0;
  for (int k = 0; k <= 10000; ++k) {
    const double x = k / 10000.0;
    bool near = false;
    for (const double cut : c) near = near || std::abs(x - cut) <= 10 * tau;
    if (near) continue;
    for (std::size_t i = 0; i < 4; ++i) {
      const double lo = i == 0 ? 0.0 : c[i - 1];
      const double hi = i == 3 ? 1.0 : c[i];
      const double soft = window_mask(x, lo, hi, tau, i == 0, i == 3);
      const double hard = hard_window_mask(x, lo, hi, i == 0, i == 3);
      worst = std::max(worst, std::abs(soft - hard));
    }
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("branch forward") {
  const auto v = random_values(500, 1);
  const auto single = branch_forward(v, CutVector::make(1, CutsInit::Constant, CutsMode::Fixed, 0), false);
  REQUIRE(single.count() == 1);
  CHECK(single.branches[0] == v);

  for (const int n : {2, 3, 6, 11}) {
    const auto cv = random_cuts(n, 100 + n);
    const auto bs = branch_forward(v, cv, true);
    REQUIRE(bs.count() == static_cast<std::size_t>(n) + 1);
    CHECK(bs.branches.back() == v);
    for (std::size_t p = 0; p < v.size(); ++p) {
      double mask_sum = 0.0, branch_sum = 0.0;
      for (int i = 0; i < n; ++i) {
        mask_sum += bs.masks[i][p];
        branch_sum += bs.branches[i][p];
        CHECK(bs.branches[i][p] == doctest::Approx(v[p] * bs.masks[i][p]));
      }
      CHECK(std::abs(mask_sum - 1.0) < 1e-12);
      CHECK(std::abs(branch_sum - v[p]) < 1e-6);
    }
  }

  const auto cv = random_cuts(3, 7);
  const double c1 = cuts_from_theta(cv.theta)[0];
  const std::vector<double> zeros(10, 0.0);
  const auto bz = branch_forward(zeros, cv, false);
  CHECK(bz.masks[0][0] == doctest::Approx(1.0 - sig(-c1 / 0.05)));
  for (int i = 1; i < 3; ++i) CHECK(bz.masks[i][0] < 1e-2);
  for (const auto& b : bz.branches) CHECK(b[0] == 0.0);
}

TEST_CASE("branch backward agrees with finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto v = random_values(64, seed + 10);
    auto cv = random_cuts(3, seed);
    const auto bs = branch_forward(v, cv, false);
    std::vector<std::vector<double>> up = bs.branches;
    for (auto& u : up)
      for (auto& x : u) x *= 2.0;
    const auto g = branch_backward(v, cv, false, up);
    for (std::size_t j = 0; j < cv.theta.size(); ++j) {
      auto tp = cv.theta, tm = cv.theta;
      tp[j] += 1e-5;
      tm[j] -= 1e-5;
      const double num = (branch_energy(v, tp, cv.tau) - branch_energy(v, tm, cv.tau)) / 2e-5;
      const double rel = std::abs(g.grad_theta[j] - num) / std::max({std::abs(num), std::abs(g.grad_theta[j]), 1e-8});
      CHECK(rel < 1e-3);
    }
    for (std::size_t p = 0; p < v.size(); p += 7) {
      auto vp = v, vm = v;
      vp[p] += 1e-6;
      vm[p] -= 1e-6;
      const double num = (branch_energy(vp, cv.theta, cv.tau) - branch_energy(vm, cv.theta, cv.tau)) / 2e-6;
      CHECK(g.grad_values[p] == doctest::Approx(num).epsilon(1e-5));
    }
  }
}

TEST_CASE("cut gradient vanishes for very soft windows") {
  const auto v = random_values(200, 5);
  const auto cv = random_cuts(4, 5, 1e6);
  const auto bs = branch_forward(v, cv, false);
  const auto g = branch_backward(v, cv, false, bs.branches);
  for (const double t : g.grad_theta) CHECK(std::abs(t) < 1e-6);
}

TEST_CASE("original branch passes gradient through") {
  const auto v = random_values(50, 6);
  const auto cv = random_cuts(3, 6);
  std::vector<std::vector<double>> up(4, std::vector<double>(v.size(), 0.0));
  up[3] = random_values(v.size(), 60);
  const auto g = branch_backward(v, cv, true, up);
  CHECK(g.grad_values == up[3]);
  for (const double t : g.grad_theta) CHECK(t == 0.0);
}

TEST_CASE("graph op matches the reference layer") {
  using namespace lmlcc::diff;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (const bool orig : {false, true}) {
      const auto v = random_values(2 * 27, seed + 20);
      const auto cv = random_cuts(3, seed + 30);
      auto x = parameter(Tensor<double>(Shape{2, 1, 3, 3, 3}, v), "x");
      auto theta = parameter(Tensor<double>(Shape{3}, cv.theta), "theta");
      const auto out = window_branches(x, theta, cv.tau, orig);
      const std::size_t nb = orig ? 4 : 3;
      REQUIRE(out->value.shape() == Shape{2, nb, 3, 3, 3});
      for (std::size_t n = 0; n < 2; ++n) {
        const std::vector<double> sample(v.begin() + n * 27, v.begin() + (n + 1) * 27);
        const auto bs = branch_forward(sample, cv, orig);
        for (std::size_t b = 0; b < nb; ++b)
          for (std::size_t p = 0; p < 27; ++p) CHECK(out->value[(n * nb + b) * 27 + p] == doctest::Approx(bs.branches[b][p]));
      }
      const auto r = grad_check([&] { return sum_squares(window_branches(x, theta, cv.tau, orig)); }, {x, theta});
      CHECK(r.max_rel_error < 1e-3);
    }
  }
  auto bad = constant(Tensor<double>(Shape{1, 2, 2, 2, 2}, 0.5));
  CHECK_THROWS_AS(window_branches(bad, constant(Tensor<double>(Shape{2}, 0.0)), 0.05, false), ShapeError);
}

TEST_CASE("cuts stay ordered through many Adam updates") {
  using namespace lmlcc::diff;
  auto theta = parameter(Tensor<double>(Shape{5}, 0.0), "theta");
  AdamHyper h;
  h.lr = 0.5;
  Adam<double> opt({{"theta", theta}}, h);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 5.0);
  bool ordered = true;
  for (int step = 0; step < 1000; ++step) {
    opt.zero_grad();
    for (auto& v : theta->grad.storage()) v = g(rng);
    opt.step();
    const auto c = cuts_from_theta(theta->value.storage());
    double prev = 0.0;
    for (const double v : c) {
      ordered = ordered && v > prev;
      prev = v;
    }
    ordered = ordered && prev < 1.0;
  }
  CHECK(ordered);
}

TEST_SUITE_END();
