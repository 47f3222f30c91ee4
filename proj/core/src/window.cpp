#include "lmlcc/huwindow/window.hpp"

#include <cmath>
#include <random>

#include "lmlcc/common/error.hpp"

namespace lmlcc {
namespace {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Shared per-voxel kernel. s[k] = sigmoid((x - c_k)/tau) and
// ds[k] = d s[k] / dx for the interior cuts k = 0..N-2.
struct CutResponse {
  std::vector<double> s;
  std::vector<double> ds;

  explicit CutResponse(std::size_t n) : s(n), ds(n) {}

  void evaluate(double x, const std::vector<double>& cuts, double tau) {
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      const double v = logistic((x - cuts[k]) / tau);
      s[k] = v;
      ds[k] = v * (1.0 - v) / tau;
    }
  }

  // w_i = L_i - U_i with L_0 = 1 and U_{N-1} = 0.
  double weight(std::size_t i, std::size_t n) const {
    const double lo = i == 0 ? 1.0 : s[i - 1];
    const double hi = i + 1 == n ? 0.0 : s[i];
    return lo - hi;
  }
  double weight_slope(std::size_t i, std::size_t n) const {
    const double lo = i == 0 ? 0.0 : ds[i - 1];
    const double hi = i + 1 == n ? 0.0 : ds[i];
    return lo - hi;
  }
};

void check_cut_vector(const CutVector& cv) {
  if (cv.n_branches < 1) throw ConfigError("the window layer needs at least one branch");
  if (cv.theta.size() != static_cast<std::size_t>(cv.n_branches)) {
    throw ConfigError("theta must have one entry per branch");
  }
  if (!(cv.tau > 0.0)) throw ConfigError("window softness tau must be positive");
}

}  // namespace

std::string to_string(CutsMode mode) { return mode == CutsMode::Learnable ? "learnable" : "fixed"; }
std::string to_string(CutsInit init) { return init == CutsInit::Constant ? "constant" : "random"; }

CutsMode parse_cuts_mode(const std::string& s) {
  if (s == "learnable") return CutsMode::Learnable;
  if (s == "fixed") return CutsMode::Fixed;
  throw ConfigError("cuts must be 'learnable' or 'fixed', got '" + s + "'");
}

CutsInit parse_cuts_init(const std::string& s) {
  if (s == "constant") return CutsInit::Constant;
  if (s == "random") return CutsInit::Random;
  throw ConfigError("init must be 'constant' or 'random', got '" + s + "'");
}

CutVector CutVector::make(int n_branches, CutsInit init, CutsMode mode, std::uint64_t seed, double tau) {
  if (n_branches < 1) throw ConfigError("the window layer needs at least one branch");
  CutVector cv;
  cv.n_branches = n_branches;
  cv.tau = tau;
  cv.mode = mode;
  cv.init = init;
  cv.theta.assign(static_cast<std::size_t>(n_branches), 0.0);
  if (init == CutsInit::Random) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& t : cv.theta) t = u(rng);
  }
  return cv;
}

double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

std::vector<double> cuts_from_theta(std::span<const double> theta) {
  if (theta.empty()) throw ConfigError("theta must not be empty");
  std::vector<double> inc(theta.size());
  double total = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    inc[i] = softplus(theta[i]) + kCutIncrementFloor;
    total += inc[i];
  }
  std::vector<double> cuts(theta.size() - 1);
  double partial = 0.0;
  for (std::size_t k = 0; k + 1 < theta.size(); ++k) {
    partial += inc[k];
    cuts[k] = partial / total;
  }
  return cuts;
}

std::vector<double> cuts_backward(std::span<const double> theta, std::span<const double> grad_cuts) {
  const std::size_t n = theta.size();
  if (grad_cuts.size() + 1 != n) throw ShapeError("cuts_backward: expected N-1 cut gradients");
  const auto cuts = cuts_from_theta(theta);
  double total = 0.0;
  for (const double t : theta) total += softplus(t) + kCutIncrementFloor;
  // d c_k / d inc_j = ([j <= k] - c_k) / total
  double weighted = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) weighted += grad_cuts[k] * cuts[k];
  std::vector<double> grad_theta(n);
  double suffix = 0.0;  // sum of grad_cuts[k] for k >= j
  for (std::size_t j = n; j-- > 0;) {
    if (j + 1 < n) suffix += grad_cuts[j];
    const double grad_inc = (suffix - weighted) / total;
    grad_theta[j] = grad_inc * logistic(theta[j]);
  }
  return grad_theta;
}

double window_mask(double x, double c_lo, double c_hi, double tau, bool edge_lo, bool edge_hi) {
  const double lo = edge_lo ? 1.0 : logistic((x - c_lo) / tau);
  const double hi = edge_hi ? 0.0 : logistic((x - c_hi) / tau);
  return lo - hi;
}

double hard_window_mask(double x, double c_lo, double c_hi, bool edge_lo, bool edge_hi) {
  const bool above_lo = edge_lo || x >= c_lo;
  const bool below_hi = edge_hi || x < c_hi;
  return above_lo && below_hi ? 1.0 : 0.0;
}

BranchSet branch_forward(std::span<const double> values, const CutVector& cv, bool include_original) {
  check_cut_vector(cv);
  const auto cuts = cuts_from_theta(cv.theta);
  const auto n = static_cast<std::size_t>(cv.n_branches);
  BranchSet set;
  set.include_original = include_original;
  set.masks.assign(n, std::vector<double>(values.size()));
  set.branches.assign(n, std::vector<double>(values.size()));
  CutResponse r(cuts.size());
  for (std::size_t v = 0; v < values.size(); ++v) {
    const double x = values[v];
    r.evaluate(x, cuts, cv.tau);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = r.weight(i, n);
      set.masks[i][v] = w;
      set.branches[i][v] = x * w;
    }
  }
  if (include_original) {
    set.masks.emplace_back(values.size(), 1.0);
    set.branches.emplace_back(values.begin(), values.end());
  }
  return set;
}

BranchGradients branch_backward(std::span<const double> values, const CutVector& cv, bool include_original,
                                const std::vector<std::vector<double>>& upstream) {
  check_cut_vector(cv);
  const auto n = static_cast<std::size_t>(cv.n_branches);
  if (upstream.size() != n + (include_original ? 1 : 0)) {
    throw ShapeError("branch_backward: one upstream gradient per branch is required");
  }
  for (const auto& u : upstream) {
    if (u.size() != values.size()) throw ShapeError("branch_backward: upstream size mismatch");
  }
  const auto cuts = cuts_from_theta(cv.theta);
  BranchGradients g;
  g.grad_values.assign(values.size(), 0.0);
  std::vector<double> grad_cuts(cuts.size(), 0.0);
  CutResponse r(cuts.size());
  for (std::size_t v = 0; v < values.size(); ++v) {
    const double x = values[v];
    r.evaluate(x, cuts, cv.tau);
    double gx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gx += upstream[i][v] * (r.weight(i, n) + x * r.weight_slope(i, n));
    }
    if (include_original) gx += upstream[n][v];
    g.grad_values[v] = gx;
    // Cut k is the upper edge of branch k and the lower edge of branch k+1.
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      grad_cuts[k] += x * r.ds[k] * (upstream[k][v] - upstream[k + 1][v]);
    }
  }
  g.grad_theta = cuts_backward(cv.theta, grad_cuts);
  return g;
}

namespace diff {

template <typename T>
Var<T> window_branches(const Var<T>& x, const Var<T>& theta, double tau, bool include_original) {
  const auto& s = x->value.shape();
  if (s.size() < 2 || s[1] != 1) throw ShapeError("window_branches expects [N,1,...], got " + shape_string(s));
  if (!(tau > 0.0)) throw ConfigError("window softness tau must be positive");
  const std::size_t n_branches = theta->value.size();
  if (n_branches < 1) throw ConfigError("the window layer needs at least one branch");
  const std::size_t N = s[0];
  const std::size_t S = x->value.size() / N;
  const std::size_t B = n_branches + (include_original ? 1 : 0);

  std::vector<double> th(theta->value.data().begin(), theta->value.data().end());
  const auto cuts = cuts_from_theta(th);

  Shape os = s;
  os[1] = B;
  Tensor<T> out(os);
  CutResponse r(cuts.size());
  for (std::size_t n = 0; n < N; ++n) {
    const T* in = x->value.raw() + n * S;
    T* o = out.raw() + n * B * S;
    for (std::size_t v = 0; v < S; ++v) {
      const double xv = in[v];
      r.evaluate(xv, cuts, tau);
      for (std::size_t i = 0; i < n_branches; ++i) o[i * S + v] = static_cast<T>(xv * r.weight(i, n_branches));
      if (include_original) o[n_branches * S + v] = in[v];
    }
  }

  return make_node<T>(
      std::move(out), {x, theta},
      [th = std::move(th), cuts, tau, N, S, B, n_branches, include_original](Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pt = *self.parents[1];
        std::vector<double> grad_cuts(cuts.size(), 0.0);
        CutResponse resp(cuts.size());
        for (std::size_t n = 0; n < N; ++n) {
          const T* in = px.value.raw() + n * S;
          const T* up = self.grad.raw() + n * B * S;
          for (std::size_t v = 0; v < S; ++v) {
            const double xv = in[v];
            resp.evaluate(xv, cuts, tau);
            if (px.requires_grad) {
              double gx = 0.0;
              for (std::size_t i = 0; i < n_branches; ++i) {
                gx += up[i * S + v] * (resp.weight(i, n_branches) + xv * resp.weight_slope(i, n_branches));
              }
              if (include_original) gx += up[n_branches * S + v];
              px.grad[n * S + v] += static_cast<T>(gx);
            }
            for (std::size_t k = 0; k < cuts.size(); ++k) {
              grad_cuts[k] += xv * resp.ds[k] * (static_cast<double>(up[k * S + v]) - up[(k + 1) * S + v]);
            }
          }
        }
        if (pt.requires_grad) {
          const auto gt = cuts_backward(th, grad_cuts);
          for (std::size_t i = 0; i < gt.size(); ++i) pt.grad[i] += static_cast<T>(gt[i]);
        }
      },
      "window_branches");
}

template Var<float> window_branches(const Var<float>&, const Var<float>&, double, bool);
template Var<double> window_branches(const Var<double>&, const Var<double>&, double, bool);

}  // namespace diff
}  // namespace lmlcc
