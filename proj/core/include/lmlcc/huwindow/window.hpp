#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lmlcc/diffkit/graph.hpp"

namespace lmlcc {

enum class CutsMode { Learnable, Fixed };
enum class CutsInit { Constant, Random };

std::string to_string(CutsMode mode);
std::string to_string(CutsInit init);
CutsMode parse_cuts_mode(const std::string& s);
CutsInit parse_cuts_init(const std::string& s);

inline constexpr double kDefaultWindowTau = 0.05;
inline constexpr double kCutIncrementFloor = 1e-4;

/// Learnable intensity cut points. Cuts are derived from the unconstrained
/// `theta` through normalized softplus increments, so 0 < c_1 < ... < c_{N-1} < 1
/// holds for every theta.
struct CutVector {
  int n_branches = 1;
  std::vector<double> theta;
  double tau = kDefaultWindowTau;
  CutsMode mode = CutsMode::Learnable;
  CutsInit init = CutsInit::Constant;

  /// Constant init sets theta = 0 (equal intervals); Random draws theta ~ U(-1, 1).
  static CutVector make(int n_branches, CutsInit init, CutsMode mode, std::uint64_t seed,
                        double tau = kDefaultWindowTau);
};

double softplus(double t);

/// Interior cut positions c_1..c_{N-1} in (0, 1).
std::vector<double> cuts_from_theta(std::span<const double> theta);
inline std::vector<double> cuts_from_theta(const CutVector& cv) { return cuts_from_theta(cv.theta); }

/// Pulls a gradient on the interior cuts back onto theta.
std::vector<double> cuts_backward(std::span<const double> theta, std::span<const double> grad_cuts);

/// Soft window w(x) = L(x) - U(x): L = 1 on the lowest branch, else
/// sigmoid((x - c_lo)/tau); U = 0 on the highest branch, else sigmoid((x - c_hi)/tau).
double window_mask(double x, double c_lo, double c_hi, double tau, bool edge_lo, bool edge_hi);

/// Hard indicator of [c_lo, c_hi) with open ends on edge branches.
double hard_window_mask(double x, double c_lo, double c_hi, bool edge_lo, bool edge_hi);

/// Per-branch masks and masked intensities x * w_i(x) for one volume.
struct BranchSet {
  std::vector<std::vector<double>> masks;
  std::vector<std::vector<double>> branches;
  bool include_original = false;

  std::size_t count() const { return branches.size(); }
};

BranchSet branch_forward(std::span<const double> values, const CutVector& cv, bool include_original);

struct BranchGradients {
  std::vector<double> grad_values;
  std::vector<double> grad_theta;
};

/// Gradients of sum_i <upstream_i, branch_i> with respect to the input values
/// and theta. `upstream` holds one vector per branch, including the original
/// pass-through branch when `include_original` is set.
BranchGradients branch_backward(std::span<const double> values, const CutVector& cv, bool include_original,
                                const std::vector<std::vector<double>>& upstream);

namespace diff {

/// Graph op: x [N,1,...] and theta [n_branches] -> [N,B,...] with
/// B = n_branches (+1 when include_original, appended last).
template <typename T>
Var<T> window_branches(const Var<T>& x, const Var<T>& theta, double tau, bool include_original);

extern template Var<float> window_branches(const Var<float>&, const Var<float>&, double, bool);
extern template Var<double> window_branches(const Var<double>&, const Var<double>&, double, bool);

}  // namespace diff
}  // namespace lmlcc
