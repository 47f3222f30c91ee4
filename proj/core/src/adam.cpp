#include "lmlcc/diffkit/adam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmlcc/common/error.hpp"

namespace lmlcc::diff {

template <typename T>
void adam_step(AdamState<T>& state, const AdamHyper& hyper, std::span<T> param, std::span<const T> grad) {
  if (param.size() != grad.size()) throw ShapeError("adam_step: parameter/gradient size mismatch");
  if (state.m.size() != param.size()) {
    state.m.assign(param.size(), T{0});
    state.v.assign(param.size(), T{0});
  }
  ++state.t;
  const double b1 = hyper.beta1;
  const double b2 = hyper.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    const double m = b1 * state.m[i] + (1.0 - b1) * g;
    const double v = b2 * state.v[i] + (1.0 - b2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    const double update = hyper.lr * (m / c1) / (std::sqrt(v / c2) + hyper.epsilon);
    param[i] = static_cast<T>(param[i] - update);
  }
}

template <typename T>
Adam<T>::Adam(std::vector<NamedParam<T>> params, AdamHyper hyper)
    : params_(std::move(params)), states_(params_.size()), lr_scale_(params_.size(), 1.0), hyper_(hyper) {}

template <typename T>
void Adam<T>::set_lr_scale(const std::string& name, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("learning-rate scale must be positive");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) {
      lr_scale_[i] = scale;
      return;
    }
  }
  throw ValidationError("no optimized parameter named '" + name + "'");
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.var->zero_grad();
}

template <typename T>
void Adam<T>::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& node = *params_[i].var;
    AdamHyper h = hyper_;
    h.lr *= lr_scale_[i];
    adam_step<T>(states_[i], h, node.value.data(), node.ensure_grad().data());
  }
}

PlateauScheduler::PlateauScheduler(double initial_lr, double factor, int patience, double floor)
    : lr_(std::max(initial_lr, floor)),
      factor_(factor),
      patience_(patience),
      floor_(floor),
      best_(std::numeric_limits<double>::infinity()) {}

double PlateauScheduler::observe(double metric) {
  if (metric < best_) {
    best_ = metric;
    wait_ = 0;
  } else if (++wait_ >= patience_) {
    lr_ = std::max(lr_ * factor_, floor_);
    wait_ = 0;
  }
  return lr_;
}

template void adam_step(AdamState<float>&, const AdamHyper&, std::span<float>, std::span<const float>);
template void adam_step(AdamState<double>&, const AdamHyper&, std::span<double>, std::span<const double>);
template class Adam<float>;
template class Adam<double>;

}  // namespace lmlcc::diff
