#include "lmlcc/network/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lmlcc/common/error.hpp"
#include "lmlcc/common/seed.hpp"

namespace lmlcc {
namespace {

using diff::Shape;
using diff::Tensor;

template <typename T>
Tensor<T> he_uniform(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-limit, limit);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<T>(u(rng));
  return t;
}

template <typename T>
diff::NamedTensor to_named(const std::string& name, const Tensor<T>& t) {
  return {name, t.shape(), std::vector<float>(t.data().begin(), t.data().end())};
}

template <typename T>
void assign_from(const diff::Checkpoint& ckpt, const std::string& name, Tensor<T>& dst) {
  const auto* src = ckpt.find(name);
  if (!src) throw ConfigError("checkpoint is missing tensor '" + name + "'");
  if (src->shape != dst.shape()) {
    throw ShapeError("checkpoint tensor '" + name + "' has shape " + diff::shape_string(src->shape) +
                     ", model expects " + diff::shape_string(dst.shape()));
  }
  for (std::size_t i = 0; i < src->data.size(); ++i) dst[i] = static_cast<T>(src->data[i]);
}

std::string branch_prefix(std::size_t b) { return "branch" + std::to_string(b) + "."; }

}  // namespace

template <typename T>
LmlccModel<T>::LmlccModel(LmlccConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  const auto& bb = config_.backbone;
  std::mt19937_64 rng(seed);
  const auto n_ext = static_cast<std::size_t>(config_.extractor_count());
  extractors_.resize(n_ext);
  for (std::size_t b = 0; b < n_ext; ++b) {
    std::size_t in_ch = 1;
    const std::string pre = branch_prefix(b);
    for (std::size_t i = 0; i < bb.conv_channels.size(); ++i) {
      const auto out_ch = static_cast<std::size_t>(bb.conv_channels[i]);
      const std::string idx = std::to_string(i);
      ConvBlock<T> blk;
      blk.weight = diff::parameter(he_uniform<T>(Shape{out_ch, in_ch, 3, 3, 3}, in_ch * 27, rng),
                                   pre + "conv" + idx + ".weight");
      blk.bias = diff::parameter(Tensor<T>(Shape{out_ch}), pre + "conv" + idx + ".bias");
      blk.gamma = diff::parameter(Tensor<T>(Shape{out_ch}, T{1}), pre + "bn" + idx + ".gamma");
      blk.beta = diff::parameter(Tensor<T>(Shape{out_ch}), pre + "bn" + idx + ".beta");
      blk.bn = diff::BatchNormState<T>(out_ch);
      const int ii = static_cast<int>(i);
      blk.pool_after = std::find(bb.pool_after.begin(), bb.pool_after.end(), ii) != bb.pool_after.end();
      blk.dropout_after =
          std::find(bb.dropout_after.begin(), bb.dropout_after.end(), ii) != bb.dropout_after.end();
      extractors_[b].push_back(std::move(blk));
      in_ch = out_ch;
    }
  }
  std::size_t in_f = bb.feature_width() * n_ext;
  for (std::size_t j = 0; j < bb.dense_widths.size(); ++j) {
    const auto out_f = static_cast<std::size_t>(bb.dense_widths[j]);
    const std::string idx = std::to_string(j);
    head_.push_back({diff::parameter(he_uniform<T>(Shape{out_f, in_f}, in_f, rng), "head.dense" + idx + ".weight"),
                     diff::parameter(Tensor<T>(Shape{out_f}), "head.dense" + idx + ".bias")});
    in_f = out_f;
  }
  if (has_window()) {
    const auto cv = CutVector::make(config_.n_branches, config_.init, config_.cuts_mode, mix_seed(seed, 7, 7),
                                    config_.tau);
    Tensor<T> th(Shape{cv.theta.size()});
    for (std::size_t i = 0; i < cv.theta.size(); ++i) th[i] = static_cast<T>(cv.theta[i]);
    theta_ = config_.cuts_mode == CutsMode::Learnable ? diff::parameter(std::move(th), "window.theta")
                                                      : diff::constant(std::move(th), "window.theta");
  }
}

template <typename T>
diff::Var<T> LmlccModel<T>::extract(std::size_t branch, const diff::Var<T>& x, const ForwardOptions& options,
                                    diff::Var<T>& last_conv) {
  auto& blocks = extractors_[branch];
  diff::Var<T> h = x;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto& blk = blocks[i];
    h = diff::conv3d(h, blk.weight, blk.bias);
    h = diff::batchnorm(h, blk.gamma, blk.beta, blk.bn, options.train);
    h = diff::relu(h);
    h->label = branch_prefix(branch) + "block" + std::to_string(i);
    if (i + 1 == blocks.size()) last_conv = h;
    if (blk.pool_after) h = diff::maxpool3d(h);
    if (blk.dropout_after) {
      h = diff::dropout(h, config_.backbone.dropout_rate, mix_seed(options.dropout_seed, branch, i), options.train);
    }
  }
  return diff::flatten(h);
}

template <typename T>
typename LmlccModel<T>::Output LmlccModel<T>::forward(const diff::Var<T>& x, const ForwardOptions& options) {
  const auto& s = x->value.shape();
  const auto side = static_cast<std::size_t>(config_.backbone.patch_side);
  if (s.size() != 5 || s[1] != 1 || s[2] != side || s[3] != side || s[4] != side) {
    throw ShapeError("model expects input [N,1," + std::to_string(side) + "," + std::to_string(side) + "," +
                     std::to_string(side) + "], got " + diff::shape_string(s));
  }
  Output out;
  out.last_conv.resize(extractors_.size());
  std::vector<diff::Var<T>> features;
  if (!has_window()) {
    features.push_back(extract(0, x, options, out.last_conv[0]));
  } else {
    const auto branches = diff::window_branches(x, theta_, config_.tau, config_.include_original);
    for (std::size_t b = 0; b < extractors_.size(); ++b) {
      features.push_back(extract(b, diff::slice_channel(branches, b), options, out.last_conv[b]));
    }
  }
  diff::Var<T> h = features.size() == 1 ? features[0] : diff::concat_features(features);
  for (std::size_t j = 0; j < head_.size(); ++j) {
    h = diff::linear(h, head_[j].weight, head_[j].bias);
    if (j + 1 < head_.size()) h = diff::relu(h);
  }
  h->label = "logits";
  out.logits = h;
  out.probs = diff::sigmoid(h);
  out.probs->label = "probs";
  return out;
}

template <typename T>
std::vector<diff::NamedParam<T>> LmlccModel<T>::all_parameters() const {
  std::vector<diff::NamedParam<T>> out;
  for (const auto& blocks : extractors_) {
    for (const auto& blk : blocks) {
      for (const auto* v : {&blk.weight, &blk.bias, &blk.gamma, &blk.beta}) out.push_back({(*v)->label, *v});
    }
  }
  for (const auto& d : head_) {
    out.push_back({d.weight->label, d.weight});
    out.push_back({d.bias->label, d.bias});
  }
  if (theta_) out.push_back({theta_->label, theta_});
  return out;
}

template <typename T>
std::vector<diff::NamedParam<T>> LmlccModel<T>::parameters() const {
  auto all = all_parameters();
  std::erase_if(all, [](const auto& p) { return !p.var->requires_grad; });
  return all;
}

template <typename T>
std::size_t LmlccModel<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.var->value.size();
  return n;
}

template <typename T>
std::vector<double> LmlccModel<T>::theta() const {
  if (!theta_) return {};
  return {theta_->value.data().begin(), theta_->value.data().end()};
}

template <typename T>
void LmlccModel<T>::set_theta(const std::vector<double>& theta) {
  if (!theta_ || theta.size() != theta_->value.size()) throw ShapeError("theta size mismatch");
  for (std::size_t i = 0; i < theta.size(); ++i) theta_->value[i] = static_cast<T>(theta[i]);
}

template <typename T>
std::vector<double> LmlccModel<T>::cuts() const {
  if (!theta_) return {};
  return cuts_from_theta(theta());
}

template <typename T>
diff::Checkpoint LmlccModel<T>::to_checkpoint(const diff::Adam<T>* optimizer) const {
  diff::Checkpoint ckpt;
  ckpt.config_text = config_.to_text();
  for (const auto& p : all_parameters()) ckpt.tensors.push_back(to_named(p.name, p.var->value));
  for (std::size_t b = 0; b < extractors_.size(); ++b) {
    for (std::size_t i = 0; i < extractors_[b].size(); ++i) {
      const std::string pre = branch_prefix(b) + "bn" + std::to_string(i);
      ckpt.tensors.push_back(to_named(pre + ".running_mean", extractors_[b][i].bn.running_mean));
      ckpt.tensors.push_back(to_named(pre + ".running_var", extractors_[b][i].bn.running_var));
    }
  }
  if (optimizer) {
    diff::AdamSnapshot snap;
    snap.t = optimizer->steps();
    snap.lr = optimizer->lr();
    snap.beta1 = optimizer->hyper().beta1;
    snap.beta2 = optimizer->hyper().beta2;
    snap.epsilon = optimizer->hyper().epsilon;
    const auto& params = optimizer->params();
    const auto& states = optimizer->states();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& shape = params[i].var->value.shape();
      auto moment = [&](const std::vector<T>& src) {
        std::vector<float> d(diff::shape_size(shape), 0.0f);
        for (std::size_t k = 0; k < src.size() && k < d.size(); ++k) d[k] = static_cast<float>(src[k]);
        return d;
      };
      snap.m.push_back({params[i].name, shape, moment(states[i].m)});
      snap.v.push_back({params[i].name, shape, moment(states[i].v)});
    }
    ckpt.adam = std::move(snap);
  }
  return ckpt;
}

template <typename T>
void LmlccModel<T>::load_state(const diff::Checkpoint& ckpt) {
  for (const auto& p : all_parameters()) assign_from(ckpt, p.name, p.var->value);
  for (std::size_t b = 0; b < extractors_.size(); ++b) {
    for (std::size_t i = 0; i < extractors_[b].size(); ++i) {
      const std::string pre = branch_prefix(b) + "bn" + std::to_string(i);
      assign_from(ckpt, pre + ".running_mean", extractors_[b][i].bn.running_mean);
      assign_from(ckpt, pre + ".running_var", extractors_[b][i].bn.running_var);
    }
  }
}

template <typename T>
LmlccModel<T> LmlccModel<T>::from_checkpoint(const diff::Checkpoint& ckpt) {
  LmlccModel<T> model(LmlccConfig::from_text(ckpt.config_text), 0);
  model.load_state(ckpt);
  return model;
}

template class LmlccModel<float>;
template class LmlccModel<double>;

}  // namespace lmlcc
