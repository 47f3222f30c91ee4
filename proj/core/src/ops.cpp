#include "lmlcc/diffkit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>

namespace lmlcc::diff {
namespace {

using Index = std::ptrdiff_t;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

// Valid output range [lo, hi) along one axis of extent n for kernel offset d.
inline void offset_range(Index n, Index d, Index& lo, Index& hi) {
  lo = d < 0 ? -d : 0;
  hi = d > 0 ? n - d : n;
}

template <typename T>
void conv3d_forward_kernel(const T* x, const T* k, const T* b, T* y, Index N, Index Ci, Index Co, Index D,
                           Index H, Index W) {
  const Index V = D * H * W;
#pragma omp parallel for collapse(2) schedule(static)
  for (Index n = 0; n < N; ++n) {
    for (Index co = 0; co < Co; ++co) {
      T* out = y + (n * Co + co) * V;
      std::fill(out, out + V, b[co]);
      for (Index ci = 0; ci < Ci; ++ci) {
        const T* in = x + (n * Ci + ci) * V;
        const T* kk = k + (co * Ci + ci) * 27;
        for (Index kz = 0; kz < 3; ++kz) {
          Index z0, z1;
          offset_range(D, kz - 1, z0, z1);
          for (Index ky = 0; ky < 3; ++ky) {
            Index y0, y1;
            offset_range(H, ky - 1, y0, y1);
            for (Index kx = 0; kx < 3; ++kx) {
              Index x0, x1;
              offset_range(W, kx - 1, x0, x1);
              const T w = kk[(kz * 3 + ky) * 3 + kx];
              for (Index z = z0; z < z1; ++z) {
                for (Index yy = y0; yy < y1; ++yy) {
                  T* orow = out + (z * H + yy) * W;
                  const T* irow = in + ((z + kz - 1) * H + (yy + ky - 1)) * W + (kx - 1);
                  for (Index xx = x0; xx < x1; ++xx) orow[xx] += w * irow[xx];
                }
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv3d_backward_input(const T* dy, const T* k, T* dx, Index N, Index Ci, Index Co, Index D, Index H,
                           Index W) {
  const Index V = D * H * W;
#pragma omp parallel for collapse(2) schedule(static)
  for (Index n = 0; n < N; ++n) {
    for (Index ci = 0; ci < Ci; ++ci) {
      T* gx = dx + (n * Ci + ci) * V;
      for (Index co = 0; co < Co; ++co) {
        const T* g = dy + (n * Co + co) * V;
        const T* kk = k + (co * Ci + ci) * 27;
        for (Index kz = 0; kz < 3; ++kz) {
          Index z0, z1;
          offset_range(D, kz - 1, z0, z1);
          for (Index ky = 0; ky < 3; ++ky) {
            Index y0, y1;
            offset_range(H, ky - 1, y0, y1);
            for (Index kx = 0; kx < 3; ++kx) {
              Index x0, x1;
              offset_range(W, kx - 1, x0, x1);
              const T w = kk[(kz * 3 + ky) * 3 + kx];
              for (Index z = z0; z < z1; ++z) {
                for (Index yy = y0; yy < y1; ++yy) {
                  const T* grow = g + (z * H + yy) * W;
                  T* xrow = gx + ((z + kz - 1) * H + (yy + ky - 1)) * W + (kx - 1);
                  for (Index xx = x0; xx < x1; ++xx) xrow[xx] += w * grow[xx];
                }
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv3d_backward_params(const T* dy, const T* x, T* dk, T* db, Index N, Index Ci, Index Co, Index D,
                            Index H, Index W) {
  const Index V = D * H * W;
#pragma omp parallel for schedule(static)
  for (Index co = 0; co < Co; ++co) {
    if (db) {
      T acc = 0;
      for (Index n = 0; n < N; ++n) {
        const T* g = dy + (n * Co + co) * V;
        for (Index i = 0; i < V; ++i) acc += g[i];
      }
      db[co] += acc;
    }
    if (!dk) continue;
    for (Index ci = 0; ci < Ci; ++ci) {
      for (Index kz = 0; kz < 3; ++kz) {
        Index z0, z1;
        offset_range(D, kz - 1, z0, z1);
        for (Index ky = 0; ky < 3; ++ky) {
          Index y0, y1;
          offset_range(H, ky - 1, y0, y1);
          for (Index kx = 0; kx < 3; ++kx) {
            Index x0, x1;
            offset_range(W, kx - 1, x0, x1);
            T acc = 0;
            for (Index n = 0; n < N; ++n) {
              const T* g = dy + (n * Co + co) * V;
              const T* in = x + (n * Ci + ci) * V;
              for (Index z = z0; z < z1; ++z) {
                for (Index yy = y0; yy < y1; ++yy) {
                  const T* grow = g + (z * H + yy) * W;
                  const T* irow = in + ((z + kz - 1) * H + (yy + ky - 1)) * W + (kx - 1);
                  for (Index xx = x0; xx < x1; ++xx) acc += grow[xx] * irow[xx];
                }
              }
            }
            dk[(co * Ci + ci) * 27 + (kz * 3 + ky) * 3 + kx] += acc;
          }
        }
      }
    }
  }
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

}  // namespace

template <typename T>
Var<T> conv3d(const Var<T>& x, const Var<T>& kernel, const Var<T>& bias) {
  const auto& xs = x->value.shape();
  const auto& ks = kernel->value.shape();
  require(xs.size() == 5, "conv3d expects input [N,C,D,H,W], got " + shape_string(xs));
  require(ks.size() == 5 && ks[2] == 3 && ks[3] == 3 && ks[4] == 3,
          "conv3d expects kernel [Cout,Cin,3,3,3], got " + shape_string(ks));
  require(ks[1] == xs[1], "conv3d channel mismatch: input has " + std::to_string(xs[1]) +
                              " channels, kernel expects " + std::to_string(ks[1]));
  require(bias->value.size() == ks[0], "conv3d bias must have Cout elements");

  const Index N = static_cast<Index>(xs[0]), Ci = static_cast<Index>(xs[1]), Co = static_cast<Index>(ks[0]);
  const Index D = static_cast<Index>(xs[2]), H = static_cast<Index>(xs[3]), W = static_cast<Index>(xs[4]);
  Tensor<T> out(Shape{xs[0], ks[0], xs[2], xs[3], xs[4]});
  conv3d_forward_kernel(x->value.raw(), kernel->value.raw(), bias->value.raw(), out.raw(), N, Ci, Co, D, H, W);

  return make_node<T>(
      std::move(out), {x, kernel, bias},
      [=](Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pk = *self.parents[1];
        auto& pb = *self.parents[2];
        if (px.requires_grad) {
          conv3d_backward_input(self.grad.raw(), pk.value.raw(), px.grad.raw(), N, Ci, Co, D, H, W);
        }
        if (pk.requires_grad || pb.requires_grad) {
          conv3d_backward_params(self.grad.raw(), px.value.raw(), pk.requires_grad ? pk.grad.raw() : nullptr,
                                 pb.requires_grad ? pb.grad.raw() : nullptr, N, Ci, Co, D, H, W);
        }
      },
      "conv3d");
}

template <typename T>
Var<T> maxpool3d(const Var<T>& x) {
  const auto& s = x->value.shape();
  require(s.size() == 5, "maxpool3d expects [N,C,D,H,W], got " + shape_string(s));
  require(s[2] % 2 == 0 && s[3] % 2 == 0 && s[4] % 2 == 0,
          "maxpool3d requires even spatial extents, got " + shape_string(s));
  const std::size_t NC = s[0] * s[1], D = s[2], H = s[3], W = s[4];
  const std::size_t d = D / 2, h = H / 2, w = W / 2;
  Tensor<T> out(Shape{s[0], s[1], d, h, w});
  std::vector<std::size_t> argmax(out.size());
  const T* in = x->value.raw();
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < NC; ++p) {
    for (std::size_t z = 0; z < d; ++z) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) {
          std::size_t best = ((p * D + 2 * z) * H + 2 * y) * W + 2 * xx;
          T best_v = in[best];
          for (std::size_t dz = 0; dz < 2; ++dz) {
            for (std::size_t dy = 0; dy < 2; ++dy) {
              for (std::size_t dx = 0; dx < 2; ++dx) {
                const std::size_t i = ((p * D + 2 * z + dz) * H + 2 * y + dy) * W + 2 * xx + dx;
                if (in[i] > best_v) {
                  best_v = in[i];
                  best = i;
                }
              }
            }
          }
          const std::size_t o = ((p * d + z) * h + y) * w + xx;
          out[o] = best_v;
          argmax[o] = best;
        }
      }
    }
  }
  return make_node<T>(
      std::move(out), {x},
      [argmax = std::move(argmax)](Node<T>& self) {
        auto& px = *self.parents[0];
        if (!px.requires_grad) return;
        for (std::size_t o = 0; o < argmax.size(); ++o) px.grad[argmax[o]] += self.grad[o];
      },
      "maxpool3d");
}

template <typename T>
Var<T> batchnorm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, BatchNormState<T>& state,
                 bool train) {
  const auto& s = x->value.shape();
  require(s.size() >= 2, "batchnorm expects [N,C,...], got " + shape_string(s));
  const std::size_t N = s[0], C = s[1];
  require(gamma->value.size() == C && beta->value.size() == C, "batchnorm gamma/beta must have C elements");
  require(state.running_mean.size() == C && state.running_var.size() == C,
          "batchnorm running statistics must have C elements");
  const std::size_t S = x->value.size() / (N * C);
  const std::size_t M = N * S;
  if (train) require(M > 1, "batchnorm train mode needs more than one value per channel");

  Tensor<T> out(s);
  Tensor<T> xhat(s);
  std::vector<T> invstd(C);
  const T* in = x->value.raw();
  const double eps = state.epsilon;

#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < C; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (train) {
      for (std::size_t n = 0; n < N; ++n) {
        const T* p = in + (n * C + c) * S;
        for (std::size_t i = 0; i < S; ++i) mean += p[i];
      }
      mean /= static_cast<double>(M);
      for (std::size_t n = 0; n < N; ++n) {
        const T* p = in + (n * C + c) * S;
        for (std::size_t i = 0; i < S; ++i) {
          const double dv = p[i] - mean;
          var += dv * dv;
        }
      }
      var /= static_cast<double>(M);
      const double m = state.momentum;
      state.running_mean[c] = static_cast<T>(m * state.running_mean[c] + (1.0 - m) * mean);
      state.running_var[c] = static_cast<T>(
          m * state.running_var[c] + (1.0 - m) * var * static_cast<double>(M) / static_cast<double>(M - 1));
    } else {
      mean = state.running_mean[c];
      var = state.running_var[c];
    }
    const T is = static_cast<T>(1.0 / std::sqrt(var + eps));
    invstd[c] = is;
    const T mu = static_cast<T>(mean);
    const T g = gamma->value[c];
    const T b = beta->value[c];
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t off = (n * C + c) * S;
      for (std::size_t i = 0; i < S; ++i) {
        const T xh = (in[off + i] - mu) * is;
        xhat[off + i] = xh;
        out[off + i] = g * xh + b;
      }
    }
  }

  return make_node<T>(
      std::move(out), {x, gamma, beta},
      [xhat = std::move(xhat), invstd = std::move(invstd), N, C, S, M, train](Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pg = *self.parents[1];
        auto& pb = *self.parents[2];
        const T* dy = self.grad.raw();
#pragma omp parallel for schedule(static)
        for (std::size_t c = 0; c < C; ++c) {
          double sum_dy = 0.0;
          double sum_dy_xhat = 0.0;
          for (std::size_t n = 0; n < N; ++n) {
            const std::size_t off = (n * C + c) * S;
            for (std::size_t i = 0; i < S; ++i) {
              sum_dy += dy[off + i];
              sum_dy_xhat += static_cast<double>(dy[off + i]) * xhat[off + i];
            }
          }
          if (pg.requires_grad) pg.grad[c] += static_cast<T>(sum_dy_xhat);
          if (pb.requires_grad) pb.grad[c] += static_cast<T>(sum_dy);
          if (!px.requires_grad) continue;
          const T g = pg.value[c];
          if (train) {
            const double k = static_cast<double>(g) * invstd[c] / static_cast<double>(M);
            const double md = static_cast<double>(M);
            for (std::size_t n = 0; n < N; ++n) {
              const std::size_t off = (n * C + c) * S;
              for (std::size_t i = 0; i < S; ++i) {
                px.grad[off + i] +=
                    static_cast<T>(k * (md * dy[off + i] - sum_dy - xhat[off + i] * sum_dy_xhat));
              }
            }
          } else {
            const T k = g * invstd[c];
            for (std::size_t n = 0; n < N; ++n) {
              const std::size_t off = (n * C + c) * S;
              for (std::size_t i = 0; i < S; ++i) px.grad[off + i] += k * dy[off + i];
            }
          }
        }
      },
      train ? "batchnorm_train" : "batchnorm_eval");
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  const auto& xs = x->value.shape();
  const auto& ws = weight->value.shape();
  require(xs.size() == 2, "linear expects input [N,F], got " + shape_string(xs));
  require(ws.size() == 2 && ws[1] == xs[1],
          "linear weight " + shape_string(ws) + " does not match input " + shape_string(xs));
  require(bias->value.size() == ws[0], "linear bias must have Out elements");
  const std::size_t N = xs[0], F = xs[1], O = ws[0];
  Tensor<T> out(Shape{N, O});
  const T* in = x->value.raw();
  const T* w = weight->value.raw();
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t o = 0; o < O; ++o) {
      T acc = bias->value[o];
      const T* xr = in + n * F;
      const T* wr = w + o * F;
      for (std::size_t f = 0; f < F; ++f) acc += xr[f] * wr[f];
      out[n * O + o] = acc;
    }
  }
  return make_node<T>(
      std::move(out), {x, weight, bias},
      [N, F, O](Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        auto& pb = *self.parents[2];
        const T* dy = self.grad.raw();
        if (px.requires_grad) {
#pragma omp parallel for schedule(static)
          for (std::size_t n = 0; n < N; ++n) {
            T* gx = px.grad.raw() + n * F;
            for (std::size_t o = 0; o < O; ++o) {
              const T g = dy[n * O + o];
              const T* wr = pw.value.raw() + o * F;
              for (std::size_t f = 0; f < F; ++f) gx[f] += g * wr[f];
            }
          }
        }
        if (pw.requires_grad) {
#pragma omp parallel for schedule(static)
          for (std::size_t o = 0; o < O; ++o) {
            T* gw = pw.grad.raw() + o * F;
            for (std::size_t n = 0; n < N; ++n) {
              const T g = dy[n * O + o];
              const T* xr = px.value.raw() + n * F;
              for (std::size_t f = 0; f < F; ++f) gw[f] += g * xr[f];
            }
          }
        }
        if (pb.requires_grad) {
          for (std::size_t o = 0; o < O; ++o) {
            T acc = 0;
            for (std::size_t n = 0; n < N; ++n) acc += dy[n * O + o];
            pb.grad[o] += acc;
          }
        }
      },
      "linear");
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> out(x->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x->value[i] < T{0} ? T{0} : x->value[i];
  return make_node<T>(
      std::move(out), {x},
      [](Node<T>& self) {
        auto& px = *self.parents[0];
        for (std::size_t i = 0; i < px.value.size(); ++i) {
          if (px.value[i] > T{0}) px.grad[i] += self.grad[i];
        }
      },
      "relu");
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  Tensor<T> out(x->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(x->value[i]);
  return make_node<T>(
      std::move(out), {x},
      [](Node<T>& self) {
        auto& px = *self.parents[0];
        for (std::size_t i = 0; i < px.value.size(); ++i) {
          const T y = self.value[i];
          px.grad[i] += self.grad[i] * y * (T{1} - y);
        }
      },
      "sigmoid");
}

template <typename T>
Var<T> dropout(const Var<T>& x, double rate, std::uint64_t seed, bool train) {
  if (!train || rate <= 0.0) return x;
  require(rate < 1.0, "dropout rate must be below 1");
  const double keep = 1.0 - rate;
  const T kept_scale = static_cast<T>(1.0 / keep);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<T> mask(x->value.size());
  for (auto& m : mask) m = u(rng) < keep ? kept_scale : T{0};
  Tensor<T> out(x->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x->value[i] * mask[i];
  return make_node<T>(
      std::move(out), {x},
      [mask = std::move(mask)](Node<T>& self) {
        auto& px = *self.parents[0];
        for (std::size_t i = 0; i < mask.size(); ++i) px.grad[i] += self.grad[i] * mask[i];
      },
      "dropout");
}

template <typename T>
Var<T> reshape(const Var<T>& x, Shape shape) {
  Tensor<T> out = x->value.reshaped(std::move(shape));
  return make_node<T>(
      std::move(out), {x},
      [](Node<T>& self) {
        auto& px = *self.parents[0];
        for (std::size_t i = 0; i < px.grad.size(); ++i) px.grad[i] += self.grad[i];
      },
      "reshape");
}

template <typename T>
Var<T> flatten(const Var<T>& x) {
  const auto& s = x->value.shape();
  require(!s.empty(), "flatten needs a batch axis");
  return reshape(x, Shape{s[0], x->value.size() / std::max<std::size_t>(1, s[0])});
}

template <typename T>
Var<T> concat_features(const std::vector<Var<T>>& parts) {
  require(!parts.empty(), "concat_features needs at least one input");
  const std::size_t N = parts[0]->value.dim(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require(p->value.rank() == 2 && p->value.dim(0) == N, "concat_features expects [N,F] inputs");
    widths.push_back(p->value.dim(1));
    total += widths.back();
  }
  Tensor<T> out(Shape{N, total});
  for (std::size_t n = 0; n < N; ++n) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      std::copy_n(parts[k]->value.raw() + n * widths[k], widths[k], out.raw() + n * total + off);
      off += widths[k];
    }
  }
  return make_node<T>(
      std::move(out), parts,
      [widths, N, total](Node<T>& self) {
        for (std::size_t n = 0; n < N; ++n) {
          std::size_t off = 0;
          for (std::size_t k = 0; k < widths.size(); ++k) {
            auto& p = *self.parents[k];
            if (p.requires_grad) {
              for (std::size_t f = 0; f < widths[k]; ++f) p.grad[n * widths[k] + f] += self.grad[n * total + off + f];
            }
            off += widths[k];
          }
        }
      },
      "concat");
}

template <typename T>
Var<T> slice_channel(const Var<T>& x, std::size_t c) {
  const auto& s = x->value.shape();
  require(s.size() >= 2 && c < s[1], "slice_channel index out of range for " + shape_string(s));
  const std::size_t N = s[0], C = s[1], S = x->value.size() / (N * C);
  Shape os = s;
  os[1] = 1;
  Tensor<T> out(os);
  for (std::size_t n = 0; n < N; ++n) {
    std::copy_n(x->value.raw() + (n * C + c) * S, S, out.raw() + n * S);
  }
  return make_node<T>(
      std::move(out), {x},
      [N, C, S, c](Node<T>& self) {
        auto& px = *self.parents[0];
        for (std::size_t n = 0; n < N; ++n) {
          T* g = px.grad.raw() + (n * C + c) * S;
          const T* gy = self.grad.raw() + n * S;
          for (std::size_t i = 0; i < S; ++i) g[i] += gy[i];
        }
      },
      "slice_channel");
}

template <typename T>
Var<T> bce_loss(const Var<T>& probs, const Tensor<T>& targets) {
  require(probs->value.size() == targets.size(), "bce_loss: " + std::to_string(probs->value.size()) +
                                                     " predictions vs " + std::to_string(targets.size()) +
                                                     " targets");
  require(targets.size() > 0, "bce_loss on an empty batch");
  const std::size_t N = targets.size();
  const double lo = kBceClamp;
  const double hi = 1.0 - kBceClamp;
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double p = std::clamp(static_cast<double>(probs->value[i]), lo, hi);
    const double y = targets[i];
    acc += y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  Tensor<T> out(Shape{1}, static_cast<T>(-acc / static_cast<double>(N)));
  return make_node<T>(
      std::move(out), {probs},
      [targets, N, lo, hi](Node<T>& self) {
        auto& pp = *self.parents[0];
        const double g = self.grad[0];
        for (std::size_t i = 0; i < N; ++i) {
          const double p = std::clamp(static_cast<double>(pp.value[i]), lo, hi);
          const double y = targets[i];
          pp.grad[i] += static_cast<T>(g * (-(y / p) + (1.0 - y) / (1.0 - p)) / static_cast<double>(N));
        }
      },
      "bce_loss");
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  double acc = 0.0;
  for (const T v : x->value.data()) acc += v;
  return make_node<T>(
      Tensor<T>(Shape{1}, static_cast<T>(acc)), {x},
      [](Node<T>& self) {
        auto& px = *self.parents[0];
        for (auto& g : px.grad.data()) g += self.grad[0];
      },
      "sum");
}

template <typename T>
Var<T> sum_squares(const Var<T>& x) {
  double acc = 0.0;
  for (const T v : x->value.data()) acc += static_cast<double>(v) * v;
  return make_node<T>(
      Tensor<T>(Shape{1}, static_cast<T>(acc)), {x},
      [](Node<T>& self) {
        auto& px = *self.parents[0];
        for (std::size_t i = 0; i < px.value.size(); ++i) px.grad[i] += T{2} * px.value[i] * self.grad[0];
      },
      "sum_squares");
}

template <typename T>
Var<T> scale(const Var<T>& x, T factor) {
  Tensor<T> out(x->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x->value[i] * factor;
  return make_node<T>(
      std::move(out), {x},
      [factor](Node<T>& self) {
        auto& px = *self.parents[0];
        for (std::size_t i = 0; i < px.grad.size(); ++i) px.grad[i] += self.grad[i] * factor;
      },
      "scale");
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require(a->value.shape() == b->value.shape(), "add: shape mismatch");
  Tensor<T> out(a->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
  return make_node<T>(
      std::move(out), {a, b},
      [](Node<T>& self) {
        for (auto& p : self.parents) {
          if (!p->requires_grad) continue;
          for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] += self.grad[i];
        }
      },
      "add");
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require(a->value.shape() == b->value.shape(), "mul: shape mismatch");
  Tensor<T> out(a->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
  return make_node<T>(
      std::move(out), {a, b},
      [](Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          if (pa.requires_grad) pa.grad[i] += self.grad[i] * pb.value[i];
          if (pb.requires_grad) pb.grad[i] += self.grad[i] * pa.value[i];
        }
      },
      "mul");
}

#define LMLCC_DIFF_OPS_INSTANTIATE(T)                                                                    \
  template Var<T> conv3d(const Var<T>&, const Var<T>&, const Var<T>&);                                   \
  template Var<T> maxpool3d(const Var<T>&);                                                              \
  template Var<T> batchnorm(const Var<T>&, const Var<T>&, const Var<T>&, BatchNormState<T>&, bool);      \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);                                   \
  template Var<T> relu(const Var<T>&);                                                                   \
  template Var<T> sigmoid(const Var<T>&);                                                                \
  template Var<T> dropout(const Var<T>&, double, std::uint64_t, bool);                                   \
  template Var<T> reshape(const Var<T>&, Shape);                                                         \
  template Var<T> flatten(const Var<T>&);                                                                \
  template Var<T> concat_features(const std::vector<Var<T>>&);                                           \
  template Var<T> slice_channel(const Var<T>&, std::size_t);                                             \
  template Var<T> bce_loss(const Var<T>&, const Tensor<T>&);                                             \
  template Var<T> sum(const Var<T>&);                                                                    \
  template Var<T> sum_squares(const Var<T>&);                                                            \
  template Var<T> scale(const Var<T>&, T);                                                               \
  template Var<T> add(const Var<T>&, const Var<T>&);                                                     \
  template Var<T> mul(const Var<T>&, const Var<T>&);

LMLCC_DIFF_OPS_INSTANTIATE(float)
LMLCC_DIFF_OPS_INSTANTIATE(double)

}  // namespace lmlcc::diff
