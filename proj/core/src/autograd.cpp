#include "cudi/autograd.hpp"

#include <cmath>
#include <string>

#include "kernels.hpp"

namespace cudi {

// ---------------------------------------------------------------------------
// Graph

template <typename T>
auto Graph<T>::node(Var v) const -> const Node& {
  if (v.id >= nodes_.size()) throw ContractViolation("graph: invalid variable handle");
  return nodes_[v.id];
}

template <typename T>
auto Graph<T>::node(Var v) -> Node& {
  if (v.id >= nodes_.size()) throw ContractViolation("graph: invalid variable handle");
  return nodes_[v.id];
}

template <typename T>
Var Graph<T>::push(std::string_view op, Tensor<T> value, bool requires_grad, BackwardFn fn) {
  Node n;
  n.op = std::string(op);
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <typename T>
Var Graph<T>::record(std::string_view op, Tensor<T> value, const std::vector<Var>& inputs,
                     BackwardFn fn) {
  bool needs = false;
  if (record_) {
    for (Var in : inputs) needs = needs || node(in).requires_grad;
  }
  return push(op, std::move(value), needs, std::move(fn));
}

template <typename T>
Tensor<T>& Graph<T>::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.grad.empty() && !n.value.empty()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <typename T>
const Tensor<T>& Graph<T>::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.shape() != n.value.shape()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <typename T>
double Graph<T>::scalar(Var v) const {
  const Node& n = node(v);
  if (n.value.size() != 1) {
    throw ContractViolation("graph: scalar() on non-scalar node of shape " +
                            shape_string(n.value.shape()));
  }
  return static_cast<double>(n.value[0]);
}

template <typename T>
void Graph<T>::backward(Var loss) {
  if (node(loss).value.size() != 1) {
    throw ContractViolation("backward: loss must be scalar, got shape " +
                            shape_string(node(loss).value.shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor<T>();
  grad_buffer(loss).fill(T(1));
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, Var{i}, n.grad);
  }
}

template class Graph<float>;
template class Graph<double>;

// ---------------------------------------------------------------------------
// Ops

namespace ops {
namespace {

template <typename T>
const Tensor<T>& rank4(const Graph<T>& g, Var v, const char* what) {
  const Tensor<T>& t = g.value(v);
  if (t.rank() != 4) {
    throw ContractViolation(std::string(what) + ": expected NCHW tensor, got " + shape_string(t.shape()));
  }
  return t;
}

template <typename T, typename F>
Var unary(Graph<T>& g, Var a, const char* name, F&& f, typename Graph<T>::BackwardFn fn) {
  const Tensor<T>& x = g.value(a);
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return g.record(name, std::move(y), {a}, std::move(fn));
}

}  // namespace

template <typename T>
Var add(Graph<T>& g, Var a, Var b) {
  require_same_shape(g.value(a), g.value(b), "add");
  Tensor<T> y = g.value(a);
  const Tensor<T>& bv = g.value(b);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  return g.record("add", std::move(y), {a, b}, [a, b](Graph<T>& gr, Var, const Tensor<T>& go) {
    for (Var v : {a, b}) {
      if (!gr.requires_grad(v)) continue;
      Tensor<T>& gv = gr.grad_buffer(v);
      for (std::size_t i = 0; i < go.size(); ++i) gv[i] += go[i];
    }
  });
}

template <typename T>
Var sub(Graph<T>& g, Var a, Var b) {
  require_same_shape(g.value(a), g.value(b), "sub");
  Tensor<T> y = g.value(a);
  const Tensor<T>& bv = g.value(b);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  return g.record("sub", std::move(y), {a, b}, [a, b](Graph<T>& gr, Var, const Tensor<T>& go) {
    if (gr.requires_grad(a)) {
      Tensor<T>& ga = gr.grad_buffer(a);
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
    }
    if (gr.requires_grad(b)) {
      Tensor<T>& gb = gr.grad_buffer(b);
      for (std::size_t i = 0; i < go.size(); ++i) gb[i] -= go[i];
    }
  });
}

template <typename T>
Var mul(Graph<T>& g, Var a, Var b) {
  require_same_shape(g.value(a), g.value(b), "mul");
  Tensor<T> y = g.value(a);
  const Tensor<T>& bv = g.value(b);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return g.record("mul", std::move(y), {a, b}, [a, b](Graph<T>& gr, Var, const Tensor<T>& go) {
    const Tensor<T>& av = gr.value(a);
    const Tensor<T>& bv2 = gr.value(b);
    if (gr.requires_grad(a)) {
      Tensor<T>& ga = gr.grad_buffer(a);
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * bv2[i];
    }
    if (gr.requires_grad(b)) {
      Tensor<T>& gb = gr.grad_buffer(b);
      for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * av[i];
    }
  });
}

template <typename T>
Var scale(Graph<T>& g, Var a, double s) {
  const T k = static_cast<T>(s);
  return unary(g, a, "scale", [k](T x) { return k * x; },
               [a, k](Graph<T>& gr, Var, const Tensor<T>& go) {
                 Tensor<T>& ga = gr.grad_buffer(a);
                 for (std::size_t i = 0; i < go.size(); ++i) ga[i] += k * go[i];
               });
}

template <typename T>
Var add_scalar(Graph<T>& g, Var a, double s) {
  const T k = static_cast<T>(s);
  return unary(g, a, "add_scalar", [k](T x) { return x + k; },
               [a](Graph<T>& gr, Var, const Tensor<T>& go) {
                 Tensor<T>& ga = gr.grad_buffer(a);
                 for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
               });
}

template <typename T>
Var relu(Graph<T>& g, Var a) {
  return unary(g, a, "relu", [](T x) { return x > T(0) ? x : T(0); },
               [a](Graph<T>& gr, Var, const Tensor<T>& go) {
                 const Tensor<T>& x = gr.value(a);
                 Tensor<T>& ga = gr.grad_buffer(a);
                 for (std::size_t i = 0; i < go.size(); ++i) {
                   if (x[i] > T(0)) ga[i] += go[i];
                 }
               });
}

template <typename T>
Var tanh(Graph<T>& g, Var a) {
  return unary(g, a, "tanh", [](T x) { return std::tanh(x); },
               [a](Graph<T>& gr, Var out, const Tensor<T>& go) {
                 const Tensor<T>& y = gr.value(out);
                 Tensor<T>& ga = gr.grad_buffer(a);
                 for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * (T(1) - y[i] * y[i]);
               });
}

template <typename T>
Var abs(Graph<T>& g, Var a) {
  return unary(g, a, "abs", [](T x) { return std::abs(x); },
               [a](Graph<T>& gr, Var, const Tensor<T>& go) {
                 const Tensor<T>& x = gr.value(a);
                 Tensor<T>& ga = gr.grad_buffer(a);
                 for (std::size_t i = 0; i < go.size(); ++i) {
                   if (x[i] > T(0)) {
                     ga[i] += go[i];
                   } else if (x[i] < T(0)) {
                     ga[i] -= go[i];
                   }
                 }
               });
}

template <typename T>
Var square(Graph<T>& g, Var a) {
  return unary(g, a, "square", [](T x) { return x * x; },
               [a](Graph<T>& gr, Var, const Tensor<T>& go) {
                 const Tensor<T>& x = gr.value(a);
                 Tensor<T>& ga = gr.grad_buffer(a);
                 for (std::size_t i = 0; i < go.size(); ++i) ga[i] += T(2) * x[i] * go[i];
               });
}

template <typename T>
Var quadratic_curve_step(Graph<T>& g, Var x, Var alpha) {
  const Tensor<T>& xv = g.value(x);
  const Tensor<T>& av = g.value(alpha);
  require_same_shape(xv, av, "quadratic_curve_step");
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] + av[i] * xv[i] * (T(1) - xv[i]);
  return g.record("quadratic_curve_step", std::move(y), {x, alpha},
                  [x, alpha](Graph<T>& gr, Var, const Tensor<T>& go) {
                    const Tensor<T>& xs = gr.value(x);
                    const Tensor<T>& as = gr.value(alpha);
                    if (gr.requires_grad(x)) {
                      Tensor<T>& gx = gr.grad_buffer(x);
                      for (std::size_t i = 0; i < go.size(); ++i) {
                        gx[i] += go[i] * (T(1) + as[i] * (T(1) - T(2) * xs[i]));
                      }
                    }
                    if (gr.requires_grad(alpha)) {
                      Tensor<T>& ga = gr.grad_buffer(alpha);
                      for (std::size_t i = 0; i < go.size(); ++i) {
                        ga[i] += go[i] * xs[i] * (T(1) - xs[i]);
                      }
                    }
                  });
}

template <typename T>
Var sum(Graph<T>& g, Var a) {
  const Tensor<T>& x = g.value(a);
  double acc = 0.0;
  for (T v : x.values()) acc += static_cast<double>(v);
  return g.record("sum", Tensor<T>({1}, static_cast<T>(acc)), {a},
                  [a](Graph<T>& gr, Var, const Tensor<T>& go) {
                    Tensor<T>& ga = gr.grad_buffer(a);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[0];
                  });
}

template <typename T>
Var mean(Graph<T>& g, Var a) {
  const Tensor<T>& x = g.value(a);
  if (x.empty()) throw ContractViolation("mean: empty tensor");
  double acc = 0.0;
  for (T v : x.values()) acc += static_cast<double>(v);
  const double n = static_cast<double>(x.size());
  return g.record("mean", Tensor<T>({1}, static_cast<T>(acc / n)), {a},
                  [a, n](Graph<T>& gr, Var, const Tensor<T>& go) {
                    Tensor<T>& ga = gr.grad_buffer(a);
                    const T d = static_cast<T>(static_cast<double>(go[0]) / n);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += d;
                  });
}

template <typename T>
Var concat_channels(Graph<T>& g, const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractViolation("concat_channels: no inputs");
  const Tensor<T>& first = rank4(g, parts.front(), "concat_channels");
  const std::size_t n = first.batch();
  const std::size_t h = first.height();
  const std::size_t w = first.width();
  std::size_t total = 0;
  for (Var p : parts) {
    const Tensor<T>& t = rank4(g, p, "concat_channels");
    if (t.batch() != n || t.height() != h || t.width() != w) {
      throw ContractViolation("concat_channels: incompatible shapes " + shape_string(first.shape()) +
                              " and " + shape_string(t.shape()));
    }
    total += t.channels();
  }
  const std::size_t plane = h * w;
  Tensor<T> y = Tensor<T>::nchw(n, total, h, w);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor<T>& t = g.value(p);
    const std::size_t c = t.channels();
    for (std::size_t b = 0; b < n; ++b) {
      std::copy_n(t.raw() + b * c * plane, c * plane, y.raw() + (b * total + offset) * plane);
    }
    offset += c;
  }
  return g.record("concat_channels", std::move(y), parts,
                  [parts, n, total, plane](Graph<T>& gr, Var, const Tensor<T>& go) {
                    std::size_t off = 0;
                    for (Var p : parts) {
                      const std::size_t c = gr.value(p).channels();
                      if (gr.requires_grad(p)) {
                        Tensor<T>& gp = gr.grad_buffer(p);
                        for (std::size_t b = 0; b < n; ++b) {
                          const T* src = go.raw() + (b * total + off) * plane;
                          T* dst = gp.raw() + b * c * plane;
                          for (std::size_t i = 0; i < c * plane; ++i) dst[i] += src[i];
                        }
                      }
                      off += c;
                    }
                  });
}

template <typename T>
Var slice_channels(Graph<T>& g, Var a, std::size_t begin, std::size_t end) {
  const Tensor<T>& x = rank4(g, a, "slice_channels");
  if (begin >= end || end > x.channels()) {
    throw ContractViolation("slice_channels: bad range [" + std::to_string(begin) + "," +
                            std::to_string(end) + ") for " + shape_string(x.shape()));
  }
  const std::size_t n = x.batch();
  const std::size_t c_in = x.channels();
  const std::size_t c = end - begin;
  const std::size_t plane = x.height() * x.width();
  Tensor<T> y = Tensor<T>::nchw(n, c, x.height(), x.width());
  for (std::size_t b = 0; b < n; ++b) {
    std::copy_n(x.raw() + (b * c_in + begin) * plane, c * plane, y.raw() + b * c * plane);
  }
  return g.record("slice_channels", std::move(y), {a},
                  [a, n, c_in, c, begin, plane](Graph<T>& gr, Var, const Tensor<T>& go) {
                    Tensor<T>& ga = gr.grad_buffer(a);
                    for (std::size_t b = 0; b < n; ++b) {
                      const T* src = go.raw() + b * c * plane;
                      T* dst = ga.raw() + (b * c_in + begin) * plane;
                      for (std::size_t i = 0; i < c * plane; ++i) dst[i] += src[i];
                    }
                  });
}

template <typename T>
Var crop(Graph<T>& g, Var a, std::size_t y0, std::size_t y1, std::size_t x0, std::size_t x1) {
  const Tensor<T>& x = rank4(g, a, "crop");
  if (y0 >= y1 || x0 >= x1 || y1 > x.height() || x1 > x.width()) {
    throw ContractViolation("crop: window out of range for " + shape_string(x.shape()));
  }
  const std::size_t planes = x.batch() * x.channels();
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  const std::size_t oh = y1 - y0;
  const std::size_t ow = x1 - x0;
  Tensor<T> y = Tensor<T>::nchw(x.batch(), x.channels(), oh, ow);
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t r = 0; r < oh; ++r) {
      std::copy_n(x.raw() + (p * h + y0 + r) * w + x0, ow, y.raw() + (p * oh + r) * ow);
    }
  }
  return g.record("crop", std::move(y), {a},
                  [a, planes, h, w, oh, ow, y0, x0](Graph<T>& gr, Var, const Tensor<T>& go) {
                    Tensor<T>& ga = gr.grad_buffer(a);
                    for (std::size_t p = 0; p < planes; ++p) {
                      for (std::size_t r = 0; r < oh; ++r) {
                        const T* src = go.raw() + (p * oh + r) * ow;
                        T* dst = ga.raw() + (p * h + y0 + r) * w + x0;
                        for (std::size_t i = 0; i < ow; ++i) dst[i] += src[i];
                      }
                    }
                  });
}

template <typename T>
Var avg_pool(Graph<T>& g, Var a, std::size_t k) {
  const Tensor<T>& x = rank4(g, a, "avg_pool");
  if (k == 0 || x.height() < k || x.width() < k) {
    throw ConfigError("avg_pool: tile " + std::to_string(k) + " does not fit " + shape_string(x.shape()));
  }
  const std::size_t planes = x.batch() * x.channels();
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  const std::size_t oh = h / k;
  const std::size_t ow = w / k;
  const double inv = 1.0 / static_cast<double>(k * k);
  Tensor<T> y = Tensor<T>::nchw(x.batch(), x.channels(), oh, ow);
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = x.raw() + p * h * w;
    for (std::size_t ty = 0; ty < oh; ++ty) {
      for (std::size_t tx = 0; tx < ow; ++tx) {
        double acc = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
          const T* row = src + (ty * k + r) * w + tx * k;
          for (std::size_t c = 0; c < k; ++c) acc += static_cast<double>(row[c]);
        }
        y[(p * oh + ty) * ow + tx] = static_cast<T>(acc * inv);
      }
    }
  }
  return g.record("avg_pool", std::move(y), {a},
                  [a, planes, h, w, oh, ow, k, inv](Graph<T>& gr, Var, const Tensor<T>& go) {
                    Tensor<T>& ga = gr.grad_buffer(a);
                    for (std::size_t p = 0; p < planes; ++p) {
                      T* dst = ga.raw() + p * h * w;
                      for (std::size_t ty = 0; ty < oh; ++ty) {
                        for (std::size_t tx = 0; tx < ow; ++tx) {
                          const T d = static_cast<T>(go[(p * oh + ty) * ow + tx] * inv);
                          for (std::size_t r = 0; r < k; ++r) {
                            T* row = dst + (ty * k + r) * w + tx * k;
                            for (std::size_t c = 0; c < k; ++c) row[c] += d;
                          }
                        }
                      }
                    }
                  });
}

template <typename T>
Var channel_mean(Graph<T>& g, Var a) {
  const Tensor<T>& x = rank4(g, a, "channel_mean");
  const std::size_t n = x.batch();
  const std::size_t c = x.channels();
  const std::size_t plane = x.height() * x.width();
  const double inv = 1.0 / static_cast<double>(c);
  Tensor<T> y = Tensor<T>::nchw(n, 1, x.height(), x.width());
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t i = 0; i < plane; ++i) {
      double acc = 0.0;
      for (std::size_t ch = 0; ch < c; ++ch) acc += static_cast<double>(x[(b * c + ch) * plane + i]);
      y[b * plane + i] = static_cast<T>(acc * inv);
    }
  }
  return g.record("channel_mean", std::move(y), {a},
                  [a, n, c, plane, inv](Graph<T>& gr, Var, const Tensor<T>& go) {
                    Tensor<T>& ga = gr.grad_buffer(a);
                    for (std::size_t b = 0; b < n; ++b) {
                      for (std::size_t ch = 0; ch < c; ++ch) {
                        T* dst = ga.raw() + (b * c + ch) * plane;
                        const T* src = go.raw() + b * plane;
                        for (std::size_t i = 0; i < plane; ++i) dst[i] += static_cast<T>(src[i] * inv);
                      }
                    }
                  });
}

namespace {

template <typename T>
Var plane_reduce(Graph<T>& g, Var a, bool average, const char* name) {
  const Tensor<T>& x = rank4(g, a, name);
  const std::size_t planes = x.batch() * x.channels();
  const std::size_t plane = x.height() * x.width();
  const double factor = average ? 1.0 / static_cast<double>(plane) : 1.0;
  Tensor<T> y = Tensor<T>::nchw(x.batch(), x.channels(), 1, 1);
  for (std::size_t p = 0; p < planes; ++p) {
    double acc = 0.0;
    const T* src = x.raw() + p * plane;
    for (std::size_t i = 0; i < plane; ++i) acc += static_cast<double>(src[i]);
    y[p] = static_cast<T>(acc * factor);
  }
  return g.record(name, std::move(y), {a},
                  [a, planes, plane, factor](Graph<T>& gr, Var, const Tensor<T>& go) {
                    Tensor<T>& ga = gr.grad_buffer(a);
                    for (std::size_t p = 0; p < planes; ++p) {
                      const T d = static_cast<T>(go[p] * factor);
                      T* dst = ga.raw() + p * plane;
                      for (std::size_t i = 0; i < plane; ++i) dst[i] += d;
                    }
                  });
}

}  // namespace

template <typename T>
Var sum_hw(Graph<T>& g, Var a) {
  return plane_reduce(g, a, false, "sum_hw");
}

template <typename T>
Var mean_hw(Graph<T>& g, Var a) {
  return plane_reduce(g, a, true, "mean_hw");
}

template <typename T>
Var conv2d(Graph<T>& g, Var x, Var weight, Var bias, std::size_t groups) {
  const Tensor<T>& xv = rank4(g, x, "conv2d");
  const Tensor<T>& wv = g.value(weight);
  if (wv.rank() != 4 || wv.dim(2) != wv.dim(3)) {
    throw ConfigError("conv2d: kernel must be (Cout, Cin/groups, k, k), got " + shape_string(wv.shape()));
  }
  detail::ConvGeometry geo;
  geo.batch = xv.batch();
  geo.in_channels = xv.channels();
  geo.out_channels = wv.dim(0);
  geo.height = xv.height();
  geo.width = xv.width();
  geo.kernel = wv.dim(2);
  geo.groups = groups;
  detail::validate(geo);
  if (wv.dim(1) != geo.in_per_group()) {
    throw ConfigError("conv2d: kernel expects " + std::to_string(wv.dim(1)) +
                      " input channels per group, input provides " + std::to_string(geo.in_per_group()));
  }
  const T* bptr = nullptr;
  std::vector<Var> inputs{x, weight};
  if (bias.valid()) {
    const Tensor<T>& bv = g.value(bias);
    if (bv.size() != geo.out_channels) {
      throw ConfigError("conv2d: bias length " + std::to_string(bv.size()) + " != output channels " +
                        std::to_string(geo.out_channels));
    }
    bptr = bv.raw();
    inputs.push_back(bias);
  }
  Tensor<T> y = Tensor<T>::nchw(geo.batch, geo.out_channels, geo.height, geo.width);
  detail::conv_forward(xv.raw(), wv.raw(), bptr, y.raw(), geo);
  return g.record("conv2d", std::move(y), inputs,
                  [x, weight, bias, geo](Graph<T>& gr, Var, const Tensor<T>& go) {
                    T* dx = gr.requires_grad(x) ? gr.grad_buffer(x).raw() : nullptr;
                    T* dw = gr.requires_grad(weight) ? gr.grad_buffer(weight).raw() : nullptr;
                    T* db = bias.valid() && gr.requires_grad(bias) ? gr.grad_buffer(bias).raw() : nullptr;
                    detail::conv_backward(gr.value(x).raw(), gr.value(weight).raw(), go.raw(), dx, dw, db,
                                          geo);
                  });
}

template <typename T>
Var resize_bilinear(Graph<T>& g, Var x, std::size_t out_h, std::size_t out_w) {
  const Tensor<T>& xv = rank4(g, x, "resize_bilinear");
  if (out_h < 1 || out_w < 1) throw ConfigError("resize_bilinear: output dimension < 1");
  const std::size_t planes = xv.batch() * xv.channels();
  const std::size_t in_h = xv.height();
  const std::size_t in_w = xv.width();
  auto rows = detail::resize_taps(in_h, out_h);
  auto cols = detail::resize_taps(in_w, out_w);
  Tensor<T> y = Tensor<T>::nchw(xv.batch(), xv.channels(), out_h, out_w);
  detail::resize_forward(xv.raw(), y.raw(), planes, in_h, in_w, rows, cols);
  return g.record("resize_bilinear", std::move(y), {x},
                  [x, planes, in_h, in_w, rows = std::move(rows), cols = std::move(cols)](
                      Graph<T>& gr, Var, const Tensor<T>& go) {
                    detail::resize_backward(go.raw(), gr.grad_buffer(x).raw(), planes, in_h, in_w, rows,
                                            cols);
                  });
}

template <typename T>
Var resize_bilinear(Graph<T>& g, Var x, double scale) {
  const Tensor<T>& xv = rank4(g, x, "resize_bilinear");
  return resize_bilinear(g, x, scaled_dim(xv.height(), scale), scaled_dim(xv.width(), scale));
}

#define CUDI_INSTANTIATE_OPS(T)                                                               \
  template Var add<T>(Graph<T>&, Var, Var);                                                   \
  template Var sub<T>(Graph<T>&, Var, Var);                                                   \
  template Var mul<T>(Graph<T>&, Var, Var);                                                   \
  template Var scale<T>(Graph<T>&, Var, double);                                              \
  template Var add_scalar<T>(Graph<T>&, Var, double);                                         \
  template Var relu<T>(Graph<T>&, Var);                                                       \
  template Var tanh<T>(Graph<T>&, Var);                                                       \
  template Var abs<T>(Graph<T>&, Var);                                                        \
  template Var square<T>(Graph<T>&, Var);                                                     \
  template Var quadratic_curve_step<T>(Graph<T>&, Var, Var);                                  \
  template Var sum<T>(Graph<T>&, Var);                                                        \
  template Var mean<T>(Graph<T>&, Var);                                                       \
  template Var concat_channels<T>(Graph<T>&, const std::vector<Var>&);                        \
  template Var slice_channels<T>(Graph<T>&, Var, std::size_t, std::size_t);                   \
  template Var crop<T>(Graph<T>&, Var, std::size_t, std::size_t, std::size_t, std::size_t);   \
  template Var avg_pool<T>(Graph<T>&, Var, std::size_t);                                      \
  template Var channel_mean<T>(Graph<T>&, Var);                                               \
  template Var sum_hw<T>(Graph<T>&, Var);                                                     \
  template Var mean_hw<T>(Graph<T>&, Var);                                                    \
  template Var conv2d<T>(Graph<T>&, Var, Var, Var, std::size_t);                              \
  template Var resize_bilinear<T>(Graph<T>&, Var, std::size_t, std::size_t);                  \
  template Var resize_bilinear<T>(Graph<T>&, Var, double);

CUDI_INSTANTIATE_OPS(float)
CUDI_INSTANTIATE_OPS(double)

#undef CUDI_INSTANTIATE_OPS

}  // namespace ops

// ---------------------------------------------------------------------------
// Graph-free wrappers

std::size_t scaled_dim(std::size_t in, double scale) {
  if (!(scale > 0.0)) throw ConfigError("resize: scale must be positive");
  const auto out = std::lround(static_cast<double>(in) * scale);
  if (out < 1) {
    throw ConfigError("resize: " + std::to_string(in) + " * " + std::to_string(scale) +
                      " gives an empty dimension");
  }
  return static_cast<std::size_t>(out);
}

namespace {

DenseArray as_nchw(const DenseArray& t, const char* what) {
  if (t.rank() == 4) return t;
  if (t.rank() == 3) return t.reshaped({1, t.dim(0), t.dim(1), t.dim(2)});
  throw ContractViolation(std::string(what) + ": expected CHW or NCHW, got " + shape_string(t.shape()));
}

DenseArray restore_rank(DenseArray out, std::size_t rank) {
  if (rank == 4) return out;
  return std::move(out).reshaped({out.dim(1), out.dim(2), out.dim(3)});
}

}  // namespace

DenseArray conv2d_forward(const DenseArray& input, const DenseArray& kernel, std::size_t groups,
                          const DenseArray* bias) {
  Graph<float> g(false);
  const Var x = g.constant(as_nchw(input, "conv2d_forward"));
  const Var w = g.constant(kernel);
  const Var b = bias ? g.constant(*bias) : Var{};
  return restore_rank(g.value(ops::conv2d(g, x, w, b, groups)), input.rank());
}

DenseArray bilinear_resize(const DenseArray& input, std::size_t out_h, std::size_t out_w) {
  Graph<float> g(false);
  const Var x = g.constant(as_nchw(input, "bilinear_resize"));
  return restore_rank(g.value(ops::resize_bilinear(g, x, out_h, out_w)), input.rank());
}

DenseArray bilinear_resize(const DenseArray& input, double scale) {
  const DenseArray x = as_nchw(input, "bilinear_resize");
  return bilinear_resize(input, scaled_dim(x.height(), scale), scaled_dim(x.width(), scale));
}

}  // namespace cudi
