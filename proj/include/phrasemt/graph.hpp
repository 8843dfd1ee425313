#pragma once

#include <cmath>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "phrasemt/params.hpp"
#include "phrasemt/tensor.hpp"

namespace phrasemt::nn {

using NodeId = int;

// Reverse-mode autodiff tape over dense tensors.  Ops append nodes whose
// backward closures accumulate into the gradients of their inputs; backward()
// walks the tape in reverse creation order, which is a valid topological
// order because ops only ever reference already-created nodes.
//
// Forward and backward are single-threaded and evaluate in a fixed order, so
// results are bit-reproducible for fixed inputs.
template <typename T>
class Graph {
 public:
  const Tensor<T>& val(NodeId id) const { return nodes_[id].value; }
  Tensor<T>& grad(NodeId id) { return nodes_[id].grad; }

  NodeId leaf(Tensor<T> v) {
    nodes_.push_back(Node{std::move(v), {}, nullptr});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  // Leaf bound to a trainable parameter; repeated use of the same parameter
  // returns the same node so its gradient contributions accumulate.
  NodeId use(Parameter<T>& p) {
    auto it = bound_.find(&p);
    if (it != bound_.end()) return it->second;
    NodeId id = leaf(p.values);
    bound_.emplace(&p, id);
    return id;
  }

  // Adds tape gradients into Parameter::gradient for every bound parameter.
  void flush_param_grads() {
    for (auto& [p, id] : bound_) {
      Tensor<T>& g = nodes_[id].grad;
      if (g.data.empty()) continue;
      for (long i = 0; i < g.numel(); ++i) p->gradient.at(i) += g.at(i);
    }
  }

  void backward(NodeId root) {
    if (val(root).numel() != 1) throw ShapeError("backward: root must be scalar");
    for (auto& n : nodes_)
      if (n.grad.data.empty()) n.grad = Tensor<T>::zeros(n.value.shape);
    nodes_[root].grad.at(0) = T(1);
    for (long i = static_cast<long>(nodes_.size()) - 1; i >= 0; --i)
      if (nodes_[i].back) nodes_[i].back(*this);
  }

  // ---- elementwise ----

  NodeId add(NodeId a, NodeId b) {
    check_same_shape(val(a), val(b), "add");
    Tensor<T> y = val(a);
    for (long i = 0; i < y.numel(); ++i) y.at(i) += val(b).at(i);
    return make(std::move(y), [a, b](Graph& g, Node& n) {
      g.axpy(a, T(1), n.grad);
      g.axpy(b, T(1), n.grad);
    });
  }

  NodeId sub(NodeId a, NodeId b) {
    check_same_shape(val(a), val(b), "sub");
    Tensor<T> y = val(a);
    for (long i = 0; i < y.numel(); ++i) y.at(i) -= val(b).at(i);
    return make(std::move(y), [a, b](Graph& g, Node& n) {
      g.axpy(a, T(1), n.grad);
      g.axpy(b, T(-1), n.grad);
    });
  }

  NodeId mul(NodeId a, NodeId b) {
    check_same_shape(val(a), val(b), "mul");
    Tensor<T> y = val(a);
    for (long i = 0; i < y.numel(); ++i) y.at(i) *= val(b).at(i);
    return make(std::move(y), [a, b](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      Tensor<T>& gb = g.grad(b);
      const Tensor<T>& va = g.val(a);
      const Tensor<T>& vb = g.val(b);
      for (long i = 0; i < n.grad.numel(); ++i) {
        ga.at(i) += n.grad.at(i) * vb.at(i);
        gb.at(i) += n.grad.at(i) * va.at(i);
      }
    });
  }

  NodeId div(NodeId a, NodeId b) {
    check_same_shape(val(a), val(b), "div");
    Tensor<T> y = val(a);
    for (long i = 0; i < y.numel(); ++i) y.at(i) /= val(b).at(i);
    return make(std::move(y), [a, b](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      Tensor<T>& gb = g.grad(b);
      const Tensor<T>& vb = g.val(b);
      const Tensor<T>& vy = n.value;
      for (long i = 0; i < n.grad.numel(); ++i) {
        ga.at(i) += n.grad.at(i) / vb.at(i);
        gb.at(i) -= n.grad.at(i) * vy.at(i) / vb.at(i);
      }
    });
  }

  NodeId scale(NodeId a, T c) {
    Tensor<T> y = val(a);
    for (auto& x : y.data) x *= c;
    return make(std::move(y), [a, c](Graph& g, Node& n) { g.axpy(a, c, n.grad); });
  }

  // y = x + c, c a plain tensor (positional encodings, sampled offsets, ...)
  NodeId add_const(NodeId a, const Tensor<T>& c) {
    check_same_shape(val(a), c, "add_const");
    Tensor<T> y = val(a);
    for (long i = 0; i < y.numel(); ++i) y.at(i) += c.at(i);
    return make(std::move(y), [a](Graph& g, Node& n) { g.axpy(a, T(1), n.grad); });
  }

  // y = x (.) c, c a plain tensor (dropout masks, reparameterization noise)
  NodeId mul_const(NodeId a, Tensor<T> c) {
    check_same_shape(val(a), c, "mul_const");
    Tensor<T> y = val(a);
    for (long i = 0; i < y.numel(); ++i) y.at(i) *= c.at(i);
    return make(std::move(y), [a, c = std::move(c)](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      for (long i = 0; i < n.grad.numel(); ++i) ga.at(i) += n.grad.at(i) * c.at(i);
    });
  }

  NodeId sigmoid(NodeId a) {
    Tensor<T> y = val(a);
    for (auto& x : y.data) x = stable_sigmoid(x);
    return unary_from_output(a, std::move(y), [](T yi) { return yi * (T(1) - yi); });
  }

  NodeId tanh_op(NodeId a) {
    Tensor<T> y = val(a);
    for (auto& x : y.data) x = std::tanh(x);
    return unary_from_output(a, std::move(y), [](T yi) { return T(1) - yi * yi; });
  }

  NodeId relu(NodeId a) {
    Tensor<T> y = val(a);
    for (auto& x : y.data) x = x > T(0) ? x : T(0);
    return make(std::move(y), [a](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      const Tensor<T>& vx = g.val(a);
      for (long i = 0; i < n.grad.numel(); ++i)
        if (vx.at(i) > T(0)) ga.at(i) += n.grad.at(i);
    });
  }

  NodeId softplus(NodeId a) {
    Tensor<T> y = val(a);
    for (auto& x : y.data) x = stable_softplus(x);
    return make(std::move(y), [a](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      const Tensor<T>& vx = g.val(a);
      for (long i = 0; i < n.grad.numel(); ++i)
        ga.at(i) += n.grad.at(i) * stable_sigmoid(vx.at(i));
    });
  }

  NodeId exp_op(NodeId a) {
    Tensor<T> y = val(a);
    for (auto& x : y.data) x = std::exp(x);
    return unary_from_output(a, std::move(y), [](T yi) { return yi; });
  }

  NodeId log_op(NodeId a) {
    Tensor<T> y = val(a);
    for (auto& x : y.data) x = std::log(x);
    return make(std::move(y), [a](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      const Tensor<T>& vx = g.val(a);
      for (long i = 0; i < n.grad.numel(); ++i) ga.at(i) += n.grad.at(i) / vx.at(i);
    });
  }

  // ---- linear algebra ----

  // [n x k] . [k x m]
  NodeId matmul(NodeId a, NodeId b) {
    const Tensor<T>& va = val(a);
    const Tensor<T>& vb = val(b);
    if (va.cols() != vb.rows())
      throw ShapeError("matmul: inner dims " + va.shape_str() + " vs " + vb.shape_str());
    Tensor<T> y({va.rows(), vb.cols()});
    gemm_nn(va, vb, y);
    return make(std::move(y), [a, b](Graph& g, Node& n) {
      gemm_nt(n.grad, g.val(b), g.grad(a));  // ga += g . b^T
      gemm_tn(g.val(a), n.grad, g.grad(b));  // gb += a^T . g
    });
  }

  // a . b^T, a [n x k], b [m x k] -> [n x m]
  NodeId matmul_bt(NodeId a, NodeId b) {
    const Tensor<T>& va = val(a);
    const Tensor<T>& vb = val(b);
    if (va.cols() != vb.cols())
      throw ShapeError("matmul_bt: inner dims " + va.shape_str() + " vs " + vb.shape_str());
    Tensor<T> y({va.rows(), vb.rows()});
    gemm_nt(va, vb, y);
    return make(std::move(y), [a, b](Graph& g, Node& n) {
      gemm_nn(n.grad, g.val(b), g.grad(a));  // ga += g . b
      gemm_tn(n.grad, g.val(a), g.grad(b));  // gb += g^T . a
    });
  }

  // m [n x d] + v (d or 1 x d) broadcast over rows
  NodeId add_rowvec(NodeId m, NodeId v) {
    const Tensor<T>& vm = val(m);
    const Tensor<T>& vv = val(v);
    if (vm.cols() != vv.numel()) throw ShapeError("add_rowvec: width mismatch");
    Tensor<T> y = vm;
    for (long r = 0; r < y.rows(); ++r)
      for (long c = 0; c < y.cols(); ++c) y.at(r, c) += vv.at(c);
    return make(std::move(y), [m, v](Graph& g, Node& n) {
      g.axpy(m, T(1), n.grad);
      Tensor<T>& gv = g.grad(v);
      for (long r = 0; r < n.grad.rows(); ++r)
        for (long c = 0; c < n.grad.cols(); ++c) gv.at(c) += n.grad.at(r, c);
    });
  }

  // ---- softmax / losses ----

  // Row-wise softmax; additive_mask (same shape, plain tensor) is added to
  // the logits first.  Entries at -1e9 get zero probability.
  NodeId row_softmax(NodeId a, const Tensor<T>* additive_mask = nullptr) {
    Tensor<T> y = val(a);
    if (additive_mask) {
      check_same_shape(y, *additive_mask, "row_softmax mask");
      for (long i = 0; i < y.numel(); ++i) y.at(i) += additive_mask->at(i);
    }
    for (long r = 0; r < y.rows(); ++r) {
      T* p = y.row_ptr(r);
      T mx = p[0];
      for (long c = 1; c < y.cols(); ++c) mx = std::max(mx, p[c]);
      T z = T(0);
      for (long c = 0; c < y.cols(); ++c) {
        p[c] = std::exp(p[c] - mx);
        z += p[c];
      }
      for (long c = 0; c < y.cols(); ++c) p[c] /= z;
    }
    return make(std::move(y), [a](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      const Tensor<T>& y = n.value;
      for (long r = 0; r < y.rows(); ++r) {
        T dot = T(0);
        for (long c = 0; c < y.cols(); ++c) dot += n.grad.at(r, c) * y.at(r, c);
        for (long c = 0; c < y.cols(); ++c)
          ga.at(r, c) += y.at(r, c) * (n.grad.at(r, c) - dot);
      }
    });
  }

  enum class Reduction { Mean, Sum };

  // Label-smoothed cross entropy.  Target distribution per row is
  // (1 - smoothing) on the gold token plus smoothing spread uniformly over
  // the full vocabulary, so it always sums to one.
  NodeId cross_entropy_label_smoothed(NodeId logits, std::vector<int> targets, T smoothing,
                                      Reduction red = Reduction::Mean) {
    const Tensor<T>& lv = val(logits);
    const long m = lv.rows();
    const long vsz = lv.cols();
    if (static_cast<long>(targets.size()) != m)
      throw ShapeError("cross_entropy: target count does not match logit rows");
    if (!(smoothing >= T(0) && smoothing < T(1)))
      throw DomainError("cross_entropy: smoothing must be in [0,1)");
    for (int t : targets)
      if (t < 0 || t >= vsz) throw DomainError("cross_entropy: target id out of vocabulary");
    const T uni = smoothing / static_cast<T>(vsz);
    T total = T(0);
    for (long r = 0; r < m; ++r) {
      const T* p = lv.row_ptr(r);
      T mx = p[0];
      for (long c = 1; c < vsz; ++c) mx = std::max(mx, p[c]);
      T z = T(0), qdot = T(0);
      for (long c = 0; c < vsz; ++c) {
        z += std::exp(p[c] - mx);
        qdot += uni * p[c];
      }
      qdot += (T(1) - smoothing) * p[targets[r]];
      total += std::log(z) + mx - qdot;
    }
    const T norm = red == Reduction::Mean ? T(1) / static_cast<T>(m) : T(1);
    Tensor<T> y = Tensor<T>::scalar(total * norm);
    return make(std::move(y),
                [logits, targets = std::move(targets), smoothing, uni, norm](Graph& g, Node& n) {
                  Tensor<T>& gl = g.grad(logits);
                  const Tensor<T>& lv = g.val(logits);
                  const T go = n.grad.at(0) * norm;
                  const long vsz = lv.cols();
                  for (long r = 0; r < lv.rows(); ++r) {
                    const T* p = lv.row_ptr(r);
                    T mx = p[0];
                    for (long c = 1; c < vsz; ++c) mx = std::max(mx, p[c]);
                    T z = T(0);
                    for (long c = 0; c < vsz; ++c) z += std::exp(p[c] - mx);
                    for (long c = 0; c < vsz; ++c) {
                      T soft = std::exp(p[c] - mx) / z;
                      T q = uni + (c == targets[r] ? T(1) - smoothing : T(0));
                      gl.at(r, c) += go * (soft - q);
                    }
                  }
                });
  }

  // ---- shape ops ----

  NodeId slice_rows(NodeId a, long start, long len) {
    const Tensor<T>& va = val(a);
    if (start < 0 || len < 1 || start + len > va.rows())
      throw ShapeError("slice_rows: range out of bounds");
    Tensor<T> y({len, va.cols()});
    std::copy(va.row_ptr(start), va.row_ptr(start) + len * va.cols(), y.data.begin());
    return make(std::move(y), [a, start](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      for (long r = 0; r < n.grad.rows(); ++r)
        for (long c = 0; c < n.grad.cols(); ++c) ga.at(start + r, c) += n.grad.at(r, c);
    });
  }

  NodeId slice_cols(NodeId a, long start, long len) {
    const Tensor<T>& va = val(a);
    if (start < 0 || len < 1 || start + len > va.cols())
      throw ShapeError("slice_cols: range out of bounds");
    Tensor<T> y({va.rows(), len});
    for (long r = 0; r < va.rows(); ++r)
      std::copy(va.row_ptr(r) + start, va.row_ptr(r) + start + len, y.row_ptr(r));
    return make(std::move(y), [a, start](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      for (long r = 0; r < n.grad.rows(); ++r)
        for (long c = 0; c < n.grad.cols(); ++c) ga.at(r, start + c) += n.grad.at(r, c);
    });
  }

  NodeId concat_rows(const std::vector<NodeId>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: empty");
    const long cols = val(parts[0]).cols();
    long rows = 0;
    for (NodeId p : parts) {
      if (val(p).cols() != cols) throw ShapeError("concat_rows: width mismatch");
      rows += val(p).rows();
    }
    Tensor<T> y({rows, cols});
    long r0 = 0;
    for (NodeId p : parts) {
      const Tensor<T>& vp = val(p);
      std::copy(vp.data.begin(), vp.data.end(), y.row_ptr(r0));
      r0 += vp.rows();
    }
    return make(std::move(y), [parts](Graph& g, Node& n) {
      long r0 = 0;
      for (NodeId p : parts) {
        Tensor<T>& gp = g.grad(p);
        for (long r = 0; r < gp.rows(); ++r)
          for (long c = 0; c < gp.cols(); ++c) gp.at(r, c) += n.grad.at(r0 + r, c);
        r0 += gp.rows();
      }
    });
  }

  NodeId concat_cols(const std::vector<NodeId>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: empty");
    const long rows = val(parts[0]).rows();
    long cols = 0;
    for (NodeId p : parts) {
      if (val(p).rows() != rows) throw ShapeError("concat_cols: height mismatch");
      cols += val(p).cols();
    }
    Tensor<T> y({rows, cols});
    long c0 = 0;
    for (NodeId p : parts) {
      const Tensor<T>& vp = val(p);
      for (long r = 0; r < rows; ++r)
        std::copy(vp.row_ptr(r), vp.row_ptr(r) + vp.cols(), y.row_ptr(r) + c0);
      c0 += vp.cols();
    }
    return make(std::move(y), [parts](Graph& g, Node& n) {
      long c0 = 0;
      for (NodeId p : parts) {
        Tensor<T>& gp = g.grad(p);
        for (long r = 0; r < gp.rows(); ++r)
          for (long c = 0; c < gp.cols(); ++c) gp.at(r, c) += n.grad.at(r, c0 + c);
        c0 += gp.cols();
      }
    });
  }

  // Gather rows of an embedding table; backward scatter-adds.
  NodeId embedding(NodeId table, std::vector<int> ids) {
    const Tensor<T>& tv = val(table);
    const long n = static_cast<long>(ids.size());
    for (int id : ids)
      if (id < 0 || id >= tv.rows()) throw DomainError("embedding: id out of table");
    Tensor<T> y({n, tv.cols()});
    for (long r = 0; r < n; ++r)
      std::copy(tv.row_ptr(ids[r]), tv.row_ptr(ids[r]) + tv.cols(), y.row_ptr(r));
    return make(std::move(y), [table, ids = std::move(ids)](Graph& g, Node& n) {
      Tensor<T>& gt = g.grad(table);
      for (long r = 0; r < n.grad.rows(); ++r)
        for (long c = 0; c < n.grad.cols(); ++c) gt.at(ids[r], c) += n.grad.at(r, c);
    });
  }

  // Row-wise layer norm with affine parameters; gamma/beta are width-d nodes.
  NodeId layer_norm(NodeId x, NodeId gamma, NodeId beta, T eps = T(1e-5)) {
    const Tensor<T>& vx = val(x);
    const long d = vx.cols();
    if (val(gamma).numel() != d || val(beta).numel() != d)
      throw ShapeError("layer_norm: affine width mismatch");
    Tensor<T> y = vx;
    Tensor<T> xhat({vx.rows(), d});
    Tensor<T> inv_std({vx.rows()});
    for (long r = 0; r < vx.rows(); ++r) {
      const T* p = vx.row_ptr(r);
      T mean = T(0);
      for (long c = 0; c < d; ++c) mean += p[c];
      mean /= static_cast<T>(d);
      T var = T(0);
      for (long c = 0; c < d; ++c) var += (p[c] - mean) * (p[c] - mean);
      var /= static_cast<T>(d);
      const T istd = T(1) / std::sqrt(var + eps);
      inv_std.at(r) = istd;
      for (long c = 0; c < d; ++c) {
        xhat.at(r, c) = (p[c] - mean) * istd;
        y.at(r, c) = val(gamma).at(c) * xhat.at(r, c) + val(beta).at(c);
      }
    }
    return make(std::move(y), [x, gamma, beta, xhat = std::move(xhat),
                               inv_std = std::move(inv_std)](Graph& g, Node& n) {
      Tensor<T>& gx = g.grad(x);
      Tensor<T>& gg = g.grad(gamma);
      Tensor<T>& gb = g.grad(beta);
      const Tensor<T>& gam = g.val(gamma);
      const long d = n.grad.cols();
      for (long r = 0; r < n.grad.rows(); ++r) {
        T sum_dxhat = T(0), sum_dxhat_xhat = T(0);
        for (long c = 0; c < d; ++c) {
          const T go = n.grad.at(r, c);
          gb.at(c) += go;
          gg.at(c) += go * xhat.at(r, c);
          const T dxh = go * gam.at(c);
          sum_dxhat += dxh;
          sum_dxhat_xhat += dxh * xhat.at(r, c);
        }
        const T istd = inv_std.at(r);
        for (long c = 0; c < d; ++c) {
          const T dxh = n.grad.at(r, c) * gam.at(c);
          gx.at(r, c) += istd * (dxh - sum_dxhat / static_cast<T>(d) -
                                 xhat.at(r, c) * sum_dxhat_xhat / static_cast<T>(d));
        }
      }
    });
  }

  // ---- reductions ----

  // Column-wise sum over rows: [n x d] -> [1 x d].
  NodeId sum_rows(NodeId a) {
    const Tensor<T>& va = val(a);
    Tensor<T> y({1, va.cols()});
    for (long r = 0; r < va.rows(); ++r)
      for (long c = 0; c < va.cols(); ++c) y.at(0, c) += va.at(r, c);
    return make(std::move(y), [a](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      for (long r = 0; r < ga.rows(); ++r)
        for (long c = 0; c < ga.cols(); ++c) ga.at(r, c) += n.grad.at(0, c);
    });
  }

  NodeId sum_all(NodeId a) {
    T s = T(0);
    for (const T& x : val(a).data) s += x;
    return make(Tensor<T>::scalar(s), [a](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      for (long i = 0; i < ga.numel(); ++i) ga.at(i) += n.grad.at(0);
    });
  }

  NodeId mean_all(NodeId a) {
    const T inv = T(1) / static_cast<T>(val(a).numel());
    return scale(sum_all(a), inv);
  }

  std::size_t size() const { return nodes_.size(); }

  static T stable_sigmoid(T x) {
    if (x >= T(0)) {
      const T e = std::exp(-x);
      return T(1) / (T(1) + e);
    }
    const T e = std::exp(x);
    return e / (T(1) + e);
  }

  static T stable_softplus(T x) {
    if (x > T(30)) return x;
    if (x < T(-30)) return std::exp(x);
    return std::log1p(std::exp(x));
  }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::function<void(Graph&, Node&)> back;
  };

  NodeId make(Tensor<T> v, std::function<void(Graph&, Node&)> back) {
    nodes_.push_back(Node{std::move(v), {}, std::move(back)});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  template <typename F>
  NodeId unary_from_output(NodeId a, Tensor<T> y, F dydx_of_y) {
    return make(std::move(y), [a, dydx_of_y](Graph& g, Node& n) {
      Tensor<T>& ga = g.grad(a);
      for (long i = 0; i < n.grad.numel(); ++i)
        ga.at(i) += n.grad.at(i) * dydx_of_y(n.value.at(i));
    });
  }

  void axpy(NodeId dst, T alpha, const Tensor<T>& g) {
    Tensor<T>& gd = grad(dst);
    for (long i = 0; i < gd.numel(); ++i) gd.at(i) += alpha * g.at(i);
  }

  // C += A . B
  static void gemm_nn(const Tensor<T>& A, const Tensor<T>& B, Tensor<T>& C) {
    const long n = A.rows(), k = A.cols(), m = B.cols();
    for (long i = 0; i < n; ++i) {
      const T* arow = A.row_ptr(i);
      T* crow = C.row_ptr(i);
      for (long p = 0; p < k; ++p) {
        const T a = arow[p];
        if (a == T(0)) continue;
        const T* brow = B.row_ptr(p);
        for (long j = 0; j < m; ++j) crow[j] += a * brow[j];
      }
    }
  }

  // C += A . B^T
  static void gemm_nt(const Tensor<T>& A, const Tensor<T>& B, Tensor<T>& C) {
    const long n = A.rows(), k = A.cols(), m = B.rows();
    for (long i = 0; i < n; ++i) {
      const T* arow = A.row_ptr(i);
      T* crow = C.row_ptr(i);
      for (long j = 0; j < m; ++j) {
        const T* brow = B.row_ptr(j);
        T s = T(0);
        for (long p = 0; p < k; ++p) s += arow[p] * brow[p];
        crow[j] += s;
      }
    }
  }

  // C += A^T . B, A [n x k], B [n x m], C [k x m]
  static void gemm_tn(const Tensor<T>& A, const Tensor<T>& B, Tensor<T>& C) {
    const long n = A.rows(), k = A.cols(), m = B.cols();
    for (long i = 0; i < n; ++i) {
      const T* arow = A.row_ptr(i);
      const T* brow = B.row_ptr(i);
      for (long p = 0; p < k; ++p) {
        const T a = arow[p];
        if (a == T(0)) continue;
        T* crow = C.row_ptr(p);
        for (long j = 0; j < m; ++j) crow[j] += a * brow[j];
      }
    }
  }

  std::vector<Node> nodes_;
  std::unordered_map<Parameter<T>*, NodeId> bound_;
};

}  // namespace phrasemt::nn
