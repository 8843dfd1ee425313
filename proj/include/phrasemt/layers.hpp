#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "phrasemt/graph.hpp"
#include "phrasemt/params.hpp"
#include "phrasemt/rng.hpp"

namespace phrasemt::nn {

// y = x . W^T + b, rows of x are independent inputs.  W is [out x in].
template <typename T>
struct Linear {
  Parameter<T>* W = nullptr;
  Parameter<T>* b = nullptr;

  static Linear create(ParamStore<T>& store, const std::string& prefix, long in, long out,
                       RngState& rng) {
    Linear l;
    l.W = &store.create_linear_weight(prefix + ".W", out, in, rng);
    l.b = &store.create(prefix + ".b", {out});
    return l;
  }

  NodeId forward(Graph<T>& g, NodeId x) const {
    if (g.val(x).cols() != W->values.cols())
      throw ShapeError("linear " + W->name + ": input width " +
                       std::to_string(g.val(x).cols()) + " != " +
                       std::to_string(W->values.cols()));
    return g.add_rowvec(g.matmul_bt(x, g.use(*W)), g.use(*b));
  }
};

// Row-wise affine layer norm parameters.
template <typename T>
struct LayerNormParams {
  Parameter<T>* gamma = nullptr;
  Parameter<T>* beta = nullptr;

  static LayerNormParams create(ParamStore<T>& store, const std::string& prefix, long d) {
    LayerNormParams ln;
    ln.gamma = &store.create_ones(prefix + ".gamma", {d});
    ln.beta = &store.create(prefix + ".beta", {d});
    return ln;
  }

  NodeId forward(Graph<T>& g, NodeId x) const {
    return g.layer_norm(x, g.use(*gamma), g.use(*beta));
  }
};

// Single GRU cell.  Convention: h' = (1 - z) . h + z . hcand, with
// z = sigmoid(Wz x + Uz h + bz), r = sigmoid(Wr x + Ur h + br),
// hcand = tanh(Wh x + Uh (r . h) + bh).
template <typename T>
struct GruCell {
  Parameter<T>*Wz{}, *Uz{}, *bz{}, *Wr{}, *Ur{}, *br{}, *Wh{}, *Uh{}, *bh{};
  long hidden = 0;

  static GruCell create(ParamStore<T>& store, const std::string& prefix, long in, long hidden,
                        RngState& rng) {
    GruCell c;
    c.hidden = hidden;
    c.Wz = &store.create_linear_weight(prefix + ".Wz", hidden, in, rng);
    c.Uz = &store.create_linear_weight(prefix + ".Uz", hidden, hidden, rng);
    c.bz = &store.create(prefix + ".bz", {hidden});
    c.Wr = &store.create_linear_weight(prefix + ".Wr", hidden, in, rng);
    c.Ur = &store.create_linear_weight(prefix + ".Ur", hidden, hidden, rng);
    c.br = &store.create(prefix + ".br", {hidden});
    c.Wh = &store.create_linear_weight(prefix + ".Wh", hidden, in, rng);
    c.Uh = &store.create_linear_weight(prefix + ".Uh", hidden, hidden, rng);
    c.bh = &store.create(prefix + ".bh", {hidden});
    return c;
  }

  // x [1 x in], h [1 x hidden] -> [1 x hidden]
  NodeId step(Graph<T>& g, NodeId x, NodeId h) const {
    NodeId z = g.sigmoid(g.add_rowvec(
        g.add(g.matmul_bt(x, g.use(*Wz)), g.matmul_bt(h, g.use(*Uz))), g.use(*bz)));
    NodeId r = g.sigmoid(g.add_rowvec(
        g.add(g.matmul_bt(x, g.use(*Wr)), g.matmul_bt(h, g.use(*Ur))), g.use(*br)));
    NodeId hcand = g.tanh_op(g.add_rowvec(
        g.add(g.matmul_bt(x, g.use(*Wh)), g.matmul_bt(g.mul(r, h), g.use(*Uh))), g.use(*bh)));
    // h' = h - z.h + z.hcand
    return g.add(g.sub(h, g.mul(z, h)), g.mul(z, hcand));
  }

  // Runs the cell left to right over the rows of xs, returning the final
  // hidden state [1 x hidden].
  NodeId encode(Graph<T>& g, NodeId xs, NodeId h0) const {
    const long n = g.val(xs).rows();
    if (n < 1) throw DomainError("rnn encode: empty sequence");
    NodeId h = h0;
    for (long t = 0; t < n; ++t) h = step(g, g.slice_rows(xs, t, 1), h);
    return h;
  }
};

struct MhaNodes {
  NodeId output;
};

// Multi-head attention with input/output projections.
template <typename T>
struct MultiHeadAttention {
  Linear<T> wq, wk, wv, wo;
  long heads = 1;
  long d_model = 0;

  static MultiHeadAttention create(ParamStore<T>& store, const std::string& prefix, long d,
                                   long heads, RngState& rng) {
    if (heads < 1 || d % heads != 0)
      throw ConfigError("attention: model dim " + std::to_string(d) +
                        " not divisible by heads " + std::to_string(heads));
    MultiHeadAttention a;
    a.heads = heads;
    a.d_model = d;
    a.wq = Linear<T>::create(store, prefix + ".q", d, d, rng);
    a.wk = Linear<T>::create(store, prefix + ".k", d, d, rng);
    a.wv = Linear<T>::create(store, prefix + ".v", d, d, rng);
    a.wo = Linear<T>::create(store, prefix + ".o", d, d, rng);
    return a;
  }

  // q [n x d], k/v [t x d]; additive_mask, when given, is [n x t].
  NodeId forward(Graph<T>& g, NodeId q, NodeId k, NodeId v,
                 const Tensor<T>* additive_mask = nullptr) const {
    if (g.val(k).rows() < 1) throw DomainError("attention: empty key set");
    NodeId Q = wq.forward(g, q);
    NodeId K = wk.forward(g, k);
    NodeId V = wv.forward(g, v);
    const long dh = d_model / heads;
    const T inv_sqrt = T(1) / static_cast<T>(std::sqrt(static_cast<double>(dh)));
    std::vector<NodeId> outs;
    outs.reserve(heads);
    for (long h = 0; h < heads; ++h) {
      NodeId Qh = g.slice_cols(Q, h * dh, dh);
      NodeId Kh = g.slice_cols(K, h * dh, dh);
      NodeId Vh = g.slice_cols(V, h * dh, dh);
      NodeId scores = g.scale(g.matmul_bt(Qh, Kh), inv_sqrt);
      NodeId probs = g.row_softmax(scores, additive_mask);
      outs.push_back(g.matmul(probs, Vh));
    }
    return wo.forward(g, heads == 1 ? outs[0] : g.concat_cols(outs));
  }
};

// Additive mask hiding key positions j > i (decoder self-attention).
template <typename T>
Tensor<T> causal_mask(long n) {
  Tensor<T> m({n, n});
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j) m.at(i, j) = T(-1e9);
  return m;
}

// Sinusoidal positional encodings, rows 0..n-1.
template <typename T>
Tensor<T> positional_encoding(long n, long d) {
  Tensor<T> pe({n, d});
  for (long pos = 0; pos < n; ++pos) {
    for (long i = 0; i < d; i += 2) {
      const double angle = pos / std::pow(10000.0, static_cast<double>(i) / d);
      pe.at(pos, i) = static_cast<T>(std::sin(angle));
      if (i + 1 < d) pe.at(pos, i + 1) = static_cast<T>(std::cos(angle));
    }
  }
  return pe;
}

// Inverted dropout mask: entries are 0 with probability rate, else
// 1/(1-rate).  The caller owns the rng so masks are reproducible.
template <typename T>
Tensor<T> dropout_mask(std::vector<long> shape, double rate, RngState& rng) {
  Tensor<T> m(std::move(shape));
  if (rate <= 0.0) {
    m.fill(T(1));
    return m;
  }
  const T keep = static_cast<T>(1.0 / (1.0 - rate));
  for (auto& x : m.data) x = rng.uniform() < rate ? T(0) : keep;
  return m;
}

template <typename T>
NodeId dropout(Graph<T>& g, NodeId x, double rate, bool training, RngState& rng) {
  if (!training || rate <= 0.0) return x;
  return g.mul_const(x, dropout_mask<T>(g.val(x).shape, rate, rng));
}

}  // namespace phrasemt::nn
