// Copyright 2026 The hfttc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hfttc/core/autograd.hpp"

#include "hfttc/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace hfttc::numerics
{

namespace
{

[[noreturn]] void shape_mismatch(const char * op, const Tensor & a, const Tensor & b)
{
  std::ostringstream os;
  os << op << ": incompatible shapes " << a.shape_string() << " and " << b.shape_string();
  throw DimensionError(os.str());
}

Tape & same_tape(Var a, Var b)
{
  if (!a.valid() || a.tape() != b.tape()) {
    throw ContractError("operands belong to different tapes");
  }
  return *a.tape();
}

// out (n x q) += a (n x p) * b (p x q)
void gemm_nn(const Tensor & a, const Tensor & b, Tensor & out)
{
  const std::size_t n = a.rows(), p = a.cols(), q = b.cols();
  const double * A = a.values().data();
  const double * B = b.values().data();
  double * C = out.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    double * c_row = C + i * q;
    for (std::size_t k = 0; k < p; ++k) {
      const double aik = A[i * p + k];
      if (aik == 0.0) {
        continue;
      }
      const double * b_row = B + k * q;
      for (std::size_t j = 0; j < q; ++j) {
        c_row[j] += aik * b_row[j];
      }
    }
  }
}

// out (n x p) += g (n x q) * w^T   with w (p x q)
void gemm_nt(const Tensor & g, const Tensor & w, Tensor & out)
{
  const std::size_t n = g.rows(), q = g.cols(), p = w.rows();
  const double * G = g.values().data();
  const double * W = w.values().data();
  double * C = out.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double * g_row = G + i * q;
    for (std::size_t k = 0; k < p; ++k) {
      const double * w_row = W + k * q;
      double acc = 0.0;
      for (std::size_t j = 0; j < q; ++j) {
        acc += g_row[j] * w_row[j];
      }
      C[i * p + k] += acc;
    }
  }
}

// out (p x q) += x^T * g   with x (n x p), g (n x q)
void gemm_tn(const Tensor & x, const Tensor & g, Tensor & out)
{
  const std::size_t n = x.rows(), p = x.cols(), q = g.cols();
  const double * X = x.values().data();
  const double * G = g.values().data();
  double * C = out.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double * g_row = G + i * q;
    for (std::size_t k = 0; k < p; ++k) {
      const double xik = X[i * p + k];
      if (xik == 0.0) {
        continue;
      }
      double * c_row = C + k * q;
      for (std::size_t j = 0; j < q; ++j) {
        c_row[j] += xik * g_row[j];
      }
    }
  }
}

void check_bias(const Tensor & b, std::size_t q, const Tensor & w)
{
  if (b.size() != q || (b.rank() == 2 && b.rows() != 1)) {
    shape_mismatch("linear bias", w, b);
  }
}

Tensor masked_softmax_kernel(const Tensor & z, std::span<const std::uint8_t> mask)
{
  const std::size_t n = z.rows(), k = z.cols();
  Tensor out(z.shape());
  for (std::size_t r = 0; r < n; ++r) {
    double mx = -INFINITY;
    for (std::size_t c = 0; c < k; ++c) {
      if (mask.empty() || mask[r * k + c]) {
        mx = std::max(mx, z(r, c));
      }
    }
    if (mx == -INFINITY) {
      throw DomainError("softmax: row has no admissible entry");
    }
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (mask.empty() || mask[r * k + c]) {
        const double e = std::exp(z(r, c) - mx);
        out(r, c) = e;
        total += e;
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      out(r, c) /= total;
    }
  }
  return out;
}

struct NormStats
{
  Tensor normalized;
  std::vector<double> inv_std;
};

NormStats normalize_rows(const Tensor & x, double eps)
{
  const std::size_t n = x.rows(), k = x.cols();
  NormStats s{Tensor(x.shape()), std::vector<double>(n)};
  for (std::size_t r = 0; r < n; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      mean += x(r, c);
    }
    mean /= static_cast<double>(k);
    double var = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = x(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(k);
    const double inv = 1.0 / std::sqrt(var + eps);
    s.inv_std[r] = inv;
    for (std::size_t c = 0; c < k; ++c) {
      s.normalized(r, c) = (x(r, c) - mean) * inv;
    }
  }
  return s;
}

std::vector<double> row_norms(const Tensor & a)
{
  std::vector<double> norms(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      s += a(r, c) * a(r, c);
    }
    norms[r] = std::sqrt(s);
  }
  return norms;
}

Tensor unary_like(const Tensor & a) { return Tensor(a.shape()); }

}  // namespace

// ---------------------------------------------------------------------------
// Var / Tape

const Tensor & Var::value() const { return tape_->value(id_); }

Var Tape::constant(Tensor value)
{
  nodes_.push_back(Node{std::move(value), Tensor{}, nullptr, false, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::input(Tensor value)
{
  nodes_.push_back(Node{std::move(value), Tensor{}, nullptr, true, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(std::string name, Tensor value)
{
  nodes_.push_back(Node{std::move(value), Tensor{}, nullptr, true, std::move(name)});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> parents, Backward fn)
{
  bool needs = false;
  for (const auto & p : parents) {
    if (p.tape() != this) {
      throw ContractError("operand recorded on a different tape");
    }
    needs = needs || nodes_[p.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Tensor{}, needs ? std::move(fn) : nullptr, needs, {}});
  return Var(this, nodes_.size() - 1);
}

Tensor & Tape::grad_buffer(std::size_t id)
{
  auto & node = nodes_[id];
  if (node.grad.empty()) {
    node.grad = Tensor(node.value.shape());
  }
  return node.grad;
}

void Tape::accumulate(std::size_t id, const Tensor & g)
{
  if (!nodes_[id].requires_grad) {
    return;
  }
  auto & buf = grad_buffer(id);
  auto dst = buf.values();
  auto src = g.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] += src[i];
  }
}

void Tape::backward(Var loss)
{
  if (loss.tape() != this) {
    throw ContractError("loss recorded on a different tape");
  }
  if (loss.value().size() != 1) {
    throw ContractError("gradient requires a scalar loss, got shape " + loss.value().shape_string());
  }
  for (auto & n : nodes_) {
    n.grad = Tensor{};
  }
  if (!nodes_[loss.id()].requires_grad) {
    return;
  }
  grad_buffer(loss.id())[0] = 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    auto & node = nodes_[id];
    if (!node.backward || node.grad.empty()) {
      continue;
    }
    // The callback may grow other buffers but never this node's.
    const Tensor g = node.grad;
    node.backward(*this, g);
  }
}

Tensor Tape::grad(Var v) const
{
  const auto & node = nodes_[v.id()];
  return node.grad.empty() ? Tensor(node.value.shape()) : node.grad;
}

GradientMap Tape::gradient(Var loss)
{
  backward(loss);
  GradientMap out;
  for (const auto & node : nodes_) {
    if (node.name.empty()) {
      continue;
    }
    Tensor g = node.grad.empty() ? Tensor(node.value.shape()) : node.grad;
    auto it = out.find(node.name);
    if (it == out.end()) {
      out.emplace(node.name, std::move(g));
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) {
        it->second[i] += g[i];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernels

Tensor linear(const Tensor & x, const Tensor & w)
{
  if (x.cols() != w.rows() || w.rank() != 2) {
    shape_mismatch("linear", x, w);
  }
  Tensor out = Tensor::zeros(x.rows(), w.cols());
  gemm_nn(x, w, out);
  return out;
}

Tensor linear(const Tensor & x, const Tensor & w, const Tensor & b)
{
  Tensor out = linear(x, w);
  check_bias(b, out.cols(), w);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      out(r, c) += b[c];
    }
  }
  return out;
}

Tensor relu(const Tensor & x)
{
  Tensor out = unary_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] > 0.0 ? x[i] : 0.0;
  }
  return out;
}

Tensor softmax(const Tensor & z)
{
  if (z.empty()) {
    throw DomainError("softmax of an empty tensor");
  }
  return masked_softmax_kernel(z, {});
}

Tensor layer_norm(const Tensor & x, const Tensor & gamma, const Tensor & beta, double eps)
{
  if (gamma.size() != x.cols() || beta.size() != x.cols()) {
    shape_mismatch("layer_norm", x, gamma);
  }
  Tensor y = normalize_rows(x, eps).normalized;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    for (std::size_t c = 0; c < y.cols(); ++c) {
      y(r, c) = gamma[c] * y(r, c) + beta[c];
    }
  }
  return y;
}

Tensor cosine_similarity(const Tensor & a, const Tensor & b)
{
  if (a.cols() != b.cols()) {
    shape_mismatch("cosine_similarity", a, b);
  }
  const auto na = row_norms(a);
  const auto nb = row_norms(b);
  Tensor out = Tensor::zeros(a.rows(), b.rows());
  // dot / sqrt(|a|^2 |b|^2) keeps identical rows at exactly 1.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      if (na[i] == 0.0 || nb[j] == 0.0) {
        continue;
      }
      double dot = 0.0;
      for (std::size_t c = 0; c < a.cols(); ++c) {
        dot += a(i, c) * b(j, c);
      }
      out(i, j) = std::clamp(dot / std::sqrt((na[i] * na[i]) * (nb[j] * nb[j])), -1.0, 1.0);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Differentiable primitives

Var add(Var a, Var b)
{
  auto & t = same_tape(a, b);
  if (!a.value().same_shape(b.value())) {
    shape_mismatch("add", a.value(), b.value());
  }
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += b.value()[i];
  }
  const Var parents[] = {a, b};
  return t.record(std::move(out), parents, [ia = a.id(), ib = b.id()](Tape & tp, const Tensor & g) {
    tp.accumulate(ia, g);
    tp.accumulate(ib, g);
  });
}

Var sub(Var a, Var b)
{
  auto & t = same_tape(a, b);
  if (!a.value().same_shape(b.value())) {
    shape_mismatch("sub", a.value(), b.value());
  }
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] -= b.value()[i];
  }
  const Var parents[] = {a, b};
  return t.record(std::move(out), parents, [ia = a.id(), ib = b.id()](Tape & tp, const Tensor & g) {
    tp.accumulate(ia, g);
    if (tp.requires_grad(ib)) {
      auto & buf = tp.grad_buffer(ib);
      for (std::size_t i = 0; i < g.size(); ++i) {
        buf[i] -= g[i];
      }
    }
  });
}

Var mul(Var a, Var b)
{
  auto & t = same_tape(a, b);
  if (!a.value().same_shape(b.value())) {
    shape_mismatch("mul", a.value(), b.value());
  }
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] *= b.value()[i];
  }
  const Var parents[] = {a, b};
  return t.record(std::move(out), parents, [ia = a.id(), ib = b.id()](Tape & tp, const Tensor & g) {
    if (tp.requires_grad(ia)) {
      const Tensor & bv = tp.value(ib);
      auto & buf = tp.grad_buffer(ia);
      for (std::size_t i = 0; i < g.size(); ++i) {
        buf[i] += g[i] * bv[i];
      }
    }
    if (tp.requires_grad(ib)) {
      const Tensor & av = tp.value(ia);
      auto & buf = tp.grad_buffer(ib);
      for (std::size_t i = 0; i < g.size(); ++i) {
        buf[i] += g[i] * av[i];
      }
    }
  });
}

Var scale(Var a, double factor)
{
  Tensor out = a.value();
  for (auto & v : out.values()) {
    v *= factor;
  }
  const Var parents[] = {a};
  return a.tape()->record(std::move(out), parents, [ia = a.id(), factor](Tape & tp, const Tensor & g) {
    auto & buf = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) {
      buf[i] += g[i] * factor;
    }
  });
}

Var linear(Var x, Var w)
{
  auto & t = same_tape(x, w);
  Tensor out = linear(x.value(), w.value());
  const Var parents[] = {x, w};
  return t.record(std::move(out), parents, [ix = x.id(), iw = w.id()](Tape & tp, const Tensor & g) {
    if (tp.requires_grad(ix)) {
      gemm_nt(g, tp.value(iw), tp.grad_buffer(ix));
    }
    if (tp.requires_grad(iw)) {
      gemm_tn(tp.value(ix), g, tp.grad_buffer(iw));
    }
  });
}

Var linear(Var x, Var w, Var b)
{
  auto & t = same_tape(x, w);
  same_tape(x, b);
  Tensor out = linear(x.value(), w.value(), b.value());
  const Var parents[] = {x, w, b};
  return t.record(
    std::move(out), parents, [ix = x.id(), iw = w.id(), ib = b.id()](Tape & tp, const Tensor & g) {
      if (tp.requires_grad(ix)) {
        gemm_nt(g, tp.value(iw), tp.grad_buffer(ix));
      }
      if (tp.requires_grad(iw)) {
        gemm_tn(tp.value(ix), g, tp.grad_buffer(iw));
      }
      if (tp.requires_grad(ib)) {
        auto & buf = tp.grad_buffer(ib);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < g.cols(); ++c) {
            buf[c] += g(r, c);
          }
        }
      }
    });
}

Var transpose(Var a)
{
  const Tensor & v = a.value();
  Tensor out = Tensor::zeros(v.cols(), v.rows());
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = 0; c < v.cols(); ++c) {
      out(c, r) = v(r, c);
    }
  }
  const Var parents[] = {a};
  return a.tape()->record(std::move(out), parents, [ia = a.id()](Tape & tp, const Tensor & g) {
    auto & buf = tp.grad_buffer(ia);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) {
        buf(c, r) += g(r, c);
      }
    }
  });
}

Var relu(Var x)
{
  Tensor out = relu(x.value());
  const Var parents[] = {x};
  return x.tape()->record(std::move(out), parents, [ix = x.id()](Tape & tp, const Tensor & g) {
    const Tensor & xv = tp.value(ix);
    auto & buf = tp.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) {
        buf[i] += g[i];
      }
    }
  });
}

namespace
{
Var softmax_node(Var z, Tensor out)
{
  const Var parents[] = {z};
  auto * tape = z.tape();
  const std::size_t out_id = tape->size();
  return tape->record(std::move(out), parents, [iz = z.id(), out_id](Tape & tp, const Tensor & g) {
    const Tensor & y = tp.value(out_id);
    auto & buf = tp.grad_buffer(iz);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) {
        dot += g(r, c) * y(r, c);
      }
      for (std::size_t c = 0; c < y.cols(); ++c) {
        buf(r, c) += y(r, c) * (g(r, c) - dot);
      }
    }
  });
}
}  // namespace

Var softmax_rows(Var z) { return softmax_node(z, softmax(z.value())); }

Var masked_softmax_rows(Var z, std::span<const std::uint8_t> mask)
{
  if (mask.size() != z.value().size()) {
    throw DimensionError("masked_softmax_rows: mask size does not match input");
  }
  return softmax_node(z, masked_softmax_kernel(z.value(), mask));
}

Var log_softmax_rows(Var z)
{
  const Tensor & v = z.value();
  if (v.empty()) {
    throw DomainError("log_softmax of an empty tensor");
  }
  Tensor out(v.shape());
  for (std::size_t r = 0; r < v.rows(); ++r) {
    double mx = -INFINITY;
    for (std::size_t c = 0; c < v.cols(); ++c) {
      mx = std::max(mx, v(r, c));
    }
    double total = 0.0;
    for (std::size_t c = 0; c < v.cols(); ++c) {
      total += std::exp(v(r, c) - mx);
    }
    const double lse = mx + std::log(total);
    for (std::size_t c = 0; c < v.cols(); ++c) {
      out(r, c) = v(r, c) - lse;
    }
  }
  const Var parents[] = {z};
  const std::size_t out_id = z.tape()->size();
  return z.tape()->record(std::move(out), parents, [iz = z.id(), out_id](Tape & tp, const Tensor & g) {
    const Tensor & y = tp.value(out_id);
    auto & buf = tp.grad_buffer(iz);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double gsum = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) {
        gsum += g(r, c);
      }
      for (std::size_t c = 0; c < y.cols(); ++c) {
        buf(r, c) += g(r, c) - std::exp(y(r, c)) * gsum;
      }
    }
  });
}

Var layer_norm_rows(Var x, Var gamma, Var beta, double eps)
{
  auto & t = same_tape(x, gamma);
  same_tape(x, beta);
  const Tensor & xv = x.value();
  if (gamma.value().size() != xv.cols() || beta.value().size() != xv.cols()) {
    shape_mismatch("layer_norm", xv, gamma.value());
  }
  auto stats = normalize_rows(xv, eps);
  Tensor out = stats.normalized;
  const Tensor & gv = gamma.value();
  const Tensor & bv = beta.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      out(r, c) = gv[c] * out(r, c) + bv[c];
    }
  }
  const Var parents[] = {x, gamma, beta};
  return t.record(
    std::move(out), parents,
    [ix = x.id(), ig = gamma.id(), ib = beta.id(), xhat = std::move(stats.normalized),
     inv_std = std::move(stats.inv_std)](Tape & tp, const Tensor & g) {
      const std::size_t n = g.rows(), k = g.cols();
      const Tensor & gam = tp.value(ig);
      if (tp.requires_grad(ig)) {
        auto & buf = tp.grad_buffer(ig);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < k; ++c) {
            buf[c] += g(r, c) * xhat(r, c);
          }
        }
      }
      if (tp.requires_grad(ib)) {
        auto & buf = tp.grad_buffer(ib);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < k; ++c) {
            buf[c] += g(r, c);
          }
        }
      }
      if (tp.requires_grad(ix)) {
        auto & buf = tp.grad_buffer(ix);
        const double inv_k = 1.0 / static_cast<double>(k);
        for (std::size_t r = 0; r < n; ++r) {
          double mean_g = 0.0, mean_gx = 0.0;
          for (std::size_t c = 0; c < k; ++c) {
            const double gg = g(r, c) * gam[c];
            mean_g += gg;
            mean_gx += gg * xhat(r, c);
          }
          mean_g *= inv_k;
          mean_gx *= inv_k;
          for (std::size_t c = 0; c < k; ++c) {
            const double gg = g(r, c) * gam[c];
            buf(r, c) += inv_std[r] * (gg - mean_g - xhat(r, c) * mean_gx);
          }
        }
      }
    });
}

Var concat_cols(std::span<const Var> parts)
{
  if (parts.empty()) {
    throw ContractError("concat_cols of nothing");
  }
  Tape * tape = parts.front().tape();
  const std::size_t n = parts.front().value().rows();
  std::size_t total = 0;
  std::vector<std::size_t> ids, widths;
  for (const auto & p : parts) {
    if (p.tape() != tape) {
      throw ContractError("concat_cols: operands belong to different tapes");
    }
    if (p.value().rows() != n) {
      shape_mismatch("concat_cols", parts.front().value(), p.value());
    }
    ids.push_back(p.id());
    widths.push_back(p.value().cols());
    total += p.value().cols();
  }
  Tensor out = Tensor::zeros(n, total);
  std::size_t off = 0;
  for (const auto & p : parts) {
    const Tensor & v = p.value();
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < v.cols(); ++c) {
        out(r, off + c) = v(r, c);
      }
    }
    off += v.cols();
  }
  return tape->record(std::move(out), parts, [ids, widths](Tape & tp, const Tensor & g) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tp.requires_grad(ids[k])) {
        auto & buf = tp.grad_buffer(ids[k]);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < widths[k]; ++c) {
            buf(r, c) += g(r, off + c);
          }
        }
      }
      off += widths[k];
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end)
{
  const Tensor & v = a.value();
  if (begin >= end || end > v.cols()) {
    throw DimensionError("slice_cols: range out of bounds for " + v.shape_string());
  }
  Tensor out = Tensor::zeros(v.rows(), end - begin);
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = begin; c < end; ++c) {
      out(r, c - begin) = v(r, c);
    }
  }
  const Var parents[] = {a};
  return a.tape()->record(std::move(out), parents, [ia = a.id(), begin](Tape & tp, const Tensor & g) {
    auto & buf = tp.grad_buffer(ia);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) {
        buf(r, begin + c) += g(r, c);
      }
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end)
{
  const Tensor & v = a.value();
  if (begin >= end || end > v.rows()) {
    throw DimensionError("slice_rows: range out of bounds for " + v.shape_string());
  }
  const std::size_t k = v.cols();
  std::vector<double> data(v.values().begin() + static_cast<std::ptrdiff_t>(begin * k),
                           v.values().begin() + static_cast<std::ptrdiff_t>(end * k));
  Tensor out = Tensor::matrix(end - begin, k, std::move(data));
  const Var parents[] = {a};
  return a.tape()->record(std::move(out), parents, [ia = a.id(), begin](Tape & tp, const Tensor & g) {
    auto & buf = tp.grad_buffer(ia);
    const std::size_t off = begin * g.cols();
    for (std::size_t i = 0; i < g.size(); ++i) {
      buf[off + i] += g[i];
    }
  });
}

Var mean_rows(Var a)
{
  const Tensor & v = a.value();
  Tensor out = Tensor::zeros(1, v.cols());
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = 0; c < v.cols(); ++c) {
      out[c] += v(r, c);
    }
  }
  const double inv = 1.0 / static_cast<double>(v.rows());
  for (auto & x : out.values()) {
    x *= inv;
  }
  const Var parents[] = {a};
  return a.tape()->record(std::move(out), parents, [ia = a.id(), inv](Tape & tp, const Tensor & g) {
    auto & buf = tp.grad_buffer(ia);
    for (std::size_t r = 0; r < buf.rows(); ++r) {
      for (std::size_t c = 0; c < buf.cols(); ++c) {
        buf(r, c) += g[c] * inv;
      }
    }
  });
}

Var sum(Var a)
{
  double s = 0.0;
  for (double v : a.value().values()) {
    s += v;
  }
  const Var parents[] = {a};
  return a.tape()->record(Tensor::scalar(s), parents, [ia = a.id()](Tape & tp, const Tensor & g) {
    auto & buf = tp.grad_buffer(ia);
    for (auto & v : buf.values()) {
      v += g[0];
    }
  });
}

Var squared_error(Var a, Var b)
{
  auto & t = same_tape(a, b);
  if (!a.value().same_shape(b.value())) {
    shape_mismatch("squared_error", a.value(), b.value());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) {
    const double d = a.value()[i] - b.value()[i];
    s += d * d;
  }
  const Var parents[] = {a, b};
  return t.record(Tensor::scalar(s), parents, [ia = a.id(), ib = b.id()](Tape & tp, const Tensor & g) {
    const Tensor & av = tp.value(ia);
    const Tensor & bv = tp.value(ib);
    if (tp.requires_grad(ia)) {
      auto & buf = tp.grad_buffer(ia);
      for (std::size_t i = 0; i < av.size(); ++i) {
        buf[i] += 2.0 * g[0] * (av[i] - bv[i]);
      }
    }
    if (tp.requires_grad(ib)) {
      auto & buf = tp.grad_buffer(ib);
      for (std::size_t i = 0; i < av.size(); ++i) {
        buf[i] -= 2.0 * g[0] * (av[i] - bv[i]);
      }
    }
  });
}

Var squared_error_rows(Var a, Var b)
{
  auto & t = same_tape(a, b);
  if (!a.value().same_shape(b.value())) {
    shape_mismatch("squared_error_rows", a.value(), b.value());
  }
  const Tensor & av = a.value();
  const Tensor & bv = b.value();
  Tensor out = Tensor::zeros(av.rows(), 1);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < av.cols(); ++c) {
      const double d = av(r, c) - bv(r, c);
      s += d * d;
    }
    out[r] = s;
  }
  const Var parents[] = {a, b};
  return t.record(std::move(out), parents, [ia = a.id(), ib = b.id()](Tape & tp, const Tensor & g) {
    const Tensor & av = tp.value(ia);
    const Tensor & bv = tp.value(ib);
    const bool ga = tp.requires_grad(ia), gb = tp.requires_grad(ib);
    for (std::size_t r = 0; r < av.rows(); ++r) {
      for (std::size_t c = 0; c < av.cols(); ++c) {
        const double d = 2.0 * g[r] * (av(r, c) - bv(r, c));
        if (ga) {
          tp.grad_buffer(ia)(r, c) += d;
        }
        if (gb) {
          tp.grad_buffer(ib)(r, c) -= d;
        }
      }
    }
  });
}

Var l2_norm_rows(Var a)
{
  const auto norms = row_norms(a.value());
  Tensor out = Tensor::matrix(norms.size(), 1, norms);
  const Var parents[] = {a};
  return a.tape()->record(std::move(out), parents, [ia = a.id(), norms](Tape & tp, const Tensor & g) {
    const Tensor & av = tp.value(ia);
    auto & buf = tp.grad_buffer(ia);
    for (std::size_t r = 0; r < av.rows(); ++r) {
      if (norms[r] == 0.0) {
        continue;
      }
      for (std::size_t c = 0; c < av.cols(); ++c) {
        buf(r, c) += g[r] * av(r, c) / norms[r];
      }
    }
  });
}

Var cosine_similarity(Var a, Var b)
{
  auto & t = same_tape(a, b);
  Tensor out = cosine_similarity(a.value(), b.value());
  const Var parents[] = {a, b};
  const std::size_t out_id = t.size();
  return t.record(std::move(out), parents, [ia = a.id(), ib = b.id(), out_id](Tape & tp, const Tensor & g) {
    const Tensor & av = tp.value(ia);
    const Tensor & bv = tp.value(ib);
    const Tensor & cv = tp.value(out_id);
    const auto na = row_norms(av);
    const auto nb = row_norms(bv);
    const std::size_t d = av.cols();
    const bool ga = tp.requires_grad(ia), gb = tp.requires_grad(ib);
    for (std::size_t i = 0; i < av.rows(); ++i) {
      for (std::size_t j = 0; j < bv.rows(); ++j) {
        if (na[i] == 0.0 || nb[j] == 0.0) {
          continue;
        }
        const double gij = g(i, j);
        const double c = cv(i, j);
        const double inv = 1.0 / (na[i] * nb[j]);
        for (std::size_t k = 0; k < d; ++k) {
          if (ga) {
            tp.grad_buffer(ia)(i, k) += gij * (bv(j, k) * inv - c * av(i, k) / (na[i] * na[i]));
          }
          if (gb) {
            tp.grad_buffer(ib)(j, k) += gij * (av(i, k) * inv - c * bv(j, k) / (nb[j] * nb[j]));
          }
        }
      }
    }
  });
}

}  // namespace hfttc::numerics
