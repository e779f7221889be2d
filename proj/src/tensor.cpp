#include "fanet/tensor.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace fanet {

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  s += "]";
  return s;
}

namespace {

std::size_t checked_size(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw ShapeError("tensor: rank-0 shapes are not supported");
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor: zero-sized dimension in " + shape_str(shape));
    n *= d;
  }
  return n;
}

}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = checked_size(shape);
  auto s = std::make_shared<Storage>();
  s->shape = std::move(shape);
  s->values.assign(n, 0.0);
  return Tensor(std::move(s));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t = zeros(std::move(shape));
  for (double& v : t.values()) v = value;
  return t;
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> values) {
  std::size_t n = checked_size(shape);
  if (n != values.size()) {
    throw ShapeError("tensor: " + shape_str(shape) + " needs " + std::to_string(n) +
                     " values, got " + std::to_string(values.size()));
  }
  auto s = std::make_shared<Storage>();
  s->shape = std::move(shape);
  s->values = std::move(values);
  return Tensor(std::move(s));
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
  std::size_t n = values.size();
  return from({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return from({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const {
  if (rank() == 1) return 1;
  if (rank() == 2) return s_->shape[0];
  throw ShapeError("tensor: rows() needs rank 1 or 2, got " + shape_str(s_->shape));
}

std::size_t Tensor::cols() const {
  if (rank() == 1) return s_->shape[0];
  if (rank() == 2) return s_->shape[1];
  throw ShapeError("tensor: cols() needs rank 1 or 2, got " + shape_str(s_->shape));
}

double Tensor::item() const {
  if (!s_ || size() != 1) {
    throw ShapeError("tensor: item() needs a single element, got " +
                     (s_ ? shape_str(s_->shape) : std::string("undefined")));
  }
  return s_->values[0];
}

std::vector<double>& Tensor::grad() {
  if (s_->grad.empty()) s_->grad.assign(s_->values.size(), 0.0);
  return s_->grad;
}

void Tensor::zero_grad() { s_->grad.assign(s_->values.size(), 0.0); }

Tensor Tensor::clone() const {
  Tensor t = Tensor::from(s_->shape, s_->values);
  return t;
}

bool Tensor::all_finite() const {
  for (double v : s_->values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

// C[m,n] += A[m,k] * B[k,n]. The p-inner ordering keeps both B and C rows
// contiguous so the compiler can vectorize the j loop.
void matmul_accum(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

// dA[i,p] += sum_j G[i,j] * B[p,j]   (i.e. dA += G * B^T)
void accum_g_bt(const double* g, const double* b, double* da, std::size_t m,
                std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
      da[i * k + p] += s;
    }
  }
}

// dB[p,j] += sum_i A[i,p] * G[i,j]   (i.e. dB += A^T * G)
void accum_at_g(const double* a, const double* g, double* db, std::size_t m,
                std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      double* dbrow = db + p * n;
      for (std::size_t j = 0; j < n; ++j) dbrow[j] += aip * grow[j];
    }
  }
}

struct TrigTables {
  std::vector<double> cosv;  // [K*L], cos(2*pi*k*n/L)
  std::vector<double> sinv;  // [K*L], sin(2*pi*k*n/L)
};

const TrigTables& dft_tables(std::size_t len) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<TrigTables>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[len];
  if (!slot) {
    auto t = std::make_unique<TrigTables>();
    const std::size_t half = len / 2 + 1;
    t->cosv.resize(half * len);
    t->sinv.resize(half * len);
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t k = 0; k < half; ++k) {
      for (std::size_t n = 0; n < len; ++n) {
        // Reduce k*n mod L before the trig call so the argument stays small.
        double arg = two_pi * static_cast<double>((k * n) % len) / static_cast<double>(len);
        t->cosv[k * len + n] = std::cos(arg);
        t->sinv[k * len + n] = std::sin(arg);
      }
    }
    slot = std::move(t);
  }
  return *slot;
}

}  // namespace

Tensor Tape::make_output(std::vector<std::size_t> shape,
                         std::initializer_list<const Tensor*> inputs) {
  Tensor out = Tensor::zeros(std::move(shape));
  if (grad_enabled_) {
    for (const Tensor* t : inputs) {
      if (t->requires_grad()) {
        out.set_requires_grad(true);
        break;
      }
    }
  }
  return out;
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("add: shapes disagree: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  Tensor out = make_output(a.shape(), {&a, &b});
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.at(i) = a.at(i) + b.at(i);
  if (out.requires_grad()) {
    record([ta = a, tb = b, to = out]() mutable {
      if (!to.has_grad()) return;
      const std::vector<double>& g = to.grad();
      if (ta.requires_grad()) {
        std::vector<double>& ga = ta.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tb.requires_grad()) {
        std::vector<double>& gb = tb.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("sub: shapes disagree: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  Tensor out = make_output(a.shape(), {&a, &b});
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.at(i) = a.at(i) - b.at(i);
  if (out.requires_grad()) {
    record([ta = a, tb = b, to = out]() mutable {
      if (!to.has_grad()) return;
      const std::vector<double>& g = to.grad();
      if (ta.requires_grad()) {
        std::vector<double>& ga = ta.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tb.requires_grad()) {
        std::vector<double>& gb = tb.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    });
  }
  return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("mul: shapes disagree: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  Tensor out = make_output(a.shape(), {&a, &b});
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.at(i) = a.at(i) * b.at(i);
  if (out.requires_grad()) {
    record([ta = a, tb = b, to = out]() mutable {
      if (!to.has_grad()) return;
      const std::vector<double>& g = to.grad();
      if (ta.requires_grad()) {
        std::vector<double>& ga = ta.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * tb.at(i);
      }
      if (tb.requires_grad()) {
        std::vector<double>& gb = tb.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ta.at(i);
      }
    });
  }
  return out;
}

Tensor Tape::scale(const Tensor& a, double k) {
  Tensor out = make_output(a.shape(), {&a});
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.at(i) = a.at(i) * k;
  if (out.requires_grad()) {
    record([ta = a, to = out, k]() mutable {
      if (!to.has_grad()) return;
      const std::vector<double>& g = to.grad();
      std::vector<double>& ga = ta.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * k;
    });
  }
  return out;
}

Tensor Tape::add_row_broadcast(const Tensor& a, const Tensor& bias) {
  if (a.rank() != 2 || bias.rank() != 1 || bias.size() != a.shape()[1]) {
    throw ShapeError("add_row_broadcast: incompatible shapes " + shape_str(a.shape()) +
                     " and " + shape_str(bias.shape()));
  }
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  Tensor out = make_output(a.shape(), {&a, &bias});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = a.at(i, j) + bias.at(j);
  }
  if (out.requires_grad()) {
    record([ta = a, tb = bias, to = out, m, n]() mutable {
      if (!to.has_grad()) return;
      const std::vector<double>& g = to.grad();
      if (ta.requires_grad()) {
        std::vector<double>& ga = ta.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tb.requires_grad()) {
        std::vector<double>& gb = tb.grad();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
        }
      }
    });
  }
  return out;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ShapeError("matmul: needs rank-2 operands, got " + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()));
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  const std::size_t n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: inner dimensions disagree: " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  }
  Tensor out = make_output({m, n}, {&a, &b});
  matmul_accum(a.data(), b.data(), out.data(), m, k, n);
  if (out.requires_grad()) {
    record([ta = a, tb = b, to = out, m, k, n]() mutable {
      if (!to.has_grad()) return;
      const double* g = to.grad().data();
      if (ta.requires_grad()) accum_g_bt(g, tb.data(), ta.grad().data(), m, k, n);
      if (tb.requires_grad()) accum_at_g(ta.data(), g, tb.grad().data(), m, k, n);
    });
  }
  return out;
}

Tensor Tape::transpose(const Tensor& a) {
  if (a.rank() != 2) {
    throw ShapeError("transpose: needs a rank-2 operand, got " + shape_str(a.shape()));
  }
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  Tensor out = make_output({n, m}, {&a});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
  }
  if (out.requires_grad()) {
    record([ta = a, to = out, m, n]() mutable {
      if (!to.has_grad()) return;
      const std::vector<double>& g = to.grad();
      std::vector<double>& ga = ta.grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
      }
    });
  }
  return out;
}

Tensor Tape::softmax_rows(const Tensor& a) {
  if (a.rank() > 2) {
    throw ShapeError("softmax_rows: needs rank 1 or 2, got " + shape_str(a.shape()));
  }
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out = make_output(a.shape(), {&a});
  for (std::size_t i = 0; i < m; ++i) {
    const double* xrow = a.data() + i * n;
    double* yrow = out.data() + i * n;
    double mx = xrow[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xrow[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      yrow[j] = std::exp(xrow[j] - mx);
      sum += yrow[j];
    }
    const double inv = 1.0 / sum;
    for (std::size_t j = 0; j < n; ++j) yrow[j] *= inv;
  }
  if (out.requires_grad()) {
    record([ta = a, to = out, m, n]() mutable {
      if (!to.has_grad()) return;
      const std::vector<double>& g = to.grad();
      std::vector<double>& ga = ta.grad();
      const double* y = to.data();
      for (std::size_t i = 0; i < m; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += g[i * n + j] * y[i * n + j];
        for (std::size_t j = 0; j < n; ++j) {
          ga[i * n + j] += y[i * n + j] * (g[i * n + j] - dot);
        }
      }
    });
  }
  return out;
}

Tensor Tape::layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                        double eps) {
  if (x.rank() > 2) {
    throw ShapeError("layer_norm: needs rank 1 or 2, got " + shape_str(x.shape()));
  }
  const std::size_t m = x.rows(), n = x.cols();
  if (gain.rank() != 1 || gain.size() != n || bias.rank() != 1 || bias.size() != n) {
    throw ShapeError("layer_norm: gain/bias must be [" + std::to_string(n) + "], got " +
                     shape_str(gain.shape()) + " and " + shape_str(bias.shape()));
  }
  Tensor out = make_output(x.shape(), {&x, &gain, &bias});
  // Normalized rows and per-row inverse spreads are stashed for the adjoint.
  auto xhat = std::make_shared<std::vector<double>>(m * n);
  auto inv_std = std::make_shared<std::vector<double>>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* xrow = x.data() + i * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += xrow[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = xrow[j] - mu;
      var += d * d;
    }
    var /= static_cast<double>(n);  // population variance
    const double denom = var + eps;
    if (denom <= 0.0) {
      throw NumericError("layer_norm: non-positive variance+eps on row " +
                         std::to_string(i));
    }
    const double inv = 1.0 / std::sqrt(denom);
    (*inv_std)[i] = inv;
    for (std::size_t j = 0; j < n; ++j) {
      const double xh = (xrow[j] - mu) * inv;
      (*xhat)[i * n + j] = xh;
      out.at(i * n + j) = gain.at(j) * xh + bias.at(j);
    }
  }
  if (out.requires_grad()) {
    record([tx = x, tg = gain, tb = bias, to = out, xhat, inv_std, m, n]() mutable {
      if (!to.has_grad()) return;
      const std::vector<double>& g = to.grad();
      std::vector<double> dxhat(n);
      for (std::size_t i = 0; i < m; ++i) {
        if (tg.requires_grad()) {
          std::vector<double>& gg = tg.grad();
          for (std::size_t j = 0; j < n; ++j) gg[j] += g[i * n + j] * (*xhat)[i * n + j];
        }
        if (tb.requires_grad()) {
          std::vector<double>& gb = tb.grad();
          for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
        }
        if (tx.requires_grad()) {
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            dxhat[j] = g[i * n + j] * tg.at(j);
            m1 += dxhat[j];
            m2 += dxhat[j] * (*xhat)[i * n + j];
          }
          m1 /= static_cast<double>(n);
          m2 /= static_cast<double>(n);
          std::vector<double>& gx = tx.grad();
          const double inv = (*inv_std)[i];
          for (std::size_t j = 0; j < n; ++j) {
            gx[i * n + j] += inv * (dxhat[j] - m1 - (*xhat)[i * n + j] * m2);
          }
        }
      }
    });
  }
  return out;
}

std::pair<Tensor, Tensor> Tape::rdft(const Tensor& x) {
  if (x.rank() > 2) {
    throw ShapeError("rdft: needs rank 1 or 2, got " + shape_str(x.shape()));
  }
  const std::size_t len = x.rank() == 1 ? x.shape()[0] : x.shape()[0];
  const std::size_t d = x.rank() == 1 ? 1 : x.shape()[1];
  if (len < 2 || len % 2 != 0) {
    throw ShapeError("rdft: length must be even and >= 2, got " + std::to_string(len));
  }
  const std::size_t half = len / 2 + 1;
  const TrigTables& tab = dft_tables(len);
  std::vector<std::size_t> out_shape =
      x.rank() == 1 ? std::vector<std::size_t>{half} : std::vector<std::size_t>{half, d};
  Tensor re = make_output(out_shape, {&x});
  Tensor im = make_output(out_shape, {&x});
  for (std::size_t k = 0; k < half; ++k) {
    const double* crow = tab.cosv.data() + k * len;
    const double* srow = tab.sinv.data() + k * len;
    for (std::size_t n = 0; n < len; ++n) {
      const double c = crow[n], s = srow[n];
      const double* xrow = x.data() + n * d;
      double* rrow = re.data() + k * d;
      double* irow = im.data() + k * d;
      for (std::size_t j = 0; j < d; ++j) {
        rrow[j] += xrow[j] * c;
        irow[j] -= xrow[j] * s;
      }
    }
  }
  if (re.requires_grad()) {
    record([tx = x, tre = re, tim = im, len, d, half]() mutable {
      const bool has_re = tre.has_grad();
      const bool has_im = tim.has_grad();
      if (!has_re && !has_im) return;
      if (!tx.requires_grad()) return;
      const TrigTables& tab = dft_tables(len);
      std::vector<double>& gx = tx.grad();
      for (std::size_t k = 0; k < half; ++k) {
        const double* crow = tab.cosv.data() + k * len;
        const double* srow = tab.sinv.data() + k * len;
        const double* gre = has_re ? tre.grad().data() + k * d : nullptr;
        const double* gim = has_im ? tim.grad().data() + k * d : nullptr;
        for (std::size_t n = 0; n < len; ++n) {
          double* gxrow = gx.data() + n * d;
          for (std::size_t j = 0; j < d; ++j) {
            if (has_re) gxrow[j] += gre[j] * crow[n];
            if (has_im) gxrow[j] -= gim[j] * srow[n];
          }
        }
      }
    });
  }
  return {re, im};
}

Tensor Tape::concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[0] != b.shape()[0]) {
    throw ShapeError("concat_cols: incompatible shapes " + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()));
  }
  const std::size_t m = a.shape()[0], na = a.shape()[1], nb = b.shape()[1];
  Tensor out = make_output({m, na + nb}, {&a, &b});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < na; ++j) out.at(i, j) = a.at(i, j);
    for (std::size_t j = 0; j < nb; ++j) out.at(i, na + j) = b.at(i, j);
  }
  if (out.requires_grad()) {
    record([ta = a, tb = b, to = out, m, na, nb]() mutable {
      if (!to.has_grad()) return;
      const std::vector<double>& g = to.grad();
      const std::size_t n = na + nb;
      if (ta.requires_grad()) {
        std::vector<double>& ga = ta.grad();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < na; ++j) ga[i * na + j] += g[i * n + j];
        }
      }
      if (tb.requires_grad()) {
        std::vector<double>& gb = tb.grad();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < nb; ++j) gb[i * nb + j] += g[i * n + na + j];
        }
      }
    });
  }
  return out;
}

Tensor Tape::select_rows(const Tensor& a, const std::vector<std::size_t>& idx) {
  if (a.rank() != 2) {
    throw ShapeError("select_rows: needs a rank-2 operand, got " + shape_str(a.shape()));
  }
  if (idx.empty()) throw ShapeError("select_rows: empty index list");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  for (std::size_t r : idx) {
    if (r >= m) {
      throw ShapeError("select_rows: index " + std::to_string(r) + " out of range for " +
                       shape_str(a.shape()));
    }
  }
  Tensor out = make_output({idx.size(), n}, {&a});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = a.at(idx[i], j);
  }
  if (out.requires_grad()) {
    record([ta = a, to = out, idx, n]() mutable {
      if (!to.has_grad()) return;
      const std::vector<double>& g = to.grad();
      std::vector<double>& ga = ta.grad();
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) ga[idx[i] * n + j] += g[i * n + j];
      }
    });
  }
  return out;
}

Tensor Tape::mean_all(const Tensor& a) {
  Tensor out = make_output({1}, {&a});
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.at(i);
  out.at(0) = s / static_cast<double>(a.size());
  if (out.requires_grad()) {
    record([ta = a, to = out]() mutable {
      if (!to.has_grad()) return;
      const double g = to.grad()[0] / static_cast<double>(ta.size());
      std::vector<double>& ga = ta.grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
  }
  return out;
}

Tensor Tape::sum_all(const Tensor& a) {
  Tensor out = make_output({1}, {&a});
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.at(i);
  out.at(0) = s;
  if (out.requires_grad()) {
    record([ta = a, to = out]() mutable {
      if (!to.has_grad()) return;
      const double g = to.grad()[0];
      std::vector<double>& ga = ta.grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
  }
  return out;
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ShapeError("backward: loss must be a defined scalar" +
                     (loss.defined() ? ", got " + shape_str(loss.shape()) : std::string()));
  }
  if (!grad_enabled_) {
    throw ShapeError("backward: tape was created with gradients disabled");
  }
  Tensor l = loss;
  l.grad()[0] += 1.0;
  for (std::size_t i = nodes_.size(); i > 0; --i) nodes_[i - 1]();
}

GradCheckReport gradient_check(
    const std::function<Tensor(Tape&, const Tensor&)>& f, Tensor x, double h,
    double tol) {
  x.set_requires_grad(true);
  x.zero_grad();
  Tape tape;
  Tensor y = f(tape, x);
  if (y.size() != 1) {
    throw ShapeError("gradient_check: f must return a scalar, got " +
                     shape_str(y.shape()));
  }
  if (!std::isfinite(y.item())) {
    throw NumericError("gradient_check: f(x) is not finite");
  }
  tape.backward(y);
  std::vector<double> analytic = x.grad();

  GradCheckReport report;
  auto eval = [&f](const Tensor& probe) {
    Tape t(false);
    double v = f(t, probe).item();
    if (!std::isfinite(v)) {
      throw NumericError("gradient_check: f(x) is not finite at a probe point");
    }
    return v;
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x.at(i);
    x.at(i) = orig + h;
    const double fp = eval(x);
    x.at(i) = orig - h;
    const double fm = eval(x);
    x.at(i) = orig;
    const double numeric = (fp - fm) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    report.max_rel_err = std::max(report.max_rel_err, rel);
  }
  report.pass = report.max_rel_err <= tol;
  return report;
}

}  // namespace fanet
