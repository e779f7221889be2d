#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fanet/errors.hpp"

namespace fanet {

std::string shape_str(const std::vector<std::size_t>& shape);

// Dense tensor of doubles with shared storage. Copying a Tensor copies the
// handle, not the buffer, so ops recorded on a tape keep their operands alive
// and gradient accumulation lands in one place. Values are written once by
// whichever op produced them; gradients are accumulated additively.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double value);
  static Tensor from(std::vector<std::size_t> shape, std::vector<double> values);
  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  bool defined() const { return s_ != nullptr; }
  const std::vector<std::size_t>& shape() const { return s_->shape; }
  std::size_t rank() const { return s_->shape.size(); }
  std::size_t size() const { return s_->values.size(); }

  // Rank-2 conveniences; rank-1 tensors count as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  double* data() { return s_->values.data(); }
  const double* data() const { return s_->values.data(); }
  std::vector<double>& values() { return s_->values; }
  const std::vector<double>& values() const { return s_->values; }

  double& at(std::size_t i) { return s_->values[i]; }
  double at(std::size_t i) const { return s_->values[i]; }
  double& at(std::size_t i, std::size_t j) { return s_->values[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return s_->values[i * cols() + j]; }
  double item() const;

  bool requires_grad() const { return s_ && s_->requires_grad; }
  Tensor& set_requires_grad(bool b) {
    s_->requires_grad = b;
    return *this;
  }

  // Gradient buffer, allocated (zeroed) on first touch so leaves that never
  // participate in a loss still report a well-defined zero gradient.
  std::vector<double>& grad();
  bool has_grad() const { return s_ && !s_->grad.empty(); }
  void zero_grad();
  void drop_grad() { s_->grad.clear(); }

  // Deep copy of the values; gradient state is not carried over.
  Tensor clone() const;
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return s_->shape == other.s_->shape; }

  // Identity of the underlying buffer, used to detect aliasing.
  const void* storage_id() const { return s_.get(); }

 private:
  struct Storage {
    std::vector<std::size_t> shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until touched
    bool requires_grad = false;
  };
  explicit Tensor(std::shared_ptr<Storage> s) : s_(std::move(s)) {}
  std::shared_ptr<Storage> s_;
};

// Records differentiable ops in execution order and replays their adjoints in
// reverse. Construction with grads disabled turns every op into plain forward
// arithmetic (used for inference).
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
  Tensor scale(const Tensor& a, double k);
  Tensor add_row_broadcast(const Tensor& a, const Tensor& bias);  // [m,n] + [n]
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor transpose(const Tensor& a);
  Tensor softmax_rows(const Tensor& a);
  Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                    double eps = 1e-5);
  // Real DFT along the first axis: x[L] or x[L,D] -> (re, im) with L/2+1 rows.
  // re[k] = sum_n x[n] cos(2*pi*k*n/L), im[k] = -sum_n x[n] sin(2*pi*k*n/L).
  std::pair<Tensor, Tensor> rdft(const Tensor& x);
  Tensor concat_cols(const Tensor& a, const Tensor& b);
  Tensor select_rows(const Tensor& a, const std::vector<std::size_t>& idx);
  Tensor mean_all(const Tensor& a);
  Tensor sum_all(const Tensor& a);

  // Seeds d(loss)/d(loss) = 1 and runs every recorded adjoint once, newest
  // first. Leaf gradients accumulate; caller zeroes them between backwards.
  void backward(const Tensor& loss);

  std::size_t node_count() const { return nodes_.size(); }
  bool grad_enabled() const { return grad_enabled_; }

 private:
  Tensor make_output(std::vector<std::size_t> shape,
                     std::initializer_list<const Tensor*> inputs);
  void record(std::function<void()> fn) { nodes_.push_back(std::move(fn)); }

  bool grad_enabled_ = true;
  std::vector<std::function<void()>> nodes_;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  bool pass = false;
};

// Central-difference check of reverse-mode gradients for a scalar-valued
// function of one tensor input. f is re-evaluated on a fresh tape per probe.
GradCheckReport gradient_check(
    const std::function<Tensor(Tape&, const Tensor&)>& f, Tensor x, double h,
    double tol);

}  // namespace fanet
