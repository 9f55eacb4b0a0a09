#pragma once

#include <cmath>
#include <string>

#include "fusion/tensor.hpp"

namespace fusion {

// ---------------------------------------------------------------------------
// conv1d: valid cross-correlation, stride 1.
//   y(i, o) = b(o) + sum_c sum_j w(o, c*k + j) * x(i + j, c)
// ---------------------------------------------------------------------------

/// Unfolds x (len x in_ch) into (len-k+1) x (in_ch*k) patches so that the
/// convolution becomes a single matrix product.
template <typename Scalar>
Matrix<Scalar> im2col(const Matrix<Scalar>& x, Index kernel) {
  if (kernel < 1) throw ShapeError("conv1d: kernel size must be >= 1");
  if (x.rows() < kernel) {
    throw ShapeError("conv1d: input length " + std::to_string(x.rows()) +
                     " shorter than kernel " + std::to_string(kernel));
  }
  const Index out_len = x.rows() - kernel + 1;
  Matrix<Scalar> cols(out_len, x.cols() * kernel);
  for (Index c = 0; c < x.cols(); ++c) {
    for (Index j = 0; j < kernel; ++j) {
      cols.col(c * kernel + j) = x.col(c).segment(j, out_len);
    }
  }
  return cols;
}

template <typename Scalar>
void check_conv_shapes(const Matrix<Scalar>& x, const Matrix<Scalar>& w,
                       const Vector<Scalar>& b, Index kernel) {
  if (w.cols() != x.cols() * kernel) {
    throw ShapeError("conv1d: kernel expects " + std::to_string(w.cols() / kernel) +
                     " input channels, got " + std::to_string(x.cols()));
  }
  if (b.size() != w.rows()) throw ShapeError("conv1d: bias length != out channels");
}

/// Forward pass from pre-unfolded patches.
template <typename Scalar>
Matrix<Scalar> conv1d_from_cols(const Matrix<Scalar>& cols, const Matrix<Scalar>& w,
                                const Vector<Scalar>& b) {
  Matrix<Scalar> y = cols * w.transpose();
  y.rowwise() += b.transpose();
  return y;
}

template <typename Scalar>
Matrix<Scalar> conv1d_forward(const Matrix<Scalar>& x, const Matrix<Scalar>& w,
                              const Vector<Scalar>& b, Index kernel) {
  if (kernel < 1) throw ShapeError("conv1d: kernel size must be >= 1");
  check_conv_shapes(x, w, b, kernel);
  return conv1d_from_cols<Scalar>(im2col(x, kernel), w, b);
}

template <typename Scalar>
struct Conv1dGrad {
  Matrix<Scalar> kernel;  // same layout as w
  Vector<Scalar> bias;
  Matrix<Scalar> input;   // empty unless requested
};

/// Gradients of a conv1d given the unfolded input patches and upstream dy.
template <typename Scalar>
Conv1dGrad<Scalar> conv1d_backward(const Matrix<Scalar>& cols, const Matrix<Scalar>& w,
                                   const Matrix<Scalar>& dy, Index kernel, Index in_len,
                                   bool need_input_grad) {
  if (dy.rows() != cols.rows() || dy.cols() != w.rows()) {
    throw ShapeError("conv1d backward: upstream gradient shape mismatch");
  }
  Conv1dGrad<Scalar> g;
  g.kernel.noalias() = dy.transpose() * cols;
  g.bias = dy.colwise().sum().transpose();
  if (need_input_grad) {
    const Index in_ch = w.cols() / kernel;
    const Index out_len = dy.rows();
    Matrix<Scalar> dcols = dy * w;
    g.input = Matrix<Scalar>::Zero(in_len, in_ch);
    for (Index c = 0; c < in_ch; ++c) {
      for (Index j = 0; j < kernel; ++j) {
        g.input.col(c).segment(j, out_len) += dcols.col(c * kernel + j);
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// maxpool1d
// ---------------------------------------------------------------------------

template <typename Scalar>
struct PoolResult {
  Matrix<Scalar> values;
  IndexMatrix argmax;  // input row of each selected maximum
};

/// Max over non-overlapping windows; a trailing remainder shorter than `pool`
/// is dropped. Ties go to the lowest index.
template <typename Scalar>
PoolResult<Scalar> maxpool1d_forward(const Matrix<Scalar>& x, Index pool = 2,
                                     Index stride = 2) {
  if (pool < 1 || stride < 1) throw ShapeError("maxpool1d: pool and stride must be >= 1");
  if (x.rows() < pool) {
    throw ShapeError("maxpool1d: input length " + std::to_string(x.rows()) +
                     " shorter than pool " + std::to_string(pool));
  }
  const Index out_len = (x.rows() - pool) / stride + 1;
  PoolResult<Scalar> r{Matrix<Scalar>(out_len, x.cols()), IndexMatrix(out_len, x.cols())};
  for (Index c = 0; c < x.cols(); ++c) {
    for (Index i = 0; i < out_len; ++i) {
      Index best = i * stride;
      for (Index j = best + 1; j < i * stride + pool; ++j) {
        if (x(j, c) > x(best, c)) best = j;
      }
      r.values(i, c) = x(best, c);
      r.argmax(i, c) = best;
    }
  }
  return r;
}

/// Routes each upstream gradient to the input position that won the max.
template <typename Scalar>
Matrix<Scalar> maxpool1d_backward(const Matrix<Scalar>& dy, const IndexMatrix& argmax,
                                  Index in_len) {
  if (dy.rows() != argmax.rows() || dy.cols() != argmax.cols()) {
    throw ShapeError("maxpool1d backward: gradient/argmax shape mismatch");
  }
  Matrix<Scalar> dx = Matrix<Scalar>::Zero(in_len, dy.cols());
  for (Index c = 0; c < dy.cols(); ++c) {
    for (Index i = 0; i < dy.rows(); ++i) dx(argmax(i, c), c) += dy(i, c);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// dense: y(j) = b(j) + sum_i W(j, i) x(i)
// ---------------------------------------------------------------------------

template <typename Scalar>
Vector<Scalar> dense_forward(const Vector<Scalar>& x, const Matrix<Scalar>& w,
                             const Vector<Scalar>& b) {
  if (w.cols() != x.size() || b.size() != w.rows()) {
    throw ShapeError("dense: weight is " + std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()) + ", input has " + std::to_string(x.size()));
  }
  Vector<Scalar> y = b;
  y.noalias() += w * x;
  return y;
}

/// Batched form: one sample per row of x.
template <typename Scalar>
Matrix<Scalar> dense_forward_batch(const Matrix<Scalar>& x, const Matrix<Scalar>& w,
                                   const Vector<Scalar>& b) {
  if (w.cols() != x.cols() || b.size() != w.rows()) {
    throw ShapeError("dense: weight is " + std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()) + ", input has " + std::to_string(x.cols()));
  }
  Matrix<Scalar> y(x.rows(), w.rows());
  y.noalias() = x * w.transpose();
  y.rowwise() += b.transpose();
  return y;
}

// ---------------------------------------------------------------------------
// relu
// ---------------------------------------------------------------------------

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

/// Passes dy where the forward input (or output; same sign) was strictly
/// positive. The subgradient at 0 is 0.
template <typename Scalar>
Matrix<Scalar> relu_backward(const Matrix<Scalar>& activation, const Matrix<Scalar>& dy) {
  return (activation.array() > Scalar(0)).select(dy, Scalar(0));
}

// ---------------------------------------------------------------------------
// softmax + sparse categorical cross-entropy
// ---------------------------------------------------------------------------

template <typename Scalar>
struct SoftmaxLoss {
  Scalar loss;
  Vector<Scalar> probs;
};

template <typename Scalar>
SoftmaxLoss<Scalar> softmax_crossentropy(const Vector<Scalar>& logits, Index label) {
  if (label < 0 || label >= logits.size()) {
    throw ShapeError("softmax_crossentropy: label " + std::to_string(label) +
                     " outside [0, " + std::to_string(logits.size()) + ")");
  }
  const Scalar top = logits.maxCoeff();
  Vector<Scalar> e = (logits.array() - top).exp().matrix();
  const Scalar total = e.sum();
  SoftmaxLoss<Scalar> r{std::log(total) - (logits(label) - top), e / total};
  if (!std::isfinite(r.loss)) throw NumericError("softmax_crossentropy: non-finite loss");
  return r;
}

/// d loss / d logits for the fused softmax + cross-entropy.
template <typename Scalar>
Vector<Scalar> softmax_crossentropy_grad(const Vector<Scalar>& probs, Index label) {
  Vector<Scalar> g = probs;
  g(label) -= Scalar(1);
  return g;
}

}  // namespace fusion
