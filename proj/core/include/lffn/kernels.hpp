#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lffn/rng.hpp"
#include "lffn/tensor.hpp"

namespace lffn {

// Convolution parameters. Weights are stored (c_out, c_in/groups, kh, kw);
// for groups == 1 that is the plain (c_out, c_in, kh, kw) layout.
struct ConvParams {
  Tensor weights;
  std::vector<double> bias;  // length c_out
  int stride = 1;
  int padding = 0;
  int groups = 1;

  std::int64_t out_channels() const { return weights.batch(); }
  std::int64_t in_channels() const { return weights.channels() * groups; }
  std::int64_t kernel_h() const { return weights.height(); }
  std::int64_t kernel_w() const { return weights.width(); }
};

// Transposed-convolution parameters; weights (c_in, c_out, kh, kw).
struct DeconvParams {
  Tensor weights;
  std::vector<double> bias;  // length c_out
  int stride = 2;
  int padding = 1;

  std::int64_t in_channels() const { return weights.batch(); }
  std::int64_t out_channels() const { return weights.channels(); }
  std::int64_t kernel_h() const { return weights.height(); }
  std::int64_t kernel_w() const { return weights.width(); }
};

// rng == nullptr zero-initializes weights; otherwise Kaiming fan-in init.
ConvParams make_conv(std::int64_t c_in, std::int64_t c_out, std::int64_t kernel,
                     int stride, int padding, int groups = 1, Rng* rng = nullptr);
DeconvParams make_deconv(std::int64_t c_in, std::int64_t c_out, std::int64_t kernel,
                         int stride = 2, int padding = 1, Rng* rng = nullptr);

Tensor conv2d(const Tensor& input, const ConvParams& p);

struct ConvGrads {
  Tensor input_grad;
  Tensor weight_grad;
  std::vector<double> bias_grad;
};
ConvGrads conv2d_backward(const Tensor& input, const ConvParams& p, const Tensor& upstream);

Tensor deconv2d(const Tensor& input, const DeconvParams& p);

struct DeconvGrads {
  Tensor input_grad;
  Tensor weight_grad;
  std::vector<double> bias_grad;
};
DeconvGrads deconv2d_backward(const Tensor& input, const DeconvParams& p, const Tensor& upstream);

Tensor relu(const Tensor& t);
// d relu/d input given the forward input
Tensor relu_backward(const Tensor& input, const Tensor& upstream);

Tensor sigmoid(const Tensor& t);
// takes the forward *output* (y' = y (1 - y))
Tensor sigmoid_backward(const Tensor& output, const Tensor& upstream);

double sigmoid_scalar(double x);

Tensor maxpool2d(const Tensor& t, int window, int stride);
Tensor maxpool2d_backward(const Tensor& input, int window, int stride, const Tensor& upstream);

enum class PoolMode { kTrain, kEval };

// Stochastic pooling over one nonnegative channel plane. Train mode samples
// one element with probability value / sum; eval mode returns the
// probability-weighted mean (sum y^2 / sum y). An all-zero plane pools to 0.
double stochastic_pool_channel(std::span<const double> plane, Rng& rng, PoolMode mode);
// train-mode draw that also reports the sampled index (-1 for a zero plane)
std::pair<double, std::int64_t> stochastic_pool_sample(std::span<const double> plane, Rng& rng);

std::vector<double> fully_connected(std::span<const double> input, const Matrix& weights,
                                    std::span<const double> bias);

struct FcGrads {
  std::vector<double> input_grad;
  Matrix weight_grad;
  std::vector<double> bias_grad;
};
FcGrads fully_connected_backward(std::span<const double> input, const Matrix& weights,
                                 std::span<const double> upstream);

Tensor concat_channels(const Tensor& a, const Tensor& b);
// channels [begin, end) of every batch element
Tensor slice_channels(const Tensor& t, std::int64_t begin, std::int64_t end);
// splits an upstream gradient back into the two concat operands
std::pair<Tensor, Tensor> concat_channels_backward(std::int64_t c_first, const Tensor& upstream);

std::vector<double> softmax(std::span<const double> logits);

struct ScalarLoss {
  double loss = 0.0;
  std::vector<double> grad;
};
ScalarLoss softmax_cross_entropy(std::span<const double> logits, std::int64_t label);
// elementwise 0.5 x^2 / delta for |x| < delta else |x| - 0.5 delta, summed
ScalarLoss smooth_l1(std::span<const double> pred, std::span<const double> target,
                     double delta = 1.0);

// C(m x n) += / = A(m x k) * B(k x n), row-major
void gemm(std::int64_t m, std::int64_t k, std::int64_t n, const double* a, const double* b,
          double* c, bool accumulate);
// C(m x n) += / = A(m x k) * B(n x k)^T
void gemm_nt(std::int64_t m, std::int64_t k, std::int64_t n, const double* a, const double* b,
             double* c, bool accumulate);
// C(m x n) += / = A(k x m)^T * B(k x n)
void gemm_tn(std::int64_t m, std::int64_t k, std::int64_t n, const double* a, const double* b,
             double* c, bool accumulate);

}  // namespace lffn
