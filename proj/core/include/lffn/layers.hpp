#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lffn/kernels.hpp"
#include "lffn/params.hpp"
#include "lffn/tensor.hpp"

namespace lffn {

// Trainable convolution: caches its last input for the backward pass and
// accumulates gradients until zero_grad(). Single-threaded use only.
class Conv2dLayer {
 public:
  Conv2dLayer() = default;
  explicit Conv2dLayer(ConvParams params);
  Conv2dLayer(std::int64_t c_in, std::int64_t c_out, std::int64_t kernel, int stride, int padding,
              int groups = 1, Rng* rng = nullptr);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& upstream);

  const ConvParams& params() const { return params_; }
  ConvParams& params() { return params_; }

  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

 private:
  ConvParams params_;
  Tensor weight_grad_;
  std::vector<double> bias_grad_;
  Tensor cached_input_;
};

class Deconv2dLayer {
 public:
  Deconv2dLayer() = default;
  explicit Deconv2dLayer(DeconvParams params);
  Deconv2dLayer(std::int64_t c_in, std::int64_t c_out, std::int64_t kernel, int stride, int padding,
                Rng* rng = nullptr);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& upstream);

  const DeconvParams& params() const { return params_; }
  DeconvParams& params() { return params_; }

  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

 private:
  DeconvParams params_;
  Tensor weight_grad_;
  std::vector<double> bias_grad_;
  Tensor cached_input_;
};

class FcLayer {
 public:
  FcLayer() = default;
  FcLayer(std::int64_t in, std::int64_t out, Rng* rng = nullptr, bool with_bias = true);
  explicit FcLayer(Matrix weights, std::vector<double> bias = {});

  std::vector<double> forward(std::span<const double> x);
  std::vector<double> backward(std::span<const double> upstream);

  const Matrix& weights() const { return weights_; }
  Matrix& weights() { return weights_; }

  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

 private:
  Matrix weights_;
  std::vector<double> bias_;
  bool with_bias_ = true;
  Matrix weight_grad_;
  std::vector<double> bias_grad_;
  std::vector<double> cached_input_;
};

}  // namespace lffn
