#include "lffn/layers.hpp"

#include <algorithm>

#include "lffn/errors.hpp"

namespace lffn {

Conv2dLayer::Conv2dLayer(ConvParams params) : params_(std::move(params)) { zero_grad(); }

Conv2dLayer::Conv2dLayer(std::int64_t c_in, std::int64_t c_out, std::int64_t kernel, int stride,
                         int padding, int groups, Rng* rng)
    : Conv2dLayer(make_conv(c_in, c_out, kernel, stride, padding, groups, rng)) {}

Tensor Conv2dLayer::forward(const Tensor& x) {
  cached_input_ = x;
  return conv2d(x, params_);
}

Tensor Conv2dLayer::backward(const Tensor& upstream) {
  auto grads = conv2d_backward(cached_input_, params_, upstream);
  double* wg = weight_grad_.data();
  const double* g = grads.weight_grad.data();
  for (std::int64_t i = 0; i < weight_grad_.size(); ++i) wg[i] += g[i];
  for (std::size_t i = 0; i < bias_grad_.size(); ++i) bias_grad_[i] += grads.bias_grad[i];
  return std::move(grads.input_grad);
}

void Conv2dLayer::zero_grad() {
  weight_grad_ = Tensor::zeros_like(params_.weights);
  bias_grad_.assign(params_.bias.size(), 0.0);
}

void Conv2dLayer::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".weight", params_.weights.flat(), weight_grad_.flat()});
  out.push_back({prefix + ".bias", {params_.bias.data(), params_.bias.size()},
                 {bias_grad_.data(), bias_grad_.size()}});
}

Deconv2dLayer::Deconv2dLayer(DeconvParams params) : params_(std::move(params)) { zero_grad(); }

Deconv2dLayer::Deconv2dLayer(std::int64_t c_in, std::int64_t c_out, std::int64_t kernel, int stride,
                             int padding, Rng* rng)
    : Deconv2dLayer(make_deconv(c_in, c_out, kernel, stride, padding, rng)) {}

Tensor Deconv2dLayer::forward(const Tensor& x) {
  cached_input_ = x;
  return deconv2d(x, params_);
}

Tensor Deconv2dLayer::backward(const Tensor& upstream) {
  auto grads = deconv2d_backward(cached_input_, params_, upstream);
  double* wg = weight_grad_.data();
  const double* g = grads.weight_grad.data();
  for (std::int64_t i = 0; i < weight_grad_.size(); ++i) wg[i] += g[i];
  for (std::size_t i = 0; i < bias_grad_.size(); ++i) bias_grad_[i] += grads.bias_grad[i];
  return std::move(grads.input_grad);
}

void Deconv2dLayer::zero_grad() {
  weight_grad_ = Tensor::zeros_like(params_.weights);
  bias_grad_.assign(params_.bias.size(), 0.0);
}

void Deconv2dLayer::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".weight", params_.weights.flat(), weight_grad_.flat()});
  out.push_back({prefix + ".bias", {params_.bias.data(), params_.bias.size()},
                 {bias_grad_.data(), bias_grad_.size()}});
}

FcLayer::FcLayer(std::int64_t in, std::int64_t out, Rng* rng, bool with_bias)
    : weights_(out, in), with_bias_(with_bias) {
  if (with_bias_) bias_.assign(static_cast<std::size_t>(out), 0.0);
  if (rng) fill_kaiming({weights_.data.data(), weights_.data.size()}, *rng, in);
  zero_grad();
}

FcLayer::FcLayer(Matrix weights, std::vector<double> bias)
    : weights_(std::move(weights)), bias_(std::move(bias)), with_bias_(!bias_.empty()) {
  zero_grad();
}

std::vector<double> FcLayer::forward(std::span<const double> x) {
  cached_input_.assign(x.begin(), x.end());
  return fully_connected(x, weights_, bias_);
}

std::vector<double> FcLayer::backward(std::span<const double> upstream) {
  auto grads = fully_connected_backward(cached_input_, weights_, upstream);
  for (std::size_t i = 0; i < weight_grad_.data.size(); ++i)
    weight_grad_.data[i] += grads.weight_grad.data[i];
  for (std::size_t i = 0; i < bias_grad_.size(); ++i) bias_grad_[i] += grads.bias_grad[i];
  return grads.input_grad;
}

void FcLayer::zero_grad() {
  weight_grad_ = Matrix(weights_.rows, weights_.cols);
  bias_grad_.assign(bias_.size(), 0.0);
}

void FcLayer::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".weight", {weights_.data.data(), weights_.data.size()},
                 {weight_grad_.data.data(), weight_grad_.data.size()}});
  if (with_bias_)
    out.push_back({prefix + ".bias", {bias_.data(), bias_.size()},
                   {bias_grad_.data(), bias_grad_.size()}});
}

}  // namespace lffn
