#include "lffn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lffn/errors.hpp"

namespace lffn {

namespace {

std::int64_t conv_out_dim(std::int64_t in, std::int64_t kernel, int stride, int padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

std::int64_t deconv_out_dim(std::int64_t in, std::int64_t kernel, int stride, int padding) {
  return stride * (in - 1) - 2 * padding + kernel;
}

// cols layout: (c * kh * kw) x (h_out * w_out)
void im2col(const double* im, std::int64_t c, std::int64_t h, std::int64_t w,
            std::int64_t kh, std::int64_t kw, int stride, int padding,
            std::int64_t h_out, std::int64_t w_out, double* cols) {
  const std::int64_t out_plane = h_out * w_out;
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const double* src = im + ch * h * w;
    for (std::int64_t ky = 0; ky < kh; ++ky) {
      for (std::int64_t kx = 0; kx < kw; ++kx) {
        double* dst = cols + ((ch * kh + ky) * kw + kx) * out_plane;
        for (std::int64_t oy = 0; oy < h_out; ++oy) {
          const std::int64_t iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + w_out, 0.0);
            dst += w_out;
            continue;
          }
          for (std::int64_t ox = 0; ox < w_out; ++ox) {
            const std::int64_t ix = ox * stride - padding + kx;
            *dst++ = (ix >= 0 && ix < w) ? src[iy * w + ix] : 0.0;
          }
        }
      }
    }
  }
}

// scatter-add inverse of im2col
void col2im(const double* cols, std::int64_t c, std::int64_t h, std::int64_t w,
            std::int64_t kh, std::int64_t kw, int stride, int padding,
            std::int64_t h_out, std::int64_t w_out, double* im) {
  const std::int64_t out_plane = h_out * w_out;
  for (std::int64_t ch = 0; ch < c; ++ch) {
    double* dst = im + ch * h * w;
    for (std::int64_t ky = 0; ky < kh; ++ky) {
      for (std::int64_t kx = 0; kx < kw; ++kx) {
        const double* src = cols + ((ch * kh + ky) * kw + kx) * out_plane;
        for (std::int64_t oy = 0; oy < h_out; ++oy) {
          const std::int64_t iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= h) {
            src += w_out;
            continue;
          }
          for (std::int64_t ox = 0; ox < w_out; ++ox) {
            const std::int64_t ix = ox * stride - padding + kx;
            if (ix >= 0 && ix < w) dst[iy * w + ix] += src[ox];
          }
          src += w_out;
        }
      }
    }
  }
}

void check_conv_shapes(const Tensor& input, const ConvParams& p, const char* op) {
  if (p.groups < 1) throw ConfigError(std::string(op) + ": groups must be >= 1");
  if (p.out_channels() % p.groups != 0)
    throw ConfigError(std::string(op) + ": out channels " + std::to_string(p.out_channels()) +
                      " not divisible by groups " + std::to_string(p.groups));
  if (input.channels() != p.in_channels())
    throw DimensionError(std::string(op) + ": input channel axis " + std::to_string(input.channels()) +
                         " != weight input channels " + std::to_string(p.in_channels()));
  if (static_cast<std::int64_t>(p.bias.size()) != p.out_channels())
    throw DimensionError(std::string(op) + ": bias length " + std::to_string(p.bias.size()) +
                         " != out channels " + std::to_string(p.out_channels()));
  const std::int64_t h_out = conv_out_dim(input.height(), p.kernel_h(), p.stride, p.padding);
  const std::int64_t w_out = conv_out_dim(input.width(), p.kernel_w(), p.stride, p.padding);
  if (h_out < 1 || w_out < 1)
    throw DimensionError(std::string(op) + ": spatial axes " + std::to_string(input.height()) + "x" +
                         std::to_string(input.width()) + " too small for kernel " +
                         std::to_string(p.kernel_h()) + "x" + std::to_string(p.kernel_w()) +
                         " stride " + std::to_string(p.stride) + " padding " + std::to_string(p.padding));
}

}  // namespace

void gemm(std::int64_t m, std::int64_t k, std::int64_t n, const double* a, const double* b,
          double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::int64_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::int64_t t = 0; t < k; ++t) {
      const double av = ai[t];
      if (av == 0.0) continue;
      const double* bt = b + t * n;
      for (std::int64_t j = 0; j < n; ++j) ci[j] += av * bt[j];
    }
  }
}

void gemm_nt(std::int64_t m, std::int64_t k, std::int64_t n, const double* a, const double* b,
             double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::int64_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::int64_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (std::int64_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
      ci[j] += acc;
    }
  }
}

void gemm_tn(std::int64_t m, std::int64_t k, std::int64_t n, const double* a, const double* b,
             double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::int64_t t = 0; t < k; ++t) {
    const double* at = a + t * m;
    const double* bt = b + t * n;
    for (std::int64_t i = 0; i < m; ++i) {
      const double av = at[i];
      if (av == 0.0) continue;
      double* ci = c + i * n;
      for (std::int64_t j = 0; j < n; ++j) ci[j] += av * bt[j];
    }
  }
}

ConvParams make_conv(std::int64_t c_in, std::int64_t c_out, std::int64_t kernel,
                     int stride, int padding, int groups, Rng* rng) {
  if (groups < 1 || c_in % groups != 0 || c_out % groups != 0)
    throw ConfigError("make_conv: channels (" + std::to_string(c_in) + ", " + std::to_string(c_out) +
                      ") not divisible by groups " + std::to_string(groups));
  ConvParams p;
  p.weights = Tensor(c_out, c_in / groups, kernel, kernel);
  p.bias.assign(static_cast<std::size_t>(c_out), 0.0);
  p.stride = stride;
  p.padding = padding;
  p.groups = groups;
  if (rng) fill_kaiming(p.weights.flat(), *rng, (c_in / groups) * kernel * kernel);
  return p;
}

DeconvParams make_deconv(std::int64_t c_in, std::int64_t c_out, std::int64_t kernel,
                         int stride, int padding, Rng* rng) {
  DeconvParams p;
  p.weights = Tensor(c_in, c_out, kernel, kernel);
  p.bias.assign(static_cast<std::size_t>(c_out), 0.0);
  p.stride = stride;
  p.padding = padding;
  if (rng) fill_kaiming(p.weights.flat(), *rng, c_in * kernel * kernel);
  return p;
}

Tensor conv2d(const Tensor& input, const ConvParams& p) {
  check_conv_shapes(input, p, "conv2d");
  const std::int64_t kh = p.kernel_h(), kw = p.kernel_w();
  const std::int64_t h_out = conv_out_dim(input.height(), kh, p.stride, p.padding);
  const std::int64_t w_out = conv_out_dim(input.width(), kw, p.stride, p.padding);
  const std::int64_t cg_in = input.channels() / p.groups;
  const std::int64_t cg_out = p.out_channels() / p.groups;
  const std::int64_t out_plane = h_out * w_out;

  Tensor out(input.batch(), p.out_channels(), h_out, w_out);
  std::vector<double> cols(static_cast<std::size_t>(cg_in * kh * kw * out_plane));
  for (std::int64_t n = 0; n < input.batch(); ++n) {
    for (int g = 0; g < p.groups; ++g) {
      const double* im = input.data() + (n * input.channels() + g * cg_in) * input.height() * input.width();
      im2col(im, cg_in, input.height(), input.width(), kh, kw, p.stride, p.padding, h_out, w_out,
             cols.data());
      double* dst = out.data() + (n * p.out_channels() + g * cg_out) * out_plane;
      const double* wg = p.weights.data() + g * cg_out * cg_in * kh * kw;
      gemm(cg_out, cg_in * kh * kw, out_plane, wg, cols.data(), dst, false);
    }
    for (std::int64_t co = 0; co < p.out_channels(); ++co) {
      const double b = p.bias[static_cast<std::size_t>(co)];
      if (b == 0.0) continue;
      double* dst = out.data() + (n * p.out_channels() + co) * out_plane;
      for (std::int64_t i = 0; i < out_plane; ++i) dst[i] += b;
    }
  }
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const ConvParams& p, const Tensor& upstream) {
  check_conv_shapes(input, p, "conv2d_backward");
  const std::int64_t kh = p.kernel_h(), kw = p.kernel_w();
  const std::int64_t h_out = conv_out_dim(input.height(), kh, p.stride, p.padding);
  const std::int64_t w_out = conv_out_dim(input.width(), kw, p.stride, p.padding);
  if (upstream.shape() != TensorShape{input.batch(), p.out_channels(), h_out, w_out})
    throw DimensionError("conv2d_backward: upstream shape " + upstream.shape().str() +
                         " != forward output shape " +
                         TensorShape{input.batch(), p.out_channels(), h_out, w_out}.str());

  const std::int64_t cg_in = input.channels() / p.groups;
  const std::int64_t cg_out = p.out_channels() / p.groups;
  const std::int64_t out_plane = h_out * w_out;
  const std::int64_t kdim = cg_in * kh * kw;

  ConvGrads grads;
  grads.input_grad = Tensor::zeros_like(input);
  grads.weight_grad = Tensor::zeros_like(p.weights);
  grads.bias_grad.assign(p.bias.size(), 0.0);

  std::vector<double> cols(static_cast<std::size_t>(kdim * out_plane));
  std::vector<double> dcols(static_cast<std::size_t>(kdim * out_plane));
  for (std::int64_t n = 0; n < input.batch(); ++n) {
    for (int g = 0; g < p.groups; ++g) {
      const double* im = input.data() + (n * input.channels() + g * cg_in) * input.height() * input.width();
      const double* up = upstream.data() + (n * p.out_channels() + g * cg_out) * out_plane;
      const double* wg = p.weights.data() + g * cg_out * kdim;
      double* dwg = grads.weight_grad.data() + g * cg_out * kdim;

      im2col(im, cg_in, input.height(), input.width(), kh, kw, p.stride, p.padding, h_out, w_out,
             cols.data());
      gemm_nt(cg_out, out_plane, kdim, up, cols.data(), dwg, true);
      gemm_tn(kdim, cg_out, out_plane, wg, up, dcols.data(), false);
      double* dim = grads.input_grad.data() +
                    (n * input.channels() + g * cg_in) * input.height() * input.width();
      col2im(dcols.data(), cg_in, input.height(), input.width(), kh, kw, p.stride, p.padding, h_out,
             w_out, dim);
    }
    for (std::int64_t co = 0; co < p.out_channels(); ++co) {
      const double* up = upstream.data() + (n * p.out_channels() + co) * out_plane;
      double acc = 0.0;
      for (std::int64_t i = 0; i < out_plane; ++i) acc += up[i];
      grads.bias_grad[static_cast<std::size_t>(co)] += acc;
    }
  }
  return grads;
}

Tensor deconv2d(const Tensor& input, const DeconvParams& p) {
  if (input.channels() != p.in_channels())
    throw DimensionError("deconv2d: input channel axis " + std::to_string(input.channels()) +
                         " != weight input channels " + std::to_string(p.in_channels()));
  const std::int64_t kh = p.kernel_h(), kw = p.kernel_w();
  const std::int64_t h_out = deconv_out_dim(input.height(), kh, p.stride, p.padding);
  const std::int64_t w_out = deconv_out_dim(input.width(), kw, p.stride, p.padding);
  if (h_out < 1 || w_out < 1)
    throw ConfigError("deconv2d: configuration yields non-positive output size " +
                      std::to_string(h_out) + "x" + std::to_string(w_out));

  const std::int64_t in_plane = input.height() * input.width();
  const std::int64_t kdim = p.out_channels() * kh * kw;
  Tensor out(input.batch(), p.out_channels(), h_out, w_out);
  std::vector<double> cols(static_cast<std::size_t>(kdim * in_plane));
  for (std::int64_t n = 0; n < input.batch(); ++n) {
    const double* im = input.data() + n * input.channels() * in_plane;
    // cols = W^T x, then scatter back onto the upsampled grid
    gemm_tn(kdim, p.in_channels(), in_plane, p.weights.data(), im, cols.data(), false);
    double* dst = out.data() + n * p.out_channels() * h_out * w_out;
    col2im(cols.data(), p.out_channels(), h_out, w_out, kh, kw, p.stride, p.padding,
           input.height(), input.width(), dst);
    for (std::int64_t co = 0; co < p.out_channels(); ++co) {
      const double b = p.bias[static_cast<std::size_t>(co)];
      if (b == 0.0) continue;
      double* plane = dst + co * h_out * w_out;
      for (std::int64_t i = 0; i < h_out * w_out; ++i) plane[i] += b;
    }
  }
  return out;
}

DeconvGrads deconv2d_backward(const Tensor& input, const DeconvParams& p, const Tensor& upstream) {
  const std::int64_t kh = p.kernel_h(), kw = p.kernel_w();
  const std::int64_t h_out = deconv_out_dim(input.height(), kh, p.stride, p.padding);
  const std::int64_t w_out = deconv_out_dim(input.width(), kw, p.stride, p.padding);
  if (upstream.shape() != TensorShape{input.batch(), p.out_channels(), h_out, w_out})
    throw DimensionError("deconv2d_backward: upstream shape " + upstream.shape().str() +
                         " != forward output shape " +
                         TensorShape{input.batch(), p.out_channels(), h_out, w_out}.str());

  const std::int64_t in_plane = input.height() * input.width();
  const std::int64_t kdim = p.out_channels() * kh * kw;

  DeconvGrads grads;
  grads.input_grad = Tensor::zeros_like(input);
  grads.weight_grad = Tensor::zeros_like(p.weights);
  grads.bias_grad.assign(p.bias.size(), 0.0);

  std::vector<double> cols_up(static_cast<std::size_t>(kdim * in_plane));
  for (std::int64_t n = 0; n < input.batch(); ++n) {
    const double* up = upstream.data() + n * p.out_channels() * h_out * w_out;
    im2col(up, p.out_channels(), h_out, w_out, kh, kw, p.stride, p.padding, input.height(),
           input.width(), cols_up.data());
    const double* im = input.data() + n * input.channels() * in_plane;
    double* dim = grads.input_grad.data() + n * input.channels() * in_plane;
    gemm(p.in_channels(), kdim, in_plane, p.weights.data(), cols_up.data(), dim, true);
    gemm_nt(p.in_channels(), in_plane, kdim, im, cols_up.data(), grads.weight_grad.data(), true);
    for (std::int64_t co = 0; co < p.out_channels(); ++co) {
      const double* plane = up + co * h_out * w_out;
      double acc = 0.0;
      for (std::int64_t i = 0; i < h_out * w_out; ++i) acc += plane[i];
      grads.bias_grad[static_cast<std::size_t>(co)] += acc;
    }
  }
  return grads;
}

Tensor relu(const Tensor& t) {
  Tensor out = t;
  for (double& x : out.flat()) x = x > 0.0 ? x : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& upstream) {
  if (input.shape() != upstream.shape())
    throw DimensionError("relu_backward: shape mismatch " + input.shape().str() + " vs " +
                         upstream.shape().str());
  Tensor grad = upstream;
  const double* in = input.data();
  double* g = grad.data();
  for (std::int64_t i = 0; i < grad.size(); ++i)
    if (in[i] <= 0.0) g[i] = 0.0;
  return grad;
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& t) {
  Tensor out = t;
  for (double& x : out.flat()) x = sigmoid_scalar(x);
  return out;
}

Tensor sigmoid_backward(const Tensor& output, const Tensor& upstream) {
  if (output.shape() != upstream.shape())
    throw DimensionError("sigmoid_backward: shape mismatch " + output.shape().str() + " vs " +
                         upstream.shape().str());
  Tensor grad = upstream;
  const double* y = output.data();
  double* g = grad.data();
  for (std::int64_t i = 0; i < grad.size(); ++i) g[i] *= y[i] * (1.0 - y[i]);
  return grad;
}

Tensor maxpool2d(const Tensor& t, int window, int stride) {
  if (window < 1 || stride < 1)
    throw ConfigError("maxpool2d: window and stride must be positive");
  if (t.height() < window || t.width() < window)
    throw DimensionError("maxpool2d: window " + std::to_string(window) +
                         " exceeds spatial axes " + std::to_string(t.height()) + "x" +
                         std::to_string(t.width()));
  const std::int64_t h_out = (t.height() - window) / stride + 1;
  const std::int64_t w_out = (t.width() - window) / stride + 1;
  Tensor out(t.batch(), t.channels(), h_out, w_out);
  for (std::int64_t n = 0; n < t.batch(); ++n)
    for (std::int64_t c = 0; c < t.channels(); ++c)
      for (std::int64_t oy = 0; oy < h_out; ++oy)
        for (std::int64_t ox = 0; ox < w_out; ++ox) {
          double best = t.at(n, c, oy * stride, ox * stride);
          for (std::int64_t ky = 0; ky < window; ++ky)
            for (std::int64_t kx = 0; kx < window; ++kx)
              best = std::max(best, t.at(n, c, oy * stride + ky, ox * stride + kx));
          out.at(n, c, oy, ox) = best;
        }
  return out;
}

Tensor maxpool2d_backward(const Tensor& input, int window, int stride, const Tensor& upstream) {
  const std::int64_t h_out = (input.height() - window) / stride + 1;
  const std::int64_t w_out = (input.width() - window) / stride + 1;
  if (upstream.shape() != TensorShape{input.batch(), input.channels(), h_out, w_out})
    throw DimensionError("maxpool2d_backward: upstream shape " + upstream.shape().str() +
                         " != pooled shape");
  Tensor grad = Tensor::zeros_like(input);
  for (std::int64_t n = 0; n < input.batch(); ++n)
    for (std::int64_t c = 0; c < input.channels(); ++c)
      for (std::int64_t oy = 0; oy < h_out; ++oy)
        for (std::int64_t ox = 0; ox < w_out; ++ox) {
          // first maximum wins, matching the forward scan order
          std::int64_t by = oy * stride, bx = ox * stride;
          double best = input.at(n, c, by, bx);
          for (std::int64_t ky = 0; ky < window; ++ky)
            for (std::int64_t kx = 0; kx < window; ++kx) {
              const double v = input.at(n, c, oy * stride + ky, ox * stride + kx);
              if (v > best) {
                best = v;
                by = oy * stride + ky;
                bx = ox * stride + kx;
              }
            }
          grad.at(n, c, by, bx) += upstream.at(n, c, oy, ox);
        }
  return grad;
}

namespace {

double plane_sum_checked(std::span<const double> plane) {
  double sum = 0.0;
  for (double v : plane) {
    if (v < 0.0)
      throw DomainError("stochastic pooling: negative activation " + std::to_string(v) +
                        "; pooling probabilities are undefined");
    sum += v;
  }
  return sum;
}

}  // namespace

std::pair<double, std::int64_t> stochastic_pool_sample(std::span<const double> plane, Rng& rng) {
  const double sum = plane_sum_checked(plane);
  if (sum == 0.0) return {0.0, -1};
  const double u = rng.uniform() * sum;
  double acc = 0.0;
  for (std::size_t i = 0; i < plane.size(); ++i) {
    acc += plane[i];
    if (u < acc) return {plane[i], static_cast<std::int64_t>(i)};
  }
  // u can land on the top edge through rounding; take the last nonzero entry
  for (std::size_t i = plane.size(); i-- > 0;)
    if (plane[i] > 0.0) return {plane[i], static_cast<std::int64_t>(i)};
  return {0.0, -1};
}

double stochastic_pool_channel(std::span<const double> plane, Rng& rng, PoolMode mode) {
  if (mode == PoolMode::kTrain) return stochastic_pool_sample(plane, rng).first;
  const double sum = plane_sum_checked(plane);
  if (sum == 0.0) return 0.0;
  double weighted = 0.0;
  for (double v : plane) weighted += v * v;
  return weighted / sum;
}

std::vector<double> fully_connected(std::span<const double> input, const Matrix& weights,
                                    std::span<const double> bias) {
  if (weights.cols != static_cast<std::int64_t>(input.size()))
    throw DimensionError("fully_connected: weight columns " + std::to_string(weights.cols) +
                         " != input length " + std::to_string(input.size()));
  if (!bias.empty() && static_cast<std::int64_t>(bias.size()) != weights.rows)
    throw DimensionError("fully_connected: bias length " + std::to_string(bias.size()) +
                         " != weight rows " + std::to_string(weights.rows));
  std::vector<double> out(static_cast<std::size_t>(weights.rows), 0.0);
  for (std::int64_t r = 0; r < weights.rows; ++r) {
    const double* wr = weights.data.data() + r * weights.cols;
    double acc = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(r)];
    for (std::int64_t c = 0; c < weights.cols; ++c) acc += wr[c] * input[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

FcGrads fully_connected_backward(std::span<const double> input, const Matrix& weights,
                                 std::span<const double> upstream) {
  if (static_cast<std::int64_t>(upstream.size()) != weights.rows)
    throw DimensionError("fully_connected_backward: upstream length " +
                         std::to_string(upstream.size()) + " != weight rows " +
                         std::to_string(weights.rows));
  FcGrads g;
  g.input_grad.assign(input.size(), 0.0);
  g.weight_grad = Matrix(weights.rows, weights.cols);
  g.bias_grad.assign(upstream.begin(), upstream.end());
  for (std::int64_t r = 0; r < weights.rows; ++r) {
    const double up = upstream[static_cast<std::size_t>(r)];
    const double* wr = weights.data.data() + r * weights.cols;
    double* dwr = g.weight_grad.data.data() + r * weights.cols;
    for (std::int64_t c = 0; c < weights.cols; ++c) {
      dwr[c] = up * input[static_cast<std::size_t>(c)];
      g.input_grad[static_cast<std::size_t>(c)] += up * wr[c];
    }
  }
  return g;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.batch() != b.batch() || a.height() != b.height() || a.width() != b.width())
    throw DimensionError("concat_channels: batch/spatial axes differ: " + a.shape().str() +
                         " vs " + b.shape().str());
  Tensor out(a.batch(), a.channels() + b.channels(), a.height(), a.width());
  const std::int64_t plane = a.height() * a.width();
  for (std::int64_t n = 0; n < a.batch(); ++n) {
    double* dst = out.data() + n * out.channels() * plane;
    std::copy_n(a.data() + n * a.channels() * plane, a.channels() * plane, dst);
    std::copy_n(b.data() + n * b.channels() * plane, b.channels() * plane,
                dst + a.channels() * plane);
  }
  return out;
}

Tensor slice_channels(const Tensor& t, std::int64_t begin, std::int64_t end) {
  if (begin < 0 || end < begin || end > t.channels())
    throw IndexError("slice_channels: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of bounds for " + std::to_string(t.channels()) + " channels");
  Tensor out(t.batch(), end - begin, t.height(), t.width());
  const std::int64_t plane = t.height() * t.width();
  for (std::int64_t n = 0; n < t.batch(); ++n)
    std::copy_n(t.data() + (n * t.channels() + begin) * plane, (end - begin) * plane,
                out.data() + n * out.channels() * plane);
  return out;
}

std::pair<Tensor, Tensor> concat_channels_backward(std::int64_t c_first, const Tensor& upstream) {
  return {slice_channels(upstream, 0, c_first),
          slice_channels(upstream, c_first, upstream.channels())};
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

ScalarLoss softmax_cross_entropy(std::span<const double> logits, std::int64_t label) {
  if (logits.empty()) throw DimensionError("softmax_cross_entropy: empty logits");
  if (label < 0 || label >= static_cast<std::int64_t>(logits.size()))
    throw IndexError("softmax_cross_entropy: label " + std::to_string(label) +
                     " out of range for " + std::to_string(logits.size()) + " classes");
  ScalarLoss result;
  result.grad = softmax(logits);
  const double p = result.grad[static_cast<std::size_t>(label)];
  result.loss = -std::log(std::max(p, 1e-300));
  result.grad[static_cast<std::size_t>(label)] -= 1.0;
  return result;
}

ScalarLoss smooth_l1(std::span<const double> pred, std::span<const double> target, double delta) {
  if (pred.size() != target.size())
    throw DimensionError("smooth_l1: length mismatch " + std::to_string(pred.size()) + " vs " +
                         std::to_string(target.size()));
  if (delta <= 0.0) throw ConfigError("smooth_l1: transition point must be positive");
  ScalarLoss result;
  result.grad.assign(pred.size(), 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double x = pred[i] - target[i];
    if (std::abs(x) < delta) {
      result.loss += 0.5 * x * x / delta;
      result.grad[i] = x / delta;
    } else {
      result.loss += std::abs(x) - 0.5 * delta;
      result.grad[i] = x > 0.0 ? 1.0 : -1.0;
    }
  }
  return result;
}

}  // namespace lffn
