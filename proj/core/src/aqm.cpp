#include "lffn/aqm.hpp"

#include <algorithm>
#include <cmath>

#include "lffn/errors.hpp"

namespace lffn {

AqmParams make_aqm_params(std::int64_t channels, PoolMode mode) {
  AqmParams p;
  p.w_fc = Matrix(channels, channels);
  p.mode = mode;
  return p;
}

std::pair<Tensor, GateVector> aqm_forward(const Tensor& y, const AqmParams& params, Rng& rng) {
  AqmModule module(params);
  return module.forward(y, rng);
}

AqmModule::AqmModule(std::int64_t channels, PoolMode mode)
    : AqmModule(make_aqm_params(channels, mode)) {}

AqmModule::AqmModule(AqmParams params) : params_(std::move(params)) {
  if (params_.w_fc.rows != params_.w_fc.cols)
    throw ConfigError("aqm: w_fc must be square, got " + std::to_string(params_.w_fc.rows) + "x" +
                      std::to_string(params_.w_fc.cols));
  zero_grad();
}

std::pair<Tensor, GateVector> AqmModule::forward(const Tensor& y, Rng& rng) {
  const std::int64_t c = y.channels();
  if (c != params_.w_fc.rows)
    throw DimensionError("aqm: input channel axis " + std::to_string(c) + " != w_fc side " +
                         std::to_string(params_.w_fc.rows));
  input_ = y;
  const std::int64_t n_batch = y.batch();
  pooled_.assign(static_cast<std::size_t>(n_batch * c), 0.0);
  gates_.assign(static_cast<std::size_t>(n_batch * c), 0.0);
  sampled_.assign(static_cast<std::size_t>(n_batch * c), -1);
  plane_sum_.assign(static_cast<std::size_t>(n_batch * c), 0.0);
  plane_sq_sum_.assign(static_cast<std::size_t>(n_batch * c), 0.0);

  Tensor out = Tensor::zeros_like(y);
  GateVector gv;
  gv.batch = n_batch;
  gv.channels = c;
  gv.values.resize(static_cast<std::size_t>(n_batch * c));

  for (std::int64_t n = 0; n < n_batch; ++n) {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const auto plane = y.plane(n, ch);
      double s1 = 0.0, s2 = 0.0;
      for (double v : plane) {
        if (v < 0.0)
          throw DomainError("aqm: negative activation " + std::to_string(v) + " in channel " +
                            std::to_string(ch) + "; apply a ReLU before gating");
        s1 += v;
        s2 += v * v;
      }
      const std::size_t idx = static_cast<std::size_t>(n * c + ch);
      plane_sum_[idx] = s1;
      plane_sq_sum_[idx] = s2;
      if (params_.mode == PoolMode::kTrain) {
        auto [value, sample] = stochastic_pool_sample(plane, rng);
        pooled_[idx] = value;
        sampled_[idx] = sample;
      } else {
        pooled_[idx] = s1 > 0.0 ? s2 / s1 : 0.0;
      }
    }
    // F = W_FC P, G = sigmoid(F)
    const std::span<const double> p_row{pooled_.data() + n * c, static_cast<std::size_t>(c)};
    std::vector<double> f = fully_connected(p_row, params_.w_fc, {});
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const double g = sigmoid_scalar(f[static_cast<std::size_t>(ch)]);
      gates_[static_cast<std::size_t>(n * c + ch)] = g;
      gv.values[static_cast<std::size_t>(n * c + ch)] = g;
      const auto src = y.plane(n, ch);
      auto dst = out.plane(n, ch);
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = g * src[i];
    }
  }
  return {std::move(out), std::move(gv)};
}

Tensor AqmModule::backward(const Tensor& upstream) {
  if (upstream.shape() != input_.shape())
    throw DimensionError("aqm backward: upstream shape " + upstream.shape().str() +
                         " != cached input shape " + input_.shape().str());
  const std::int64_t c = params_.w_fc.rows;
  const std::int64_t n_batch = input_.batch();
  Tensor dy = Tensor::zeros_like(input_);

  std::vector<double> dgate(static_cast<std::size_t>(c));
  std::vector<double> df(static_cast<std::size_t>(c));
  for (std::int64_t n = 0; n < n_batch; ++n) {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const auto up = upstream.plane(n, ch);
      const auto in = input_.plane(n, ch);
      const double g = gates_[static_cast<std::size_t>(n * c + ch)];
      double acc = 0.0;
      for (std::size_t i = 0; i < up.size(); ++i) acc += up[i] * in[i];
      dgate[static_cast<std::size_t>(ch)] = acc;
      df[static_cast<std::size_t>(ch)] = acc * g * (1.0 - g);
      // direct multiplicand path
      auto dyp = dy.plane(n, ch);
      for (std::size_t i = 0; i < up.size(); ++i) dyp[i] += g * up[i];
    }
    // dW += df P^T ; dP = W^T df
    const double* p_row = pooled_.data() + n * c;
    for (std::int64_t r = 0; r < c; ++r) {
      const double d = df[static_cast<std::size_t>(r)];
      double* wg = w_grad_.data.data() + r * c;
      for (std::int64_t col = 0; col < c; ++col) wg[col] += d * p_row[col];
    }
    for (std::int64_t ch = 0; ch < c; ++ch) {
      double dp = 0.0;
      for (std::int64_t r = 0; r < c; ++r)
        dp += params_.w_fc.at(r, ch) * df[static_cast<std::size_t>(r)];
      const std::size_t idx = static_cast<std::size_t>(n * c + ch);
      auto dyp = dy.plane(n, ch);
      if (params_.mode == PoolMode::kTrain) {
        if (sampled_[idx] >= 0) dyp[static_cast<std::size_t>(sampled_[idx])] += dp;
      } else {
        const double s1 = plane_sum_[idx], s2 = plane_sq_sum_[idx];
        if (s1 > 0.0) {
          const auto in = input_.plane(n, ch);
          for (std::size_t i = 0; i < in.size(); ++i)
            dyp[i] += dp * (2.0 * in[i] * s1 - s2) / (s1 * s1);
        }
      }
    }
  }
  return dy;
}

void AqmModule::zero_grad() { w_grad_ = Matrix(params_.w_fc.rows, params_.w_fc.cols); }

void AqmModule::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".w_fc", {params_.w_fc.data.data(), params_.w_fc.data.size()},
                 {w_grad_.data.data(), w_grad_.data.size()}});
}

SeBlockParams make_se_params(std::int64_t channels, std::int64_t reduction, Rng* rng) {
  if (reduction < 1 || channels % reduction != 0)
    throw ConfigError("se block: channels " + std::to_string(channels) +
                      " not divisible by reduction " + std::to_string(reduction));
  SeBlockParams p;
  p.reduction = reduction;
  p.fc_reduce = Matrix(channels / reduction, channels);
  p.fc_expand = Matrix(channels, channels / reduction);
  if (rng) {
    fill_kaiming({p.fc_reduce.data.data(), p.fc_reduce.data.size()}, *rng, channels);
    fill_kaiming({p.fc_expand.data.data(), p.fc_expand.data.size()}, *rng, channels / reduction);
  }
  return p;
}

Tensor se_block(const Tensor& y, const SeBlockParams& params) {
  SeBlockModule module(params);
  return module.forward(y);
}

SeBlockModule::SeBlockModule(std::int64_t channels, std::int64_t reduction, Rng* rng)
    : SeBlockModule(make_se_params(channels, reduction, rng)) {}

SeBlockModule::SeBlockModule(SeBlockParams params) : params_(std::move(params)) {
  if (params_.fc_reduce.cols != params_.fc_expand.rows)
    throw ConfigError("se block: fc shapes disagree on the channel count");
  zero_grad();
}

Tensor SeBlockModule::forward(const Tensor& y) {
  const std::int64_t c = params_.fc_expand.rows;
  if (y.channels() != c)
    throw DimensionError("se block: input channel axis " + std::to_string(y.channels()) +
                         " != parameter channels " + std::to_string(c));
  if (y.batch() != 1)
    throw DimensionError("se block: batch size must be 1, got " + std::to_string(y.batch()));
  input_ = y;
  const double plane_size = static_cast<double>(y.height() * y.width());

  squeezed_.assign(static_cast<std::size_t>(c), 0.0);
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const auto plane = y.plane(0, ch);
    double acc = 0.0;
    for (double v : plane) acc += v;
    squeezed_[static_cast<std::size_t>(ch)] = acc / plane_size;
  }
  hidden_pre_ = fully_connected(squeezed_, params_.fc_reduce, {});
  hidden_ = hidden_pre_;
  for (double& v : hidden_) v = v > 0.0 ? v : 0.0;
  gates_ = fully_connected(hidden_, params_.fc_expand, {});
  for (double& v : gates_) v = sigmoid_scalar(v);

  Tensor out = Tensor::zeros_like(y);
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const double g = gates_[static_cast<std::size_t>(ch)];
    const auto src = y.plane(0, ch);
    auto dst = out.plane(0, ch);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = g * src[i];
  }
  return out;
}

Tensor SeBlockModule::backward(const Tensor& upstream) {
  const std::int64_t c = params_.fc_expand.rows;
  const double plane_size = static_cast<double>(input_.height() * input_.width());
  Tensor dy = Tensor::zeros_like(input_);

  std::vector<double> dgate(static_cast<std::size_t>(c), 0.0);
  for (std::int64_t ch = 0; ch < c; ++ch) {
    const auto up = upstream.plane(0, ch);
    const auto in = input_.plane(0, ch);
    const double g = gates_[static_cast<std::size_t>(ch)];
    double acc = 0.0;
    for (std::size_t i = 0; i < up.size(); ++i) acc += up[i] * in[i];
    dgate[static_cast<std::size_t>(ch)] = acc * g * (1.0 - g);  // through the sigmoid
    auto dyp = dy.plane(0, ch);
    for (std::size_t i = 0; i < up.size(); ++i) dyp[i] += g * up[i];
  }

  auto expand_grads = fully_connected_backward(hidden_, params_.fc_expand, dgate);
  for (std::size_t i = 0; i < expand_grad_.data.size(); ++i)
    expand_grad_.data[i] += expand_grads.weight_grad.data[i];
  std::vector<double> dhidden = std::move(expand_grads.input_grad);
  for (std::size_t i = 0; i < dhidden.size(); ++i)
    if (hidden_pre_[i] <= 0.0) dhidden[i] = 0.0;
  auto reduce_grads = fully_connected_backward(squeezed_, params_.fc_reduce, dhidden);
  for (std::size_t i = 0; i < reduce_grad_.data.size(); ++i)
    reduce_grad_.data[i] += reduce_grads.weight_grad.data[i];

  for (std::int64_t ch = 0; ch < c; ++ch) {
    const double ds = reduce_grads.input_grad[static_cast<std::size_t>(ch)] / plane_size;
    auto dyp = dy.plane(0, ch);
    for (std::size_t i = 0; i < dyp.size(); ++i) dyp[i] += ds;
  }
  return dy;
}

void SeBlockModule::zero_grad() {
  reduce_grad_ = Matrix(params_.fc_reduce.rows, params_.fc_reduce.cols);
  expand_grad_ = Matrix(params_.fc_expand.rows, params_.fc_expand.cols);
}

void SeBlockModule::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".fc_reduce", {params_.fc_reduce.data.data(), params_.fc_reduce.data.size()},
                 {reduce_grad_.data.data(), reduce_grad_.data.size()}});
  out.push_back({prefix + ".fc_expand", {params_.fc_expand.data.data(), params_.fc_expand.data.size()},
                 {expand_grad_.data.data(), expand_grad_.data.size()}});
}

}  // namespace lffn
