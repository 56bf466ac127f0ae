#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lffn/kernels.hpp"
#include "lffn/layers.hpp"
#include "lffn/params.hpp"
#include "lffn/tensor.hpp"

namespace lffn {

// Adaptive quantization parameters: a full C x C linear map applied to the
// per-channel stochastic-pooling vector. No bias.
struct AqmParams {
  Matrix w_fc;
  PoolMode mode = PoolMode::kEval;
};

// assumes square w_fc; zero init keeps the gates at a neutral 0.5
AqmParams make_aqm_params(std::int64_t channels, PoolMode mode = PoolMode::kEval);

// sigmoid outputs per channel, one row per batch element
struct GateVector {
  std::int64_t batch = 0;
  std::int64_t channels = 0;
  std::vector<double> values;

  double at(std::int64_t n, std::int64_t c) const { return values[n * channels + c]; }
};

// Per channel: stochastic-pool the (nonnegative) plane, map the pooled vector
// through w_fc, gate with a sigmoid, and rescale the channel by its gate.
std::pair<Tensor, GateVector> aqm_forward(const Tensor& y, const AqmParams& params, Rng& rng);

class AqmModule {
 public:
  AqmModule() = default;
  AqmModule(std::int64_t channels, PoolMode mode);
  explicit AqmModule(AqmParams params);

  std::pair<Tensor, GateVector> forward(const Tensor& y, Rng& rng);
  // Eval mode differentiates the weighted-average pooling exactly; train mode
  // routes the pooling gradient through the sampled element (straight-through).
  Tensor backward(const Tensor& upstream);

  const AqmParams& params() const { return params_; }
  void set_mode(PoolMode mode) { params_.mode = mode; }

  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

 private:
  AqmParams params_;
  Matrix w_grad_;
  // caches
  Tensor input_;
  std::vector<double> pooled_;          // P, batch-major
  std::vector<double> gates_;           // G
  std::vector<std::int64_t> sampled_;   // train-mode indices, -1 for zero planes
  std::vector<double> plane_sum_, plane_sq_sum_;
};

struct SeBlockParams {
  std::int64_t reduction = 16;
  Matrix fc_reduce;  // C -> C/r
  Matrix fc_expand;  // C/r -> C
};

SeBlockParams make_se_params(std::int64_t channels, std::int64_t reduction, Rng* rng = nullptr);

// global average pool -> FC -> ReLU -> FC -> sigmoid -> channelwise scale
Tensor se_block(const Tensor& y, const SeBlockParams& params);

class SeBlockModule {
 public:
  SeBlockModule() = default;
  SeBlockModule(std::int64_t channels, std::int64_t reduction, Rng* rng = nullptr);
  explicit SeBlockModule(SeBlockParams params);

  Tensor forward(const Tensor& y);
  Tensor backward(const Tensor& upstream);

  const SeBlockParams& params() const { return params_; }

  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

 private:
  SeBlockParams params_;
  Matrix reduce_grad_, expand_grad_;
  Tensor input_;
  std::vector<double> squeezed_, hidden_pre_, hidden_, gates_;
};

}  // namespace lffn
