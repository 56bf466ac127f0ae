#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lffn/kernels.hpp"
#include "lffn/layers.hpp"
#include "lffn/params.hpp"
#include "lffn/tensor.hpp"

namespace lffn {

enum class MergeMode { kConcat, kAdd };

MergeMode parse_merge_mode(const std::string& s);
std::string merge_mode_name(MergeMode m);

// Bottom-up backbone outputs, coarsest last. Spatial dims must halve level
// to level.
struct PyramidInputs {
  Tensor c2, c3, c4, c5;

  std::array<const Tensor*, 4> levels() const { return {&c2, &c3, &c4, &c5}; }
  void validate() const;
};

struct PyramidOutputs {
  Tensor p2, p3, p4, p5, p6;

  std::array<const Tensor*, 5> levels() const { return {&p2, &p3, &p4, &p5, &p6}; }
  std::array<Tensor*, 5> levels() { return {&p2, &p3, &p4, &p5, &p6}; }
};

struct FusionConfig {
  std::int64_t output_channels = 256;
  // top-down channel budget per merge step, ordered P4-merge down to P2-merge;
  // strictly decreasing in concat mode (the layer-weakening schedule)
  std::vector<std::int64_t> topdown_channel_schedule = {128, 64, 32};
  bool post_merge_smoothing = true;
  std::int64_t p5_channels = 256;
  MergeMode merge_mode = MergeMode::kConcat;

  void validate() const;
};

struct FusionMergeParams {
  DeconvParams topdown_upsample;  // x2 spatial
  ConvParams topdown_compress;    // 1x1 down to the schedule entry
  ConvParams lateral;             // 1x1 on the bottom-up map
  ConvParams smooth;              // 3x3 pad 1, used when post_merge_smoothing
};

struct FusionParams {
  ConvParams p5_lateral;                  // 1x1 C5 -> p5_channels
  std::vector<FusionMergeParams> merges;  // P4-merge, P3-merge, P2-merge

  void validate(const FusionConfig& config) const;
};

FusionParams make_fusion_params(const std::array<std::int64_t, 4>& input_channels,
                                const FusionConfig& config, Rng& rng);

// ReLU(conv1x1(ReLU(deconv(x)))): doubles the spatial dims, compresses the
// channel count to the compress layer's output width.
Tensor expand_compress(const Tensor& x, const DeconvParams& upsample, const ConvParams& compress);

// concat(conv1x1(bottom_up), top_down) along channels (or elementwise add).
Tensor lateral_merge(const Tensor& bottom_up, const Tensor& top_down, const ConvParams& lateral,
                     MergeMode mode = MergeMode::kConcat);

// Full top-down pass: P5 from a 1x1 on C5, P4..P2 by expand_compress +
// lateral_merge (+ optional 3x3 smoothing), P6 = maxpool(P5, 1, 2).
PyramidOutputs build_pyramid(const PyramidInputs& inputs, const FusionParams& params,
                             const FusionConfig& config);

// Trainable counterpart of build_pyramid.
class FusionModule {
 public:
  FusionModule() = default;
  FusionModule(FusionParams params, FusionConfig config);
  FusionModule(const std::array<std::int64_t, 4>& input_channels, const FusionConfig& config,
               Rng& rng);

  PyramidOutputs forward(const PyramidInputs& inputs);
  // returns gradients wrt the pyramid inputs; parameter gradients accumulate
  PyramidInputs backward(const PyramidOutputs& upstream);

  const FusionConfig& config() const { return config_; }

  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out);

 private:
  struct MergeStep {
    Deconv2dLayer upsample;
    Conv2dLayer compress;
    Conv2dLayer lateral;
    Conv2dLayer smooth;
    // caches for backward
    Tensor upsample_pre, relu1, compress_pre;
    std::int64_t lateral_channels = 0;
  };

  FusionConfig config_;
  Conv2dLayer p5_lateral_;
  std::vector<MergeStep> steps_;
  Tensor p5_cache_;
};

}  // namespace lffn
