#include "lffn/fusion.hpp"

#include <algorithm>

#include "lffn/errors.hpp"

namespace lffn {

MergeMode parse_merge_mode(const std::string& s) {
  if (s == "concat") return MergeMode::kConcat;
  if (s == "add") return MergeMode::kAdd;
  throw ConfigError("unknown merge mode '" + s + "' (expected concat or add)");
}

std::string merge_mode_name(MergeMode m) {
  return m == MergeMode::kConcat ? "concat" : "add";
}

void PyramidInputs::validate() const {
  const auto lv = levels();
  static const char* names[] = {"C2", "C3", "C4", "C5"};
  for (int i = 0; i < 4; ++i) {
    if (lv[i]->batch() < 1 || lv[i]->channels() < 1 || lv[i]->height() < 1 || lv[i]->width() < 1)
      throw ConfigError(std::string("pyramid input ") + names[i] + " has empty shape " +
                        lv[i]->shape().str());
  }
  for (int i = 1; i < 4; ++i) {
    if (lv[i]->batch() != lv[0]->batch())
      throw ConfigError(std::string("pyramid input ") + names[i] + " batch differs from C2");
    if (lv[i]->height() * 2 != lv[i - 1]->height() || lv[i]->width() * 2 != lv[i - 1]->width())
      throw ConfigError(std::string("pyramid input ") + names[i] + " " + lv[i]->shape().str() +
                        " is not half the spatial size of " + names[i - 1] + " " +
                        lv[i - 1]->shape().str());
  }
}

void FusionConfig::validate() const {
  if (output_channels < 1) throw ConfigError("fusion: output_channels must be >= 1");
  if (topdown_channel_schedule.size() != 3)
    throw ConfigError("fusion: schedule needs one entry per merge step (3 for a C2-C5 backbone), got " +
                      std::to_string(topdown_channel_schedule.size()));
  if (p5_channels != output_channels)
    throw ConfigError("fusion: p5_channels " + std::to_string(p5_channels) +
                      " must equal output_channels " + std::to_string(output_channels) +
                      " so every pyramid level has the same width");
  if (merge_mode == MergeMode::kConcat) {
    std::int64_t prev = output_channels;
    for (std::size_t i = 0; i < topdown_channel_schedule.size(); ++i) {
      const std::int64_t entry = topdown_channel_schedule[i];
      if (entry < 1 || entry >= output_channels)
        throw ConfigError("fusion: schedule entry " + std::to_string(entry) +
                          " must lie in [1, output_channels)");
      if (entry >= prev)
        throw ConfigError("fusion: schedule must strictly decrease toward lower levels, got " +
                          std::to_string(prev) + " then " + std::to_string(entry));
      prev = entry;
    }
  } else {
    for (const std::int64_t entry : topdown_channel_schedule)
      if (entry != output_channels)
        throw ConfigError("fusion: add mode requires every schedule entry to equal output_channels");
  }
}

void FusionParams::validate(const FusionConfig& config) const {
  config.validate();
  if (p5_lateral.out_channels() != config.p5_channels)
    throw ConfigError("fusion: P5 conv produces " + std::to_string(p5_lateral.out_channels()) +
                      " channels, config wants " + std::to_string(config.p5_channels));
  if (merges.size() != config.topdown_channel_schedule.size())
    throw ConfigError("fusion: " + std::to_string(merges.size()) + " merge steps for a schedule of " +
                      std::to_string(config.topdown_channel_schedule.size()));
  for (std::size_t i = 0; i < merges.size(); ++i) {
    const auto& m = merges[i];
    const std::int64_t scheduled = config.topdown_channel_schedule[i];
    const std::string level = "P" + std::to_string(4 - static_cast<int>(i)) + "-merge";
    if (m.topdown_compress.out_channels() != scheduled)
      throw ConfigError("fusion " + level + ": compress to " +
                        std::to_string(m.topdown_compress.out_channels()) + " != schedule entry " +
                        std::to_string(scheduled));
    const std::int64_t expect_lateral =
        config.merge_mode == MergeMode::kConcat ? config.output_channels - scheduled
                                                : config.output_channels;
    if (m.lateral.out_channels() != expect_lateral)
      throw ConfigError("fusion " + level + ": lateral channels " +
                        std::to_string(m.lateral.out_channels()) + " + top-down " +
                        std::to_string(scheduled) + " must give " +
                        std::to_string(config.output_channels));
    if (m.topdown_upsample.stride != 2)
      throw ConfigError("fusion " + level + ": upsample stride must be 2");
  }
}

FusionParams make_fusion_params(const std::array<std::int64_t, 4>& input_channels,
                                const FusionConfig& config, Rng& rng) {
  config.validate();
  FusionParams params;
  params.p5_lateral = make_conv(input_channels[3], config.p5_channels, 1, 1, 0, 1, &rng);
  const std::int64_t bottoms[3] = {input_channels[2], input_channels[1], input_channels[0]};
  for (std::size_t i = 0; i < config.topdown_channel_schedule.size(); ++i) {
    const std::int64_t scheduled = config.topdown_channel_schedule[i];
    const std::int64_t lateral_out = config.merge_mode == MergeMode::kConcat
                                         ? config.output_channels - scheduled
                                         : config.output_channels;
    FusionMergeParams m;
    m.topdown_upsample = make_deconv(config.output_channels, config.output_channels, 4, 2, 1, &rng);
    m.topdown_compress = make_conv(config.output_channels, scheduled, 1, 1, 0, 1, &rng);
    m.lateral = make_conv(bottoms[i], lateral_out, 1, 1, 0, 1, &rng);
    m.smooth = make_conv(config.output_channels, config.output_channels, 3, 1, 1, 1,
                         config.post_merge_smoothing ? &rng : nullptr);
    params.merges.push_back(std::move(m));
  }
  return params;
}

Tensor expand_compress(const Tensor& x, const DeconvParams& upsample, const ConvParams& compress) {
  if (compress.kernel_h() != 1 || compress.kernel_w() != 1)
    throw ConfigError("expand_compress: compression kernel must be 1x1");
  Tensor up = relu(deconv2d(x, upsample));
  if (up.height() != 2 * x.height() || up.width() != 2 * x.width())
    throw ConfigError("expand_compress: upsample configuration does not double the spatial dims");
  return relu(conv2d(up, compress));
}

Tensor lateral_merge(const Tensor& bottom_up, const Tensor& top_down, const ConvParams& lateral,
                     MergeMode mode) {
  if (bottom_up.height() != top_down.height() || bottom_up.width() != top_down.width())
    throw DimensionError("lateral_merge: bottom-up " + bottom_up.shape().str() +
                         " and top-down " + top_down.shape().str() +
                         " spatial axes differ (malformed pyramid)");
  Tensor lat = conv2d(bottom_up, lateral);
  if (mode == MergeMode::kConcat) return concat_channels(lat, top_down);
  if (lat.shape() != top_down.shape())
    throw DimensionError("lateral_merge: add mode needs matching shapes, got " + lat.shape().str() +
                         " vs " + top_down.shape().str());
  Tensor out = lat;
  const double* td = top_down.data();
  double* dst = out.data();
  for (std::int64_t i = 0; i < out.size(); ++i) dst[i] += td[i];
  return out;
}

PyramidOutputs build_pyramid(const PyramidInputs& inputs, const FusionParams& params,
                             const FusionConfig& config) {
  FusionModule module(params, config);
  return module.forward(inputs);
}

FusionModule::FusionModule(FusionParams params, FusionConfig config) : config_(std::move(config)) {
  params.validate(config_);
  p5_lateral_ = Conv2dLayer(std::move(params.p5_lateral));
  for (auto& m : params.merges) {
    MergeStep step;
    step.upsample = Deconv2dLayer(std::move(m.topdown_upsample));
    step.compress = Conv2dLayer(std::move(m.topdown_compress));
    step.lateral = Conv2dLayer(std::move(m.lateral));
    step.smooth = Conv2dLayer(std::move(m.smooth));
    step.lateral_channels = step.lateral.params().out_channels();
    steps_.push_back(std::move(step));
  }
}

FusionModule::FusionModule(const std::array<std::int64_t, 4>& input_channels,
                           const FusionConfig& config, Rng& rng)
    : FusionModule(make_fusion_params(input_channels, config, rng), config) {}

PyramidOutputs FusionModule::forward(const PyramidInputs& inputs) {
  inputs.validate();
  PyramidOutputs out;
  out.p5 = p5_lateral_.forward(inputs.c5);
  p5_cache_ = out.p5;

  const Tensor* bottoms[3] = {&inputs.c4, &inputs.c3, &inputs.c2};
  Tensor* merged_out[3] = {&out.p4, &out.p3, &out.p2};
  const Tensor* topdown = &out.p5;
  Tensor carried;  // merged map feeding the next step down
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    MergeStep& step = steps_[i];
    step.upsample_pre = step.upsample.forward(*topdown);
    step.relu1 = relu(step.upsample_pre);
    step.compress_pre = step.compress.forward(step.relu1);
    Tensor z = relu(step.compress_pre);

    Tensor lat = step.lateral.forward(*bottoms[i]);
    if (lat.height() != z.height() || lat.width() != z.width())
      throw DimensionError("fusion P" + std::to_string(4 - static_cast<int>(i)) +
                           "-merge: lateral " + lat.shape().str() + " vs top-down " +
                           z.shape().str() + " spatial mismatch");
    Tensor merged;
    if (config_.merge_mode == MergeMode::kConcat) {
      merged = concat_channels(lat, z);
    } else {
      merged = std::move(lat);
      const double* zp = z.data();
      double* mp = merged.data();
      for (std::int64_t k = 0; k < merged.size(); ++k) mp[k] += zp[k];
    }
    *merged_out[i] = config_.post_merge_smoothing ? step.smooth.forward(merged) : merged;
    carried = std::move(merged);
    topdown = &carried;
  }
  out.p6 = maxpool2d(out.p5, 1, 2);
  return out;
}

PyramidInputs FusionModule::backward(const PyramidOutputs& upstream) {
  PyramidInputs grads;
  Tensor dp5 = upstream.p5;
  {
    Tensor from_p6 = maxpool2d_backward(p5_cache_, 1, 2, upstream.p6);
    double* d = dp5.data();
    const double* s = from_p6.data();
    for (std::int64_t i = 0; i < dp5.size(); ++i) d[i] += s[i];
  }

  const Tensor* level_upstream[3] = {&upstream.p4, &upstream.p3, &upstream.p2};
  Tensor* bottom_grads[3] = {&grads.c4, &grads.c3, &grads.c2};
  Tensor carried_down;  // gradient wrt the merged map, flowing up the chain
  for (std::size_t ri = steps_.size(); ri-- > 0;) {
    MergeStep& step = steps_[ri];
    Tensor dmerged =
        config_.post_merge_smoothing ? step.smooth.backward(*level_upstream[ri]) : *level_upstream[ri];
    if (ri + 1 < steps_.size()) {
      // the step below consumed this merged map through its upsampler
      const double* s = carried_down.data();
      double* d = dmerged.data();
      for (std::int64_t i = 0; i < dmerged.size(); ++i) d[i] += s[i];
    }

    Tensor dlat, dz;
    if (config_.merge_mode == MergeMode::kConcat) {
      auto split = concat_channels_backward(step.lateral_channels, dmerged);
      dlat = std::move(split.first);
      dz = std::move(split.second);
    } else {
      dlat = dmerged;
      dz = std::move(dmerged);
    }
    *bottom_grads[ri] = step.lateral.backward(dlat);

    Tensor dcompress_pre = relu_backward(step.compress_pre, dz);
    Tensor drelu1 = step.compress.backward(dcompress_pre);
    Tensor dupsample_pre = relu_backward(step.upsample_pre, drelu1);
    Tensor dtopdown = step.upsample.backward(dupsample_pre);
    if (ri == 0) {
      double* d = dp5.data();
      const double* s = dtopdown.data();
      for (std::int64_t i = 0; i < dp5.size(); ++i) d[i] += s[i];
    } else {
      carried_down = std::move(dtopdown);
    }
  }
  grads.c5 = p5_lateral_.backward(dp5);
  return grads;
}

void FusionModule::zero_grad() {
  p5_lateral_.zero_grad();
  for (auto& step : steps_) {
    step.upsample.zero_grad();
    step.compress.zero_grad();
    step.lateral.zero_grad();
    step.smooth.zero_grad();
  }
}

void FusionModule::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  p5_lateral_.collect_params(prefix + ".p5_lateral", out);
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const std::string level = prefix + ".merge" + std::to_string(4 - static_cast<int>(i));
    steps_[i].upsample.collect_params(level + ".upsample", out);
    steps_[i].compress.collect_params(level + ".compress", out);
    steps_[i].lateral.collect_params(level + ".lateral", out);
    if (config_.post_merge_smoothing) steps_[i].smooth.collect_params(level + ".smooth", out);
  }
}

}  // namespace lffn
