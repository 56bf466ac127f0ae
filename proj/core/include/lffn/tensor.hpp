#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lffn/rng.hpp"

namespace lffn {

struct TensorShape {
  std::int64_t n = 0, c = 0, h = 0, w = 0;

  std::int64_t size() const { return n * c * h * w; }
  bool operator==(const TensorShape&) const = default;
  std::string str() const;
};

// Dense rank-4 array (batch, channel, height, width), row-major, f64.
// Zero-sized dimensions are permitted only for degenerate values such as
// an empty channel slice; kernels validate the dimensions they need.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w);
  explicit Tensor(TensorShape shape);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const TensorShape& shape() const { return shape_; }
  std::int64_t batch() const { return shape_.n; }
  std::int64_t channels() const { return shape_.c; }
  std::int64_t height() const { return shape_.h; }
  std::int64_t width() const { return shape_.w; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<double> flat() { return {data_.data(), data_.size()}; }
  std::span<const double> flat() const { return {data_.data(), data_.size()}; }

  double& at(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) {
    return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }
  double at(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) const {
    return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }

  // contiguous (h*w) plane of one channel
  std::span<double> plane(std::int64_t n, std::int64_t c) {
    return {data_.data() + (n * shape_.c + c) * shape_.h * shape_.w,
            static_cast<std::size_t>(shape_.h * shape_.w)};
  }
  std::span<const double> plane(std::int64_t n, std::int64_t c) const {
    return {data_.data() + (n * shape_.c + c) * shape_.h * shape_.w,
            static_cast<std::size_t>(shape_.h * shape_.w)};
  }

  void fill(double value);
  bool operator==(const Tensor& other) const = default;

 private:
  TensorShape shape_;
  std::vector<double> data_;
};

// row-major (rows x cols)
struct Matrix {
  std::int64_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::int64_t r, std::int64_t c) : rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0.0) {}

  double& at(std::int64_t r, std::int64_t c) { return data[r * cols + c]; }
  double at(std::int64_t r, std::int64_t c) const { return data[r * cols + c]; }

  bool operator==(const Matrix&) const = default;
};

void fill_uniform(std::span<double> v, Rng& rng, double lo, double hi);
void fill_normal(std::span<double> v, Rng& rng, double mean, double stddev);
// Kaiming-style init for layers with the given fan-in
void fill_kaiming(std::span<double> v, Rng& rng, std::int64_t fan_in);

// Flat binary tensor container: magic "LFFT", u32 format version,
// 4 x u64 shape, little-endian f64 data.
void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is, const std::string& origin = "<stream>");
void save_tensor(const std::string& path, const Tensor& t);
Tensor load_tensor(const std::string& path);

}  // namespace lffn
