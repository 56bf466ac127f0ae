#include "lffn/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include "lffn/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor container I/O assumes a little-endian host");

namespace lffn {

std::string TensorShape::str() const {
  std::ostringstream os;
  os << "(" << n << ", " << c << ", " << h << ", " << w << ")";
  return os.str();
}

Tensor::Tensor(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w)
    : Tensor(TensorShape{n, c, h, w}) {}

Tensor::Tensor(TensorShape shape) : shape_(shape) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0)
    throw DimensionError("Tensor: negative dimension in shape " + shape.str());
  data_.assign(static_cast<std::size_t>(shape.size()), 0.0);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void fill_uniform(std::span<double> v, Rng& rng, double lo, double hi) {
  for (double& x : v) x = rng.uniform(lo, hi);
}

void fill_normal(std::span<double> v, Rng& rng, double mean, double stddev) {
  for (double& x : v) x = rng.normal(mean, stddev);
}

void fill_kaiming(std::span<double> v, Rng& rng, std::int64_t fan_in) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(std::max<std::int64_t>(fan_in, 1)));
  fill_normal(v, rng, 0.0, stddev);
}

namespace {

constexpr char kTensorMagic[4] = {'L', 'F', 'F', 'T'};
constexpr std::uint32_t kTensorVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& origin) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw DataError("truncated tensor container: " + origin);
  return value;
}

}  // namespace

void write_tensor(std::ostream& os, const Tensor& t) {
  os.write(kTensorMagic, 4);
  write_pod<std::uint32_t>(os, kTensorVersion);
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(t.batch()));
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(t.channels()));
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(t.height()));
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(t.width()));
  os.write(reinterpret_cast<const char*>(t.data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
}

Tensor read_tensor(std::istream& is, const std::string& origin) {
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kTensorMagic, 4) != 0)
    throw DataError("not a tensor container (bad magic): " + origin);
  const auto version = read_pod<std::uint32_t>(is, origin);
  if (version != kTensorVersion)
    throw DataError("unsupported tensor container version " + std::to_string(version) + ": " + origin);
  TensorShape shape;
  shape.n = static_cast<std::int64_t>(read_pod<std::uint64_t>(is, origin));
  shape.c = static_cast<std::int64_t>(read_pod<std::uint64_t>(is, origin));
  shape.h = static_cast<std::int64_t>(read_pod<std::uint64_t>(is, origin));
  shape.w = static_cast<std::int64_t>(read_pod<std::uint64_t>(is, origin));
  Tensor t(shape);
  is.read(reinterpret_cast<char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!is) throw DataError("truncated tensor container: " + origin);
  return t;
}

void save_tensor(const std::string& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path);
  write_tensor(os, t);
  if (!os) throw DataError("write failed: " + path);
}

Tensor load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path);
  return read_tensor(is, path);
}

}  // namespace lffn
