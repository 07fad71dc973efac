#include "tenkit/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace tenkit {
namespace {

constexpr char kTensorMagic[8] = {'D', 'T', 'E', 'N', '0', '0', '0', '1'};
constexpr char kModelMagic[8] = {'D', 'M', 'O', 'D', '0', '0', '0', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

std::uint64_t get_u64(std::istream& is) {
  char buf[8];
  is.read(buf, 8);
  if (!is) throw std::runtime_error("unexpected end of file while reading u64");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, const double* vals, std::size_t n) {
  static_assert(sizeof(double) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(vals), static_cast<std::streamsize>(8 * n));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, &vals[i], 8);
      put_u64(os, bits);
    }
  }
}

void get_f64(std::istream& is, double* vals, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(vals), static_cast<std::streamsize>(8 * n));
    if (!is) throw std::runtime_error("unexpected end of file while reading float64 data");
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t bits = get_u64(is);
      std::memcpy(&vals[i], &bits, 8);
    }
  }
}

void check_magic(std::istream& is, const char (&magic)[8], const char* what) {
  char buf[8];
  is.read(buf, 8);
  if (!is || std::memcmp(buf, magic, 8) != 0)
    throw std::runtime_error(std::string("not a ") + what + " file (bad magic)");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string() + " for reading");
  return is;
}

}  // namespace

void write_tensor(std::ostream& os, const DenseTensor& t) {
  os.write(kTensorMagic, 8);
  put_u64(os, t.order());
  for (std::uint64_t d : t.dims()) put_u64(os, d);
  put_f64(os, t.data(), t.numel());
  if (!os) throw std::runtime_error("tensor write failed");
}

void write_tensor(const std::filesystem::path& path, const DenseTensor& t) {
  auto os = open_out(path);
  write_tensor(os, t);
}

DenseTensor read_tensor(std::istream& is) {
  check_magic(is, kTensorMagic, "DTEN0001 tensor");
  const std::uint64_t n = get_u64(is);
  if (n == 0 || n > 64) throw std::runtime_error("tensor mode count out of range");
  std::vector<std::uint64_t> dims(n);
  for (auto& d : dims) d = get_u64(is);
  const std::uint64_t numel = checked_numel(dims);
  std::vector<double> data(numel);
  get_f64(is, data.data(), numel);
  return DenseTensor(std::move(dims), std::move(data));
}

DenseTensor read_tensor(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_tensor(is);
}

void write_model(std::ostream& os, const KruskalModel& m) {
  os.write(kModelMagic, 8);
  put_u64(os, m.order());
  put_u64(os, m.rank());
  for (const auto& f : m.factors) {
    put_u64(os, f.rows());
    put_f64(os, f.data(), f.size());
  }
  put_f64(os, m.lambda.data(), m.lambda.size());
  if (!os) throw std::runtime_error("model write failed");
}

void write_model(const std::filesystem::path& path, const KruskalModel& m) {
  auto os = open_out(path);
  write_model(os, m);
}

KruskalModel read_model(std::istream& is) {
  check_magic(is, kModelMagic, "DMOD0001 model");
  const std::uint64_t n = get_u64(is);
  const std::uint64_t r = get_u64(is);
  if (n == 0 || n > 64) throw std::runtime_error("model mode count out of range");
  KruskalModel m;
  m.factors.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::uint64_t rows = get_u64(is);
    std::vector<double> data(rows * r);
    get_f64(is, data.data(), data.size());
    m.factors.emplace_back(rows, r, std::move(data));
  }
  m.lambda.resize(r);
  get_f64(is, m.lambda.data(), r);
  return m;
}

KruskalModel read_model(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_model(is);
}

}  // namespace tenkit
