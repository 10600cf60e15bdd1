#include "plasma_spike/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace plasma_spike {
namespace {

std::uint64_t to_little(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(x);
  return x;
}

}  // namespace

std::string field_header(int resolution, double mu) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "plasma-field v1 res=%d mu=%.17g\n", resolution, mu);
  return buf;
}

void write_field(const std::string& path, const GridField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const std::string header = field_header(field.grid->n(), field.mu);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (Eigen::Index i = 0; i < field.values.size(); ++i) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(field.values(i)));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

GridField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header;
  std::getline(in, header);
  int res = 0;
  double mu = 0.0;
  if (std::sscanf(header.c_str(), "plasma-field v1 res=%d mu=%lg", &res, &mu) != 2) {
    throw std::runtime_error("bad field header in " + path);
  }
  GridField field = zero_field(build_grid(res), mu);
  for (Eigen::Index i = 0; i < field.values.size(); ++i) {
    std::uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw std::runtime_error("truncated field dump " + path);
    field.values(i) = std::bit_cast<double>(to_little(bits));
  }
  if (in.peek() != std::ifstream::traits_type::eof()) throw std::runtime_error("trailing bytes in field dump " + path);
  return field;
}

}  // namespace plasma_spike
