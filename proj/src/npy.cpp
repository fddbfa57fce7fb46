#include "specrob/npy.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <regex>
#include <stdexcept>

namespace specrob {

static_assert(std::endian::native == std::endian::little, "npy io assumes a little-endian host");

std::size_t NpyArray::count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

namespace {

std::size_t item_size(const std::string& dtype) {
  if (dtype == "<f8" || dtype == "<i8") return 8;
  if (dtype == "<f4" || dtype == "<i4") return 4;
  if (dtype == "|u1") return 1;
  throw std::runtime_error("unsupported npy dtype '" + dtype + "'");
}

template <class T>
void decode(const std::vector<char>& raw, std::vector<double>& out) {
  const std::size_t n = raw.size() / sizeof(T);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    T v;
    std::memcpy(&v, raw.data() + i * sizeof(T), sizeof(T));
    out[i] = static_cast<double>(v);
  }
}

template <class T>
void encode(const std::vector<double>& in, std::vector<char>& raw) {
  raw.resize(in.size() * sizeof(T));
  for (std::size_t i = 0; i < in.size(); ++i) {
    const T v = static_cast<T>(in[i]);
    std::memcpy(raw.data() + i * sizeof(T), &v, sizeof(T));
  }
}

}  // namespace

NpyArray read_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "\x93NUMPY", 6) != 0) throw std::runtime_error(path.string() + ": not an npy file");
  const int major = static_cast<unsigned char>(magic[6]);
  std::size_t header_len = 0;
  if (major == 1) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    header_len = b[0] | (b[1] << 8);
  } else if (major == 2 || major == 3) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    header_len = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::size_t>(b[3]) << 24);
  } else {
    throw std::runtime_error(path.string() + ": unsupported npy version");
  }
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error(path.string() + ": truncated header");

  std::smatch m;
  NpyArray a;
  if (!std::regex_search(header, m, std::regex(R"('descr'\s*:\s*'([^']+)')")))
    throw std::runtime_error(path.string() + ": header lacks descr");
  a.dtype = m[1];
  if (a.dtype == "<u1" || a.dtype == "u1") a.dtype = "|u1";
  if (std::regex_search(header, m, std::regex(R"('fortran_order'\s*:\s*True)")))
    throw std::runtime_error(path.string() + ": fortran order is not supported");
  if (!std::regex_search(header, m, std::regex(R"('shape'\s*:\s*\(([^)]*)\))")))
    throw std::runtime_error(path.string() + ": header lacks shape");
  const std::string dims = m[1];
  static const std::regex digits(R"(\d+)");
  for (std::sregex_iterator it(dims.begin(), dims.end(), digits), end; it != end; ++it)
    a.shape.push_back(std::stoull(it->str()));

  const std::size_t bytes = a.count() * item_size(a.dtype);
  std::vector<char> raw(bytes);
  in.read(raw.data(), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) throw std::runtime_error(path.string() + ": truncated data");
  if (a.dtype == "<f8") decode<double>(raw, a.values);
  else if (a.dtype == "<f4") decode<float>(raw, a.values);
  else if (a.dtype == "<i8") decode<std::int64_t>(raw, a.values);
  else if (a.dtype == "<i4") decode<std::int32_t>(raw, a.values);
  else decode<std::uint8_t>(raw, a.values);
  return a;
}

void write_npy(const std::filesystem::path& path, const NpyArray& a) {
  const std::size_t isz = item_size(a.dtype);
  if (a.values.size() != a.count()) throw std::invalid_argument("npy values do not match shape");
  std::string shape = "(";
  for (std::size_t i = 0; i < a.shape.size(); ++i) {
    shape += std::to_string(a.shape[i]);
    shape += (a.shape.size() == 1 || i + 1 < a.shape.size()) ? "," : "";
    if (i + 1 < a.shape.size()) shape += " ";
  }
  shape += ")";
  std::string header = "{'descr': '" + a.dtype + "', 'fortran_order': False, 'shape': " + shape + ", }";
  const std::size_t total = 10 + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header += '\n';

  std::vector<char> raw;
  if (a.dtype == "<f8") encode<double>(a.values, raw);
  else if (a.dtype == "<f4") encode<float>(a.values, raw);
  else if (a.dtype == "<i8") encode<std::int64_t>(a.values, raw);
  else if (a.dtype == "<i4") encode<std::int32_t>(a.values, raw);
  else encode<std::uint8_t>(a.values, raw);
  (void)isz;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write("\x93NUMPY\x01\x00", 8);
  const char len[2] = {static_cast<char>(header.size() & 0xff), static_cast<char>(header.size() >> 8)};
  out.write(len, 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace specrob
