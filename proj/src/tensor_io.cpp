#include "mvn/tensor_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mvn {
namespace {

constexpr char kMagic[4] = {'M', 'V', 'N', 'T'};

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(std::string_view s, size_t off) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(s[off + i])) << (8 * i);
  return v;
}

uint64_t get_u64(std::string_view s, size_t off) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(s[off + i])) << (8 * i);
  return v;
}

template <typename Scalar>
std::string encode_impl(const TensorT<Scalar>& t, MvntDtype dtype) {
  std::string out;
  const size_t payload = static_cast<size_t>(t.size()) * sizeof(Scalar);
  out.reserve(16 + 8 * static_cast<size_t>(t.rank()) + payload);
  out.append(kMagic, 4);
  put_u32(out, kMvntVersion);
  put_u32(out, static_cast<uint32_t>(dtype));
  put_u32(out, static_cast<uint32_t>(t.rank()));
  for (const Index d : t.shape()) put_u64(out, static_cast<uint64_t>(d));
  // Little-endian host assumed for the raw payload copy; dimension fields are
  // written byte-wise so the header stays portable either way.
  const size_t head = out.size();
  out.resize(head + payload);
  if (payload > 0) std::memcpy(out.data() + head, t.data(), payload);
  return out;
}

template <typename Scalar>
TensorT<Scalar> decode_payload(std::string_view bytes, size_t off, std::vector<Index> shape) {
  const Index n = TensorT<Scalar>::checked_size(shape);
  const size_t payload = static_cast<size_t>(n) * sizeof(Scalar);
  if (bytes.size() - off != payload) {
    throw std::runtime_error("MVNT: payload length mismatch (expected " +
                             std::to_string(payload) + " bytes, found " +
                             std::to_string(bytes.size() - off) + ")");
  }
  std::vector<Scalar> data(static_cast<size_t>(n));
  if (payload > 0) std::memcpy(data.data(), bytes.data() + off, payload);
  return TensorT<Scalar>(std::move(shape), std::move(data));
}

}  // namespace

std::string mvnt_encode(const Tensor& t) { return encode_impl(t, MvntDtype::f64); }
std::string mvnt_encode(const TensorF& t) { return encode_impl(t, MvntDtype::f32); }
std::string mvnt_encode(const TensorU8& t) { return encode_impl(t, MvntDtype::u8); }

AnyTensor mvnt_decode(std::string_view bytes) {
  if (bytes.size() < 16) throw std::runtime_error("MVNT: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw std::runtime_error("MVNT: bad magic");
  const uint32_t version = get_u32(bytes, 4);
  if (version != kMvntVersion) {
    throw std::runtime_error("MVNT: unsupported version " + std::to_string(version));
  }
  const uint32_t dtype = get_u32(bytes, 8);
  const uint32_t rank = get_u32(bytes, 12);
  if (rank > 16) throw std::runtime_error("MVNT: implausible rank " + std::to_string(rank));
  const size_t dims_end = 16 + 8 * static_cast<size_t>(rank);
  if (bytes.size() < dims_end) throw std::runtime_error("MVNT: truncated dimension list");
  std::vector<Index> shape(rank);
  for (uint32_t i = 0; i < rank; ++i) {
    const uint64_t d = get_u64(bytes, 16 + 8 * static_cast<size_t>(i));
    if (d > static_cast<uint64_t>(1) << 40) {
      throw std::runtime_error("MVNT: implausible dimension " + std::to_string(d));
    }
    shape[i] = static_cast<Index>(d);
  }
  switch (static_cast<MvntDtype>(dtype)) {
    case MvntDtype::f64:
      return decode_payload<double>(bytes, dims_end, std::move(shape));
    case MvntDtype::f32:
      return decode_payload<float>(bytes, dims_end, std::move(shape));
    case MvntDtype::u8:
      return decode_payload<uint8_t>(bytes, dims_end, std::move(shape));
  }
  throw std::runtime_error("MVNT: unknown dtype code " + std::to_string(dtype));
}

namespace {

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace

void write_mvnt(const std::string& path, const Tensor& t) { write_bytes(path, mvnt_encode(t)); }
void write_mvnt(const std::string& path, const TensorF& t) { write_bytes(path, mvnt_encode(t)); }
void write_mvnt(const std::string& path, const TensorU8& t) { write_bytes(path, mvnt_encode(t)); }

AnyTensor read_mvnt(const std::string& path) { return mvnt_decode(read_bytes(path)); }

Tensor read_mvnt_f64(const std::string& path) {
  AnyTensor t = read_mvnt(path);
  if (!std::holds_alternative<Tensor>(t)) throw std::runtime_error("MVNT: expected float64 in " + path);
  return std::get<Tensor>(std::move(t));
}

TensorF read_mvnt_f32(const std::string& path) {
  AnyTensor t = read_mvnt(path);
  if (!std::holds_alternative<TensorF>(t)) throw std::runtime_error("MVNT: expected float32 in " + path);
  return std::get<TensorF>(std::move(t));
}

TensorU8 read_mvnt_u8(const std::string& path) {
  AnyTensor t = read_mvnt(path);
  if (!std::holds_alternative<TensorU8>(t)) throw std::runtime_error("MVNT: expected uint8 in " + path);
  return std::get<TensorU8>(std::move(t));
}

}  // namespace mvn
