#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "mvn/tensor.hpp"

namespace mvn {

// MVNT binary tensor container, little-endian throughout:
//   "MVNT" | u32 version (=1) | u32 dtype | u32 rank | rank x u64 dims | payload
// dtype codes: 1 = float64, 2 = float32, 3 = uint8. Payload is row-major.
enum class MvntDtype : uint32_t { f64 = 1, f32 = 2, u8 = 3 };

inline constexpr uint32_t kMvntVersion = 1;

std::string mvnt_encode(const Tensor& t);
std::string mvnt_encode(const TensorF& t);
std::string mvnt_encode(const TensorU8& t);

using AnyTensor = std::variant<Tensor, TensorF, TensorU8>;

// Throws std::runtime_error on bad magic, unknown version/dtype, or
// payload-length mismatch (including trailing bytes).
AnyTensor mvnt_decode(std::string_view bytes);

void write_mvnt(const std::string& path, const Tensor& t);
void write_mvnt(const std::string& path, const TensorF& t);
void write_mvnt(const std::string& path, const TensorU8& t);

AnyTensor read_mvnt(const std::string& path);

// Convenience readers that additionally check the stored dtype.
Tensor read_mvnt_f64(const std::string& path);
TensorF read_mvnt_f32(const std::string& path);
TensorU8 read_mvnt_u8(const std::string& path);

}  // namespace mvn
