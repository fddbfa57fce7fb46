#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace specrob {

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws std::invalid_argument on characters outside the alphabet or bad padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Little-endian float32 packing used on the external model wire.
std::string encode_f32le(std::span<const double> values);
std::vector<double> decode_f32le(std::string_view text);

}  // namespace specrob
