#pragma once

// File formats.
//
// fvecs / ivecs: per record a 4-byte little-endian signed dimension, then d
// little-endian 4-byte payload values (IEEE-754 f32 / int32). All records
// must share d.
//
// NVQ1 container, little-endian:
//   magic "NVQ1" (4B) | version u16 | d u32 | n u64 | m u16 | beta u8 |
//   family u8 | partition_seed u64 | mean d*f32 | permutation d*u32 |
//   n records, each: m * (x_min f32, x_max f32, p1 f32, p2 f32, flags u8)
//   followed by ceil(d*beta/8) packed code bytes.
// flags bit 0: the subvector decodes through the uniform map (fit fell back
// or the slice is constant).

#include <cstdint>
#include <string>
#include <vector>

#include "nvq/codec.hpp"
#include "nvq/types.hpp"

namespace nvq {

struct IntMatrix {
    std::uint32_t d = 0;
    std::vector<std::int32_t> values;
    std::size_t rows() const { return d == 0 ? 0 : values.size() / d; }
    const std::int32_t* row_ptr(std::size_t i) const { return values.data() + i * d; }
};

FloatMatrix read_fvecs(const std::string& path);
void write_fvecs(const std::string& path, const FloatMatrix& data);

IntMatrix read_ivecs(const std::string& path);
void write_ivecs(const std::string& path, const IntMatrix& data);

void write_nvq_file(const std::string& path, const EncodedDataset& enc);
EncodedDataset read_nvq_file(const std::string& path);

// Closed-form container size in bytes.
std::uint64_t nvq_file_size(std::uint32_t d, std::uint64_t n, std::uint16_t m,
                            int beta);

}  // namespace nvq
