// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace egoscene {

/// Flat binary container for dense arrays: an 8-byte magic/dtype header,
/// little-endian dims, then raw little-endian values, row-major with the
/// last index fastest. Used for volumes, feature grids and full-precision
/// depth maps.
struct Tensor {
    enum class Dtype : std::uint32_t { U8 = 1, F32 = 2, F64 = 3 };

    Dtype dtype = Dtype::U8;
    std::vector<std::uint64_t> dims;
    std::vector<std::uint8_t> data;  // raw little-endian payload

    std::size_t element_count() const;
    static std::size_t dtype_size(Dtype d);
};

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

Tensor make_tensor_f32(std::vector<std::uint64_t> dims, const std::vector<float>& values);
Tensor make_tensor_f64(std::vector<std::uint64_t> dims, const std::vector<double>& values);
Tensor make_tensor_u8(std::vector<std::uint64_t> dims, const std::vector<std::uint8_t>& values);

std::vector<float> tensor_as_f32(const Tensor& t);
std::vector<double> tensor_as_f64(const Tensor& t);
std::vector<std::uint8_t> tensor_as_u8(const Tensor& t);

}  // namespace egoscene
