// Copyright Contributors to the EgoScene Project
// SPDX-License-Identifier: Apache-2.0

#include "egoscene/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "egoscene/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor container assumes a little-endian host");

namespace egoscene {

namespace {

constexpr char kMagic[4] = {'E', 'G', 'V', '1'};
constexpr std::uint32_t kMaxNdim = 8;

template <typename T>
void write_le(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace

std::size_t Tensor::dtype_size(Dtype d) {
    switch (d) {
        case Dtype::U8: return 1;
        case Dtype::F32: return 4;
        case Dtype::F64: return 8;
    }
    throw ParseError("unknown dtype");
}

std::size_t Tensor::element_count() const {
    std::size_t n = 1;
    for (std::uint64_t d : dims) n *= static_cast<std::size_t>(d);
    return dims.empty() ? 0 : n;
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
    if (t.data.size() != t.element_count() * Tensor::dtype_size(t.dtype))
        throw ShapeMismatchError("tensor payload does not match dims");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kMagic, 4);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.dtype));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (std::uint64_t d : t.dims) write_le<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError("bad magic in " + path.string());
    Tensor t;
    t.dtype = static_cast<Tensor::Dtype>(read_le<std::uint32_t>(in));
    const auto ndim = read_le<std::uint32_t>(in);
    if (!in || ndim == 0 || ndim > kMaxNdim) throw ParseError("bad rank in " + path.string());
    t.dims.resize(ndim);
    for (auto& d : t.dims) d = read_le<std::uint64_t>(in);
    const std::size_t bytes = t.element_count() * Tensor::dtype_size(t.dtype);
    t.data.resize(bytes);
    in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw ParseError("truncated payload in " + path.string());
    return t;
}

namespace {

template <typename T>
Tensor pack(Tensor::Dtype dtype, std::vector<std::uint64_t> dims, const std::vector<T>& values) {
    Tensor t;
    t.dtype = dtype;
    t.dims = std::move(dims);
    if (values.size() != t.element_count())
        throw ShapeMismatchError("value count does not match dims");
    t.data.resize(values.size() * sizeof(T));
    std::memcpy(t.data.data(), values.data(), t.data.size());
    return t;
}

template <typename T>
std::vector<T> unpack(const Tensor& t, Tensor::Dtype expect) {
    if (t.dtype != expect) throw ParseError("unexpected tensor dtype");
    std::vector<T> values(t.element_count());
    std::memcpy(values.data(), t.data.data(), t.data.size());
    return values;
}

}  // namespace

Tensor make_tensor_f32(std::vector<std::uint64_t> dims, const std::vector<float>& values) {
    return pack(Tensor::Dtype::F32, std::move(dims), values);
}
Tensor make_tensor_f64(std::vector<std::uint64_t> dims, const std::vector<double>& values) {
    return pack(Tensor::Dtype::F64, std::move(dims), values);
}
Tensor make_tensor_u8(std::vector<std::uint64_t> dims, const std::vector<std::uint8_t>& values) {
    return pack(Tensor::Dtype::U8, std::move(dims), values);
}

std::vector<float> tensor_as_f32(const Tensor& t) { return unpack<float>(t, Tensor::Dtype::F32); }
std::vector<double> tensor_as_f64(const Tensor& t) { return unpack<double>(t, Tensor::Dtype::F64); }
std::vector<std::uint8_t> tensor_as_u8(const Tensor& t) {
    return unpack<std::uint8_t>(t, Tensor::Dtype::U8);
}

}  // namespace egoscene
