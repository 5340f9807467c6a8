#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "phasebench/grid.hpp"

namespace phasebench {

// PHM1 layout: "PHM1", u8 dtype, u32le width, u32le height, row-major
// little-endian payload.
enum class PhmType : std::uint8_t
{
    Real = 0,    // float64
    Counts = 1,  // uint32
    Complex = 2, // complex128, real part first
};

struct PhmHeader
{
    PhmType type;
    GridShape shape;
};

inline constexpr std::size_t kPhmHeaderBytes = 13;
inline constexpr std::size_t kMaxCsvSide = 64;

namespace detail {

template <typename G>
struct PhmTraits;

template <>
struct PhmTraits<IntensityMap>
{
    static constexpr PhmType type = PhmType::Real;
};
template <>
struct PhmTraits<PhaseMap>
{
    static constexpr PhmType type = PhmType::Real;
};
template <>
struct PhmTraits<CountFrame>
{
    static constexpr PhmType type = PhmType::Counts;
};
template <>
struct PhmTraits<ComplexField>
{
    static constexpr PhmType type = PhmType::Complex;
};

std::vector<std::uint8_t> encode_header(PhmType type, const GridShape& shape);
void append_payload(std::vector<std::uint8_t>& out, std::span<const double> values);
void append_payload(std::vector<std::uint8_t>& out, std::span<const std::uint32_t> values);
void append_payload(std::vector<std::uint8_t>& out, std::span<const Complex> values);
void decode_payload(std::span<const std::uint8_t> bytes, std::span<double> values);
void decode_payload(std::span<const std::uint8_t> bytes, std::span<std::uint32_t> values);
void decode_payload(std::span<const std::uint8_t> bytes, std::span<Complex> values);

} // namespace detail

PhmHeader decode_phm_header(std::span<const std::uint8_t> bytes);

template <typename G>
std::vector<std::uint8_t> encode_phm(const G& grid)
{
    auto out = detail::encode_header(detail::PhmTraits<G>::type, grid.shape());
    detail::append_payload(out, grid.values());
    return out;
}

template <typename G>
G decode_phm(std::span<const std::uint8_t> bytes)
{
    const PhmHeader header = decode_phm_header(bytes);
    if (header.type != detail::PhmTraits<G>::type)
        throw IoError("PHM1 dtype " + std::to_string(static_cast<int>(header.type)) +
                      " does not match the requested grid kind");
    G grid(header.shape);
    detail::decode_payload(bytes.subspan(kPhmHeaderBytes), grid.values());
    return grid;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

PhmHeader read_phm_header(const std::filesystem::path& path);

template <typename G>
void write_phm(const std::filesystem::path& path, const G& grid)
{
    write_file_bytes(path, encode_phm(grid));
}

template <typename G>
G read_phm(const std::filesystem::path& path)
{
    return decode_phm<G>(read_file_bytes(path));
}

/// Reads a real (dtype 0) or count (dtype 1) grid as intensities.
IntensityMap read_phm_intensity(const std::filesystem::path& path);

/// CSV text, one line per grid row. Only grids up to 64x64 are exported.
std::string to_csv(const IntensityMap& grid);
std::string to_csv(const PhaseMap& grid);
std::string to_csv(const CountFrame& grid);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

} // namespace phasebench
