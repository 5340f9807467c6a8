#include "phasebench/phm_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace phasebench {
namespace {

constexpr char kMagic[4] = {'P', 'H', 'M', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p)
{
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p)
{
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | p[i];
    return v;
}

void check_payload(std::span<const std::uint8_t> bytes, std::size_t count, std::size_t width)
{
    if (bytes.size() != count * width)
        throw IoError("PHM1 payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(count * width));
}

template <typename G>
std::string grid_csv(const G& grid)
{
    if (grid.width() > kMaxCsvSide || grid.height() > kMaxCsvSide)
        throw DomainError("CSV export is limited to grids of at most 64x64");
    std::string out;
    for (std::size_t y = 0; y < grid.height(); ++y)
    {
        for (std::size_t x = 0; x < grid.width(); ++x)
        {
            if (x > 0)
                out += ',';
            if constexpr (std::is_same_v<typename G::value_type, double>)
                out += format_double(grid(x, y));
            else
                out += std::to_string(grid(x, y));
        }
        out += '\n';
    }
    return out;
}

} // namespace

namespace detail {

std::vector<std::uint8_t> encode_header(PhmType type, const GridShape& shape)
{
    if (shape.width() > std::numeric_limits<std::uint32_t>::max() ||
        shape.height() > std::numeric_limits<std::uint32_t>::max())
        throw IoError("grid too large for PHM1");
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.push_back(static_cast<std::uint8_t>(type));
    put_u32(out, static_cast<std::uint32_t>(shape.width()));
    put_u32(out, static_cast<std::uint32_t>(shape.height()));
    return out;
}

void append_payload(std::vector<std::uint8_t>& out, std::span<const double> values)
{
    out.reserve(out.size() + values.size() * 8);
    for (double v : values)
        put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void append_payload(std::vector<std::uint8_t>& out, std::span<const std::uint32_t> values)
{
    out.reserve(out.size() + values.size() * 4);
    for (std::uint32_t v : values)
        put_u32(out, v);
}

void append_payload(std::vector<std::uint8_t>& out, std::span<const Complex> values)
{
    out.reserve(out.size() + values.size() * 16);
    for (const Complex& v : values)
    {
        put_u64(out, std::bit_cast<std::uint64_t>(v.real()));
        put_u64(out, std::bit_cast<std::uint64_t>(v.imag()));
    }
}

void decode_payload(std::span<const std::uint8_t> bytes, std::span<double> values)
{
    check_payload(bytes, values.size(), 8);
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = std::bit_cast<double>(get_u64(bytes.data() + 8 * i));
}

void decode_payload(std::span<const std::uint8_t> bytes, std::span<std::uint32_t> values)
{
    check_payload(bytes, values.size(), 4);
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = get_u32(bytes.data() + 4 * i);
}

void decode_payload(std::span<const std::uint8_t> bytes, std::span<Complex> values)
{
    check_payload(bytes, values.size(), 16);
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        const std::uint8_t* p = bytes.data() + 16 * i;
        values[i] = Complex(std::bit_cast<double>(get_u64(p)), std::bit_cast<double>(get_u64(p + 8)));
    }
}

} // namespace detail

PhmHeader decode_phm_header(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kPhmHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw IoError("not a PHM1 grid");
    const std::uint8_t type = bytes[4];
    if (type > 2)
        throw IoError("unknown PHM1 dtype " + std::to_string(type));
    const std::uint32_t width = get_u32(bytes.data() + 5);
    const std::uint32_t height = get_u32(bytes.data() + 9);
    if (width == 0 || height == 0)
        throw IoError("PHM1 grid with zero extent");
    return {static_cast<PhmType>(type), GridShape(width, height)};
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("short write to " + path.string());
}

PhmHeader read_phm_header(const std::filesystem::path& path)
{
    return decode_phm_header(read_file_bytes(path));
}

IntensityMap read_phm_intensity(const std::filesystem::path& path)
{
    const auto bytes = read_file_bytes(path);
    const PhmHeader header = decode_phm_header(bytes);
    switch (header.type)
    {
    case PhmType::Real:
        return decode_phm<IntensityMap>(bytes);
    case PhmType::Counts:
        return to_intensity(decode_phm<CountFrame>(bytes));
    default:
        throw IoError(path.string() + ": expected a real or count grid");
    }
}

std::string to_csv(const IntensityMap& grid) { return grid_csv(grid); }
std::string to_csv(const PhaseMap& grid) { return grid_csv(grid); }
std::string to_csv(const CountFrame& grid) { return grid_csv(grid); }

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace phasebench
