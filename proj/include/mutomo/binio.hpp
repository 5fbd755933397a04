#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "mutomo/core.hpp"

// Little-endian, fixed-layout primitives shared by the dataset and
// checkpoint formats.
namespace mutomo::binio {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void get_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
        throw FormatError("unexpected end of file");
}

template <typename U>
void put_le(std::ostream& os, U value) {
    unsigned char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i)
        buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
    put_bytes(os, buf, sizeof(U));
}

template <typename U>
U get_le(std::istream& is) {
    unsigned char buf[sizeof(U)];
    get_bytes(is, buf, sizeof(U));
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(buf[i]) << (8 * i);
    return value;
}

inline void put_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_le<std::uint32_t>(os, bits);
}

inline float get_f32(std::istream& is) {
    const std::uint32_t bits = get_le<std::uint32_t>(is);
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

inline void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_le<std::uint64_t>(os, bits);
}

inline double get_f64(std::istream& is) {
    const std::uint64_t bits = get_le<std::uint64_t>(is);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

inline void put_string(std::ostream& os, const std::string& s) {
    put_le<std::uint16_t>(os, static_cast<std::uint16_t>(s.size()));
    put_bytes(os, s.data(), s.size());
}

inline std::string get_string(std::istream& is) {
    const std::uint16_t n = get_le<std::uint16_t>(is);
    std::string s(n, '\0');
    if (n) get_bytes(is, s.data(), n);
    return s;
}

inline void expect_magic(std::istream& is, const char (&magic)[5], const char* what) {
    char buf[4];
    get_bytes(is, buf, 4);
    if (std::memcmp(buf, magic, 4) != 0)
        throw FormatError(std::string(what) + ": bad magic");
}

}  // namespace mutomo::binio
