#include "dynheat/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>

namespace dynheat {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a(std::span<const double> values, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (double v : values) {
        char raw[sizeof(double)];
        std::memcpy(raw, &v, sizeof(double));
        h = fnv1a(std::string_view(raw, sizeof(double)), h);
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

}  // namespace dynheat
