// Locale-independent CSV number formatting. Doubles are written with the
// shortest representation that round-trips, integers verbatim.

#ifndef KBOOST_CSV_HPP
#define KBOOST_CSV_HPP

#include <charconv>
#include <cstdint>
#include <string>

namespace kboost {

inline std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace kboost

#endif  // KBOOST_CSV_HPP
