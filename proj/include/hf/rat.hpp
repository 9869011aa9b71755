#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <string>

namespace hf {

// Exact rational numbers. All valuations in this library are rationals with
// denominator dividing e*kappa, so 64-bit components are far more than enough.
using Rat = boost::rational<std::int64_t>;

inline Rat rat(std::int64_t num, std::int64_t den = 1) { return Rat(num, den); }

inline std::string to_string(const Rat& r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Parses "a/b" or a plain integer "a".
inline Rat rat_from_string(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rat(std::stoll(s));
    return Rat(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

}  // namespace hf
