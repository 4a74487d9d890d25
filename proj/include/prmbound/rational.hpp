#pragma once

// Standard includes
#include <stdexcept>
#include <string>

// Boost
#include <boost/multiprecision/cpp_int.hpp>

namespace prmbound {

using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
                                              boost::multiprecision::et_off>;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) { return r.str(); }

// Parses "3", "-2/7", "0.125", "1e-3" exactly.
inline Rational parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        Rational num = parse_rational(text.substr(0, slash));
        Rational den = parse_rational(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
        return num / den;
    }
    std::string mant = text;
    long exp10 = 0;
    auto epos = text.find_first_of("eE");
    if (epos != std::string::npos) {
        mant = text.substr(0, epos);
        try {
            exp10 = std::stol(text.substr(epos + 1));
        } catch (...) {
            throw std::invalid_argument("bad exponent in '" + text + "'");
        }
    }
    bool neg = false;
    std::size_t i = 0;
    if (i < mant.size() && (mant[i] == '+' || mant[i] == '-')) {
        neg = mant[i] == '-';
        ++i;
    }
    BigInt digits = 0;
    long frac = 0;
    bool seenDot = false, seenDigit = false;
    for (; i < mant.size(); ++i) {
        char c = mant[i];
        if (c == '.') {
            if (seenDot) throw std::invalid_argument("bad number '" + text + "'");
            seenDot = true;
        } else if (c >= '0' && c <= '9') {
            digits = digits * 10 + (c - '0');
            seenDigit = true;
            if (seenDot) ++frac;
        } else {
            throw std::invalid_argument("bad number '" + text + "'");
        }
    }
    if (!seenDigit) throw std::invalid_argument("bad number '" + text + "'");
    long shift = exp10 - frac;
    Rational r(digits);
    BigInt ten = 1;
    for (long k = 0; k < (shift < 0 ? -shift : shift); ++k) ten *= 10;
    if (shift >= 0) r *= Rational(ten);
    else r /= Rational(ten);
    return neg ? -r : r;
}

}  // namespace prmbound
