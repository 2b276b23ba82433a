#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hyperwalk {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Accepts "p/q", decimal "0.25", scientific "1e-3" and plain integers.
Rational parse_rational(std::string_view text);

// Exact binary value of a finite double.
Rational rational_from_double(double value);

double to_double(const Rational& value);
std::string to_string(const Rational& value);

// Integer numerators over a common denominator, so exact path sums stay in BigInt.
struct ScaledWeights {
    std::vector<BigInt> numerators;
    BigInt denominator = 1;

    static ScaledWeights from(const std::vector<Rational>& weights);
};

} // namespace hyperwalk
