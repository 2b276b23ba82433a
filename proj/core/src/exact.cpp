#include "hyperwalk/exact.hpp"

#include "hyperwalk/errors.hpp"

#include <boost/multiprecision/integer.hpp>

#include <cctype>
#include <cmath>
#include <limits>

namespace hyperwalk {

namespace {

BigInt pow10(int e) {
    BigInt r = 1;
    for (int i = 0; i < e; ++i) r *= 10;
    return r;
}

Rational parse_decimal(std::string_view s) {
    const std::string original(s);
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    BigInt digits = 0;
    int scale = 0;
    bool seen_digit = false;
    bool seen_dot = false;
    std::size_t i = 0;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits = digits * 10 + (c - '0');
            if (seen_dot) ++scale;
            seen_digit = true;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!seen_digit) throw InvalidInput("not a number: '" + original + "'");
    long exponent = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') throw InvalidInput("not a number: '" + original + "'");
        const std::string tail(s.substr(i + 1));
        std::size_t used = 0;
        try {
            exponent = std::stol(tail, &used);
        } catch (const std::exception&) {
            throw InvalidInput("not a number: '" + original + "'");
        }
        if (used != tail.size() || std::labs(exponent) > 400)
            throw InvalidInput("not a number: '" + original + "'");
    }
    const long net = exponent - scale;
    Rational r = net >= 0 ? Rational(digits * pow10(static_cast<int>(net)))
                          : Rational(digits, pow10(static_cast<int>(-net)));
    return negative ? Rational(-r) : r;
}

} // namespace

Rational parse_rational(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) return parse_decimal(text);
    const Rational num = parse_decimal(text.substr(0, slash));
    const Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw InvalidInput("zero denominator in '" + std::string(text) + "'");
    return num / den;
}

Rational rational_from_double(double value) {
    if (!std::isfinite(value)) throw InvalidInput("non-finite weight");
    if (value == 0.0) return Rational(0);
    int exp = 0;
    const double mant = std::frexp(value, &exp);
    // mant * 2^53 is an exact integer.
    const auto m = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    BigInt num = m;
    BigInt den = 1;
    if (exp > 0)
        num <<= exp;
    else
        den <<= -exp;
    return Rational(num, den);
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::string to_string(const Rational& value) {
    return boost::multiprecision::denominator(value) == 1
               ? boost::multiprecision::numerator(value).str()
               : value.str();
}

ScaledWeights ScaledWeights::from(const std::vector<Rational>& weights) {
    ScaledWeights out;
    BigInt lcm = 1;
    for (const auto& w : weights) lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(w));
    out.denominator = lcm;
    for (const auto& w : weights)
        out.numerators.push_back(boost::multiprecision::numerator(w) * (lcm / boost::multiprecision::denominator(w)));
    return out;
}

} // namespace hyperwalk
