#ifndef ALABAMA_RATIONAL_HPP
#define ALABAMA_RATIONAL_HPP

// Exact arithmetic helpers on top of GMP.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace alabama {

using u128 = unsigned __int128;

inline mpz_class to_mpz(std::uint64_t v)
{
    mpz_class z;
    mpz_import(z.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
    return z;
}

inline mpz_class to_mpz(u128 v)
{
    const std::uint64_t limbs[2] = {static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(v >> 64)};
    mpz_class z;
    mpz_import(z.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, limbs);
    return z;
}

inline mpq_class make_fraction(const mpz_class& num, const mpz_class& den)
{
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

inline mpz_class binomial(unsigned long n, unsigned long k)
{
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

inline mpz_class factorial(unsigned long n)
{
    mpz_class r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

/// Rising factorial m(m+1)...(m+k-1); 1 for k = 0.
inline mpz_class rising_factorial(unsigned long m, unsigned long k)
{
    mpz_class r = 1;
    for (unsigned long j = 0; j < k; ++j)
        r *= m + j;
    return r;
}

/// "p/q" or "p" when the denominator is 1.
inline std::string to_string(const mpq_class& q)
{
    return q.get_str();
}

/// Parses "12", "-3/4", "0.45" or "1e-3" into an exact fraction. Decimal strings
/// become fractions with a power-of-ten denominator.
inline mpq_class parse_exact(const std::string& text)
{
    if (text.empty())
        throw std::invalid_argument("empty number");
    if (text.find('/') != std::string::npos) {
        mpq_class q;
        if (q.set_str(text, 10) != 0 || q.get_den() == 0)
            throw std::invalid_argument("malformed fraction '" + text + "'");
        q.canonicalize();
        return q;
    }
    std::string mantissa = text;
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string::npos) {
        mantissa = text.substr(0, e);
        try {
            std::size_t used = 0;
            exponent = std::stol(text.substr(e + 1), &used);
            if (used != text.size() - e - 1)
                throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed exponent in '" + text + "'");
        }
    }
    bool negative = false;
    std::size_t pos = 0;
    if (pos < mantissa.size() && (mantissa[pos] == '+' || mantissa[pos] == '-'))
        negative = mantissa[pos++] == '-';
    std::string digits;
    bool seen_point = false;
    bool seen_digit = false;
    for (; pos < mantissa.size(); ++pos) {
        const char c = mantissa[pos];
        if (c >= '0' && c <= '9') {
            digits.push_back(c);
            seen_digit = true;
            if (seen_point)
                --exponent;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            throw std::invalid_argument("malformed number '" + text + "'");
        }
    }
    if (!seen_digit)
        throw std::invalid_argument("malformed number '" + text + "'");
    mpz_class num(digits, 10);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    mpq_class q = exponent < 0 ? mpq_class(num, scale) : mpq_class(num * scale, 1);
    q.canonicalize();
    return negative ? mpq_class(-q) : q;
}

} // namespace alabama

#endif
