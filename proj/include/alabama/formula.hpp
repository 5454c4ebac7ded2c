#ifndef ALABAMA_FORMULA_HPP
#define ALABAMA_FORMULA_HPP

// Asymptotic Alabama paradox probabilities for rationally independent shares.
//
// For state i let I_j ~ Be(|p_i - p_j|) be independent, S+ the sum over the
// states smaller than i and S- the sum over the larger ones. Then
//     q_i = E(S- - S+ - 1)_+ / m.
// Templates accept any field type with +, -, *, / and ordering (double,
// mpq_class). Equal shares give a zero-probability indicator and drop out.

#include "rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace alabama {

using StateIndex = std::size_t;

class TooManyStates : public std::length_error {
public:
    explicit TooManyStates(std::size_t m)
        : std::length_error("brute-force enumeration supports at most 20 states, got " + std::to_string(m))
    {
    }
};

class WrongArity : public std::invalid_argument {
public:
    WrongArity(std::size_t expected, std::size_t got)
        : std::invalid_argument("expected " + std::to_string(expected) + " states, got " + std::to_string(got))
    {
    }
};

template <class T>
struct GapVector {
    StateIndex center = 0;
    std::vector<T> gaps_above; // p_j - p_i for p_j > p_i
    std::vector<T> gaps_below; // p_i - p_j for p_j < p_i
};

template <class T>
GapVector<T> gap_vector(const std::vector<T>& shares, StateIndex i)
{
    if (i >= shares.size())
        throw std::out_of_range("state index out of range");
    GapVector<T> g;
    g.center = i;
    for (StateIndex j = 0; j < shares.size(); ++j) {
        if (shares[j] > shares[i])
            g.gaps_above.push_back(shares[j] - shares[i]);
        else if (shares[j] < shares[i])
            g.gaps_below.push_back(shares[i] - shares[j]);
    }
    return g;
}

/// PMF of a sum of independent Bernoulli variables, by sequential convolution.
template <class T>
std::vector<T> bernoulli_sum_pmf(const std::vector<T>& probabilities)
{
    std::vector<T> pmf(probabilities.size() + 1, T(0));
    pmf[0] = T(1);
    for (std::size_t j = 0; j < probabilities.size(); ++j) {
        const T& p = probabilities[j];
        for (std::size_t k = j + 1; k > 0; --k)
            pmf[k] = pmf[k] * (T(1) - p) + pmf[k - 1] * p;
        pmf[0] = pmf[0] * (T(1) - p);
    }
    return pmf;
}

/// Distribution of D = S- - S+ on [-|gaps_below|, |gaps_above|].
template <class T>
struct SignedCountDistribution {
    std::ptrdiff_t min_value = 0;
    std::vector<T> pmf; // pmf[d - min_value]

    T probability(std::ptrdiff_t d) const
    {
        const auto idx = d - min_value;
        return idx < 0 || idx >= static_cast<std::ptrdiff_t>(pmf.size()) ? T(0) : pmf[static_cast<std::size_t>(idx)];
    }
};

template <class T>
SignedCountDistribution<T> signed_count_distribution(const GapVector<T>& gaps)
{
    const auto minus = bernoulli_sum_pmf(gaps.gaps_above);
    const auto plus = bernoulli_sum_pmf(gaps.gaps_below);
    SignedCountDistribution<T> d;
    d.min_value = -static_cast<std::ptrdiff_t>(gaps.gaps_below.size());
    d.pmf.assign(minus.size() + plus.size() - 1, T(0));
    for (std::size_t u = 0; u < minus.size(); ++u)
        for (std::size_t v = 0; v < plus.size(); ++v)
            d.pmf[u + plus.size() - 1 - v] += minus[u] * plus[v];
    return d;
}

template <class T>
T q_exact_dp(const std::vector<T>& shares, StateIndex i)
{
    const auto gaps = gap_vector(shares, i);
    const auto minus = bernoulli_sum_pmf(gaps.gaps_above);
    const auto plus = bernoulli_sum_pmf(gaps.gaps_below);
    T expectation(0);
    for (std::size_t u = 2; u < minus.size(); ++u) {
        T weight(0);
        for (std::size_t v = 0; v + 1 < u && v < plus.size(); ++v)
            weight += plus[v] * T(static_cast<long>(u - v - 1));
        expectation += minus[u] * weight;
    }
    return expectation / T(static_cast<long>(shares.size()));
}

/// e_0..e_n of the given values via the triangular recurrence.
template <class T>
std::vector<T> elementary_symmetric(const std::vector<T>& values)
{
    std::vector<T> e(values.size() + 1, T(0));
    e[0] = T(1);
    for (std::size_t j = 0; j < values.size(); ++j)
        for (std::size_t k = j + 1; k > 0; --k)
            e[k] += values[j] * e[k - 1];
    return e;
}

/// Same probability through the alternating sum of products of elementary
/// symmetric polynomials in the gaps to larger and to smaller states.
template <class T>
T q_exact_esp(const std::vector<T>& shares, StateIndex i)
{
    const auto gaps = gap_vector(shares, i);
    const auto above = elementary_symmetric(gaps.gaps_above);
    const auto below = elementary_symmetric(gaps.gaps_below);
    const std::size_t larger = gaps.gaps_above.size();
    const std::size_t smaller = gaps.gaps_below.size();
    if (larger < 2)
        return T(0);

    // binom[a][b] = C(a, b) for a up to larger + smaller - 2
    const std::size_t top = larger + smaller;
    std::vector<std::vector<T>> binom(top + 1);
    for (std::size_t a = 0; a <= top; ++a) {
        binom[a].assign(a + 1, T(1));
        for (std::size_t b = 1; b < a; ++b)
            binom[a][b] = binom[a - 1][b - 1] + binom[a - 1][b];
    }

    T sum(0);
    for (std::size_t s = 0; s <= smaller; ++s) {
        for (std::size_t k = 2; k <= larger; ++k) {
            T term = binom[s + k - 2][s] * above[k] * below[s];
            if ((s + k) % 2)
                sum -= term;
            else
                sum += term;
        }
    }
    return sum / T(static_cast<long>(shares.size()));
}

/// Independent oracle: exhaustive enumeration of all 2^(m-1) indicator outcomes.
template <class T>
T q_bruteforce(const std::vector<T>& shares, StateIndex i)
{
    const std::size_t m = shares.size();
    if (m > 20)
        throw TooManyStates(m);
    if (i >= m)
        throw std::out_of_range("state index out of range");
    std::vector<T> prob;
    std::vector<int> sign; // +1 larger state (counts toward S-), -1 smaller
    for (StateIndex j = 0; j < m; ++j) {
        if (j == i)
            continue;
        if (shares[j] > shares[i]) {
            prob.push_back(shares[j] - shares[i]);
            sign.push_back(1);
        } else {
            prob.push_back(shares[i] - shares[j]);
            sign.push_back(-1);
        }
    }
    T expectation(0);
    const std::uint32_t outcomes = std::uint32_t{1} << prob.size();
    for (std::uint32_t mask = 0; mask < outcomes; ++mask) {
        long d = -1;
        for (std::size_t b = 0; b < prob.size(); ++b)
            if (mask >> b & 1U)
                d += sign[b];
        if (d <= 0)
            continue;
        T p(1);
        for (std::size_t b = 0; b < prob.size(); ++b)
            p *= (mask >> b & 1U) ? prob[b] : T(1) - prob[b];
        expectation += p * T(d);
    }
    return expectation / T(static_cast<long>(m));
}

/// Probability for the smallest state: (1/m) prod_j (1 - (p_j - p_min)) - p_min.
template <class T>
T q_largest_closed_form(const std::vector<T>& shares)
{
    if (shares.empty())
        throw std::invalid_argument("no shares");
    const auto smallest = static_cast<StateIndex>(std::min_element(shares.begin(), shares.end()) - shares.begin());
    T product(1);
    for (StateIndex j = 0; j < shares.size(); ++j)
        if (j != smallest)
            product *= T(1) - (shares[j] - shares[smallest]);
    return product / T(static_cast<long>(shares.size())) - shares[smallest];
}

struct ProbabilityBounds {
    double lower = 0;
    double upper = 0;
};

/// lower <= q_i < upper < 1/(m e).
inline ProbabilityBounds q_bounds(const std::vector<double>& shares, StateIndex i)
{
    const double m = static_cast<double>(shares.size());
    double squares = 0;
    for (double p : shares)
        squares += p * p;
    ProbabilityBounds b;
    b.lower = (std::exp(-1.0) - m * shares.at(i) - 0.5 * squares) / m;
    b.upper = shares.size() < 2 ? 0.0 : std::pow(1.0 - 1.0 / (m - 1.0), m - 1.0) / m;
    return b;
}

// Poisson approximation.

struct PoissonParams {
    double lambda_minus = 0; // sum of (p_j - p_i) over larger states
    double lambda_plus = 0;  // sum of (p_i - p_j) over smaller states
};

inline PoissonParams poisson_params(const std::vector<double>& shares, StateIndex i)
{
    PoissonParams params;
    for (StateIndex j = 0; j < shares.size(); ++j) {
        if (shares[j] > shares.at(i))
            params.lambda_minus += shares[j] - shares[i];
        else
            params.lambda_plus += shares[i] - shares[j];
    }
    return params;
}

inline constexpr double kDefaultPhiTolerance = 1e-12;

namespace detail {

/// Poisson pmf for indices 0..J-1, with J the first index where
/// weight * P(S >= J) < tol (bounded geometrically once j > lambda).
inline std::vector<double> poisson_pmf_truncated(double lambda, double weight, double tol)
{
    std::vector<double> pmf{std::exp(-lambda)};
    if (lambda == 0)
        return pmf;
    for (std::size_t j = 0; j < 100000; ++j) {
        const double ratio = lambda / static_cast<double>(j + 1);
        pmf.push_back(pmf[j] * ratio);
        if (ratio < 1 && weight * pmf[j + 1] / (1 - lambda / static_cast<double>(j + 2)) < tol)
            break;
    }
    return pmf;
}

} // namespace detail

/// Sum over j >= k+2 of (j-k-1) P(S-=j) P(S+=k), i.e. E(S- - S+ - 1)_+.
inline double phi_upper_series(double lambda_minus, double lambda_plus, double tol = kDefaultPhiTolerance)
{
    if (lambda_minus < 0 || lambda_plus < 0)
        throw std::domain_error("Poisson means must be nonnegative");
    const auto minus = detail::poisson_pmf_truncated(lambda_minus, lambda_minus, tol);
    const std::size_t top = minus.size();
    double sum = 0;
    double plus_k = std::exp(-lambda_plus);
    for (std::size_t k = 0; k + 2 < top; ++k) {
        double inner = 0;
        for (std::size_t j = k + 2; j < top; ++j)
            inner += static_cast<double>(j - k - 1) * minus[j];
        sum += plus_k * inner;
        plus_k *= lambda_plus / static_cast<double>(k + 1);
    }
    return sum;
}

/// Sum over j <= k of (k+1-j) P(S-=j) P(S+=k), i.e. E(S+ + 1 - S-)_+.
inline double phi_lower_series(double lambda_minus, double lambda_plus, double tol = kDefaultPhiTolerance)
{
    if (lambda_minus < 0 || lambda_plus < 0)
        throw std::domain_error("Poisson means must be nonnegative");
    // sum over k >= K of (k+1) P(S+=k) is (lambda+ + 1) P(S+ >= K) at most, up to a factor
    const auto plus = detail::poisson_pmf_truncated(lambda_plus, lambda_plus + 1, tol);
    std::vector<double> minus(plus.size());
    minus[0] = std::exp(-lambda_minus);
    for (std::size_t j = 1; j < minus.size(); ++j)
        minus[j] = minus[j - 1] * lambda_minus / static_cast<double>(j);
    double sum = 0;
    for (std::size_t k = 0; k < plus.size(); ++k) {
        double inner = 0;
        for (std::size_t j = 0; j <= k; ++j)
            inner += static_cast<double>(k + 1 - j) * minus[j];
        sum += plus[k] * inner;
    }
    return sum;
}

/// Phi(l-, l+) = E(S- - S+ - 1)_+ for independent Poisson S- and S+.
inline double phi(double lambda_minus, double lambda_plus, double tol = kDefaultPhiTolerance)
{
    return phi_upper_series(lambda_minus, lambda_plus, tol);
}

/// Phi through the complementary series plus the mean l- - l+ - 1.
inline double phi_complementary(double lambda_minus, double lambda_plus, double tol = kDefaultPhiTolerance)
{
    return phi_lower_series(lambda_minus, lambda_plus, tol) + lambda_minus - lambda_plus - 1;
}

/// Psi(x) = Phi(e^-x, e^-x - 1 + x).
inline double psi(double x, double tol = kDefaultPhiTolerance)
{
    if (x < 0)
        throw std::domain_error("psi is defined for x >= 0");
    const double lm = std::exp(-x);
    const double lp = std::max(0.0, std::expm1(-x) + x);
    return phi(lm, lp, tol);
}

struct PoissonApproximation {
    double approx = 0;
    double error_bound = 0;
};

inline PoissonApproximation q_poisson(const std::vector<double>& shares, StateIndex i,
                                      double tol = kDefaultPhiTolerance)
{
    const auto params = poisson_params(shares, i);
    const double m = static_cast<double>(shares.size());
    PoissonApproximation r;
    r.approx = phi(params.lambda_minus, params.lambda_plus, tol) / m;
    for (double p : shares)
        r.error_bound += (p - shares[i]) * (p - shares[i]);
    r.error_bound /= m;
    return r;
}

// Two states at once, five states.

namespace detail {

/// Integral over [lo, hi] of (a - x)(b - x)(c - x) dx via its antiderivative.
template <class T>
T integrate_cubic(const T& a, const T& b, const T& c, const T& lo, const T& hi)
{
    const T c0 = a * b * c;
    const T c1 = a * b + a * c + b * c;
    const T c2 = a + b + c;
    auto antiderivative = [&](const T& x) -> T {
        const T x2 = x * x;
        return c0 * x - c1 * x2 / T(2) + c2 * x2 * x / T(3) - x2 * x2 / T(4);
    };
    return antiderivative(hi) - antiderivative(lo);
}

} // namespace detail

/// Probability that the two smallest of five states lose a seat at the same step.
template <class T>
T double_paradox_m5(std::vector<T> shares)
{
    if (shares.size() != 5)
        throw WrongArity(5, shares.size());
    std::sort(shares.begin(), shares.end(), [](const T& a, const T& b) { return a > b; });
    const T& p1 = shares[0];
    const T& p2 = shares[1];
    const T& p3 = shares[2];
    const T& p4 = shares[3];
    const T& p5 = shares[4];
    const T first = detail::integrate_cubic<T>(p3 - p4, p2 - p4, p1 - p4, T(0), p3 - p4);
    const T second = (p4 - p5) * (p3 - p4) * (p2 - p4) * (p1 - p4);
    const T third = detail::integrate_cubic<T>(p3 - p5, p2 - p5, p1 - p5, p4 - p5, p3 - p5);
    return (first + second + third) / T(5);
}

} // namespace alabama

#endif
