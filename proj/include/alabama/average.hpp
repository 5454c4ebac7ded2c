#ifndef ALABAMA_AVERAGE_HPP
#define ALABAMA_AVERAGE_HPP

// Paradox probabilities averaged over uniformly random shares: exact
// fractions, the limit constant b = lim m E q_m, the Psi curve and Monte
// Carlo cross-checks.

#include "formula.hpp"
#include "rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace alabama {

class NoConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// E q_(m) for the smallest of m states:
/// (1/m) sum_{k=2}^{m-1} (-1)^k C(m-1,k) / m^(k), with m^(k) the rising factorial.
inline mpq_class expected_min_probability(unsigned long m)
{
    if (m < 2)
        throw std::invalid_argument("need at least two states");
    mpq_class sum = 0;
    for (unsigned long k = 2; k + 1 <= m; ++k) {
        mpq_class term(binomial(m - 1, k), rising_factorial(m, k));
        term.canonicalize();
        if (k % 2)
            sum -= term;
        else
            sum += term;
    }
    sum /= m;
    sum.canonicalize();
    return sum;
}

/// E q_m for a given state among m.
///
/// The quadruple sum over (s, k, i, j) is scaled by (2m-2)! so that every
/// term becomes an integer times (i+k+1)^(-j-1); integer coefficients are
/// accumulated per (i+k+1, j) and the powers are combined at the end.
inline mpq_class expected_probability(unsigned long m)
{
    if (m < 2)
        throw std::invalid_argument("need at least two states");
    if (m < 3)
        return 0;
    const unsigned long n1 = m - 1;
    const mpz_class fact_n1 = factorial(n1);

    // inv_pair[i][r] = (m-1)! / (i! r!) for i + r <= m-1
    std::vector<std::vector<mpz_class>> inv_pair(n1 + 1);
    {
        std::vector<mpz_class> fact(n1 + 1);
        fact[0] = 1;
        for (unsigned long a = 1; a <= n1; ++a)
            fact[a] = fact[a - 1] * a;
        for (unsigned long i = 0; i <= n1; ++i) {
            inv_pair[i].resize(n1 - i + 1);
            mpz_class partial;
            mpz_divexact(partial.get_mpz_t(), fact_n1.get_mpz_t(), fact[i].get_mpz_t());
            for (unsigned long r = 0; i + r <= n1; ++r)
                mpz_divexact(inv_pair[i][r].get_mpz_t(), partial.get_mpz_t(), fact[r].get_mpz_t());
        }
    }

    // coeff[t][j], t = i + k + 1 in [3, m], j in [0, m-3]
    std::vector<std::vector<mpz_class>> coeff(m + 1, std::vector<mpz_class>(m - 2));
    mpz_class outer, falling;
    for (unsigned long s = 0; s + 3 <= m; ++s) {
        for (unsigned long k = 2; k + s + 1 <= m; ++k) {
            // C(s+k-2, s) * C(2m-2, m-1-k-s) * (m-1)!/k!
            outer = binomial(s + k - 2, s) * binomial(2 * m - 2, m - 1 - k - s);
            mpz_divexact(falling.get_mpz_t(), fact_n1.get_mpz_t(), factorial(k).get_mpz_t());
            outer *= falling;
            for (unsigned long i = 0; i <= s; ++i) {
                auto& row = coeff[i + k + 1];
                for (unsigned long j = 0; i + j <= s; ++j) {
                    const mpz_class& w = inv_pair[i][s - i - j];
                    if ((k + i + j) % 2)
                        mpz_submul(row[j].get_mpz_t(), outer.get_mpz_t(), w.get_mpz_t());
                    else
                        mpz_addmul(row[j].get_mpz_t(), outer.get_mpz_t(), w.get_mpz_t());
                }
            }
        }
    }

    mpq_class sum = 0;
    for (unsigned long t = 3; t <= m; ++t) {
        // sum_j coeff[t][j] / t^(j+1) = (sum_j coeff[t][j] t^(top-1-j)) / t^top
        const auto& row = coeff[t];
        std::size_t top = row.size();
        while (top > 0 && row[top - 1] == 0)
            --top;
        if (top == 0)
            continue;
        mpz_class num = 0;
        for (std::size_t j = 0; j < top; ++j)
            num = num * t + row[j];
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), t, top);
        sum += make_fraction(num, den);
    }
    sum /= mpq_class(factorial(2 * m - 2) * m);
    sum.canonicalize();
    return sum;
}

struct RatioRow {
    unsigned long m = 0;
    double ratio = 0; // E q_m / E q_(m), rounded to 5 decimals
};

inline double round_to(double x, int decimals)
{
    const double scale = std::pow(10.0, decimals);
    return std::round(x * scale) / scale;
}

inline std::vector<RatioRow> ratio_table(const std::vector<unsigned long>& m_values)
{
    std::vector<RatioRow> rows;
    rows.reserve(m_values.size());
    for (auto m : m_values) {
        if (m < 3)
            throw std::invalid_argument("ratio needs m >= 3");
        const mpq_class ratio = expected_probability(m) / expected_min_probability(m);
        rows.push_back({m, round_to(ratio.get_d(), 5)});
    }
    return rows;
}

// Limit constant b.

inline constexpr double kIntegralCutoff = 40.0;

struct QuadratureResult {
    double value = 0;
    double error_estimate = 0; // quadrature estimate plus analytic tail bound
};

/// Integral over [0, inf) of f(x) e^-x with f bounded by e^-1 past the cutoff:
/// adaptive Gauss-Kronrod on [0, 40], tail bounded by e^-40.
template <class F>
QuadratureResult integrate_against_exponential(F&& f, double tol)
{
    double error = 0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double x) { return f(x) * std::exp(-x); }, 0.0, kIntegralCutoff, 20, tol * 1e-3, &error);
    return {value, error + std::exp(-kIntegralCutoff)};
}

enum class LimitMethod { sequence_limit, integral };

struct LimitConstant {
    double integral = 0;
    double extrapolated = 0;
    std::vector<std::pair<unsigned long, double>> sequence; // (m, m E q_m)
};

namespace detail {

inline double b_by_integral(double tol)
{
    return integrate_against_exponential([](double x) { return psi(x); }, tol).value;
}

inline constexpr unsigned kDefaultRichardsonLevels = 4;

/// Richardson extrapolation of a(m) = m E q_m in 1/m over m, 2m, 4m, ...
inline double b_by_extrapolation(double tol, std::vector<std::pair<unsigned long, double>>* sequence,
                                 unsigned levels = kDefaultRichardsonLevels)
{
    if (levels < 1 || levels > 5)
        throw std::invalid_argument("Richardson levels must lie in [1, 5]");
    // coarser grids suffice for looser tolerances
    const unsigned long base = tol >= 1e-4 ? 10 : 12;
    std::vector<double> level;
    for (unsigned long m = base; level.size() < levels; m *= 2) {
        const double a = mpq_class(expected_probability(m) * m).get_d();
        if (sequence)
            sequence->emplace_back(m, a);
        level.push_back(a);
    }
    for (double factor = 2; level.size() > 1; factor *= 2) {
        std::vector<double> next;
        for (std::size_t j = 0; j + 1 < level.size(); ++j)
            next.push_back((factor * level[j + 1] - level[j]) / (factor - 1));
        level = std::move(next);
    }
    return level.front();
}

} // namespace detail

/// b by one method.
inline double limit_constant_b(LimitMethod method, double tol = 1e-4)
{
    if (!(tol >= 1e-6 && tol <= 1e-3))
        throw std::invalid_argument("tolerance must lie in [1e-6, 1e-3]");
    return method == LimitMethod::integral ? detail::b_by_integral(tol) : detail::b_by_extrapolation(tol, nullptr);
}

/// b by both methods; throws NoConvergence if they differ by more than tol.
inline LimitConstant limit_constant_b_checked(double tol = 1e-4, unsigned levels = detail::kDefaultRichardsonLevels)
{
    if (!(tol >= 1e-6 && tol <= 1e-3))
        throw std::invalid_argument("tolerance must lie in [1e-6, 1e-3]");
    LimitConstant b;
    b.integral = detail::b_by_integral(tol);
    b.extrapolated = detail::b_by_extrapolation(tol, &b.sequence, levels);
    if (std::abs(b.integral - b.extrapolated) > tol)
        throw NoConvergence("integral " + std::to_string(b.integral) + " and extrapolation " +
                            std::to_string(b.extrapolated) + " disagree beyond tolerance");
    return b;
}

inline std::vector<std::pair<double, double>> psi_curve(double x_max, double step)
{
    if (x_max < 0 || !(step > 0))
        throw std::invalid_argument("need x_max >= 0 and step > 0");
    std::vector<std::pair<double, double>> out;
    const auto points = static_cast<std::size_t>(std::floor(x_max / step + 1e-9)) + 1;
    out.reserve(points);
    for (std::size_t k = 0; k < points; ++k) {
        const double x = static_cast<double>(k) * step;
        out.emplace_back(x, psi(x));
    }
    return out;
}

// Monte Carlo over the simplex.

struct MonteCarloEstimate {
    double mean = 0;
    double std_error = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

/// Uniform point on the simplex from normalized unit exponentials; the
/// stream for sample k is keyed by (seed, k).
inline std::vector<double> simplex_sample(std::size_t m, std::uint64_t seed, std::uint64_t index)
{
    KeyedStream stream(seed, index);
    std::vector<double> p(m);
    double total = 0;
    for (auto& x : p)
        total += x = stream.exponential();
    for (auto& x : p)
        x /= total;
    return p;
}

/// Worker count from ALABAMA_THREADS, else hardware concurrency.
inline unsigned default_threads()
{
    if (const char* env = std::getenv("ALABAMA_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1)
                return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

namespace detail {

inline constexpr std::uint64_t kMonteCarloChunk = 4096;

/// Runs body(begin, end, chunk_index) over fixed-size chunks. Chunk
/// boundaries do not depend on the worker count.
template <class Body>
void for_each_chunk(std::uint64_t total, unsigned threads, Body&& body)
{
    const std::uint64_t chunks = (total + kMonteCarloChunk - 1) / kMonteCarloChunk;
    threads = static_cast<unsigned>(std::clamp<std::uint64_t>(threads, 1, std::max<std::uint64_t>(chunks, 1)));
    auto run = [&](unsigned worker) {
        for (std::uint64_t c = worker; c < chunks; c += threads)
            body(c * kMonteCarloChunk, std::min(total, (c + 1) * kMonteCarloChunk), c);
    };
    if (threads == 1) {
        run(0);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back(run, w);
    for (auto& t : pool)
        t.join();
}

} // namespace detail

struct MonteCarloPair {
    MonteCarloEstimate given_state; // E q_m, averaged over the states of each sample
    MonteCarloEstimate smallest;    // E q_(m)
};

inline MonteCarloPair monte_carlo_expected(std::size_t m, std::uint64_t samples, std::uint64_t seed,
                                           unsigned threads = default_threads())
{
    if (m < 1 || samples < 2)
        throw std::invalid_argument("need m >= 1 and at least two samples");
    const std::uint64_t chunks = (samples + detail::kMonteCarloChunk - 1) / detail::kMonteCarloChunk;
    struct Sums {
        double mean_sum = 0, mean_sq = 0, min_sum = 0, min_sq = 0;
    };
    std::vector<Sums> partial(chunks);
    detail::for_each_chunk(samples, threads, [&](std::uint64_t begin, std::uint64_t end, std::uint64_t c) {
        Sums s;
        for (std::uint64_t k = begin; k < end; ++k) {
            const auto p = simplex_sample(m, seed, k);
            double sum = 0, largest = 0;
            for (StateIndex i = 0; i < m; ++i) {
                const double q = q_exact_dp(p, i);
                sum += q;
                largest = std::max(largest, q);
            }
            const double mean = sum / static_cast<double>(m);
            s.mean_sum += mean;
            s.mean_sq += mean * mean;
            s.min_sum += largest;
            s.min_sq += largest * largest;
        }
        partial[c] = s;
    });
    Sums total;
    for (const auto& s : partial) {
        total.mean_sum += s.mean_sum;
        total.mean_sq += s.mean_sq;
        total.min_sum += s.min_sum;
        total.min_sq += s.min_sq;
    }
    auto finish = [&](double sum, double sq) {
        const double n = static_cast<double>(samples);
        MonteCarloEstimate e;
        e.mean = sum / n;
        const double var = std::max(0.0, (sq - n * e.mean * e.mean) / (n - 1));
        e.std_error = std::sqrt(var / n);
        e.samples = samples;
        e.seed = seed;
        return e;
    };
    return {finish(total.mean_sum, total.mean_sq), finish(total.min_sum, total.min_sq)};
}

/// (m p_i, m q_i) for every state of `samples` random share vectors.
inline std::vector<std::pair<double, double>> scaled_scatter(std::size_t m, std::uint64_t samples, std::uint64_t seed,
                                                             unsigned threads = default_threads())
{
    std::vector<std::pair<double, double>> points(samples * m);
    detail::for_each_chunk(samples, threads, [&](std::uint64_t begin, std::uint64_t end, std::uint64_t) {
        for (std::uint64_t k = begin; k < end; ++k) {
            const auto p = simplex_sample(m, seed, k);
            for (StateIndex i = 0; i < m; ++i) {
                const double scale = static_cast<double>(m);
                points[k * m + i] = {scale * p[i], scale * q_exact_dp(p, i)};
            }
        }
    });
    return points;
}

} // namespace alabama

#endif
