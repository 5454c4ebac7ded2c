#ifndef ALABAMA_SIMULATE_HPP
#define ALABAMA_SIMULATE_HPP

// Seat-by-seat simulation over house sizes, Alabama paradox bookkeeping and
// exact per-period probabilities for integer populations.

#include "core.hpp"

#include <array>
#include <map>
#include <unordered_map>

namespace alabama {

/// Streams Hamilton allocations for consecutive house sizes, updating the
/// exact remainders incrementally. Memory is O(m).
class SeatSequence {
public:
    SeatSequence(const PopulationProfile& profile, TiePolicy policy, std::uint64_t first_house_size = 1)
        : populations_(profile.populations().begin(), profile.populations().end()),
          total_(profile.total()),
          policy_(std::move(policy))
    {
        Quota q = compute_quota(profile, first_house_size);
        floors_ = std::move(q.floors);
        remainders_ = std::move(q.remainders);
        house_size_ = first_house_size;
        current_.seats.resize(populations_.size());
    }

    /// Allocation for the current house size, then advances by one seat.
    const Allocation& next()
    {
        std::uint64_t floor_sum = 0;
        for (auto f : floors_)
            floor_sum += f;
        rounder_.select(remainders_, house_size_ - floor_sum, house_size_, policy_, current_.rounded_up);
        current_.house_size = house_size_;
        std::copy(floors_.begin(), floors_.end(), current_.seats.begin());
        for (auto i : current_.rounded_up)
            ++current_.seats[i];

        for (StateIndex i = 0; i < populations_.size(); ++i) {
            remainders_[i] += populations_[i];
            if (remainders_[i] >= total_) {
                remainders_[i] -= total_;
                ++floors_[i];
            }
        }
        ++house_size_;
        return current_;
    }

    /// House size the next call to next() will produce.
    std::uint64_t upcoming_house_size() const noexcept { return house_size_; }

private:
    std::vector<std::uint64_t> populations_;
    std::uint64_t total_;
    TiePolicy policy_;
    std::vector<std::uint64_t> floors_;
    std::vector<std::uint64_t> remainders_;
    std::uint64_t house_size_ = 1;
    Allocation current_;
    detail::Rounder rounder_;
};

/// Calls fn(const Allocation&) for n = 1..horizon.
template <class Fn>
void seat_sequence(const PopulationProfile& profile, std::uint64_t horizon, const TiePolicy& policy, Fn&& fn)
{
    if (horizon < 1)
        throw std::invalid_argument("horizon must be at least 1");
    SeatSequence seq(profile, policy);
    for (std::uint64_t n = 1; n <= horizon; ++n)
        fn(seq.next());
}

struct ParadoxReport {
    std::uint64_t horizon = 0;
    std::vector<std::uint64_t> counts; // #{n < N : s_i(n+1) < s_i(n)}
    std::vector<std::uint64_t> gains;  // #{n < N : s_i(n+1) > s_i(n)}
    std::vector<double> frequencies;   // counts / horizon
    std::map<std::size_t, std::uint64_t> multi_histogram; // k -> steps where exactly k states lost
    std::map<std::int64_t, std::uint64_t> delta_histogram; // s_i(n+1) - s_i(n) pooled over states

    std::uint64_t steps() const noexcept { return horizon - 1; }

    /// Fraction of the N-1 steps at which at least one state lost a seat.
    double any_paradox_fraction() const
    {
        std::uint64_t hits = 0;
        for (const auto& [k, c] : multi_histogram)
            hits += c;
        return static_cast<double>(hits) / static_cast<double>(steps());
    }

    /// Mean number of states losing a seat per step.
    double mean_simultaneous() const
    {
        std::uint64_t total = 0;
        for (auto c : counts)
            total += c;
        return static_cast<double>(total) / static_cast<double>(steps());
    }
};

inline ParadoxReport paradox_events(const PopulationProfile& profile, std::uint64_t horizon, const TiePolicy& policy)
{
    if (horizon < 2)
        throw std::invalid_argument("horizon must be at least 2");
    const std::size_t m = profile.size();
    ParadoxReport r;
    r.horizon = horizon;
    r.counts.assign(m, 0);
    r.gains.assign(m, 0);
    std::vector<std::uint64_t> prev;
    std::array<std::uint64_t, 5> delta{}; // -2..2
    SeatSequence seq(profile, policy);
    for (std::uint64_t n = 1; n <= horizon; ++n) {
        const Allocation& a = seq.next();
        if (!prev.empty()) {
            std::size_t losers = 0;
            for (StateIndex i = 0; i < m; ++i) {
                const auto before = prev[i];
                const auto after = a.seats[i];
                if (after < before) {
                    ++r.counts[i];
                    ++losers;
                } else if (after > before) {
                    ++r.gains[i];
                }
                const auto d = static_cast<std::int64_t>(after) - static_cast<std::int64_t>(before);
                if (d >= -2 && d <= 2)
                    ++delta[static_cast<std::size_t>(d + 2)];
                else
                    ++r.delta_histogram[d];
            }
            if (losers > 0)
                ++r.multi_histogram[losers];
        }
        prev = a.seats;
    }
    for (std::size_t d = 0; d < delta.size(); ++d)
        if (delta[d] > 0)
            r.delta_histogram[static_cast<std::int64_t>(d) - 2] += delta[d];
    r.frequencies.reserve(m);
    for (auto c : r.counts)
        r.frequencies.push_back(static_cast<double>(c) / static_cast<double>(horizon));
    return r;
}

class PeriodTooLarge : public std::length_error {
public:
    PeriodTooLarge(std::uint64_t period, std::uint64_t cap)
        : std::length_error("period " + std::to_string(period) + " exceeds cap " + std::to_string(cap))
    {
    }
};

struct PeriodicExactResult {
    std::uint64_t period = 0;
    std::vector<mpq_class> per_state_probability;
    mpq_class expected_simultaneous;
    std::uint64_t tie_steps = 0; // house sizes in the period with a tie at the cutoff
};

inline constexpr std::uint64_t kDefaultPeriodCap = 10'000'000;

/// Exact paradox probabilities for integer populations by enumerating one
/// period of house sizes, starting at first_house_size.
///
/// Lots at different house sizes are independent. States with equal
/// populations always have equal remainders; they share one priority order
/// fixed once, so within such a class the seats go to the same members at
/// every n, and only the number of class members rounded up is random. A
/// class inside a tie group of G states with c contested seats gets a
/// hypergeometric number of them. The probability reported for a state is
/// the class's expected losses divided by the class size.
inline PeriodicExactResult periodic_exact(const PopulationProfile& input, std::uint64_t cap = kDefaultPeriodCap,
                                          std::uint64_t first_house_size = 1)
{
    const PopulationProfile profile = input.reduced();
    const std::uint64_t period = profile.total();
    if (period > cap)
        throw PeriodTooLarge(period, cap);
    const std::size_t m = profile.size();

    std::vector<std::size_t> class_of(m);
    std::vector<std::size_t> class_size;
    {
        std::unordered_map<std::uint64_t, std::size_t> ids;
        for (StateIndex i = 0; i < m; ++i) {
            auto [it, fresh] = ids.try_emplace(profile.population(i), class_size.size());
            if (fresh)
                class_size.push_back(0);
            class_of[i] = it->second;
            ++class_size[it->second];
        }
    }
    const std::size_t classes = class_size.size();
    std::vector<StateIndex> representative(classes);
    for (StateIndex i = m; i-- > 0;)
        representative[class_of[i]] = i;

    // Distribution of the number of members of each class rounded up at one n.
    struct ClassDraw {
        std::uint64_t floor = 0;
        std::size_t fixed = 0;        // used when group == 0
        std::size_t group = 0;        // tie group size, 0 if not tied
        std::size_t contested = 0;
    };
    auto describe = [&](const Quota& q, detail::Rounder& rounder, std::vector<ClassDraw>& out, bool& tied) {
        out.assign(classes, {});
        const std::uint64_t leftover = q.leftover();
        for (std::size_t c = 0; c < classes; ++c)
            out[c].floor = q.floors[representative[c]];
        tied = false;
        if (leftover == 0)
            return;
        const auto cut = rounder.find_cut(q.remainders, leftover);
        const std::size_t contested = leftover - cut.above;
        tied = contested != cut.at;
        for (std::size_t c = 0; c < classes; ++c) {
            const auto r = q.remainders[representative[c]];
            if (r > cut.threshold || (r == cut.threshold && !tied))
                out[c].fixed = class_size[c];
            else if (r == cut.threshold) {
                out[c].group = cut.at;
                out[c].contested = contested;
            }
        }
    };
    auto pmf = [&](const ClassDraw& d, std::size_t members) {
        std::vector<std::pair<std::size_t, mpq_class>> out;
        if (d.group == 0) {
            out.emplace_back(d.fixed, mpq_class(1));
            return out;
        }
        const std::size_t others = d.group - members;
        const mpz_class all = binomial(d.group, d.contested);
        const std::size_t lo = d.contested > others ? d.contested - others : 0;
        const std::size_t hi = std::min(members, d.contested);
        for (std::size_t u = lo; u <= hi; ++u)
            out.emplace_back(u, make_fraction(binomial(members, u) * binomial(others, d.contested - u), all));
        return out;
    };

    std::vector<std::uint64_t> certain_losses(classes, 0);
    std::vector<mpq_class> random_losses(classes, 0);
    PeriodicExactResult result;
    result.period = period;

    detail::Rounder rounder;
    std::vector<ClassDraw> now, next;
    bool tied_now = false, tied_next = false;
    describe(compute_quota(profile, first_house_size), rounder, now, tied_now);
    for (std::uint64_t n = first_house_size; n < first_house_size + period; ++n) {
        describe(compute_quota(profile, n + 1), rounder, next, tied_next);
        result.tie_steps += tied_now;
        for (std::size_t c = 0; c < classes; ++c) {
            if (next[c].floor != now[c].floor)
                continue; // floor rose by one; nobody in the class can lose
            if (now[c].group == 0 && next[c].group == 0) {
                if (now[c].fixed > next[c].fixed)
                    certain_losses[c] += now[c].fixed - next[c].fixed;
                continue;
            }
            const auto before = pmf(now[c], class_size[c]);
            const auto after = pmf(next[c], class_size[c]);
            for (const auto& [u, pu] : before)
                for (const auto& [v, pv] : after)
                    if (u > v)
                        random_losses[c] += pu * pv * static_cast<unsigned long>(u - v);
        }
        std::swap(now, next);
        std::swap(tied_now, tied_next);
    }

    const mpz_class period_z = to_mpz(period);
    result.expected_simultaneous = 0;
    std::vector<mpq_class> class_prob(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        const mpq_class total = mpq_class(to_mpz(certain_losses[c])) + random_losses[c];
        result.expected_simultaneous += total;
        class_prob[c] = total / mpq_class(period_z * static_cast<unsigned long>(class_size[c]));
        class_prob[c].canonicalize();
    }
    result.expected_simultaneous /= mpq_class(period_z);
    result.expected_simultaneous.canonicalize();
    result.per_state_probability.reserve(m);
    for (StateIndex i = 0; i < m; ++i)
        result.per_state_probability.push_back(class_prob[class_of[i]]);
    return result;
}

/// Builds an integer profile from exact shares over their common denominator.
inline PopulationProfile profile_from_shares(std::span<const mpq_class> shares, std::vector<std::string> names = {})
{
    if (shares.empty())
        throw std::invalid_argument("no shares given");
    mpz_class common = 1;
    mpq_class sum = 0;
    for (const auto& s : shares) {
        if (sgn(s) <= 0)
            throw std::invalid_argument("shares must be positive");
        mpz_lcm(common.get_mpz_t(), common.get_mpz_t(), s.get_den_mpz_t());
        sum += s;
    }
    if (sum != 1)
        throw std::invalid_argument("shares must sum to exactly 1");
    if (common > to_mpz(kMaxTotalPopulation))
        throw std::overflow_error("common denominator of the shares exceeds 2^63");
    std::vector<std::uint64_t> pops;
    pops.reserve(shares.size());
    for (const auto& s : shares) {
        const mpz_class num = s.get_num() * (common / s.get_den());
        pops.push_back(mpz_get_ui(num.get_mpz_t()));
    }
    return PopulationProfile(std::move(pops), std::move(names));
}

/// Paradox frequencies for exact shares with large denominators, intended as
/// stand-ins for rationally independent reals. Ties are broken by index.
inline ParadoxReport empirical_frequency(std::span<const mpq_class> shares, std::uint64_t horizon)
{
    const PopulationProfile profile = profile_from_shares(shares);
    return paradox_events(profile, horizon, TiePolicy::index_priority(profile.size()));
}

inline constexpr unsigned kGenericShareBits = 62;

/// m positive shares with denominator 2^62 summing to 1: spacings of m-1
/// distinct uniform cut points, i.e. a discretized uniform draw on the simplex.
inline std::vector<mpq_class> generic_shares(std::size_t m, std::uint64_t seed)
{
    if (m == 0)
        throw std::invalid_argument("need at least one state");
    constexpr std::uint64_t scale = std::uint64_t{1} << kGenericShareBits;
    KeyedStream stream(seed, m);
    std::vector<std::uint64_t> cuts;
    cuts.reserve(m + 1);
    while (cuts.size() < m - 1) {
        const std::uint64_t c = 1 + stream.below(scale - 1);
        if (std::find(cuts.begin(), cuts.end(), c) == cuts.end())
            cuts.push_back(c);
    }
    cuts.push_back(0);
    cuts.push_back(scale);
    std::sort(cuts.begin(), cuts.end());
    std::vector<mpq_class> shares;
    shares.reserve(m);
    const mpz_class den = to_mpz(scale);
    for (std::size_t i = 0; i < m; ++i)
        shares.push_back(make_fraction(to_mpz(cuts[i + 1] - cuts[i]), den));
    return shares;
}

} // namespace alabama

#endif
