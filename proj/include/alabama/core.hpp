#ifndef ALABAMA_CORE_HPP
#define ALABAMA_CORE_HPP

// Hamilton (largest-remainder) apportionment in exact integer arithmetic.
//
// Every quota n*P_i/P is kept as floor + remainder/P with the common
// denominator P, so comparing remainders is comparing integers and ties are
// detected exactly.

#include "rational.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace alabama {

using StateIndex = std::size_t;

/// Largest admissible total population; keeps remainder + population below 2^64.
inline constexpr std::uint64_t kMaxTotalPopulation = std::uint64_t{1} << 63;

inline std::string default_state_name(StateIndex i)
{
    if (i < 26)
        return std::string(1, static_cast<char>('A' + i));
    return "S" + std::to_string(i + 1);
}

class PopulationProfile {
public:
    explicit PopulationProfile(std::vector<std::uint64_t> populations, std::vector<std::string> names = {})
        : populations_(std::move(populations)), names_(std::move(names))
    {
        if (populations_.empty())
            throw std::invalid_argument("profile needs at least one state");
        if (!names_.empty() && names_.size() != populations_.size())
            throw std::invalid_argument("number of names does not match number of populations");
        for (auto p : populations_) {
            if (p == 0)
                throw std::invalid_argument("populations must be positive");
            if (p > kMaxTotalPopulation - total_)
                throw std::overflow_error("total population exceeds 2^63");
            total_ += p;
        }
        if (names_.empty())
            for (StateIndex i = 0; i < populations_.size(); ++i)
                names_.push_back(default_state_name(i));
    }

    std::size_t size() const noexcept { return populations_.size(); }
    std::span<const std::uint64_t> populations() const noexcept { return populations_; }
    std::uint64_t population(StateIndex i) const { return populations_.at(i); }
    std::uint64_t total() const noexcept { return total_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

    mpq_class share(StateIndex i) const { return make_fraction(to_mpz(population(i)), to_mpz(total_)); }

    std::vector<mpq_class> shares() const
    {
        std::vector<mpq_class> out;
        out.reserve(size());
        for (StateIndex i = 0; i < size(); ++i)
            out.push_back(share(i));
        return out;
    }

    std::vector<double> share_values() const
    {
        std::vector<double> out;
        out.reserve(size());
        for (auto p : populations_)
            out.push_back(static_cast<double>(p) / static_cast<double>(total_));
        return out;
    }

    /// Same shares with the populations divided by their gcd.
    PopulationProfile reduced() const
    {
        std::uint64_t g = 0;
        for (auto p : populations_)
            g = std::gcd(g, p);
        std::vector<std::uint64_t> pops(populations_);
        for (auto& p : pops)
            p /= g;
        return PopulationProfile(std::move(pops), names_);
    }

    friend bool operator==(const PopulationProfile&, const PopulationProfile&) = default;

private:
    std::vector<std::uint64_t> populations_;
    std::vector<std::string> names_;
    std::uint64_t total_ = 0;
};

/// Quotas mu_i = n * P_i / P, stored as floors[i] + remainders[i] / denominator.
struct Quota {
    std::uint64_t house_size = 0;
    std::vector<std::uint64_t> floors;
    std::vector<std::uint64_t> remainders;
    std::uint64_t denominator = 1;

    std::size_t size() const noexcept { return floors.size(); }

    mpq_class value(StateIndex i) const
    {
        return make_fraction(to_mpz(static_cast<u128>(floors.at(i)) * denominator + remainders.at(i)),
                             to_mpz(denominator));
    }
    mpq_class remainder(StateIndex i) const { return make_fraction(to_mpz(remainders.at(i)), to_mpz(denominator)); }

    /// Seats left after every state receives its floor.
    std::uint64_t leftover() const
    {
        u128 sum = 0;
        for (auto f : floors)
            sum += f;
        return house_size - static_cast<std::uint64_t>(sum);
    }
};

struct Allocation {
    std::uint64_t house_size = 0;
    std::vector<std::uint64_t> seats;
    std::vector<StateIndex> rounded_up; // sorted

    bool is_rounded_up(StateIndex i) const { return std::binary_search(rounded_up.begin(), rounded_up.end(), i); }

    friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// States sharing the remainder at the rounding cutoff, of which only
/// contested_seats can be rounded up.
struct TieEvent {
    std::uint64_t house_size = 0;
    std::vector<StateIndex> tied_states; // sorted
    std::size_t contested_seats = 0;

    friend bool operator==(const TieEvent&, const TieEvent&) = default;
};

class TieUnresolved : public std::runtime_error {
public:
    explicit TieUnresolved(TieEvent event)
        : std::runtime_error("tie for " + std::to_string(event.contested_seats) + " seat(s) among " +
                             std::to_string(event.tied_states.size()) + " states at house size " +
                             std::to_string(event.house_size)),
          event_(std::move(event))
    {
    }
    const TieEvent& event() const noexcept { return event_; }

private:
    TieEvent event_;
};

class TiePolicy {
public:
    struct ErrorOnTie {
        friend bool operator==(const ErrorOnTie&, const ErrorOnTie&) = default;
    };
    /// order[0] is rounded up first; the same list is used at every house size.
    struct FixedPriority {
        std::vector<StateIndex> order;
        friend bool operator==(const FixedPriority&, const FixedPriority&) = default;
    };
    /// One uniform permutation of the tied group per tie, keyed by (seed, n).
    struct SeededLot {
        std::uint64_t seed = 0;
        friend bool operator==(const SeededLot&, const SeededLot&) = default;
    };
    using Variant = std::variant<ErrorOnTie, FixedPriority, SeededLot>;

    TiePolicy() = default;

    static TiePolicy error_on_tie() { return TiePolicy(ErrorOnTie{}); }

    static TiePolicy fixed_priority(std::vector<StateIndex> order)
    {
        std::vector<StateIndex> rank(order.size(), order.size());
        for (StateIndex pos = 0; pos < order.size(); ++pos) {
            if (order[pos] >= order.size() || rank[order[pos]] != order.size())
                throw std::invalid_argument("priority list must be a permutation of the state indices");
            rank[order[pos]] = pos;
        }
        TiePolicy policy(FixedPriority{std::move(order)});
        policy.rank_ = std::move(rank);
        return policy;
    }

    /// Lower index wins.
    static TiePolicy index_priority(std::size_t states)
    {
        std::vector<StateIndex> order(states);
        std::iota(order.begin(), order.end(), StateIndex{0});
        return fixed_priority(std::move(order));
    }

    static TiePolicy seeded_lot(std::uint64_t seed) { return TiePolicy(SeededLot{seed}); }

    const Variant& variant() const noexcept { return variant_; }
    bool is_stochastic() const noexcept { return std::holds_alternative<SeededLot>(variant_); }

    /// Position of state i in the priority list (FixedPriority only).
    std::size_t rank(StateIndex i) const { return rank_.at(i); }
    std::size_t priority_size() const noexcept { return rank_.size(); }

    friend bool operator==(const TiePolicy& a, const TiePolicy& b) { return a.variant_ == b.variant_; }

private:
    explicit TiePolicy(Variant v) : variant_(std::move(v)) {}

    Variant variant_{ErrorOnTie{}};
    std::vector<StateIndex> rank_;
};

namespace detail {

/// Picks which states are rounded up given exact remainders and the number
/// of leftover seats. Holds scratch storage so streaming callers do not
/// allocate per step.
class Rounder {
public:
    struct Cut {
        std::uint64_t threshold = 0; // remainder of the last state rounded up
        std::size_t above = 0;       // states with remainder strictly above threshold
        std::size_t at = 0;          // states with remainder equal to threshold
    };

    /// Requires 0 < leftover < remainders.size().
    Cut find_cut(std::span<const std::uint64_t> remainders, std::uint64_t leftover)
    {
        order_.resize(remainders.size());
        std::iota(order_.begin(), order_.end(), StateIndex{0});
        const auto nth = order_.begin() + static_cast<std::ptrdiff_t>(leftover - 1);
        std::nth_element(order_.begin(), nth, order_.end(),
                         [&](StateIndex a, StateIndex b) { return remainders[a] > remainders[b]; });
        Cut cut;
        cut.threshold = remainders[*nth];
        for (auto r : remainders) {
            cut.above += r > cut.threshold;
            cut.at += r == cut.threshold;
        }
        return cut;
    }

    std::optional<TieEvent> tie(std::span<const std::uint64_t> remainders, std::uint64_t leftover,
                                std::uint64_t house_size)
    {
        if (leftover == 0)
            return std::nullopt;
        const Cut cut = find_cut(remainders, leftover);
        const std::size_t contested = leftover - cut.above;
        if (contested == cut.at)
            return std::nullopt;
        TieEvent event{house_size, {}, contested};
        for (StateIndex i = 0; i < remainders.size(); ++i)
            if (remainders[i] == cut.threshold)
                event.tied_states.push_back(i);
        return event;
    }

    void select(std::span<const std::uint64_t> remainders, std::uint64_t leftover, std::uint64_t house_size,
                const TiePolicy& policy, std::vector<StateIndex>& rounded_up)
    {
        rounded_up.clear();
        if (leftover == 0)
            return;
        const Cut cut = find_cut(remainders, leftover);
        const std::size_t contested = leftover - cut.above;
        if (contested == cut.at) {
            for (StateIndex i = 0; i < remainders.size(); ++i)
                if (remainders[i] >= cut.threshold)
                    rounded_up.push_back(i);
            return;
        }
        group_.clear();
        for (StateIndex i = 0; i < remainders.size(); ++i) {
            if (remainders[i] > cut.threshold)
                rounded_up.push_back(i);
            else if (remainders[i] == cut.threshold)
                group_.push_back(i);
        }
        std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, TiePolicy::ErrorOnTie>) {
                    throw TieUnresolved(TieEvent{house_size, group_, contested});
                } else if constexpr (std::is_same_v<P, TiePolicy::FixedPriority>) {
                    if (policy.priority_size() != remainders.size())
                        throw std::invalid_argument("priority list length does not match number of states");
                    std::sort(group_.begin(), group_.end(),
                              [&](StateIndex a, StateIndex b) { return policy.rank(a) < policy.rank(b); });
                } else {
                    KeyedStream stream(p.seed, house_size);
                    for (std::size_t j = group_.size() - 1; j > 0; --j)
                        std::swap(group_[j], group_[stream.below(j + 1)]);
                }
            },
            policy.variant());
        rounded_up.insert(rounded_up.end(), group_.begin(), group_.begin() + static_cast<std::ptrdiff_t>(contested));
        std::sort(rounded_up.begin(), rounded_up.end());
    }

private:
    std::vector<StateIndex> order_;
    std::vector<StateIndex> group_;
};

} // namespace detail

inline Quota compute_quota(const PopulationProfile& profile, std::uint64_t house_size)
{
    Quota q;
    q.house_size = house_size;
    q.denominator = profile.total();
    q.floors.reserve(profile.size());
    q.remainders.reserve(profile.size());
    for (auto p : profile.populations()) {
        const u128 scaled = static_cast<u128>(house_size) * p;
        q.floors.push_back(static_cast<std::uint64_t>(scaled / profile.total()));
        q.remainders.push_back(static_cast<std::uint64_t>(scaled % profile.total()));
    }
    return q;
}

/// Tie groups straddling the rounding cutoff; at most one exists.
inline std::vector<TieEvent> detect_ties(const Quota& quota)
{
    detail::Rounder rounder;
    std::vector<TieEvent> out;
    if (auto t = rounder.tie(quota.remainders, quota.leftover(), quota.house_size))
        out.push_back(std::move(*t));
    return out;
}

inline Allocation allocate(const Quota& quota, const TiePolicy& policy)
{
    detail::Rounder rounder;
    Allocation a;
    a.house_size = quota.house_size;
    a.seats = quota.floors;
    rounder.select(quota.remainders, quota.leftover(), quota.house_size, policy, a.rounded_up);
    for (auto i : a.rounded_up)
        ++a.seats[i];
    return a;
}

inline Allocation hamilton_allocate(const PopulationProfile& profile, std::uint64_t house_size,
                                    const TiePolicy& policy)
{
    return allocate(compute_quota(profile, house_size), policy);
}

} // namespace alabama

#endif
