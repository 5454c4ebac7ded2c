#ifndef ALABAMA_CLI_HPP
#define ALABAMA_CLI_HPP

// Command-line front end. run() is the whole program minus main(), so the
// subcommands can be exercised in-process.
//
// Exit codes: 0 success, 2 input error, 3 unresolved tie, 4 numeric non-convergence.

#include "average.hpp"
#include "core.hpp"
#include "formula.hpp"
#include "io.hpp"
#include "simulate.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <optional>
#include <ostream>

namespace alabama::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitTie = 3;
inline constexpr int kExitNumeric = 4;

enum class Format { text, json, csv };

struct RunConfig {
    std::string subcommand;
    std::optional<std::string> populations; // inline "a,b,c"
    std::optional<std::string> input_path;
    std::optional<std::string> shares;      // inline exact decimals or fractions
    std::optional<std::size_t> generic_states;
    std::uint64_t house_size = 0;
    std::uint64_t horizon = 0;
    std::string policy = "";
    std::optional<std::uint64_t> seed;
    Format format = Format::text;
    std::string method = "dp";
    double tol = kDefaultPhiTolerance;
    double b_tol = 1e-4;
    unsigned richardson_levels = 4;
    std::uint64_t period_cap = kDefaultPeriodCap;
    std::string m_values;
    bool ratio_only = false;
    std::uint64_t mc_samples = 0;
    double x_max = 5;
    double step = 0.05;
    std::optional<std::string> histogram_csv;
};

class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

struct ShareInput {
    std::vector<mpq_class> exact;
    std::vector<std::string> names;
    std::optional<PopulationProfile> profile; // set when given as integer populations
};

inline std::size_t count_sources(const RunConfig& c)
{
    return c.populations.has_value() + c.input_path.has_value() + c.shares.has_value() + c.generic_states.has_value();
}

inline PopulationProfile load_profile(const RunConfig& c)
{
    if (c.populations.has_value() + c.input_path.has_value() != 1 || count_sources(c) != 1)
        throw InputError("give exactly one of --pop or --input");
    return c.populations ? io::parse_inline_populations(*c.populations) : io::read_profile(*c.input_path);
}

inline ShareInput load_shares(const RunConfig& c)
{
    if (count_sources(c) != 1)
        throw InputError("give exactly one of --pop, --input, --shares or --shares-generic");
    ShareInput in;
    if (c.populations || c.input_path) {
        in.profile = load_profile(c);
        in.exact = in.profile->shares();
        in.names = in.profile->names();
        return in;
    }
    if (c.generic_states) {
        if (!c.seed)
            throw InputError("--shares-generic needs --seed");
        if (*c.generic_states == 0)
            throw InputError("--shares-generic needs at least one state");
        in.exact = generic_shares(*c.generic_states, *c.seed);
    } else {
        mpq_class sum = 0;
        for (const auto& field : io::split(*c.shares, ',')) {
            in.exact.push_back(parse_exact(field));
            if (sgn(in.exact.back()) <= 0)
                throw InputError("shares must be positive");
            sum += in.exact.back();
        }
        if (sum != 1)
            throw InputError("shares must sum to exactly 1 (got " + to_string(sum) + ")");
    }
    for (StateIndex i = 0; i < in.exact.size(); ++i)
        in.names.push_back(default_state_name(i));
    return in;
}

inline std::uint64_t parse_uint(const std::string& s)
{
    if (s.empty() || s.size() > 20 || !std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isdigit(ch); }))
        throw InputError("expected a nonnegative integer, got '" + s + "'");
    try {
        return std::stoull(s);
    } catch (const std::out_of_range&) {
        throw InputError("integer '" + s + "' is too large");
    }
}

inline TiePolicy parse_policy(const std::string& spec, const std::optional<std::uint64_t>& seed, std::size_t states)
{
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "error" && arg.empty())
        return TiePolicy::error_on_tie();
    if (kind == "priority") {
        if (arg.empty())
            return TiePolicy::index_priority(states);
        std::vector<StateIndex> order;
        for (const auto& f : io::split(arg, ','))
            order.push_back(static_cast<StateIndex>(parse_uint(f)));
        if (order.size() != states)
            throw InputError("priority list must name every state exactly once");
        return TiePolicy::fixed_priority(std::move(order));
    }
    if (kind == "lot") {
        if (!arg.empty())
            return TiePolicy::seeded_lot(parse_uint(arg));
        if (!seed)
            throw InputError("policy 'lot' needs --seed or lot:SEED");
        return TiePolicy::seeded_lot(*seed);
    }
    throw InputError("unknown tie policy '" + spec + "' (use error, priority[:i,j,...] or lot[:seed])");
}

inline std::vector<unsigned long> parse_m_values(const std::string& spec)
{
    std::vector<unsigned long> out;
    auto number = [](const std::string& s) {
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isdigit(ch); }))
            throw InputError("bad state count '" + s + "'");
        return std::stoul(s);
    };
    for (const auto& part : io::split(spec, ',')) {
        if (const auto dots = part.find(".."); dots != std::string::npos) {
            const auto lo = number(io::trim(part.substr(0, dots)));
            const auto hi = number(io::trim(part.substr(dots + 2)));
            if (lo > hi)
                throw InputError("empty range '" + part + "'");
            for (auto m = lo; m <= hi; ++m)
                out.push_back(m);
        } else {
            out.push_back(number(part));
        }
    }
    for (auto m : out)
        if (m < 2)
            throw InputError("state counts must be at least 2");
    return out;
}

inline void print_json(std::ostream& out, const io::json& doc) { out << doc.dump(2) << '\n'; }

inline std::string pad(const std::string& s, std::size_t width, bool right = false)
{
    if (s.size() >= width)
        return s;
    return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

/// Renders rows as space-aligned columns; column 0 left-aligned, others right-aligned.
inline void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows)
{
    std::vector<std::size_t> width;
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (width.size() <= c)
                width.push_back(0);
            width[c] = std::max(width[c], r[c].size());
        }
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c)
                line += "  ";
            line += pad(r[c], width[c], c > 0);
        }
        while (!line.empty() && line.back() == ' ')
            line.pop_back();
        out << line << '\n';
    }
}

inline int cmd_apportion(const RunConfig& c, std::ostream& out)
{
    const auto profile = load_profile(c);
    const auto policy = parse_policy(c.policy.empty() ? "error" : c.policy, c.seed, profile.size());
    const auto quota = compute_quota(profile, c.house_size);
    const auto a = allocate(quota, policy);
    switch (c.format) {
    case Format::json:
        print_json(out, io::to_json(a));
        break;
    case Format::csv:
        out << "state,population,quota,seats,rounded_up\n";
        for (StateIndex i = 0; i < profile.size(); ++i)
            out << profile.names()[i] << ',' << profile.population(i) << ',' << to_string(quota.value(i)) << ','
                << a.seats[i] << ',' << (a.is_rounded_up(i) ? 1 : 0) << '\n';
        break;
    case Format::text: {
        std::vector<std::vector<std::string>> rows{{"state", "pop.", "mu_i", "seats"}};
        for (StateIndex i = 0; i < profile.size(); ++i)
            rows.push_back({profile.names()[i], std::to_string(profile.population(i)),
                            io::fixed(quota.value(i).get_d(), 2),
                            (a.is_rounded_up(i) ? "*" : "") + std::to_string(a.seats[i])});
        rows.push_back({"sum", std::to_string(profile.total()), io::fixed(static_cast<double>(c.house_size), 2),
                        std::to_string(c.house_size)});
        print_table(out, rows);
        out << c.house_size << " seats; * = rounded up\n";
        break;
    }
    }
    return kExitOk;
}

inline int cmd_simulate(const RunConfig& c, std::ostream& out)
{
    if (c.horizon < 2)
        throw InputError("-N must be at least 2");
    const auto in = load_shares(c);
    const PopulationProfile profile = in.profile ? *in.profile : profile_from_shares(in.exact, in.names);
    const auto policy = parse_policy(c.policy.empty() ? "priority" : c.policy, c.seed, profile.size());
    const auto report = paradox_events(profile, c.horizon, policy);
    if (c.histogram_csv) {
        std::ofstream h(*c.histogram_csv);
        if (!h)
            throw InputError("cannot write '" + *c.histogram_csv + "'");
        h << io::histogram_csv(report);
    }
    switch (c.format) {
    case Format::json:
        print_json(out, io::to_json(report, profile.names()));
        break;
    case Format::csv:
        out << io::report_csv(report, profile.names());
        break;
    case Format::text: {
        out << "house sizes 1.." << c.horizon << " (" << report.steps() << " steps)\n";
        std::vector<std::vector<std::string>> rows{{"state", "share", "losses", "gains", "frequency"}};
        for (StateIndex i = 0; i < profile.size(); ++i) {
            mpq_class f(to_mpz(report.counts[i]), to_mpz(c.horizon));
            f.canonicalize();
            rows.push_back({profile.names()[i], io::format_double(profile.share_values()[i], 6),
                            std::to_string(report.counts[i]), std::to_string(report.gains[i]),
                            io::fixed(report.frequencies[i], 6) + " (" + to_string(f) + ")"});
        }
        print_table(out, rows);
        out << "states losing at once:";
        if (report.multi_histogram.empty())
            out << " none";
        for (const auto& [k, n] : report.multi_histogram)
            out << "  " << k << ":" << n;
        out << "\nsteps with a paradox: " << io::fixed(report.any_paradox_fraction(), 6) << '\n';
        break;
    }
    }
    return kExitOk;
}

inline int cmd_prob(const RunConfig& c, std::ostream& out)
{
    const auto in = load_shares(c);
    const std::string& method = c.method;
    std::vector<std::string> values;
    std::vector<double> bounds;
    io::json doc{{"method", method}, {"names", in.names}};
    if (method == "periodic") {
        if (!in.profile)
            throw InputError("method 'periodic' needs integer populations (--pop or --input)");
        const auto r = periodic_exact(*in.profile, c.period_cap);
        for (const auto& q : r.per_state_probability)
            values.push_back(to_string(q));
        doc["probabilities"] = values;
        doc["period"] = r.period;
        doc["expected_simultaneous"] = to_string(r.expected_simultaneous);
    } else {
        std::vector<double> shares;
        for (const auto& s : in.exact)
            shares.push_back(s.get_d());
        std::vector<double> q;
        for (StateIndex i = 0; i < shares.size(); ++i) {
            if (method == "dp")
                q.push_back(q_exact_dp(shares, i));
            else if (method == "esp")
                q.push_back(q_exact_esp(shares, i));
            else if (method == "brute")
                q.push_back(q_bruteforce(shares, i));
            else if (method == "poisson") {
                const auto p = q_poisson(shares, i, c.tol);
                q.push_back(p.approx);
                bounds.push_back(p.error_bound);
            } else
                throw InputError("unknown method '" + method + "' (dp, esp, brute, poisson, periodic)");
        }
        for (double v : q)
            values.push_back(io::format_double(v));
        doc["probabilities"] = q;
        if (!bounds.empty())
            doc["error_bounds"] = bounds;
        double total = 0;
        for (double v : q)
            total += v;
        doc["expected_simultaneous"] = total;
    }
    switch (c.format) {
    case Format::json:
        print_json(out, doc);
        break;
    case Format::csv:
        out << "state,probability" << (bounds.empty() ? "" : ",error_bound") << '\n';
        for (StateIndex i = 0; i < values.size(); ++i) {
            out << in.names[i] << ',' << values[i];
            if (!bounds.empty())
                out << ',' << io::format_double(bounds[i]);
            out << '\n';
        }
        break;
    case Format::text: {
        std::vector<std::vector<std::string>> rows{{"state", "share", "q"}};
        if (!bounds.empty())
            rows[0].push_back("error bound");
        for (StateIndex i = 0; i < values.size(); ++i) {
            rows.push_back({in.names[i], io::format_double(in.exact[i].get_d(), 6), values[i]});
            if (!bounds.empty())
                rows.back().push_back(io::format_double(bounds[i], 6));
        }
        print_table(out, rows);
        out << "method: " << method << "; expected number suffering per step: "
            << (doc["expected_simultaneous"].is_string() ? doc["expected_simultaneous"].get<std::string>()
                                                         : io::format_double(doc["expected_simultaneous"].get<double>()))
            << '\n';
        break;
    }
    }
    return kExitOk;
}

inline int cmd_expected(const RunConfig& c, std::ostream& out)
{
    const auto ms = parse_m_values(c.m_values);
    if (c.mc_samples > 0 && !c.seed)
        throw InputError("--mc needs --seed");
    struct Row {
        unsigned long m;
        mpq_class smallest, given;
        std::optional<double> ratio;
        std::optional<MonteCarloPair> mc;
    };
    std::vector<Row> rows;
    for (auto m : ms) {
        Row r{m, expected_min_probability(m), expected_probability(m), std::nullopt, std::nullopt};
        if (sgn(r.smallest) > 0)
            r.ratio = round_to(mpq_class(r.given / r.smallest).get_d(), 5);
        if (c.mc_samples > 0)
            r.mc = monte_carlo_expected(m, c.mc_samples, *c.seed);
        rows.push_back(std::move(r));
    }
    auto ratio_text = [](const Row& r) { return r.ratio ? io::fixed(*r.ratio, 5) : std::string("-"); };
    switch (c.format) {
    case Format::json: {
        io::json arr = io::json::array();
        for (const auto& r : rows) {
            io::json o{{"m", r.m}};
            if (!c.ratio_only) {
                o["expected_min_probability"] = to_string(r.smallest);
                o["expected_probability"] = to_string(r.given);
            }
            o["ratio"] = r.ratio ? io::json(*r.ratio) : io::json(nullptr);
            if (r.mc) {
                o["mc_expected_min_probability"] = {{"mean", r.mc->smallest.mean}, {"std_error", r.mc->smallest.std_error}};
                o["mc_expected_probability"] = {{"mean", r.mc->given_state.mean}, {"std_error", r.mc->given_state.std_error}};
                o["mc_samples"] = c.mc_samples;
                o["seed"] = *c.seed;
            }
            arr.push_back(std::move(o));
        }
        print_json(out, arr);
        break;
    }
    case Format::csv:
        out << "m" << (c.ratio_only ? "" : ",expected_min_probability,expected_probability") << ",ratio"
            << (c.mc_samples ? ",mc_min_mean,mc_min_se,mc_mean,mc_se" : "") << '\n';
        for (const auto& r : rows) {
            out << r.m;
            if (!c.ratio_only)
                out << ',' << to_string(r.smallest) << ',' << to_string(r.given);
            out << ',' << (r.ratio ? io::fixed(*r.ratio, 5) : "");
            if (r.mc)
                out << ',' << io::format_double(r.mc->smallest.mean) << ',' << io::format_double(r.mc->smallest.std_error)
                    << ',' << io::format_double(r.mc->given_state.mean) << ','
                    << io::format_double(r.mc->given_state.std_error);
            out << '\n';
        }
        break;
    case Format::text: {
        std::vector<std::vector<std::string>> table;
        if (c.ratio_only)
            table.push_back({"m", "ratio"});
        else
            table.push_back({"m", "E q_(m)", "E q_m", "ratio"});
        if (c.mc_samples)
            for (const char* h : {"MC E q_(m)", "MC E q_m"})
                table[0].push_back(h);
        for (const auto& r : rows) {
            std::vector<std::string> line{std::to_string(r.m)};
            if (!c.ratio_only) {
                line.push_back(to_string(r.smallest));
                line.push_back(to_string(r.given));
            }
            line.push_back(ratio_text(r));
            if (r.mc) {
                line.push_back(io::format_double(r.mc->smallest.mean, 6) + " +- " +
                               io::format_double(r.mc->smallest.std_error, 2));
                line.push_back(io::format_double(r.mc->given_state.mean, 6) + " +- " +
                               io::format_double(r.mc->given_state.std_error, 2));
            }
            table.push_back(std::move(line));
        }
        print_table(out, table);
        break;
    }
    }
    return kExitOk;
}

inline int cmd_psi(const RunConfig& c, std::ostream& out)
{
    const auto curve = psi_curve(c.x_max, c.step);
    if (c.format == Format::json) {
        io::json arr = io::json::array();
        for (const auto& [x, y] : curve)
            arr.push_back({{"x", x}, {"psi", y}});
        print_json(out, arr);
        return kExitOk;
    }
    for (const auto& [x, y] : curve)
        out << io::format_double(x, 10) << ',' << io::format_double(y, 15) << '\n';
    return kExitOk;
}

inline int cmd_b(const RunConfig& c, std::ostream& out)
{
    const auto b = limit_constant_b_checked(c.b_tol, c.richardson_levels);
    const double diff = b.integral - b.extrapolated;
    switch (c.format) {
    case Format::json: {
        io::json seq = io::json::array();
        for (const auto& [m, a] : b.sequence)
            seq.push_back({{"m", m}, {"m_expected_probability", a}});
        print_json(out, io::json{{"integral", b.integral},
                                 {"extrapolated", b.extrapolated},
                                 {"difference", diff},
                                 {"tolerance", c.b_tol},
                                 {"sequence", seq}});
        break;
    }
    case Format::csv:
        out << "method,value\nintegral," << io::format_double(b.integral) << "\nextrapolated,"
            << io::format_double(b.extrapolated) << '\n';
        break;
    case Format::text:
        out << "b (integral of Psi(x) e^-x)    " << io::fixed(b.integral, 8) << '\n'
            << "b (extrapolated m E q_m)       " << io::fixed(b.extrapolated, 8) << '\n'
            << "difference                     " << io::format_double(diff, 3) << '\n'
            << "b * e                          " << io::fixed(b.integral * std::exp(1.0), 5) << '\n';
        break;
    }
    return kExitOk;
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Hamilton apportionment and Alabama paradox probabilities", "alabama"};
    app.require_subcommand(1);
    RunConfig c;
    const std::map<std::string, Format> formats{{"text", Format::text}, {"json", Format::json}, {"csv", Format::csv}};

    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", c.format, "Output format")->transform(CLI::CheckedTransformer(formats));
    };
    auto add_populations = [&](CLI::App* sub) {
        sub->add_option("--pop", c.populations, "Inline populations, e.g. 53,33,14");
        sub->add_option("--input", c.input_path, "Profile file (.json or name,population CSV)");
    };
    auto add_shares = [&](CLI::App* sub) {
        sub->add_option("--shares", c.shares, "Exact shares summing to 1, e.g. 0.45,0.35,0.20 or 1/3,...");
        sub->add_option("--shares-generic", c.generic_states, "Random generic shares for this many states");
    };

    auto* apportion = app.add_subcommand("apportion", "Hamilton allocation for one house size");
    add_populations(apportion);
    apportion->add_option("-n,--seats", c.house_size, "House size")->required();
    apportion->add_option("--policy", c.policy, "Tie policy: error (default), priority[:i,j,...], lot[:seed]");
    apportion->add_option("--seed", c.seed, "Seed for the lot policy");
    add_format(apportion);

    auto* simulate = app.add_subcommand("simulate", "Paradox counts over house sizes 1..N");
    add_populations(simulate);
    add_shares(simulate);
    simulate->add_option("-N,--horizon", c.horizon, "Largest house size")->required();
    simulate->add_option("--policy", c.policy, "Tie policy: priority (default), priority:i,j,..., error, lot[:seed]");
    simulate->add_option("--seed", c.seed, "Seed for generic shares or the lot policy");
    simulate->add_option("--histogram-csv", c.histogram_csv, "Also write the multi-paradox histogram here");
    add_format(simulate);

    auto* prob = app.add_subcommand("prob", "Per-state paradox probabilities");
    add_populations(prob);
    add_shares(prob);
    prob->add_option("--method", c.method, "dp, esp, brute, poisson or periodic")
        ->check(CLI::IsMember({"dp", "esp", "brute", "poisson", "periodic"}));
    prob->add_option("--seed", c.seed, "Seed for generic shares");
    prob->add_option("--tol", c.tol, "Series truncation tolerance for the Poisson method");
    prob->add_option("--period-cap", c.period_cap, "Largest period enumerated by the periodic method");
    add_format(prob);

    auto* expected = app.add_subcommand("expected", "Exact averages over uniformly random shares");
    expected->add_option("-m", c.m_values, "State counts: 5, 3..9 or 3,10,20")->required();
    expected->add_flag("--ratio", c.ratio_only, "Only the ratio E q_m / E q_(m)");
    expected->add_option("--mc", c.mc_samples, "Monte Carlo samples per m (needs --seed)");
    expected->add_option("--seed", c.seed, "Monte Carlo seed");
    add_format(expected);

    auto* psi_cmd = app.add_subcommand("psi", "Tabulate Psi as x,psi rows");
    psi_cmd->add_option("--xmax", c.x_max, "Largest x")->check(CLI::NonNegativeNumber);
    psi_cmd->add_option("--step", c.step, "Grid step")->check(CLI::PositiveNumber);
    add_format(psi_cmd);

    auto* b_cmd = app.add_subcommand("b", "Limit constant b by integration and by extrapolation");
    b_cmd->add_option("--tol", c.b_tol, "Agreement tolerance in [1e-6, 1e-3]");
    b_cmd->add_option("--levels", c.richardson_levels, "Number of doublings of m used for extrapolation (1-5)")
        ->check(CLI::Range(1, 5));
    add_format(b_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInput;
    }
    c.subcommand = app.get_subcommands().front()->get_name();

    try {
        if (c.subcommand == "apportion")
            return detail::cmd_apportion(c, out);
        if (c.subcommand == "simulate")
            return detail::cmd_simulate(c, out);
        if (c.subcommand == "prob")
            return detail::cmd_prob(c, out);
        if (c.subcommand == "expected")
            return detail::cmd_expected(c, out);
        if (c.subcommand == "psi")
            return detail::cmd_psi(c, out);
        return detail::cmd_b(c, out);
    } catch (const TieUnresolved& e) {
        err << "error: " << e.what() << '\n';
        return kExitTie;
    } catch (const NoConvergence& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

} // namespace alabama::cli

#endif
