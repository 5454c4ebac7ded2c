#ifndef ALABAMA_IO_HPP
#define ALABAMA_IO_HPP

// Profile input (JSON, CSV) and JSON/CSV rendering of results.

#include "core.hpp"
#include "simulate.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

namespace alabama::io {

using json = nlohmann::ordered_json;

class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

inline std::uint64_t parse_population(const std::string& text)
{
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw ParseError("population '" + text + "' is not a positive integer");
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used, 10);
        if (used != text.size() || v == 0)
            throw ParseError("population '" + text + "' is not a positive integer");
        return v;
    } catch (const std::out_of_range&) {
        throw ParseError("population '" + text + "' is too large");
    }
}

/// "53,33,14"
inline PopulationProfile parse_inline_populations(const std::string& text)
{
    std::vector<std::uint64_t> pops;
    for (const auto& field : split(text, ','))
        pops.push_back(parse_population(field));
    return PopulationProfile(std::move(pops));
}

/// {"populations":[53,33,14],"names":["A","B","C"]}
inline PopulationProfile profile_from_json(const json& doc)
{
    if (!doc.is_object() || !doc.contains("populations") || !doc["populations"].is_array())
        throw ParseError("profile JSON needs a \"populations\" array");
    std::vector<std::uint64_t> pops;
    for (const auto& v : doc["populations"]) {
        if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0)
            throw ParseError("populations must be positive integers");
        pops.push_back(v.get<std::uint64_t>());
    }
    std::vector<std::string> names;
    if (doc.contains("names")) {
        if (!doc["names"].is_array())
            throw ParseError("\"names\" must be an array of strings");
        for (const auto& v : doc["names"]) {
            if (!v.is_string())
                throw ParseError("\"names\" must be an array of strings");
            names.push_back(v.get<std::string>());
        }
    }
    return PopulationProfile(std::move(pops), std::move(names));
}

/// One "name,population" per line; an optional header line and blank lines are skipped.
inline PopulationProfile profile_from_csv(std::istream& in)
{
    std::vector<std::uint64_t> pops;
    std::vector<std::string> names;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty())
            continue;
        const auto fields = split(line, ',');
        if (fields.size() != 2)
            throw ParseError("expected 'name,population' but got '" + line + "'");
        if (first && !fields[1].empty() && !std::isdigit(static_cast<unsigned char>(fields[1][0]))) {
            first = false;
            continue;
        }
        first = false;
        names.push_back(fields[0]);
        pops.push_back(parse_population(fields[1]));
    }
    if (pops.empty())
        throw ParseError("no states in CSV input");
    return PopulationProfile(std::move(pops), std::move(names));
}

/// Reads a profile from a .json file or any other file as CSV.
inline PopulationProfile read_profile(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    if (is_json) {
        try {
            return profile_from_json(json::parse(in));
        } catch (const json::exception& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what());
        }
    }
    return profile_from_csv(in);
}

inline json to_json(const Allocation& a)
{
    return json{{"house_size", a.house_size}, {"seats", a.seats}, {"rounded_up", a.rounded_up}};
}

inline Allocation allocation_from_json(const json& doc)
{
    Allocation a;
    a.house_size = doc.at("house_size").get<std::uint64_t>();
    a.seats = doc.at("seats").get<std::vector<std::uint64_t>>();
    a.rounded_up = doc.at("rounded_up").get<std::vector<StateIndex>>();
    return a;
}

inline json to_json(const TieEvent& t)
{
    return json{{"house_size", t.house_size}, {"tied_states", t.tied_states}, {"contested_seats", t.contested_seats}};
}

inline json to_json(const ParadoxReport& r, const std::vector<std::string>& names)
{
    json hist = json::object();
    for (const auto& [k, c] : r.multi_histogram)
        hist[std::to_string(k)] = c;
    json delta = json::object();
    for (const auto& [d, c] : r.delta_histogram)
        delta[std::to_string(d)] = c;
    return json{{"horizon", r.horizon},         {"steps", r.steps()},         {"names", names},
                {"counts", r.counts},           {"gains", r.gains},           {"frequencies", r.frequencies},
                {"multi_histogram", hist},      {"delta_histogram", delta}};
}

inline json to_json(const PeriodicExactResult& r, const std::vector<std::string>& names)
{
    json probs = json::array();
    for (const auto& q : r.per_state_probability)
        probs.push_back(to_string(q));
    return json{{"period", r.period},
                {"names", names},
                {"per_state_probability", probs},
                {"expected_simultaneous", to_string(r.expected_simultaneous)},
                {"tie_steps", r.tie_steps}};
}

inline std::string format_double(double v, int precision = 17)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

inline std::string fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

/// "state,count,frequency" rows.
inline std::string report_csv(const ParadoxReport& r, const std::vector<std::string>& names)
{
    std::ostringstream out;
    out << "state,count,frequency\n";
    for (StateIndex i = 0; i < r.counts.size(); ++i)
        out << names.at(i) << ',' << r.counts[i] << ',' << format_double(r.frequencies[i]) << '\n';
    return out.str();
}

/// "states_losing,steps" rows.
inline std::string histogram_csv(const ParadoxReport& r)
{
    std::ostringstream out;
    out << "states_losing,steps\n";
    for (const auto& [k, c] : r.multi_histogram)
        out << k << ',' << c << '\n';
    return out.str();
}

} // namespace alabama::io

#endif
