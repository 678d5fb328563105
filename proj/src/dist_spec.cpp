#include "delaydecay/dist_spec.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

namespace delaydecay {

namespace {

struct KeyValue {
    std::string_view key;
    double value = 0.0;
    std::size_t offset = 0;
};

[[noreturn]] void fail(std::size_t offset, const std::string& msg) {
    std::ostringstream os;
    os << msg << " at position " << offset;
    throw spec_parse_error(offset, os.str());
}

double parse_number(std::string_view token, std::size_t offset) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        fail(offset, "malformed number '" + std::string(token) + "'");
    return value;
}

// Splits "k1=v1,k2=v2" (or ';' separated inside atom groups) into pairs;
// base is the segment's offset in the original input, used for error
// positions.
std::vector<KeyValue> parse_pairs(std::string_view segment, std::size_t base,
                                  char sep) {
    std::vector<KeyValue> pairs;
    std::size_t pos = 0;
    while (true) {
        std::size_t end = segment.find(sep, pos);
        std::string_view item = end == std::string_view::npos
                                    ? segment.substr(pos)
                                    : segment.substr(pos, end - pos);
        std::size_t eq = item.find('=');
        if (item.empty() || eq == std::string_view::npos || eq == 0)
            fail(base + pos, "expected key=value");
        KeyValue kv;
        kv.key = item.substr(0, eq);
        kv.offset = base + pos;
        kv.value = parse_number(item.substr(eq + 1), base + pos + eq + 1);
        pairs.push_back(kv);
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return pairs;
}

// Checks the pair list against an exact key schema and returns values in
// schema order.
std::vector<double> take_keys(const std::vector<KeyValue>& pairs,
                              std::initializer_list<std::string_view> schema,
                              std::size_t base) {
    std::map<std::string_view, const KeyValue*> seen;
    for (const KeyValue& kv : pairs) {
        if (!seen.emplace(kv.key, &kv).second)
            fail(kv.offset, "duplicate key '" + std::string(kv.key) + "'");
        bool known = false;
        for (std::string_view want : schema) known = known || want == kv.key;
        if (!known)
            fail(kv.offset, "unknown key '" + std::string(kv.key) + "'");
    }
    std::vector<double> values;
    for (std::string_view want : schema) {
        auto it = seen.find(want);
        if (it == seen.end())
            fail(base, "missing key '" + std::string(want) + "'");
        values.push_back(it->second->value);
    }
    return values;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

DelayDistribution parse_dist_spec(std::string_view text) {
    std::size_t colon = text.find(':');
    if (colon == std::string_view::npos)
        fail(text.size(), "expected ':' after family name");
    std::string_view family = text.substr(0, colon);
    std::string_view rest = text.substr(colon + 1);
    std::size_t base = colon + 1;
    if (rest.empty()) fail(base, "missing parameters");

    if (family == "dirac") {
        auto v = take_keys(parse_pairs(rest, base, ','), {"tau"}, base);
        return validate(Dirac{v[0]});
    }
    if (family == "gamma") {
        auto v = take_keys(parse_pairs(rest, base, ','), {"k", "lambda"}, base);
        return validate(Gamma{v[0], v[1]});
    }
    if (family == "uniform") {
        auto v = take_keys(parse_pairs(rest, base, ','), {"a", "b"}, base);
        return validate(Uniform{v[0], v[1]});
    }
    if (family == "truncnormal") {
        auto v = take_keys(parse_pairs(rest, base, ','), {"m", "sigma"}, base);
        return validate(TruncatedNormal{v[0], v[1]});
    }
    if (family == "atoms") {
        FiniteAtoms fa;
        std::size_t pos = 0;
        while (true) {
            std::size_t end = rest.find('|', pos);
            std::string_view group = end == std::string_view::npos
                                         ? rest.substr(pos)
                                         : rest.substr(pos, end - pos);
            auto v = take_keys(parse_pairs(group, base + pos, ';'), {"s", "w"},
                               base + pos);
            fa.atoms.push_back(Atom{v[0], v[1]});
            if (end == std::string_view::npos) break;
            pos = end + 1;
        }
        return validate(fa);
    }
    fail(0, "unknown family '" + std::string(family) + "'");
}

std::string render_dist_spec(const DelayDistribution& dist) {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Dirac>) {
                return "dirac:tau=" + format_double(d.tau);
            } else if constexpr (std::is_same_v<T, Gamma>) {
                return "gamma:k=" + format_double(d.k) +
                       ",lambda=" + format_double(d.lambda);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return "uniform:a=" + format_double(d.a) +
                       ",b=" + format_double(d.b);
            } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
                return "truncnormal:m=" + format_double(d.m) +
                       ",sigma=" + format_double(d.sigma);
            } else {
                std::string out = "atoms:";
                bool first = true;
                for (const Atom& at : d.atoms) {
                    if (!first) out += '|';
                    first = false;
                    out += "s=" + format_double(at.s) +
                           ";w=" + format_double(at.w);
                }
                return out;
            }
        },
        dist);
}

} // namespace delaydecay
