#include "lazycep/stream.hpp"

#include <charconv>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lazycep {

StreamSpec parse_stream_spec(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("stream spec: ") + e.what());
    }
    if (!j.is_object() || !j.contains("rates") || !j["rates"].is_object() || j["rates"].empty())
        throw std::invalid_argument("stream spec needs a non-empty \"rates\" object");
    StreamSpec s;
    try {
        for (const auto& [k, v] : j["rates"].items()) {
            double r = v.get<double>();
            if (!(r > 0) || !std::isfinite(r)) throw std::invalid_argument("rate for '" + k + "' must be positive");
            s.rates[k] = r;
        }
        s.count = j.value("count", s.count);
        s.seed = j.value("seed", s.seed);
        s.price_start = j.value("price_start", s.price_start);
        s.price_step = j.value("price_step", s.price_step);
        s.history_len = j.value("history_len", s.history_len);
        s.stocks_per_type = j.value("stocks_per_type", s.stocks_per_type);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("stream spec: ") + e.what());
    }
    if (s.history_len < 2) throw std::invalid_argument("history_len must be at least 2");
    if (s.stocks_per_type < 1) throw std::invalid_argument("stocks_per_type must be at least 1");
    return s;
}

namespace {

struct Stock {
    std::string id;
    double price;
    std::deque<double> history;
};

}  // namespace

std::vector<EventPtr> generate_stream(const StreamSpec& spec) {
    if (spec.rates.empty()) throw std::invalid_argument("no rates");
    std::mt19937_64 rng(spec.seed);
    auto uniform = [&] { return std::generate_canonical<double, 53>(rng); };
    auto gauss = [&] {
        // Box-Muller; spelled out so the stream does not depend on the
        // standard library's distribution implementation.
        double u1 = uniform(), u2 = uniform();
        return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
    };

    std::vector<std::string> types;
    std::vector<double> cumulative;
    double total = 0;
    for (const auto& [t, r] : spec.rates) {
        types.push_back(t);
        total += r;
        cumulative.push_back(total);
    }
    std::vector<std::vector<Stock>> stocks(types.size());
    for (size_t t = 0; t < types.size(); ++t) {
        for (int k = 0; k < spec.stocks_per_type; ++k) {
            Stock s{types[t] + "-" + std::to_string(k + 1), spec.price_start, {}};
            for (int h = 0; h < spec.history_len; ++h) {
                s.price += spec.price_step * gauss();
                s.history.push_back(s.price);
            }
            stocks[t].push_back(std::move(s));
        }
    }

    std::vector<EventPtr> out;
    out.reserve(spec.count);
    double now = 0;
    for (size_t i = 0; i < spec.count; ++i) {
        now += -std::log1p(-uniform()) / total;
        double pick = uniform() * total;
        size_t t = 0;
        while (t + 1 < types.size() && pick >= cumulative[t]) ++t;
        auto& group = stocks[t];
        Stock& s = group[static_cast<size_t>(uniform() * static_cast<double>(group.size())) % group.size()];
        s.price += spec.price_step * gauss();
        s.history.pop_front();
        s.history.push_back(s.price);
        out.push_back(make_event(types[t], static_cast<Timestamp>(std::floor(now * 1000.0)), i + 1,
                                 {{"stock", s.id},
                                  {"region", types[t]},
                                  {"price", s.price},
                                  {"history", std::vector<double>(s.history.begin(), s.history.end())}}));
    }
    return out;
}

namespace {

const AttrId kStock("stock"), kRegion("region"), kPrice("price"), kHistory("history");

std::string cell(const Event& e, AttrId a) {
    const Value* v = e.find(a);
    return v ? to_string(*v) : std::string();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

template <typename T>
bool parse_num(const std::string& s, T& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<EventPtr>& events) {
    os << kCsvHeader << '\n';
    for (const auto& e : events) {
        os << e->seq << ',' << e->ts << ',' << e->type.name() << ',' << cell(*e, kStock) << ',' << cell(*e, kRegion)
           << ',' << cell(*e, kPrice) << ',' << cell(*e, kHistory) << '\n';
    }
}

std::vector<EventPtr> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("empty event file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw DataError("event file header must be '" + std::string(kCsvHeader) + "'");
    std::vector<EventPtr> out;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split(line, ',');
        auto bad = [&](const std::string& what) { return DataError("line " + std::to_string(lineno) + ": " + what); };
        if (f.size() != 7) throw bad("expected 7 fields");
        SeqNo seq;
        Timestamp ts;
        if (!parse_num(f[0], seq)) throw bad("bad seq '" + f[0] + "'");
        if (!parse_num(f[1], ts)) throw bad("bad ts '" + f[1] + "'");
        if (f[2].empty()) throw bad("missing type");
        std::vector<std::pair<std::string, Value>> attrs;
        if (!f[3].empty()) attrs.emplace_back("stock", f[3]);
        if (!f[4].empty()) attrs.emplace_back("region", f[4]);
        if (!f[5].empty()) {
            double p;
            if (!parse_num(f[5], p)) throw bad("bad price '" + f[5] + "'");
            attrs.emplace_back("price", p);
        }
        if (!f[6].empty()) {
            std::vector<double> h;
            for (const auto& x : split(f[6], ';')) {
                double d;
                if (!parse_num(x, d)) throw bad("bad history value '" + x + "'");
                h.push_back(d);
            }
            attrs.emplace_back("history", std::move(h));
        }
        out.push_back(make_event(f[2], ts, seq, std::move(attrs)));
    }
    return out;
}

std::map<std::string, double> measure_rates(const std::vector<EventPtr>& events, std::size_t n) {
    n = std::min(n, events.size());
    if (n == 0) throw std::invalid_argument("cannot measure rates over zero events");
    std::map<std::string, double> counts;
    for (size_t i = 0; i < n; ++i) counts[events[i]->type.name()] += 1;
    double span = static_cast<double>(events[n - 1]->ts - events[0]->ts) / 1000.0;
    if (span <= 0) span = 1;
    for (auto& [t, c] : counts) c /= span;
    return counts;
}

}  // namespace lazycep
