#pragma once

// Synthetic stock-tick streams and the CSV event format.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lazycep/event.hpp"

namespace lazycep {

struct StreamSpec {
    std::size_t count = 10000;
    std::uint64_t seed = 1;
    // Events per second of stream time, by type.
    std::map<std::string, double> rates;
    double price_start = 100.0;
    double price_step = 1.0;  // random-walk step stddev
    int history_len = 8;
    int stocks_per_type = 1;
};

// Reads the JSON form: {"count", "seed", "rates": {type: rate}, "price_start",
// "price_step", "history_len", "stocks_per_type"}; only rates is required.
// Throws std::invalid_argument.
StreamSpec parse_stream_spec(const std::string& json_text);

// Merged Poisson arrivals at the given rates, integer-millisecond
// timestamps, seq from 1. Attributes: stock, region (the type name), price,
// history (the stock's last history_len prices, newest last).
std::vector<EventPtr> generate_stream(const StreamSpec& spec);

inline constexpr const char* kCsvHeader = "seq,ts,type,stock,region,price,history";

void write_csv(std::ostream& os, const std::vector<EventPtr>& events);
// Empty cells leave the attribute unset. Throws DataError on malformed rows.
std::vector<EventPtr> read_csv(std::istream& is);

// Per-type rate estimate (events per second) from the first n events.
std::map<std::string, double> measure_rates(const std::vector<EventPtr>& events, std::size_t n);

}  // namespace lazycep
