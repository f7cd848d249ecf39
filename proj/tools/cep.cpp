#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lazycep/bench.hpp"
#include "lazycep/difftest.hpp"
#include "lazycep/engine.hpp"
#include "lazycep/stream.hpp"

using namespace lazycep;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    return out;
}

// "250", "250ms", "5 sec", "2min", "1hour"
Window parse_window_arg(const std::string& s) {
    size_t i = 0;
    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
    if (i == 0) throw UsageError("bad --window '" + s + "'");
    double amount = std::stod(s.substr(0, i));
    std::string unit = s.substr(i);
    unit.erase(0, unit.find_first_not_of(' '));
    for (auto& c : unit) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    double scale;
    if (unit.empty() || unit == "ms" || unit == "msec" || unit == "msecs") scale = 1;
    else if (unit == "s" || unit == "sec" || unit == "secs" || unit == "seconds") scale = 1000;
    else if (unit == "min" || unit == "mins" || unit == "minutes") scale = 60'000;
    else if (unit == "hour" || unit == "hours" || unit == "h") scale = 3'600'000;
    else throw UsageError("unknown window unit '" + unit + "'");
    double ms = amount * scale;
    if (ms <= 0 || ms != std::floor(ms)) throw UsageError("--window must be a positive whole number of ms");
    return Window(static_cast<Timestamp>(ms));
}

std::map<std::string, double> read_rates(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(slurp(path));
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("rates file: " + std::string(e.what()));
    }
    if (!j.is_object()) throw UsageError("rates file must be a JSON object of type -> rate");
    std::map<std::string, double> out;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number()) throw UsageError("rate for '" + k + "' is not a number");
        out[k] = v.get<double>();
    }
    return out;
}

struct RunArgs {
    std::string pattern, input, generate, window, rates, matches_out, metrics_out, metrics_csv, mode = "lazy";
    std::size_t measure = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool dedup = false;
    int runs = 1;
    std::vector<std::string> params;
};

std::vector<EventPtr> load_stream(const RunArgs& a) {
    if (!a.input.empty()) {
        std::ifstream in(a.input, std::ios::binary);
        if (!in) throw UsageError("cannot open " + a.input);
        return read_csv(in);
    }
    StreamSpec spec = parse_stream_spec(slurp(a.generate));
    if (a.seed_set) spec.seed = a.seed;
    return generate_stream(spec);
}

int cmd_run(const RunArgs& a) {
    ParseOptions po;
    for (const auto& p : a.params) {
        auto eq = p.find('=');
        if (eq == std::string::npos) throw UsageError("--param expects NAME=VALUE");
        po.params[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
    }
    auto chains = to_dnf(parse_pattern(slurp(a.pattern), po));
    if (!a.window.empty()) set_window(chains, parse_window_arg(a.window));
    Mode mode = parse_mode(a.mode);
    auto stream = load_stream(a);

    std::optional<FreqOrder> freq;
    if (is_lazy(mode)) {
        std::map<std::string, double> rates;
        if (!a.rates.empty()) rates = read_rates(a.rates);
        else rates = measure_rates(stream, a.measure ? a.measure : stream.size());
        // Types the pattern mentions but the stream never showed: rarest.
        for (const auto& t : pattern_types(chains))
            if (!rates.count(t) && a.rates.empty()) rates[t] = 1e-9;
        freq = ascending_freq_order(rates, pattern_types(chains));
    }
    auto nfa = compile(chains, mode, freq);

    BenchOptions bo;
    bo.runs = a.runs;
    bo.warmup = a.runs > 1;
    bo.dedup = a.dedup;
    auto res = run_benchmark(nfa, a.mode, stream, bo);

    if (!a.matches_out.empty()) {
        auto out = open_out(a.matches_out);
        write_matches(out, res.matches);
    } else {
        write_matches(std::cout, res.matches);
    }
    if (!a.metrics_out.empty()) open_out(a.metrics_out) << metrics_json(res.report);
    if (!a.metrics_csv.empty()) open_out(a.metrics_csv) << metrics_csv({res.report}, "");
    std::cerr << a.mode << ": " << res.report.events_processed << " events, " << res.matches.size()
              << " matches, " << static_cast<long long>(res.report.throughput) << " events/s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pattern matching over event streams with eager and lazy automata"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* run = app.add_subcommand("run", "Evaluate a pattern over a stream");
    run->add_option("--pattern", ra.pattern, "Pattern file")->required();
    auto* in = run->add_option("--input", ra.input, "Event CSV");
    auto* gen = run->add_option("--generate", ra.generate, "Stream spec JSON");
    in->excludes(gen);
    run->add_option("--mode", ra.mode, "eager | lazy | lazy-pp | lazy-fc | multi")->required();
    run->add_option("--window", ra.window, "Window, overrides WITHIN (e.g. 500ms, 2sec)");
    auto* rates = run->add_option("--rates", ra.rates, "Rates JSON {type: events/sec}");
    auto* measure = run->add_option("--measure-rates", ra.measure, "Estimate rates from the first N events");
    rates->excludes(measure);
    run->add_option("--seed", ra.seed, "Seed for --generate")->each([&](const std::string&) { ra.seed_set = true; });
    run->add_flag("--dedup", ra.dedup, "Drop duplicate matches found by several chains");
    run->add_option("--matches-out", ra.matches_out, "Match file (default stdout)");
    run->add_option("--metrics-out", ra.metrics_out, "Metrics JSON");
    run->add_option("--metrics-csv", ra.metrics_csv, "Metrics in long CSV form");
    run->add_option("--runs", ra.runs, "Timed runs (median); more than one adds a warm-up run")
        ->check(CLI::PositiveNumber);
    run->add_option("--param", ra.params, "Pattern parameter NAME=VALUE");

    std::string spec_file, out_file;
    std::uint64_t gen_seed = 0;
    auto* g = app.add_subcommand("gen", "Write a synthetic stream as CSV");
    g->add_option("--spec", spec_file, "Stream spec JSON")->required();
    g->add_option("--out", out_file, "Output CSV")->required();
    auto* gseed = g->add_option("--seed", gen_seed, "Override the spec seed");

    std::size_t cases = 500, max_events = 25;
    std::uint64_t dseed = 1;
    auto* dt = app.add_subcommand("difftest", "Compare every mode against the brute-force matcher");
    dt->add_option("--cases", cases, "Number of random cases")->required();
    dt->add_option("--seed", dseed, "Seed")->required();
    dt->add_option("--max-events", max_events, "Longest stream");

    std::string show_pattern, show_mode = "lazy", show_rates;
    auto* show = app.add_subcommand("show", "Print the automaton built for a pattern");
    show->add_option("--pattern", show_pattern, "Pattern file")->required();
    show->add_option("--mode", show_mode, "Mode");
    show->add_option("--rates", show_rates, "Rates JSON (default: all equal)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            if (ra.input.empty() && ra.generate.empty()) throw UsageError("one of --input or --generate is required");
            return cmd_run(ra);
        }
        if (*g) {
            StreamSpec spec = parse_stream_spec(slurp(spec_file));
            if (*gseed) spec.seed = gen_seed;
            auto events = generate_stream(spec);
            auto out = open_out(out_file);
            write_csv(out, events);
            return 0;
        }
        if (*dt) {
            auto rep = run_difftest(cases, dseed, max_events);
            if (rep.first) {
                std::cout << "divergence after " << rep.cases << " cases\n" << describe(*rep.first);
                return 1;
            }
            std::cout << rep.cases << " cases, " << rep.mode_runs << " mode runs, " << rep.total_matches
                      << " oracle matches, no divergence\n";
            return 0;
        }
        if (*show) {
            auto chains = to_dnf(parse_pattern(slurp(show_pattern)));
            Mode mode = parse_mode(show_mode);
            std::optional<FreqOrder> freq;
            if (is_lazy(mode)) {
                std::map<std::string, double> rates;
                if (!show_rates.empty()) rates = read_rates(show_rates);
                for (const auto& t : pattern_types(chains)) rates.try_emplace(t, 1.0);
                freq = ascending_freq_order(rates, pattern_types(chains));
            }
            std::cout << compile(chains, mode, freq)->describe();
            return 0;
        }
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "pattern syntax error: " << e.what() << "\n";
        return 2;
    } catch (const PatternError& e) {
        std::cerr << "pattern error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedPattern& e) {
        std::cerr << "unsupported pattern: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
