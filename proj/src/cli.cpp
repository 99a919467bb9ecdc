#include "tabling/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tabling/bench.hpp"
#include "tabling/engine.hpp"
#include "tabling/oracle.hpp"
#include "tabling/parser.hpp"

namespace tabling::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VerificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Design parse_design(const std::string& s) {
    if (s == "ns")
        return Design::NS;
    if (s == "ss")
        return Design::SS;
    if (s == "fs")
        return Design::FS;
    throw UsageError("unknown design '" + s + "' (expected ns, ss or fs)");
}

SyncMode parse_lock(const std::string& s) {
    if (s == "none")
        return SyncMode::None;
    if (s == "lock")
        return SyncMode::Lock;
    if (s == "trylock")
        return SyncMode::TryLock;
    throw UsageError("unknown lock mode '" + s + "' (expected none, lock or trylock)");
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

nlohmann::json to_json(const RunReport& r) {
    nlohmann::json hashes = nlohmann::json::array();
    for (std::uint64_t h : r.thread_hashes)
        hashes.push_back(hex(h));
    return {
        {"bench", r.bench},
        {"design", to_string(r.design)},
        {"lock", to_string(r.sync)},
        {"threads", r.threads},
        {"time_ms", r.time_ms},
        {"answers", r.answers},
        {"te", r.counters.te},
        {"ba", r.counters.ba},
        {"sts", r.counters.sts},
        {"sf", r.counters.sf},
        {"se", r.counters.se},
        {"ats", r.counters.ats},
        {"thread_hashes", hashes},
    };
}

struct Options {
    std::string program_file;
    std::string bench;
    std::string query;
    std::vector<std::string> designs{"fs"};
    std::vector<std::string> locks{"trylock"};
    std::vector<std::size_t> threads{1};
    std::size_t repeat = 5;
    bool check = false;
    std::string output = "csv";
    bool paper_scale = false;
    bool emit_program = false;
};

int run(const Options& opt, std::ostream& out, std::ostream& err) {
    Program program;
    std::string name;
    Term query;
    try {
        if (!opt.bench.empty()) {
            const bench::BenchInstance b = bench::parse_bench_spec(opt.bench);
            program = bench::make_program(b, opt.paper_scale);
            name = bench::bench_name(b);
            query = opt.query.empty() ? bench::default_query() : parse_goal(opt.query);
        } else {
            std::ifstream in(opt.program_file);
            if (!in)
                throw UsageError("cannot read program file '" + opt.program_file + "'");
            std::stringstream text;
            text << in.rdbuf();
            program = parse_program(text.str());
            name = opt.program_file;
            if (opt.query.empty())
                throw UsageError("--query is required with --program");
            query = parse_goal(opt.query);
        }
    } catch (const bench::BenchError& e) {
        throw UsageError(e.what());
    }

    if (opt.emit_program) {
        out << format_program(program);
        return kOk;
    }

    std::vector<EvalConfig> configs;
    for (const std::string& d : opt.designs)
        for (const std::string& l : opt.locks)
            for (std::size_t t : opt.threads) {
                EvalConfig cfg{parse_design(d), parse_lock(l), t, query};
                validate(cfg);
                configs.push_back(cfg);
            }
    if (opt.repeat == 0)
        throw UsageError("--repeat must be at least 1");

    const CompiledProgram compiled(program);
    std::uint64_t expected_hash = 0;
    std::size_t expected_size = 0;
    if (opt.check) {
        const AnswerSet expected = oracle::oracle_solve(program, query);
        expected_hash = answer_set_hash(expected);
        expected_size = expected.size();
    }

    nlohmann::json rows = nlohmann::json::array();
    if (opt.output == "csv")
        out << csv_header() << '\n';
    for (const EvalConfig& cfg : configs) {
        RunReport report{name, cfg.design, cfg.sync, cfg.threads, 0, 0, {}, {}};
        double total_ms = 0;
        for (std::size_t rep = 0; rep < opt.repeat; ++rep) {
            const ParallelResult res = solve_parallel(compiled, cfg);
            total_ms += res.wall_ms;
            report.counters = res.counters;
            report.thread_hashes.clear();
            for (const AnswerSet& a : res.answers)
                report.thread_hashes.push_back(answer_set_hash(a));
            report.answers = res.answers.front().size();
            for (std::size_t ti = 1; ti < res.answers.size(); ++ti)
                if (report.thread_hashes[ti] != report.thread_hashes[0] || res.answers[ti] != res.answers[0])
                    throw VerificationError("thread " + std::to_string(ti) + " answer set differs from thread 0 (" +
                                            std::to_string(res.answers[ti].size()) + " vs " +
                                            std::to_string(res.answers[0].size()) + " answers)");
            if (opt.check && (report.thread_hashes[0] != expected_hash || report.answers != expected_size))
                throw VerificationError("answer set differs from the oracle (" + std::to_string(report.answers) +
                                        " vs " + std::to_string(expected_size) + " answers)");
        }
        report.time_ms = total_ms / static_cast<double>(opt.repeat);
        if (opt.output == "csv")
            out << csv_row(report) << '\n';
        else
            rows.push_back(to_json(report));
    }
    if (opt.output == "json")
        out << rows.dump(2) << '\n';
    (void)err;
    return kOk;
}

} // namespace

std::uint64_t answer_set_hash(const AnswerSet& answers) {
    std::uint64_t h = 1469598103934665603ull;
    for (const Term& t : answers) {
        h ^= hash_value(t);
        h *= 1099511628211ull;
    }
    return h;
}

std::string csv_header() { return "bench,design,lock,threads,time_ms,answers,te,ba,sts,sf,se,ats"; }

std::string csv_row(const RunReport& r) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(3);
    s << r.bench << ',' << to_string(r.design) << ',' << to_string(r.sync) << ',' << r.threads << ',' << r.time_ms
      << ',' << r.answers << ',' << r.counters.te << ',' << r.counters.ba << ',' << r.counters.sts << ','
      << r.counters.sf << ',' << r.counters.se << ',' << r.counters.ats;
    return s.str();
}

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-threaded tabled Datalog evaluation over NS, SS and FS table spaces"};
    Options opt;
    auto* program = app.add_option("--program", opt.program_file, "Program file");
    auto* bench = app.add_option("--bench", opt.bench, "Benchmark spec, e.g. pathleft:cycle:100");
    program->excludes(bench);
    bench->excludes(program);
    app.add_option("--query", opt.query, "Query goal (default path(X,Y) for benches)");
    app.add_option("--design", opt.designs, "Designs: ns,ss,fs")->delimiter(',');
    app.add_option("--lock", opt.locks, "Lock modes for shared tries: none,lock,trylock")->delimiter(',');
    app.add_option("--threads", opt.threads, "Thread counts")->delimiter(',')->check(CLI::Range(1, 1024));
    app.add_option("--repeat", opt.repeat, "Runs averaged per configuration");
    app.add_flag("--check", opt.check, "Compare every answer set with the bottom-up oracle");
    app.add_option("--output", opt.output, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--paper-scale", opt.paper_scale, "Allow depths above the desk cap");
    app.add_flag("--emit-program", opt.emit_program, "Print the program text and exit");

    std::ostringstream cli_out, cli_err;
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, cli_out, cli_err);
        out << cli_out.str();
        err << cli_err.str();
        return code == 0 ? kOk : kUsage;
    }
    if (opt.program_file.empty() && opt.bench.empty()) {
        err << "error: one of --program or --bench is required\n";
        return kUsage;
    }

    try {
        return run(opt, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const UnsupportedProgram& e) {
        err << "unsupported program: " << e.what() << '\n';
        return kParse;
    } catch (const VerificationError& e) {
        err << "verification failed: " << e.what() << '\n';
        return kVerification;
    }
}

} // namespace tabling::cli
