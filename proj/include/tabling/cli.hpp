#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "tabling/program.hpp"
#include "tabling/tablespace.hpp"
#include "tabling/trie.hpp"

namespace tabling::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kParse = 2, kVerification = 3 };

struct RunReport {
    std::string bench;
    Design design = Design::FS;
    SyncMode sync = SyncMode::TryLock;
    std::size_t threads = 1;
    double time_ms = 0; // mean over repeats
    std::size_t answers = 0;
    MemoryCounters counters;
    std::vector<std::uint64_t> thread_hashes;
};

// Order-sensitive hash of a sorted answer set.
std::uint64_t answer_set_hash(const AnswerSet& answers);

// bench,design,lock,threads,time_ms,answers,te,ba,sts,sf,se,ats
std::string csv_header();
std::string csv_row(const RunReport& r);

// Flags: --program FILE | --bench SPEC, --query GOAL, --design LIST,
// --lock LIST, --threads LIST, --repeat N, --check, --output csv|json,
// --paper-scale, --emit-program. Returns an ExitCode.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace tabling::cli
