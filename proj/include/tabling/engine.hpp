#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "tabling/program.hpp"
#include "tabling/tablespace.hpp"
#include "tabling/term.hpp"
#include "tabling/trie.hpp"

namespace tabling {

struct EvalConfig {
    Design design = Design::FS;
    SyncMode sync = SyncMode::TryLock; // for shared tries; ignored by NS
    std::size_t threads = 1;
    Term query;
};

// Throws ConfigError for thread counts outside [1, 1024] and for SS/FS without synchronization.
void validate(const EvalConfig& cfg);

// Per-thread evaluation counters. The discipline fields are zero on a correct run.
struct EvalStats {
    std::uint64_t tabled_calls = 0;
    std::uint64_t derivations = 0;      // head instances reached by clause resolution
    std::uint64_t new_answer_calls = 0; // one per derivation of a tabled head
    std::uint64_t new_for_thread = 0;
    std::uint64_t incomplete_consumptions = 0; // consumption of an evaluating frame inside its SCC
    std::uint64_t sccs_completed = 0;
    std::uint64_t frames_completed = 0;
    std::uint64_t rounds = 0;     // derivation rounds over all SCCs
    std::uint64_t max_rounds = 0; // largest round count of a single SCC
    // Answers consumed from a frame outside the consumer's SCC before that frame completed.
    std::uint64_t discipline_violations = 0;

    EvalStats& operator+=(const EvalStats& o);
};

// A program checked for the supported fragment (Datalog: constant or variable
// arguments, ground facts, range-restricted clauses, recursion only through
// tabled predicates) and indexed for resolution. Immutable; shared by workers.
class CompiledProgram {
public:
    // Throws UnsupportedProgram.
    explicit CompiledProgram(const Program& program);
    ~CompiledProgram();
    CompiledProgram(const CompiledProgram&) = delete;
    CompiledProgram& operator=(const CompiledProgram&) = delete;

    const std::vector<Predicate>& tabled() const;

    struct Impl;
    const Impl& impl() const { return *impl_; }

private:
    std::unique_ptr<Impl> impl_;
};

struct ThreadResult {
    AnswerSet answers;
    EvalStats stats;
};

// Evaluates query as thread ti over a shared table space. The thread is the
// generator of all of its own calls. Throws UnsupportedProgram if the query
// predicate is not tabled.
ThreadResult solve_thread(const CompiledProgram& program, TableSpace& tables, const Term& query, std::size_t ti);

// Single-call convenience: fresh table space sized for cfg.threads.
AnswerSet solve_thread(const Program& program, const Term& query, std::size_t ti, const EvalConfig& cfg);

struct ParallelResult {
    std::vector<AnswerSet> answers; // per thread
    std::vector<EvalStats> stats;   // per thread
    MemoryCounters counters;
    MemoryCounters released;
    double wall_ms = 0;
};

// Runs cfg.threads workers, all on cfg.query, and joins them. Wall time covers
// the workers only. The first worker error is rethrown after every worker has joined.
ParallelResult solve_parallel(const CompiledProgram& program, const EvalConfig& cfg);
ParallelResult solve_parallel(const Program& program, const EvalConfig& cfg);

} // namespace tabling
