#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tabling/bucket_array.hpp"
#include "tabling/program.hpp"
#include "tabling/term.hpp"
#include "tabling/trie.hpp"

namespace tabling {

// No-Sharing, Subgoal-Sharing, Full-Sharing.
enum class Design { NS, SS, FS };

const char* to_string(Design d);

// Structure counts per kind. Byte usage is these counts times the per-kind
// struct size, so the table-space memory laws can be checked on counts.
struct MemoryCounters {
    std::uint64_t te = 0;          // table entries
    std::uint64_t ba = 0;          // bucket arrays, both levels
    std::uint64_t ba_indirect = 0; // second-level bucket arrays (included in ba)
    std::uint64_t sts = 0;         // subgoal trie nodes
    std::uint64_t sf = 0;          // subgoal frames
    std::uint64_t se = 0;          // subgoal entries
    std::uint64_t ats = 0;         // answer trie nodes

    MemoryCounters& operator+=(const MemoryCounters& o);
    friend bool operator==(const MemoryCounters&, const MemoryCounters&) = default;
};

enum class FrameState : std::uint8_t { Evaluating, Complete };

// Answer leaves in insertion order. A leaf's payload links to the next leaf,
// and a leaf is marked terminal only after it is linked, so every terminal
// leaf is reachable from head().
class AnswerChain {
public:
    TrieNode* head() const { return head_.load(std::memory_order_acquire); }
    static TrieNode* next(const TrieNode& leaf) { return static_cast<TrieNode*>(leaf.payload()); }
    std::size_t size() const { return size_.load(std::memory_order_acquire); }

    // Links leaf unless it is already terminal. Returns true if this call linked it.
    bool ensure_linked(TrieNode& leaf, bool synchronized);

private:
    std::atomic<TrieNode*> head_{nullptr};
    TrieNode* tail_ = nullptr;
    std::atomic<std::size_t> size_{0};
    NodeLock lock_;
};

// Completion bookkeeping written by the owning thread's evaluator.
struct SccInfo {
    static constexpr std::uint64_t kUnvisited = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t dfn = kUnvisited; // depth-first number on the dependency stack
    std::uint64_t low = kUnvisited; // oldest dfn this frame depends on (leader link)
};

class SubgoalEntry;
class TableSpace;

// Per-thread control record for one subgoal call.
class SubgoalFrame {
public:
    FrameState state() const { return state_; }
    bool is_complete() const { return state_ == FrameState::Complete; }
    std::size_t owner() const { return owner_; }
    const TrieNode& subgoal_leaf() const { return *leaf_; }
    // Number of distinct variables in the subgoal, i.e. the answer tuple width.
    std::size_t answer_arity() const { return answer_arity_; }
    // FS only: back pointer to the shared entry.
    SubgoalEntry* entry() const { return entry_; }

    SccInfo scc;

private:
    friend class TableSpace;

    SubgoalFrame(std::size_t owner, TrieNode* leaf, std::size_t arity) :
        owner_(owner), leaf_(leaf), answer_arity_(arity) {}

    FrameState state_ = FrameState::Evaluating;
    std::size_t owner_;
    TrieNode* leaf_;
    std::size_t answer_arity_;
    std::unique_ptr<Trie> answers_; // NS/SS private answer trie
    AnswerChain chain_;             // NS/SS
    SubgoalEntry* entry_ = nullptr; // FS
    // FS only: answers this thread has derived, keyed by their shared-trie leaf.
    // Controls fixpoint detection; the shared trie remains the only answer store.
    std::unordered_set<const TrieNode*> derived_;
};

// FS only: the shared part of a subgoal call.
class SubgoalEntry {
public:
    const TrieNode& answer_root() const { return answers_.root(); }
    const AnswerChain& chain() const { return chain_; }

private:
    friend class TableSpace;

    Trie answers_;
    AnswerChain chain_;
    BucketArray<SubgoalFrame> frames_;
};

class TableEntry {
public:
    const Predicate& predicate() const { return predicate_; }

private:
    friend class TableSpace;

    explicit TableEntry(Predicate p) : predicate_(p) {}

    Predicate predicate_;
    std::unique_ptr<BucketArray<Trie>> thread_roots_; // NS
    std::unique_ptr<Trie> shared_root_;               // SS/FS
};

// The common table space: one table entry per tabled predicate, subgoal tries
// below it, and the design-specific frames/bucket arrays/subgoal entries at the
// subgoal leaves. All allocation is counted per calling thread.
class TableSpace {
public:
    // shared_sync applies to structures the design shares between threads;
    // private structures always use SyncMode::None.
    TableSpace(Design design, SyncMode shared_sync, std::size_t max_threads, std::span<const Predicate> tabled);
    ~TableSpace();
    TableSpace(const TableSpace&) = delete;
    TableSpace& operator=(const TableSpace&) = delete;

    Design design() const { return design_; }
    SyncMode shared_sync() const { return sync_; }
    std::size_t max_threads() const { return max_threads_; }

    TableEntry* table_entry(const Predicate& p) const;

    // canonical_subgoal is the pre-order encoding of a canonical call. Idempotent per (subgoal, ti).
    SubgoalFrame& tabled_subgoal_call(TableEntry& te, std::span<const Token> canonical_subgoal, std::size_t ti);
    SubgoalFrame& tabled_subgoal_call(TableEntry& te, const Term& canonical_subgoal, std::size_t ti);

    // Stores the answer (one token run per subgoal variable) and reports whether
    // it is new for the frame's owner. The caller keeps backtracking either way.
    // Throws std::logic_error on a complete frame.
    bool new_answer(SubgoalFrame& frame, std::span<const Token> answer);
    bool new_answer(SubgoalFrame& frame, std::span<const Term> answer);

    // Throws std::logic_error if any frame is already complete; then nothing changes.
    void mark_complete(std::span<SubgoalFrame* const> frames);

    // Throws std::logic_error on an evaluating frame.
    std::vector<std::vector<Term>> answers_of(const SubgoalFrame& frame) const;

    // Insertion-ordered answers of the frame's design-appropriate answer trie.
    // Valid on evaluating frames; used by the evaluator to consume answers.
    const AnswerChain& answer_chain(const SubgoalFrame& frame) const;
    const TrieNode& answer_root(const SubgoalFrame& frame) const;

    Term subgoal_of(const SubgoalFrame& frame) const;

    MemoryCounters snapshot_counters() const;
    MemoryCounters thread_counters(std::size_t ti) const;

    // Logically removes the thread's private structures by moving its private
    // counts into the released tally. Nothing is freed before destruction.
    void release_thread(std::size_t ti);
    MemoryCounters released_counters() const;

private:
    struct alignas(64) CounterBlock {
        std::atomic<std::uint64_t> ba{0}, ba_indirect{0}, sts{0}, sf{0}, se{0}, ats{0};
    };

    TrieNode& subgoal_root(TableEntry& te, std::size_t ti);
    SubgoalFrame& frame_in_bucket(BucketArray<SubgoalFrame>& bucket, TrieNode& leaf, std::size_t arity,
                                  SubgoalEntry* entry, std::size_t ti);
    std::unique_ptr<SubgoalFrame> make_frame(TrieNode& leaf, std::size_t arity, SubgoalEntry* entry,
                                             std::size_t ti) const;
    CounterBlock& block(std::size_t ti);

    Design design_;
    SyncMode sync_;
    std::size_t max_threads_;
    std::unordered_map<Predicate, std::unique_ptr<TableEntry>> entries_;
    std::unique_ptr<CounterBlock[]> blocks_;
    std::uint64_t te_count_ = 0;
    std::uint64_t te_ba_count_ = 0;
    std::unique_ptr<std::atomic<bool>[]> released_flags_;
};

} // namespace tabling
