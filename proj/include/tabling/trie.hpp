#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tabling/term.hpp"

namespace tabling {

enum class SyncMode { None, Lock, TryLock };

const char* to_string(SyncMode mode);

// One-byte test-and-test-and-set lock. Blocking acquisition yields after a short spin.
class NodeLock {
public:
    bool try_lock() noexcept {
        return !locked_.load(std::memory_order_relaxed) && !locked_.exchange(true, std::memory_order_acquire);
    }
    void lock() noexcept;
    void unlock() noexcept { locked_.store(false, std::memory_order_release); }

private:
    std::atomic<bool> locked_{false};
};

// Sibling-chained trie node. Children are reached through first_child and the
// sibling chain; new children are always linked at the head of the chain, so a
// node's sibling link is immutable once the node is reachable.
class TrieNode {
public:
    TrieNode() = default;
    TrieNode(const Token& token, TrieNode* parent) : token_(token), parent_(parent) {}
    TrieNode(const TrieNode&) = delete;
    TrieNode& operator=(const TrieNode&) = delete;

    const Token& token() const { return token_; }
    TrieNode* parent() const { return parent_; }
    TrieNode* first_child() const { return first_child_.load(std::memory_order_acquire); }
    TrieNode* sibling() const { return sibling_; }
    NodeLock& lock() { return lock_; }

    void* payload() const { return payload_.load(std::memory_order_acquire); }
    void set_payload(void* p) { payload_.store(p, std::memory_order_release); }

    // A terminal node ends a complete stored entry (a subgoal or an answer).
    bool is_terminal() const { return terminal_.load(std::memory_order_acquire); }
    // Returns true if this call made the node terminal.
    bool mark_terminal() { return !terminal_.exchange(true, std::memory_order_acq_rel); }

private:
    friend struct TrieOps;

    Token token_{};
    TrieNode* parent_ = nullptr;
    std::atomic<TrieNode*> first_child_{nullptr};
    TrieNode* sibling_ = nullptr;
    std::atomic<void*> payload_{nullptr};
    NodeLock lock_;
    std::atomic<bool> terminal_{false};
};

struct InsertResult {
    TrieNode* node;
    bool created;
};

struct PathResult {
    TrieNode* leaf;
    std::size_t created;
};

// Optional per-call instrumentation for the trylock loop.
struct InsertProbe {
    std::size_t trylock_rounds = 0;
    bool found_after_lock = false; // another thread linked the token between our scan and the lock
    // Called after each unsuccessful unlocked scan; lets tests widen race windows.
    void (*on_miss)() = nullptr;
    // Called while holding the parent's lock, before the critical scan.
    void (*in_critical)() = nullptr;
};

// Returns the unique child of parent carrying token, creating it if absent.
// None: caller must be the only mutator. Lock: blocks on the parent's lock after
// an unsuccessful scan. TryLock: rescans newly linked siblings between
// non-blocking lock attempts.
InsertResult trie_check_insert_node(TrieNode& parent, const Token& token, SyncMode mode,
                                    InsertProbe* probe = nullptr);

// Precondition: toks is non-empty.
PathResult trie_check_insert_path(TrieNode& root, std::span<const Token> toks, SyncMode mode);

// Looks up a path without inserting. Returns nullptr if absent.
const TrieNode* trie_find_path(const TrieNode& root, std::span<const Token> toks);

// One token sequence per terminal node reachable from root; a terminal root
// yields the empty sequence.
std::vector<TokenSeq> trie_enumerate(const TrieNode& root);

// Tokens on the path from the root's child down to node, in order.
void trie_path_tokens(const TrieNode& node, TokenSeq& out);

std::size_t trie_child_count(const TrieNode& node);
// Nodes below root (root excluded).
std::size_t trie_node_count(const TrieNode& root);

// Frees every node strictly below root.
void trie_free_children(TrieNode& root);

// Owns a root sentinel and everything below it.
class Trie {
public:
    Trie() = default;
    Trie(const Trie&) = delete;
    Trie& operator=(const Trie&) = delete;
    ~Trie() { trie_free_children(root_); }

    TrieNode& root() { return root_; }
    const TrieNode& root() const { return root_; }

private:
    TrieNode root_;
};

} // namespace tabling
