#include <gtest/gtest.h>

#include <latch>
#include <set>
#include <thread>

#include "tabling/trie.hpp"
#include "test_support.hpp"
#include "trie_stress.hpp"

using namespace tabling;

namespace {

const SyncMode kAllModes[] = {SyncMode::None, SyncMode::Lock, SyncMode::TryLock};
const SyncMode kSharedModes[] = {SyncMode::Lock, SyncMode::TryLock};

TokenSeq p_tuple(std::int64_t a, std::int64_t b) {
    return {Token::functor(symbols().intern("p"), 2), Token::integer(a), Token::integer(b)};
}

} // namespace

TEST(TrieNodeInsert, EmptyChain) {
    for (SyncMode mode : kAllModes) {
        Trie t;
        const Token a = Token::atom(symbols().intern("a"));
        const InsertResult r = trie_check_insert_node(t.root(), a, mode);
        EXPECT_TRUE(r.created);
        EXPECT_EQ(t.root().first_child(), r.node);
        EXPECT_EQ(r.node->token(), a);
        EXPECT_EQ(r.node->parent(), &t.root());
    }
}

TEST(TrieNodeInsert, Idempotent) {
    for (SyncMode mode : kAllModes) {
        Trie t;
        const Token a = Token::atom(symbols().intern("a"));
        const InsertResult first = trie_check_insert_node(t.root(), a, mode);
        const InsertResult second = trie_check_insert_node(t.root(), a, mode);
        EXPECT_FALSE(second.created);
        EXPECT_EQ(first.node, second.node);
        EXPECT_EQ(trie_child_count(t.root()), 1u);
    }
}

TEST(TrieNodeInsert, NewNodesGoAtHeadAndSiblingsNeverChange) {
    Trie t;
    std::vector<TrieNode*> nodes;
    for (int i = 0; i < 10; ++i) {
        nodes.push_back(trie_check_insert_node(t.root(), Token::integer(i), SyncMode::Lock).node);
        EXPECT_EQ(t.root().first_child(), nodes.back());
        if (i > 0)
            EXPECT_EQ(nodes.back()->sibling(), nodes[i - 1]);
    }
    for (int i = 1; i < 10; ++i)
        EXPECT_EQ(nodes[i]->sibling(), nodes[i - 1]);
}

TEST(TrieNodeInsert, SixteenThreadsSameTokens) {
    for (SyncMode mode : kSharedModes) {
        Trie t;
        constexpr int kThreads = 16, kTokens = 64;
        std::vector<std::vector<const TrieNode*>> got(kThreads, std::vector<const TrieNode*>(kTokens));
        std::latch start(kThreads);
        {
            std::vector<std::jthread> ws;
            for (int ti = 0; ti < kThreads; ++ti)
                ws.emplace_back([&, ti] {
                    start.arrive_and_wait();
                    for (int k = 0; k < kTokens; ++k) {
                        const int v = (k * 13 + ti * 5) % kTokens; // different orders per thread
                        got[ti][v] = trie_check_insert_node(t.root(), Token::integer(v), mode).node;
                    }
                });
        }
        std::set<std::int64_t> oracle;
        for (int v = 0; v < kTokens; ++v)
            oracle.insert(v);
        std::set<std::int64_t> children;
        for (const TrieNode* c = t.root().first_child(); c; c = c->sibling())
            EXPECT_TRUE(children.insert(c->token().value).second);
        EXPECT_EQ(children, oracle);
        EXPECT_EQ(trie_child_count(t.root()), static_cast<std::size_t>(kTokens));
        for (int v = 0; v < kTokens; ++v)
            for (int ti = 1; ti < kThreads; ++ti)
                EXPECT_EQ(got[ti][v], got[0][v]);
    }
}

TEST(TrieNodeInsert, StressAcrossThreadCounts) {
    for (SyncMode mode : kSharedModes)
        for (std::size_t threads : {2u, 8u, 16u, 24u}) {
            const auto rep = testkit::run_trie_stress(mode, threads, 2000, 300, 1000u + static_cast<std::uint32_t>(threads));
            EXPECT_EQ(rep.violations, 0u) << to_string(mode) << " x" << threads << ": " << rep.first_violation;
            EXPECT_EQ(rep.children, rep.distinct);
            EXPECT_LT(rep.max_trylock_rounds, 100000000u);
        }
}

TEST(TriePath, FreshPathThenSharedPrefix) {
    Trie t;
    const PathResult first = trie_check_insert_path(t.root(), p_tuple(1, 2), SyncMode::None);
    EXPECT_EQ(first.created, 3u);
    TokenSeq path;
    trie_path_tokens(*first.leaf, path);
    EXPECT_EQ(path.size(), 3u);
    EXPECT_EQ(path, p_tuple(1, 2));

    const PathResult second = trie_check_insert_path(t.root(), p_tuple(1, 3), SyncMode::None);
    EXPECT_EQ(second.created, 1u);
    EXPECT_EQ(trie_node_count(t.root()), 4u);

    const PathResult again = trie_check_insert_path(t.root(), p_tuple(1, 2), SyncMode::TryLock);
    EXPECT_EQ(again.created, 0u);
    EXPECT_EQ(again.leaf, first.leaf);
    EXPECT_EQ(trie_find_path(t.root(), p_tuple(1, 3)), second.leaf);
    EXPECT_EQ(trie_find_path(t.root(), p_tuple(2, 3)), nullptr);
}

TEST(TrieEnumerate, TwoEntries) {
    Trie t;
    trie_check_insert_path(t.root(), p_tuple(1, 2), SyncMode::None).leaf->mark_terminal();
    trie_check_insert_path(t.root(), p_tuple(1, 3), SyncMode::None).leaf->mark_terminal();
    auto seqs = trie_enumerate(t.root());
    EXPECT_EQ(seqs.size(), 2u);
    std::sort(seqs.begin(), seqs.end());
    EXPECT_EQ(seqs[0], p_tuple(1, 2));
    EXPECT_EQ(seqs[1], p_tuple(1, 3));
}

TEST(TrieEnumerate, EmptyTrieAndTerminalRoot) {
    Trie t;
    EXPECT_TRUE(trie_enumerate(t.root()).empty());
    t.root().mark_terminal();
    const auto seqs = trie_enumerate(t.root());
    ASSERT_EQ(seqs.size(), 1u);
    EXPECT_TRUE(seqs[0].empty());
}

TEST(TrieEnumerate, AfterConcurrentInsertion) {
    Trie t;
    constexpr int kThreads = 16;
    std::latch start(kThreads);
    {
        std::vector<std::jthread> ws;
        for (int ti = 0; ti < kThreads; ++ti)
            ws.emplace_back([&, ti] {
                start.arrive_and_wait();
                for (int k = 0; k < 64; ++k) {
                    const int v = (k + ti * 11) % 64;
                    trie_check_insert_path(t.root(), p_tuple(v / 8, v % 8), SyncMode::TryLock).leaf->mark_terminal();
                }
            });
    }
    std::set<TokenSeq> got;
    for (const TokenSeq& s : trie_enumerate(t.root()))
        EXPECT_TRUE(got.insert(s).second);
    std::set<TokenSeq> expected;
    for (int v = 0; v < 64; ++v)
        expected.insert(p_tuple(v / 8, v % 8));
    EXPECT_EQ(got, expected);
    EXPECT_EQ(trie_node_count(t.root()), 1u + 8u + 64u);
}

TEST(TrieProperty, NodeCountMatchesDistinctPrefixes) {
    testkit::TermGen gen(4242u);
    for (SyncMode mode : kAllModes) {
        Trie t;
        std::set<TokenSeq> prefixes, entries;
        for (int i = 0; i < 500; ++i) {
            const TokenSeq seq = encode_term(canonicalize_variant(gen.term(3)));
            for (std::size_t n = 1; n <= seq.size(); ++n)
                prefixes.insert(TokenSeq(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(n)));
            entries.insert(seq);
            trie_check_insert_path(t.root(), seq, mode).leaf->mark_terminal();
        }
        EXPECT_EQ(trie_node_count(t.root()), prefixes.size());
        const auto seqs = trie_enumerate(t.root());
        EXPECT_EQ(std::set<TokenSeq>(seqs.begin(), seqs.end()), entries);
    }
}

TEST(NodeLock, MutualExclusion) {
    NodeLock lock;
    std::size_t counter = 0;
    {
        std::vector<std::jthread> ws;
        for (int ti = 0; ti < 8; ++ti)
            ws.emplace_back([&] {
                for (int i = 0; i < 20000; ++i) {
                    lock.lock();
                    ++counter;
                    lock.unlock();
                }
            });
    }
    EXPECT_EQ(counter, 8u * 20000u);
    EXPECT_TRUE(lock.try_lock());
    EXPECT_FALSE(lock.try_lock());
    lock.unlock();
}
