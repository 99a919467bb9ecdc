#include "tabling/trie.hpp"

#include <algorithm>
#include <thread>

namespace tabling {

namespace {

// Failed trylock rounds before a waiting thread gives up its time slice.
constexpr std::size_t kRoundsBeforeYield = 64;

} // namespace

const char* to_string(SyncMode mode) {
    switch (mode) {
    case SyncMode::None:
        return "none";
    case SyncMode::Lock:
        return "lock";
    case SyncMode::TryLock:
        return "trylock";
    }
    return "?";
}

void NodeLock::lock() noexcept {
    for (std::size_t spins = 0; !try_lock(); ++spins) {
        if (spins >= 32)
            std::this_thread::yield();
    }
}

struct TrieOps {
    static TrieNode* find_between(TrieNode* from, const TrieNode* stop, const Token& token) {
        for (TrieNode* c = from; c != stop; c = c->sibling_)
            if (c->token_ == token)
                return c;
        return nullptr;
    }

    static TrieNode* link_new(TrieNode& parent, const Token& token) {
        auto* child = new TrieNode(token, &parent);
        child->sibling_ = parent.first_child_.load(std::memory_order_relaxed);
        parent.first_child_.store(child, std::memory_order_release);
        return child;
    }

    static void detach_children(TrieNode& parent) { parent.first_child_.store(nullptr, std::memory_order_release); }

    static InsertResult unsynchronized(TrieNode& parent, const Token& token) {
        if (TrieNode* c = find_between(parent.first_child(), nullptr, token))
            return {c, false};
        return {link_new(parent, token), true};
    }

    static InsertResult blocking(TrieNode& parent, const Token& token, InsertProbe* probe) {
        TrieNode* seen = parent.first_child();
        if (TrieNode* c = find_between(seen, nullptr, token))
            return {c, false};
        if (probe && probe->on_miss)
            probe->on_miss();
        parent.lock_.lock();
        if (probe && probe->in_critical)
            probe->in_critical();
        // only nodes linked after our scan still need checking
        if (TrieNode* c = find_between(parent.first_child(), seen, token)) {
            parent.lock_.unlock();
            if (probe)
                probe->found_after_lock = true;
            return {c, false};
        }
        TrieNode* child = link_new(parent, token);
        parent.lock_.unlock();
        return {child, true};
    }

    static InsertResult trylock(TrieNode& parent, const Token& token, InsertProbe* probe) {
        TrieNode* last_child = nullptr;
        std::size_t rounds = 0;
        do {
            TrieNode* first_child = parent.first_child();
            if (TrieNode* c = find_between(first_child, last_child, token)) {
                if (probe)
                    probe->trylock_rounds = rounds + 1;
                return {c, false};
            }
            last_child = first_child;
            if (probe && probe->on_miss)
                probe->on_miss();
            if (++rounds % kRoundsBeforeYield == 0)
                std::this_thread::yield();
        } while (!parent.lock_.try_lock());
        if (probe) {
            probe->trylock_rounds = rounds;
            if (probe->in_critical)
                probe->in_critical();
        }

        if (TrieNode* c = find_between(parent.first_child(), last_child, token)) {
            parent.lock_.unlock();
            if (probe)
                probe->found_after_lock = true;
            return {c, false};
        }
        TrieNode* child = link_new(parent, token);
        parent.lock_.unlock();
        return {child, true};
    }
};

InsertResult trie_check_insert_node(TrieNode& parent, const Token& token, SyncMode mode, InsertProbe* probe) {
    switch (mode) {
    case SyncMode::None:
        return TrieOps::unsynchronized(parent, token);
    case SyncMode::Lock:
        return TrieOps::blocking(parent, token, probe);
    case SyncMode::TryLock:
        return TrieOps::trylock(parent, token, probe);
    }
    return {nullptr, false};
}

PathResult trie_check_insert_path(TrieNode& root, std::span<const Token> toks, SyncMode mode) {
    PathResult result{&root, 0};
    for (const Token& t : toks) {
        auto [node, created] = trie_check_insert_node(*result.leaf, t, mode);
        result.leaf = node;
        result.created += created ? 1 : 0;
    }
    return result;
}

const TrieNode* trie_find_path(const TrieNode& root, std::span<const Token> toks) {
    const TrieNode* node = &root;
    for (const Token& t : toks) {
        const TrieNode* c = node->first_child();
        while (c && c->token() != t)
            c = c->sibling();
        if (!c)
            return nullptr;
        node = c;
    }
    return node;
}

std::vector<TokenSeq> trie_enumerate(const TrieNode& root) {
    std::vector<TokenSeq> out;
    TokenSeq path;
    // (node, depth) pairs; depth is the path length including node
    std::vector<std::pair<const TrieNode*, std::size_t>> stack;
    if (root.is_terminal())
        out.emplace_back();
    for (const TrieNode* c = root.first_child(); c; c = c->sibling())
        stack.emplace_back(c, 1);
    while (!stack.empty()) {
        auto [node, depth] = stack.back();
        stack.pop_back();
        path.resize(depth - 1);
        path.push_back(node->token());
        if (node->is_terminal())
            out.push_back(path);
        for (const TrieNode* c = node->first_child(); c; c = c->sibling())
            stack.emplace_back(c, depth + 1);
    }
    return out;
}

void trie_path_tokens(const TrieNode& node, TokenSeq& out) {
    out.clear();
    for (const TrieNode* n = &node; n->parent(); n = n->parent())
        out.push_back(n->token());
    std::reverse(out.begin(), out.end());
}

std::size_t trie_child_count(const TrieNode& node) {
    std::size_t n = 0;
    for (const TrieNode* c = node.first_child(); c; c = c->sibling())
        ++n;
    return n;
}

std::size_t trie_node_count(const TrieNode& root) {
    std::size_t n = 0;
    std::vector<const TrieNode*> stack{&root};
    while (!stack.empty()) {
        const TrieNode* node = stack.back();
        stack.pop_back();
        for (const TrieNode* c = node->first_child(); c; c = c->sibling()) {
            ++n;
            stack.push_back(c);
        }
    }
    return n;
}

void trie_free_children(TrieNode& root) {
    std::vector<TrieNode*> stack;
    for (TrieNode* c = root.first_child(); c; c = c->sibling())
        stack.push_back(c);
    while (!stack.empty()) {
        TrieNode* node = stack.back();
        stack.pop_back();
        for (TrieNode* c = node->first_child(); c; c = c->sibling())
            stack.push_back(c);
        delete node;
    }
    TrieOps::detach_children(root);
}

} // namespace tabling
