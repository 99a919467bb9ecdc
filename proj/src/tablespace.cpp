#include "tabling/tablespace.hpp"

#include <stdexcept>
#include <string>

namespace tabling {

namespace {

template <class Fn>
void for_each_terminal(TrieNode& root, Fn&& fn) {
    std::vector<TrieNode*> stack{&root};
    while (!stack.empty()) {
        TrieNode* node = stack.back();
        stack.pop_back();
        if (node->is_terminal())
            fn(*node);
        for (TrieNode* c = node->first_child(); c; c = c->sibling())
            stack.push_back(c);
    }
}

// Get-or-create of a leaf attachment, serialized by the leaf's lock field.
template <class T, class Make>
std::pair<T*, bool> leaf_payload(TrieNode& leaf, bool synchronized, Make&& make) {
    if (void* p = leaf.payload())
        return {static_cast<T*>(p), false};
    if (synchronized)
        leaf.lock().lock();
    std::pair<T*, bool> result;
    if (void* p = leaf.payload()) {
        result = {static_cast<T*>(p), false};
    } else {
        T* fresh = make().release();
        leaf.set_payload(fresh);
        result = {fresh, true};
    }
    if (synchronized)
        leaf.lock().unlock();
    return result;
}

std::size_t count_variables(std::span<const Token> toks) {
    std::size_t n = 0;
    for (const Token& t : toks)
        if (t.kind == Token::Kind::Var)
            n = std::max<std::size_t>(n, static_cast<std::size_t>(t.value) + 1);
    return n;
}

} // namespace

const char* to_string(Design d) {
    switch (d) {
    case Design::NS:
        return "ns";
    case Design::SS:
        return "ss";
    case Design::FS:
        return "fs";
    }
    return "?";
}

MemoryCounters& MemoryCounters::operator+=(const MemoryCounters& o) {
    te += o.te;
    ba += o.ba;
    ba_indirect += o.ba_indirect;
    sts += o.sts;
    sf += o.sf;
    se += o.se;
    ats += o.ats;
    return *this;
}

bool AnswerChain::ensure_linked(TrieNode& leaf, bool synchronized) {
    if (leaf.is_terminal())
        return false;
    if (synchronized)
        lock_.lock();
    bool linked = false;
    if (!leaf.is_terminal()) {
        if (tail_)
            tail_->set_payload(&leaf);
        else
            head_.store(&leaf, std::memory_order_release);
        tail_ = &leaf;
        size_.fetch_add(1, std::memory_order_release);
        leaf.mark_terminal();
        linked = true;
    }
    if (synchronized)
        lock_.unlock();
    return linked;
}

TableSpace::TableSpace(Design design, SyncMode shared_sync, std::size_t max_threads,
                       std::span<const Predicate> tabled) :
    design_(design), sync_(shared_sync), max_threads_(max_threads) {
    if (max_threads == 0 || max_threads > kMaxThreads)
        throw ConfigError("thread count must be in [1, " + std::to_string(kMaxThreads) + "]");
    if (design != Design::NS && shared_sync == SyncMode::None)
        throw ConfigError(std::string("design ") + to_string(design) +
                          " shares tries between threads and needs lock or trylock");
    blocks_ = std::make_unique<CounterBlock[]>(max_threads);
    released_flags_ = std::make_unique<std::atomic<bool>[]>(max_threads);
    for (const Predicate& p : tabled) {
        if (entries_.contains(p))
            continue;
        auto te = std::unique_ptr<TableEntry>(new TableEntry(p));
        if (design == Design::NS) {
            te->thread_roots_ = std::make_unique<BucketArray<Trie>>();
            ++te_ba_count_;
        } else {
            te->shared_root_ = std::make_unique<Trie>();
        }
        ++te_count_;
        entries_.emplace(p, std::move(te));
    }
}

TableSpace::~TableSpace() {
    // Leaf attachments are owned through the subgoal tries; free them before the tries go.
    for (auto& [_, te] : entries_) {
        switch (design_) {
        case Design::NS:
            te->thread_roots_->for_each([](Trie& trie) {
                for_each_terminal(trie.root(), [](TrieNode& leaf) { delete static_cast<SubgoalFrame*>(leaf.payload()); });
            });
            break;
        case Design::SS:
            for_each_terminal(te->shared_root_->root(), [](TrieNode& leaf) {
                delete static_cast<BucketArray<SubgoalFrame>*>(leaf.payload());
            });
            break;
        case Design::FS:
            for_each_terminal(te->shared_root_->root(),
                              [](TrieNode& leaf) { delete static_cast<SubgoalEntry*>(leaf.payload()); });
            break;
        }
    }
}

TableEntry* TableSpace::table_entry(const Predicate& p) const {
    auto it = entries_.find(p);
    return it == entries_.end() ? nullptr : it->second.get();
}

TableSpace::CounterBlock& TableSpace::block(std::size_t ti) {
    if (ti >= max_threads_)
        throw ConfigError("thread id " + std::to_string(ti) + " not registered (max " +
                          std::to_string(max_threads_) + ")");
    return blocks_[ti];
}

TrieNode& TableSpace::subgoal_root(TableEntry& te, std::size_t ti) {
    if (design_ != Design::NS)
        return te.shared_root_->root();
    auto slot = te.thread_roots_->get_or_create(ti, [] { return std::make_unique<Trie>(); });
    if (slot.level_created) {
        block(ti).ba.fetch_add(1, std::memory_order_relaxed);
        block(ti).ba_indirect.fetch_add(1, std::memory_order_relaxed);
    }
    return slot.value->root();
}

std::unique_ptr<SubgoalFrame> TableSpace::make_frame(TrieNode& leaf, std::size_t arity, SubgoalEntry* entry,
                                                     std::size_t ti) const {
    auto frame = std::unique_ptr<SubgoalFrame>(new SubgoalFrame(ti, &leaf, arity));
    if (entry)
        frame->entry_ = entry;
    else
        frame->answers_ = std::make_unique<Trie>();
    return frame;
}

SubgoalFrame& TableSpace::frame_in_bucket(BucketArray<SubgoalFrame>& bucket, TrieNode& leaf, std::size_t arity,
                                          SubgoalEntry* entry, std::size_t ti) {
    auto slot = bucket.get_or_create(ti, [&] { return make_frame(leaf, arity, entry, ti); });
    CounterBlock& c = block(ti);
    if (slot.created)
        c.sf.fetch_add(1, std::memory_order_relaxed);
    if (slot.level_created) {
        c.ba.fetch_add(1, std::memory_order_relaxed);
        c.ba_indirect.fetch_add(1, std::memory_order_relaxed);
    }
    return *slot.value;
}

SubgoalFrame& TableSpace::tabled_subgoal_call(TableEntry& te, std::span<const Token> canonical_subgoal,
                                              std::size_t ti) {
    CounterBlock& c = block(ti);
    TrieNode& root = subgoal_root(te, ti);
    const SyncMode mode = design_ == Design::NS ? SyncMode::None : sync_;
    auto path = trie_check_insert_path(root, canonical_subgoal, mode);
    c.sts.fetch_add(path.created, std::memory_order_relaxed);
    TrieNode& leaf = *path.leaf;
    leaf.mark_terminal();
    const std::size_t arity = count_variables(canonical_subgoal);

    switch (design_) {
    case Design::NS: {
        auto [frame, created] =
            leaf_payload<SubgoalFrame>(leaf, false, [&] { return make_frame(leaf, arity, nullptr, ti); });
        if (created)
            c.sf.fetch_add(1, std::memory_order_relaxed);
        return *frame;
    }
    case Design::SS: {
        auto [bucket, created] =
            leaf_payload<BucketArray<SubgoalFrame>>(leaf, true, [] { return std::make_unique<BucketArray<SubgoalFrame>>(); });
        if (created)
            c.ba.fetch_add(1, std::memory_order_relaxed);
        return frame_in_bucket(*bucket, leaf, arity, nullptr, ti);
    }
    case Design::FS: {
        auto [entry, created] =
            leaf_payload<SubgoalEntry>(leaf, true, [] { return std::make_unique<SubgoalEntry>(); });
        if (created) {
            c.se.fetch_add(1, std::memory_order_relaxed);
            c.ba.fetch_add(1, std::memory_order_relaxed);
        }
        return frame_in_bucket(entry->frames_, leaf, arity, entry, ti);
    }
    }
    throw std::logic_error("unknown design");
}

SubgoalFrame& TableSpace::tabled_subgoal_call(TableEntry& te, const Term& canonical_subgoal, std::size_t ti) {
    TokenSeq toks = encode_term(canonical_subgoal);
    return tabled_subgoal_call(te, toks, ti);
}

bool TableSpace::new_answer(SubgoalFrame& frame, std::span<const Token> answer) {
    if (frame.is_complete())
        throw std::logic_error("new_answer on a complete subgoal frame");
    CounterBlock& c = block(frame.owner());
    if (SubgoalEntry* entry = frame.entry_) {
        auto path = trie_check_insert_path(entry->answers_.root(), answer, sync_);
        c.ats.fetch_add(path.created, std::memory_order_relaxed);
        // link before reporting, so the caller's next scan of the chain sees it
        entry->chain_.ensure_linked(*path.leaf, true);
        return frame.derived_.insert(path.leaf).second;
    }
    auto path = trie_check_insert_path(frame.answers_->root(), answer, SyncMode::None);
    c.ats.fetch_add(path.created, std::memory_order_relaxed);
    return frame.chain_.ensure_linked(*path.leaf, false);
}

bool TableSpace::new_answer(SubgoalFrame& frame, std::span<const Term> answer) {
    TokenSeq toks = encode_tuple(answer);
    return new_answer(frame, toks);
}

void TableSpace::mark_complete(std::span<SubgoalFrame* const> frames) {
    for (const SubgoalFrame* f : frames)
        if (f->is_complete())
            throw std::logic_error("subgoal frame completed twice");
    for (SubgoalFrame* f : frames)
        f->state_ = FrameState::Complete;
}

const AnswerChain& TableSpace::answer_chain(const SubgoalFrame& frame) const {
    return frame.entry_ ? frame.entry_->chain_ : frame.chain_;
}

const TrieNode& TableSpace::answer_root(const SubgoalFrame& frame) const {
    return frame.entry_ ? frame.entry_->answers_.root() : frame.answers_->root();
}

std::vector<std::vector<Term>> TableSpace::answers_of(const SubgoalFrame& frame) const {
    if (!frame.is_complete())
        throw std::logic_error("answers_of on a subgoal frame that is still evaluating");
    std::vector<std::vector<Term>> out;
    for (const TokenSeq& seq : trie_enumerate(answer_root(frame)))
        out.push_back(decode_tuple(seq, frame.answer_arity()));
    return out;
}

Term TableSpace::subgoal_of(const SubgoalFrame& frame) const {
    TokenSeq toks;
    trie_path_tokens(frame.subgoal_leaf(), toks);
    return decode_term(toks);
}

MemoryCounters TableSpace::thread_counters(std::size_t ti) const {
    const CounterBlock& b = blocks_[ti];
    MemoryCounters m;
    m.ba = b.ba.load(std::memory_order_relaxed);
    m.ba_indirect = b.ba_indirect.load(std::memory_order_relaxed);
    m.sts = b.sts.load(std::memory_order_relaxed);
    m.sf = b.sf.load(std::memory_order_relaxed);
    m.se = b.se.load(std::memory_order_relaxed);
    m.ats = b.ats.load(std::memory_order_relaxed);
    return m;
}

MemoryCounters TableSpace::snapshot_counters() const {
    MemoryCounters total;
    total.te = te_count_;
    total.ba = te_ba_count_;
    for (std::size_t ti = 0; ti < max_threads_; ++ti)
        total += thread_counters(ti);
    return total;
}

void TableSpace::release_thread(std::size_t ti) {
    if (ti >= max_threads_)
        throw ConfigError("thread id " + std::to_string(ti) + " not registered");
    released_flags_[ti].store(true, std::memory_order_release);
}

MemoryCounters TableSpace::released_counters() const {
    MemoryCounters released;
    for (std::size_t ti = 0; ti < max_threads_; ++ti) {
        if (!released_flags_[ti].load(std::memory_order_acquire))
            continue;
        MemoryCounters own = thread_counters(ti);
        released.sf += own.sf;
        if (design_ == Design::FS)
            continue;
        released.ats += own.ats;
        if (design_ == Design::NS)
            released.sts += own.sts;
    }
    return released;
}

} // namespace tabling
