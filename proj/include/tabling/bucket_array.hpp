#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace tabling {

inline constexpr std::size_t kDirectCells = 32;
inline constexpr std::size_t kIndirectCells = 32;
inline constexpr std::size_t kMaxThreads = 1024;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BucketCell {
    bool direct;
    std::size_t first;  // direct slot, or first-level indirect slot
    std::size_t second; // second-level slot (indirect only)

    friend bool operator==(const BucketCell&, const BucketCell&) = default;
};

// Threads below s use direct cell t; the others map to first-level cell
// (t-s)/u and second-level cell (t-s)%u.
inline BucketCell bucket_cell(std::size_t t, std::size_t s = kDirectCells, std::size_t u = kIndirectCells) {
    if (t >= s + u * u)
        throw ConfigError("thread id " + std::to_string(t) + " exceeds bucket array capacity " +
                          std::to_string(s + u * u));
    if (t < s)
        return {true, t, 0};
    return {false, (t - s) / u, (t - s) % u};
}

// Two-level thread-indexed array of owned T. Second-level arrays are allocated
// lazily and published with a CAS, so at most one is ever installed per cell.
template <class T>
class BucketArray {
public:
    struct Slot {
        T* value;
        bool created;       // value was created by this call
        bool level_created; // a second-level array was installed by this call
    };

    BucketArray() = default;
    BucketArray(const BucketArray&) = delete;
    BucketArray& operator=(const BucketArray&) = delete;

    ~BucketArray() {
        for (auto& c : direct_)
            delete c.load(std::memory_order_relaxed);
        for (auto& l : indirect_) {
            Level* level = l.load(std::memory_order_relaxed);
            if (!level)
                continue;
            for (auto& c : level->cells)
                delete c.load(std::memory_order_relaxed);
            delete level;
        }
    }

    T* get(std::size_t t) const {
        const std::atomic<T*>* cell = find_cell(bucket_cell(t));
        return cell ? cell->load(std::memory_order_acquire) : nullptr;
    }

    // Returns the value in cell t, creating it with make() if empty. If two
    // callers race on the same cell, exactly one value survives.
    template <class Make>
    Slot get_or_create(std::size_t t, Make&& make) {
        bool level_created = false;
        std::atomic<T*>& cell = cell_for(bucket_cell(t), level_created);
        if (T* v = cell.load(std::memory_order_acquire))
            return {v, false, level_created};
        std::unique_ptr<T> fresh = make();
        T* expected = nullptr;
        if (cell.compare_exchange_strong(expected, fresh.get(), std::memory_order_acq_rel))
            return {fresh.release(), true, level_created};
        return {expected, false, level_created};
    }

    std::size_t level_count() const {
        std::size_t n = 0;
        for (auto& l : indirect_)
            n += l.load(std::memory_order_acquire) ? 1 : 0;
        return n;
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (auto& c : direct_)
            if (T* v = c.load(std::memory_order_acquire))
                fn(*v);
        for (auto& l : indirect_)
            if (Level* level = l.load(std::memory_order_acquire))
                for (auto& c : level->cells)
                    if (T* v = c.load(std::memory_order_acquire))
                        fn(*v);
    }

private:
    struct Level {
        std::array<std::atomic<T*>, kIndirectCells> cells{};
    };

    const std::atomic<T*>* find_cell(const BucketCell& bc) const {
        if (bc.direct)
            return &direct_[bc.first];
        Level* level = indirect_[bc.first].load(std::memory_order_acquire);
        return level ? &level->cells[bc.second] : nullptr;
    }

    std::atomic<T*>& cell_for(const BucketCell& bc, bool& level_created) {
        if (bc.direct)
            return direct_[bc.first];
        std::atomic<Level*>& slot = indirect_[bc.first];
        Level* level = slot.load(std::memory_order_acquire);
        if (!level) {
            auto fresh = std::make_unique<Level>();
            Level* expected = nullptr;
            if (slot.compare_exchange_strong(expected, fresh.get(), std::memory_order_acq_rel)) {
                level = fresh.release();
                level_created = true;
            } else {
                level = expected;
            }
        }
        return level->cells[bc.second];
    }

    std::array<std::atomic<T*>, kDirectCells> direct_{};
    std::array<std::atomic<Level*>, kIndirectCells> indirect_{};
};

} // namespace tabling
