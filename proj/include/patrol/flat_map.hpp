#pragma once

// Minimal open-addressing hash map for the solver memo tables: fixed-width
// keys, linear probing, power-of-two capacity, grow at 60% load.

#include <cstdint>
#include <vector>

namespace patrol {

template <typename Key, typename Hash>
class FlatMemo {
 public:
  FlatMemo() { rehash(1 << 12); }

  // Returns the stored value or nullptr.
  const double* find(const Key& k) const {
    size_t i = Hash{}(k) & mask_;
    while (used_[i]) {
      if (keys_[i] == k) return &vals_[i];
      i = (i + 1) & mask_;
    }
    return nullptr;
  }

  void insert(const Key& k, double v) {
    if ((size_ + 1) * 5 > capacity() * 3) rehash(capacity() * 2);
    size_t i = Hash{}(k) & mask_;
    while (used_[i]) {
      if (keys_[i] == k) {
        vals_[i] = v;
        return;
      }
      i = (i + 1) & mask_;
    }
    used_[i] = 1;
    keys_[i] = k;
    vals_[i] = v;
    ++size_;
  }

  std::uint64_t size() const { return size_; }
  std::uint64_t capacity() const { return mask_ + 1; }

 private:
  void rehash(std::uint64_t cap) {
    std::vector<Key> old_keys = std::move(keys_);
    std::vector<double> old_vals = std::move(vals_);
    std::vector<std::uint8_t> old_used = std::move(used_);
    keys_.assign(cap, Key{});
    vals_.assign(cap, 0.0);
    used_.assign(cap, 0);
    mask_ = cap - 1;
    size_ = 0;
    for (size_t i = 0; i < old_used.size(); ++i)
      if (old_used[i]) insert(old_keys[i], old_vals[i]);
  }

  std::vector<Key> keys_;
  std::vector<double> vals_;
  std::vector<std::uint8_t> used_;
  std::uint64_t mask_ = 0;
  std::uint64_t size_ = 0;
};

}  // namespace patrol
