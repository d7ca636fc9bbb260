#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

namespace gnisim {

/// Hermite multi-index: a tuple of non-negative degrees, one per coordinate.
/// Trailing zeros are trimmed on construction so equal indices compare equal
/// regardless of the ambient dimension they were written in.
class MultiIndex {
 public:
  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> entries) : entries_(entries) { trim(); }
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) { trim(); }

  const std::vector<int>& entries() const { return entries_; }
  int size() const { return static_cast<int>(entries_.size()); }
  int operator[](int i) const { return i < size() ? entries_[i] : 0; }

  /// |S|: total degree.
  int order() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

  bool is_zero() const { return entries_.empty(); }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) = default;
  friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) = default;

 private:
  void trim() {
    while (!entries_.empty() && entries_.back() == 0) entries_.pop_back();
  }

  std::vector<int> entries_;
};

/// All multi-indices over n coordinates with total degree <= d, in
/// degree-major order (the zero index first).
inline std::vector<MultiIndex> multi_indices_up_to(int n, int d) {
  std::vector<MultiIndex> out;
  if (n == 0) {
    out.emplace_back();
    return out;
  }
  std::vector<int> cur(n, 0);
  auto emit_level = [&](auto&& self, int pos, int rem) -> void {
    if (pos == n - 1) {
      cur[pos] = rem;
      out.emplace_back(cur);
      cur[pos] = 0;
      return;
    }
    for (int q = rem; q >= 0; --q) {
      cur[pos] = q;
      self(self, pos + 1, rem - q);
    }
    cur[pos] = 0;
  };
  for (int total = 0; total <= d; ++total) emit_level(emit_level, 0, total);
  return out;
}

}  // namespace gnisim
