#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gauss_hermite.hpp"

namespace pwt {

inline constexpr int kMaxPartitionGround = 12;

// Elements are 0..n-1 internally; blocks sorted by least element.
class SetPartition {
 public:
  SetPartition() = default;

  // from a restricted-growth string
  explicit SetPartition(std::vector<int> rgs) : label_(std::move(rgs)) { rebuild(); }

  static SetPartition from_blocks(int n, const std::vector<std::vector<int>>& blocks) {
    std::vector<int> lab(n, -1);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].empty()) throw std::invalid_argument("empty block");
      for (int v : blocks[b]) {
        if (v < 0 || v >= n || lab[v] != -1) throw std::invalid_argument("blocks do not partition the ground set");
        lab[v] = static_cast<int>(b);
      }
    }
    for (int v : lab)
      if (v < 0) throw std::invalid_argument("blocks do not cover the ground set");
    return canonical(lab);
  }

  static SetPartition discrete(int n) {
    std::vector<int> lab(n);
    for (int i = 0; i < n; ++i) lab[i] = i;
    return SetPartition(lab);
  }

  // relabel arbitrary block ids into a restricted-growth string
  static SetPartition canonical(const std::vector<int>& ids) {
    std::map<int, int> seen;
    std::vector<int> lab(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto it = seen.find(ids[i]);
      if (it == seen.end()) it = seen.emplace(ids[i], static_cast<int>(seen.size())).first;
      lab[i] = it->second;
    }
    return SetPartition(lab);
  }

  int ground_size() const { return static_cast<int>(label_.size()); }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  int block_of(int v) const { return label_[v]; }
  const std::vector<int>& labels() const { return label_; }

  friend bool operator==(const SetPartition& a, const SetPartition& b) { return a.label_ == b.label_; }
  friend bool operator<(const SetPartition& a, const SetPartition& b) { return a.label_ < b.label_; }

 private:
  void rebuild() {
    blocks_.clear();
    for (std::size_t i = 0; i < label_.size(); ++i) {
      int b = label_[i];
      if (b < 0 || b > static_cast<int>(blocks_.size())) throw std::invalid_argument("not a restricted-growth string");
      if (b == static_cast<int>(blocks_.size())) blocks_.emplace_back();
      blocks_[b].push_back(static_cast<int>(i));
    }
  }

  std::vector<int> label_;
  std::vector<std::vector<int>> blocks_;
};

struct IntegerPartition {
  std::vector<int> parts;  // non-increasing

  int total() const {
    int s = 0;
    for (int p : parts) s += p;
    return s;
  }
  friend bool operator==(const IntegerPartition&, const IntegerPartition&) = default;
  friend auto operator<=>(const IntegerPartition&, const IntegerPartition&) = default;
};

inline void check_ground(int n) {
  if (n < 0 || n > kMaxPartitionGround)
    throw std::length_error("set partition enumeration limited to n <= " + std::to_string(kMaxPartitionGround) +
                            ", got " + std::to_string(n));
}

inline Integer bell_number(int n);

// Split enumeration is budgeted by its actual size, Bell(12) at most.
inline void check_split_budget(const std::vector<int>& color) {
  std::map<int, int> sizes;
  for (int c : color) ++sizes[c];
  Integer total = 1;
  for (auto [c, k] : sizes) total *= bell_number(k);
  if (total > bell_number(kMaxPartitionGround))
    throw std::length_error("split partition enumeration too large: " + total.str() + " partitions");
}

// Visits split partitions: an element may only join a block of its own color.
// Pass an empty coloring for unrestricted enumeration. Visitor returns false to stop.
template <class F>
void for_each_partition(int n, const std::vector<int>& color, F&& visit) {
  if (color.empty()) {
    check_ground(n);
  } else {
    check_split_budget(color);
  }
  std::vector<int> rgs(n, 0), block_color;
  bool stop = false;
  std::function<void(int, int)> rec = [&](int i, int nb) {
    if (stop) return;
    if (i == n) {
      if (!visit(SetPartition(rgs))) stop = true;
      return;
    }
    for (int b = 0; b <= nb && !stop; ++b) {
      if (b < nb && !color.empty() && block_color[b] != color[i]) continue;
      rgs[i] = b;
      if (b == nb) {
        block_color.push_back(color.empty() ? 0 : color[i]);
        rec(i + 1, nb + 1);
        block_color.pop_back();
      } else {
        rec(i + 1, nb);
      }
    }
  };
  rec(0, 0);
}

template <class F>
void for_each_set_partition(int n, F&& visit) {
  for_each_partition(n, {}, std::forward<F>(visit));
}

inline std::vector<SetPartition> enumerate_set_partitions(int n) {
  std::vector<SetPartition> out;
  for_each_set_partition(n, [&](const SetPartition& p) {
    out.push_back(p);
    return true;
  });
  return out;
}

inline std::vector<SetPartition> enumerate_split_partitions(const std::vector<int>& color) {
  std::vector<SetPartition> out;
  for_each_partition(static_cast<int>(color.size()), color, [&](const SetPartition& p) {
    out.push_back(p);
    return true;
  });
  return out;
}

template <class T>
SetPartition kernel(const std::vector<T>& indices) {
  std::vector<int> ids(indices.size());
  std::map<T, int> seen;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto it = seen.emplace(indices[i], static_cast<int>(seen.size())).first;
    ids[i] = it->second;
  }
  return SetPartition(ids);
}

inline IntegerPartition type_of(const SetPartition& p) {
  IntegerPartition t;
  for (const auto& b : p.blocks()) t.parts.push_back(static_cast<int>(b.size()));
  std::sort(t.parts.rbegin(), t.parts.rend());
  return t;
}

inline Integer count_of_type(const IntegerPartition& lam) {
  int n = lam.total();
  check_ground(n);
  Integer den = 1;
  std::map<int, int> mult;
  for (int p : lam.parts) {
    if (p < 1) throw std::invalid_argument("parts must be positive");
    den *= factorial(p);
    ++mult[p];
  }
  for (auto [p, m] : mult) den *= factorial(m);
  return factorial(n) / den;
}

inline Integer pair_partitions(int n) {
  if (n < 0 || n % 2) return 0;
  return double_factorial(n - 1);
}

inline Integer bell_number(int n) {
  std::vector<Integer> row{1};
  for (int i = 0; i < n; ++i) {
    std::vector<Integer> next{row.back()};
    for (auto& x : row) next.push_back(next.back() + x);
    row = std::move(next);
  }
  return row.front();
}

inline std::vector<IntegerPartition> integer_partitions(int n) {
  std::vector<IntegerPartition> out;
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int rem, int maxp) {
    if (rem == 0) {
      out.push_back({cur});
      return;
    }
    for (int p = std::min(rem, maxp); p >= 1; --p) {
      cur.push_back(p);
      rec(rem - p, p);
      cur.pop_back();
    }
  };
  rec(n, n);
  return out;
}

// Keeps the elements of `subset` (in the given order) and relabels them 0..k-1 in that order.
inline SetPartition restrict(const SetPartition& p, const std::vector<int>& subset) {
  std::vector<int> ids;
  ids.reserve(subset.size());
  for (int v : subset) {
    if (v < 0 || v >= p.ground_size()) throw std::invalid_argument("restriction subset outside ground set");
    ids.push_back(p.block_of(v));
  }
  return SetPartition::canonical(ids);
}

inline bool is_split(const SetPartition& p, const std::vector<int>& color) {
  for (const auto& b : p.blocks())
    for (int v : b)
      if (color[v] != color[b.front()]) return false;
  return true;
}

// Partition of the blocks of `fine` induced by `coarse` (fine must refine coarse)
inline SetPartition compose(const SetPartition& fine_on_ground, const SetPartition& on_blocks) {
  std::vector<int> ids(fine_on_ground.ground_size());
  for (int v = 0; v < fine_on_ground.ground_size(); ++v) ids[v] = on_blocks.block_of(fine_on_ground.block_of(v));
  return SetPartition::canonical(ids);
}

}  // namespace pwt
