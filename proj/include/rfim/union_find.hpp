// Union-find with path compression and union by size. Connectivity queries
// dominate the random-cluster runtime, so this stays allocation-free after
// reset().
#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace rfim {

class UnionFind {
 public:
  explicit UnionFind(int n = 0) { reset(n); }

  void reset(int n) {
    parent_.resize(n);
    std::iota(parent_.begin(), parent_.end(), 0);
    size_.assign(n, 1);
    components_ = n;
  }

  int find(int x) {
    int root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      int next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  // Returns true if the two sets were merged (false if already joined).
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --components_;
    return true;
  }

  bool connected(int a, int b) { return find(a) == find(b); }
  int components() const { return components_; }
  int size() const { return static_cast<int>(parent_.size()); }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
  int components_ = 0;
};

}  // namespace rfim
