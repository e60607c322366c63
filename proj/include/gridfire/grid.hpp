#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gridfire {

// 1-based grid coordinates: columns x in [1, width], rows y in [1, height].
struct NodeId {
  int x = 0;
  int y = 0;
  friend bool operator==(const NodeId& a, const NodeId& b) { return a.x == b.x && a.y == b.y; }
  friend bool operator!=(const NodeId& a, const NodeId& b) { return !(a == b); }
  friend bool operator<(const NodeId& a, const NodeId& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  }
};

inline constexpr int kInfiniteDistance = std::numeric_limits<int>::max();

// Rectangular lattice with an area partition. Rows are padded to whole 64-bit
// words so node sets can shift rows without bit surgery across row breaks;
// "pos" below always refers to the padded linear index.
class GridMap {
 public:
  GridMap(int width, int height, int num_areas, std::vector<std::uint16_t> area_by_cell);

  // Partition into bx * by rectangular blocks, block-row-major area indices.
  static GridMap with_block_partition(int width, int height, int blocks_x, int blocks_y);
  // Explicit partition: row-major width*height area indices in 1..num_areas.
  static GridMap with_explicit_partition(int width, int height, int num_areas,
                                         const std::vector<int>& area_row_major);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_areas() const { return num_areas_; }
  int words_per_row() const { return words_per_row_; }
  int row_stride() const { return words_per_row_ * 64; }
  std::size_t num_words() const { return static_cast<std::size_t>(words_per_row_) * height_; }

  bool in_grid(NodeId n) const {
    return n.x >= 1 && n.x <= width_ && n.y >= 1 && n.y <= height_;
  }
  void require_in_grid(NodeId n) const {
    if (!in_grid(n)) throw std::out_of_range("node outside grid");
  }

  int pos_of(NodeId n) const { return (n.y - 1) * row_stride() + (n.x - 1); }
  NodeId node_at(int pos) const {
    return NodeId{pos % row_stride() + 1, pos / row_stride() + 1};
  }

  // Area indices are 1-based externally, matching the partition {G_1..G_H}.
  int area_of(NodeId n) const { return area_padded_[pos_of(n)]; }
  int area_of_pos(int pos) const { return area_padded_[pos]; }

  // Areas that received no cells (possible with explicit partitions).
  const std::vector<int>& empty_areas() const { return empty_areas_; }

 private:
  int width_;
  int height_;
  int num_areas_;
  int words_per_row_;
  std::vector<std::uint16_t> area_padded_;
  std::vector<int> empty_areas_;
};

// Set of grid nodes as a padded row-major bitset. Mutating ops keep padding
// bits clear so popcounts and shifts stay exact.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(const GridMap& g)
      : width_(g.width()), height_(g.height()), wpr_(g.words_per_row()),
        words_(g.num_words(), 0) {}

  bool empty_dims() const { return words_.empty(); }
  void set(int pos) { words_[pos >> 6] |= 1ULL << (pos & 63); }
  void reset(int pos) { words_[pos >> 6] &= ~(1ULL << (pos & 63)); }
  bool test(int pos) const { return (words_[pos >> 6] >> (pos & 63)) & 1ULL; }
  void clear();
  std::size_t count() const;
  bool any() const;

  NodeSet& operator|=(const NodeSet& o);
  NodeSet& operator&=(const NodeSet& o);
  NodeSet& subtract(const NodeSet& o);
  bool intersects(const NodeSet& o) const;
  std::size_t intersection_count(const NodeSet& o) const;
  friend bool operator==(const NodeSet& a, const NodeSet& b) { return a.words_ == b.words_; }

  // King-move neighborhood of the set, excluding the set itself: N(B).
  NodeSet neighbors() const;
  // The set together with its king-move neighborhood (dilation by one).
  NodeSet dilated() const;
  bool is_subset_of(const NodeSet& o) const;

  template <typename F>
  void for_each(F&& f) const {  // ascending pos order
    const int n = static_cast<int>(words_.size());
    for (int w = 0; w < n; ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        const int bit = __builtin_ctzll(bits);
        f(w * 64 + bit);
        bits &= bits - 1;
      }
    }
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  void shift_west(NodeSet& out) const;
  void shift_east(NodeSet& out) const;

  int width_ = 0, height_ = 0, wpr_ = 0;
  std::vector<std::uint64_t> words_;
};

// king-move (Chebyshev) geometry
std::vector<NodeId> neighbors1(const GridMap& g, NodeId i);
std::vector<NodeId> k_neighbors(const GridMap& g, NodeId i, int k);
int distance(NodeId i, NodeId j);
int distance_to_set(const GridMap& g, NodeId i, const NodeSet& set);

// Count of burning king-move neighbors of the node at `pos`.
int burning_neighbor_count(const GridMap& g, const NodeSet& burning, int pos);

}  // namespace gridfire
