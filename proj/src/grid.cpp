#include "gridfire/grid.hpp"

#include <algorithm>
#include <bit>

namespace gridfire {

GridMap::GridMap(int width, int height, int num_areas, std::vector<std::uint16_t> area_by_cell)
    : width_(width), height_(height), num_areas_(num_areas),
      words_per_row_((width + 63) / 64) {
  if (width < 1 || height < 1) throw std::invalid_argument("grid dimensions must be positive");
  if (num_areas < 1) throw std::invalid_argument("area count must be >= 1");
  if (area_by_cell.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("partition size does not match grid");
  area_padded_.assign(num_words() * 64, 0);
  std::vector<std::size_t> per_area(num_areas + 1, 0);
  for (int y = 1; y <= height; ++y) {
    for (int x = 1; x <= width; ++x) {
      const std::uint16_t h = area_by_cell[static_cast<std::size_t>(y - 1) * width + (x - 1)];
      if (h < 1 || h > num_areas) throw std::invalid_argument("area index out of range");
      area_padded_[(y - 1) * row_stride() + (x - 1)] = h;
      ++per_area[h];
    }
  }
  for (int h = 1; h <= num_areas; ++h)
    if (per_area[h] == 0) empty_areas_.push_back(h);
}

GridMap GridMap::with_block_partition(int width, int height, int blocks_x, int blocks_y) {
  if (blocks_x < 1 || blocks_y < 1) throw std::invalid_argument("block counts must be >= 1");
  std::vector<std::uint16_t> area(static_cast<std::size_t>(width) * height);
  for (int y = 1; y <= height; ++y) {
    const int by = static_cast<int>(static_cast<long long>(y - 1) * blocks_y / height);
    for (int x = 1; x <= width; ++x) {
      const int bx = static_cast<int>(static_cast<long long>(x - 1) * blocks_x / width);
      area[static_cast<std::size_t>(y - 1) * width + (x - 1)] =
          static_cast<std::uint16_t>(by * blocks_x + bx + 1);
    }
  }
  return GridMap(width, height, blocks_x * blocks_y, std::move(area));
}

GridMap GridMap::with_explicit_partition(int width, int height, int num_areas,
                                         const std::vector<int>& area_row_major) {
  std::vector<std::uint16_t> area(area_row_major.size());
  std::transform(area_row_major.begin(), area_row_major.end(), area.begin(),
                 [](int h) { return static_cast<std::uint16_t>(h); });
  return GridMap(width, height, num_areas, std::move(area));
}

void NodeSet::clear() { std::fill(words_.begin(), words_.end(), 0); }

std::size_t NodeSet::count() const {
  std::size_t total = 0;
  for (std::uint64_t w : words_) total += std::popcount(w);
  return total;
}

bool NodeSet::any() const {
  for (std::uint64_t w : words_)
    if (w) return true;
  return false;
}

NodeSet& NodeSet::operator|=(const NodeSet& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  return *this;
}

NodeSet& NodeSet::operator&=(const NodeSet& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  return *this;
}

NodeSet& NodeSet::subtract(const NodeSet& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
  return *this;
}

bool NodeSet::intersects(const NodeSet& o) const {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & o.words_[i]) return true;
  return false;
}

std::size_t NodeSet::intersection_count(const NodeSet& o) const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) total += std::popcount(words_[i] & o.words_[i]);
  return total;
}

bool NodeSet::is_subset_of(const NodeSet& o) const {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & ~o.words_[i]) return false;
  return true;
}

void NodeSet::shift_west(NodeSet& out) const {  // x -> x-1
  for (int row = 0; row < height_; ++row) {
    const std::size_t base = static_cast<std::size_t>(row) * wpr_;
    for (int w = 0; w < wpr_; ++w) {
      std::uint64_t v = words_[base + w] >> 1;
      if (w + 1 < wpr_) v |= words_[base + w + 1] << 63;
      out.words_[base + w] = v;
    }
  }
}

void NodeSet::shift_east(NodeSet& out) const {  // x -> x+1, clipped at width
  const int last_word = (width_ - 1) >> 6;
  const std::uint64_t last_mask =
      (width_ & 63) ? ((1ULL << (width_ & 63)) - 1) : ~std::uint64_t{0};
  for (int row = 0; row < height_; ++row) {
    const std::size_t base = static_cast<std::size_t>(row) * wpr_;
    for (int w = wpr_ - 1; w >= 0; --w) {
      std::uint64_t v = words_[base + w] << 1;
      if (w > 0) v |= words_[base + w - 1] >> 63;
      if (w == last_word) v &= last_mask;
      if (w > last_word) v = 0;
      out.words_[base + w] = v;
    }
  }
}

NodeSet NodeSet::dilated() const {
  NodeSet hz = *this;
  NodeSet tmp = *this;
  shift_west(tmp);
  hz |= tmp;
  shift_east(tmp);
  hz |= tmp;
  // hz now holds the horizontal closure; smear it one row up and down.
  NodeSet out = hz;
  const std::size_t n = words_.size();
  for (std::size_t i = 0; i + wpr_ < n; ++i) out.words_[i] |= hz.words_[i + wpr_];
  for (std::size_t i = n; i-- > static_cast<std::size_t>(wpr_);)
    out.words_[i] |= hz.words_[i - wpr_];
  return out;
}

NodeSet NodeSet::neighbors() const {
  NodeSet out = dilated();
  out.subtract(*this);
  return out;
}

std::vector<NodeId> neighbors1(const GridMap& g, NodeId i) {
  g.require_in_grid(i);
  std::vector<NodeId> out;
  out.reserve(8);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const NodeId n{i.x + dx, i.y + dy};
      if (g.in_grid(n)) out.push_back(n);
    }
  return out;
}

std::vector<NodeId> k_neighbors(const GridMap& g, NodeId i, int k) {
  g.require_in_grid(i);
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  // The recursive definition collapses to the Chebyshev shell at radius k
  // (verified against a BFS-layering oracle in the tests).
  std::vector<NodeId> out;
  const int x0 = std::max(1, i.x - k), x1 = std::min(g.width(), i.x + k);
  const int y0 = std::max(1, i.y - k), y1 = std::min(g.height(), i.y + k);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (std::max(std::abs(x - i.x), std::abs(y - i.y)) == k) out.push_back(NodeId{x, y});
  return out;
}

int distance(NodeId i, NodeId j) {
  return std::max(std::abs(i.x - j.x), std::abs(i.y - j.y));
}

int distance_to_set(const GridMap& g, NodeId i, const NodeSet& set) {
  g.require_in_grid(i);
  if (!set.any()) return kInfiniteDistance;
  if (set.test(g.pos_of(i))) return 0;
  const int max_r = std::max({i.x - 1, g.width() - i.x, i.y - 1, g.height() - i.y});
  for (int r = 1; r <= max_r; ++r)
    for (const NodeId n : k_neighbors(g, i, r))
      if (set.test(g.pos_of(n))) return r;
  return kInfiniteDistance;  // unreachable when set is nonempty
}

int burning_neighbor_count(const GridMap& g, const NodeSet& burning, int pos) {
  const int stride = g.row_stride();
  const int x = pos % stride + 1;
  const int y = pos / stride + 1;
  int count = 0;
  const bool left = x > 1, right = x < g.width();
  if (y > 1) {
    const int up = pos - stride;
    if (left) count += burning.test(up - 1);
    count += burning.test(up);
    if (right) count += burning.test(up + 1);
  }
  if (left) count += burning.test(pos - 1);
  if (right) count += burning.test(pos + 1);
  if (y < g.height()) {
    const int down = pos + stride;
    if (left) count += burning.test(down - 1);
    count += burning.test(down);
    if (right) count += burning.test(down + 1);
  }
  return count;
}

}  // namespace gridfire
