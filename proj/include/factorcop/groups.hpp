#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

namespace factorcop {

// Partition of D observed variables into G contiguous groups of sizes
// d_1,...,d_G.  Flat indices run 0..D-1 in group order; within-group
// indices are (j, g) with j in 0..d_g-1.
class GroupStructure {
 public:
  GroupStructure() = default;

  explicit GroupStructure(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw std::invalid_argument("GroupStructure: need at least one group");
    offsets_.reserve(sizes_.size() + 1);
    offsets_.push_back(0);
    for (int d : sizes_) {
      if (d < 1) throw std::invalid_argument("GroupStructure: group sizes must be positive");
      offsets_.push_back(offsets_.back() + d);
    }
  }

  // Single group holding all d variables (1-factor layout).
  static GroupStructure single(int d) { return GroupStructure(std::vector<int>{d}); }

  static GroupStructure equal(int groups, int per_group) {
    return GroupStructure(std::vector<int>(groups, per_group));
  }

  int group_count() const { return static_cast<int>(sizes_.size()); }
  int total() const { return offsets_.empty() ? 0 : offsets_.back(); }
  int size(int g) const { return sizes_.at(g); }
  const std::vector<int>& sizes() const { return sizes_; }

  int begin(int g) const { return offsets_.at(g); }

  int flat_index(int j, int g) const {
    if (g < 0 || g >= group_count() || j < 0 || j >= sizes_[g])
      throw std::out_of_range("GroupStructure: index out of range");
    return offsets_[g] + j;
  }

  // flat -> (j, g)
  std::pair<int, int> group_index(int flat) const {
    int g = group_of(flat);
    return {flat - offsets_[g], g};
  }

  int group_of(int flat) const {
    if (flat < 0 || flat >= total())
      throw std::out_of_range("GroupStructure: flat index out of range");
    int g = 0;
    while (flat >= offsets_[g + 1]) ++g;
    return g;
  }

  bool operator==(const GroupStructure& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
};

}  // namespace factorcop
