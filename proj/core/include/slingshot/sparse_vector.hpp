#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace slingshot {

/// Fixed-dimension sparse vector with strictly increasing indices and no
/// stored zeros.
class SparseVector {
 public:
  using Index = std::uint32_t;

  struct Entry {
    Index index = 0;
    double value = 0.0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dim_(dim) {}

  /// Validates ordering, range and the no-zero rule.
  SparseVector(std::size_t dim, std::vector<Entry> entries);

  /// Sorts, sums duplicate indices and drops zeros.
  static SparseVector from_unsorted(std::size_t dim, std::vector<Entry> entries);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::span<const Entry> entries() const { return entries_; }

  /// Throws InvalidArgument when weights.size() != dim().
  double dot(std::span<const double> weights) const;

  /// Same values with every index moved by `offset`, in a space of dimension
  /// `new_dim`.
  SparseVector translated(std::size_t offset, std::size_t new_dim) const;

  std::vector<double> to_dense() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Entry> entries_;
};

}  // namespace slingshot
