#include "slingshot/sparse_vector.hpp"

#include <algorithm>
#include <string>

#include "slingshot/errors.hpp"

namespace slingshot {

SparseVector::SparseVector(std::size_t dim, std::vector<Entry> entries)
    : dim_(dim), entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (e.index >= dim_) {
      throw InvalidArgument("sparse index " + std::to_string(e.index) + " >= dimension " +
                            std::to_string(dim_));
    }
    if (i > 0 && entries_[i - 1].index >= e.index) {
      throw InvalidArgument("sparse indices must be strictly increasing");
    }
    if (e.value == 0.0) throw InvalidArgument("sparse vector must not store zeros");
  }
}

SparseVector SparseVector::from_unsorted(std::size_t dim, std::vector<Entry> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.index < b.index; });
  std::vector<Entry> merged;
  merged.reserve(entries.size());
  for (const Entry& e : entries) {
    if (!merged.empty() && merged.back().index == e.index) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Entry& e) { return e.value == 0.0; });
  return SparseVector(dim, std::move(merged));
}

double SparseVector::dot(std::span<const double> weights) const {
  if (weights.size() != dim_) {
    throw InvalidArgument("dimension mismatch: weights " + std::to_string(weights.size()) +
                          " vs features " + std::to_string(dim_));
  }
  double sum = 0.0;
  for (const Entry& e : entries_) sum += weights[e.index] * e.value;
  return sum;
}

SparseVector SparseVector::translated(std::size_t offset, std::size_t new_dim) const {
  SparseVector out(new_dim);
  out.entries_.reserve(entries_.size());
  for (const Entry& e : entries_) {
    const std::size_t idx = e.index + offset;
    if (idx >= new_dim) throw InvalidArgument("translated index out of range");
    out.entries_.push_back({static_cast<Index>(idx), e.value});
  }
  return out;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> dense(dim_, 0.0);
  for (const Entry& e : entries_) dense[e.index] = e.value;
  return dense;
}

}  // namespace slingshot
