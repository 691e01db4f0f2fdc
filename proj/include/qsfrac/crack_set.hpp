#pragma once

#include <initializer_list>
#include <span>
#include <vector>

#include "qsfrac/mesh.hpp"

namespace qsfrac {

/// Sorted, deduplicated set of crackable edge ids.
class CrackSet {
 public:
  CrackSet() = default;
  /// Validates every id against mesh.is_crackable().
  CrackSet(const Mesh& mesh, std::span<const EdgeId> edges);
  CrackSet(const Mesh& mesh, std::initializer_list<EdgeId> edges)
      : CrackSet(mesh, std::span<const EdgeId>(edges.begin(), edges.size())) {}

  // No mesh validation; caller guarantees crackability.
  static CrackSet unchecked(std::vector<EdgeId> edges);

  bool contains(EdgeId e) const;
  bool is_subset_of(const CrackSet& other) const;
  CrackSet with(EdgeId e) const;
  CrackSet united(const CrackSet& other) const;
  std::vector<EdgeId> minus(const CrackSet& other) const;

  const std::vector<EdgeId>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  auto begin() const { return edges_.begin(); }
  auto end() const { return edges_.end(); }

  double length(const Mesh& mesh) const;

  friend bool operator==(const CrackSet&, const CrackSet&) = default;
  // Tie-break order: fewer edges first, then lexicographic.
  friend bool shortlex_less(const CrackSet& a, const CrackSet& b);

 private:
  std::vector<EdgeId> edges_;
};

bool shortlex_less(const CrackSet& a, const CrackSet& b);

}  // namespace qsfrac
