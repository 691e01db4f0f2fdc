#include "qsfrac/crack_set.hpp"

#include <algorithm>
#include <iterator>
#include <string>

#include "qsfrac/error.hpp"

namespace qsfrac {

CrackSet::CrackSet(const Mesh& mesh, std::span<const EdgeId> edges) : edges_(edges.begin(), edges.end()) {
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (EdgeId e : edges_) {
    if (e < 0 || e >= static_cast<EdgeId>(mesh.edge_count()))
      throw ValidationError("unknown edge id " + std::to_string(e));
    if (!mesh.is_crackable(e)) throw ValidationError("edge " + std::to_string(e) + " is not crackable");
  }
}

CrackSet CrackSet::unchecked(std::vector<EdgeId> edges) {
  CrackSet c;
  c.edges_ = std::move(edges);
  std::sort(c.edges_.begin(), c.edges_.end());
  c.edges_.erase(std::unique(c.edges_.begin(), c.edges_.end()), c.edges_.end());
  return c;
}

bool CrackSet::contains(EdgeId e) const { return std::binary_search(edges_.begin(), edges_.end(), e); }

bool CrackSet::is_subset_of(const CrackSet& other) const {
  return std::includes(other.edges_.begin(), other.edges_.end(), edges_.begin(), edges_.end());
}

CrackSet CrackSet::with(EdgeId e) const {
  CrackSet c = *this;
  auto it = std::lower_bound(c.edges_.begin(), c.edges_.end(), e);
  if (it == c.edges_.end() || *it != e) c.edges_.insert(it, e);
  return c;
}

CrackSet CrackSet::united(const CrackSet& other) const {
  CrackSet c;
  std::set_union(edges_.begin(), edges_.end(), other.edges_.begin(), other.edges_.end(),
                 std::back_inserter(c.edges_));
  return c;
}

std::vector<EdgeId> CrackSet::minus(const CrackSet& other) const {
  std::vector<EdgeId> out;
  std::set_difference(edges_.begin(), edges_.end(), other.edges_.begin(), other.edges_.end(),
                      std::back_inserter(out));
  return out;
}

double CrackSet::length(const Mesh& mesh) const {
  double s = 0.0;
  for (EdgeId e : edges_) s += mesh.edge_geometry(e).length;
  return s;
}

bool shortlex_less(const CrackSet& a, const CrackSet& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.edges_ < b.edges_;
}

}  // namespace qsfrac
