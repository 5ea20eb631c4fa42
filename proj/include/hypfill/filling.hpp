#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hypfill/common.hpp"
#include "hypfill/space.hpp"

namespace hypfill {

/// One vertex of the multiscale hierarchy: a net point at level n together
/// with its ball B = B(center, 2^-n), the point ids inside it, and its mass.
template <typename Scalar = double>
struct Vertex {
  int id = 0;
  int level = 0;
  Index center = 0;
  Scalar radius = 0;
  std::vector<Index> members;
  Scalar measure = 0;
};

/// Undirected edge stored with a fixed orientation: tail at the lower level
/// (same level: tail is the smaller vertex id).  `level` is the minimum of
/// the endpoint levels; `union_measure` is mu(B(tail) union B(head)).
template <typename Scalar = double>
struct Edge {
  int tail = 0;
  int head = 0;
  int level = 0;
  Scalar union_measure = 0;
};

/// Multiscale graph over a finite metric measure space.  Level n holds a
/// greedy maximal 2^{-n-1}-separated subset of the points; vertices carry
/// balls of radius 2^-n; two vertices are adjacent when their levels differ
/// by at most one and their center distance is below the sum of their radii.
template <typename Scalar = double>
class HyperbolicFilling {
 public:
  /// Assemble from vertex seeds (level, center) and an explicit edge list.
  /// Members, measures, adjacency and per-level buckets are recomputed.
  static HyperbolicFilling from_parts(const PointCloudSpace<Scalar>& space, int n_min, int n_max,
                                      const std::vector<std::pair<int, Index>>& seeds,
                                      const std::vector<std::pair<int, int>>& edge_list) {
    if (n_min > n_max) throw std::domain_error("level range requires n_min <= n_max");
    HyperbolicFilling f;
    f.n_min_ = n_min;
    f.n_max_ = n_max;
    const int L = n_max - n_min + 1;

    std::vector<int> per_level(static_cast<std::size_t>(L), 0);
    int prev = n_min;
    for (const auto& [lev, center] : seeds) {
      (void)center;
      if (lev < n_min || lev > n_max) throw std::domain_error("vertex level out of range");
      if (lev < prev) throw std::domain_error("vertices must be grouped by ascending level");
      prev = lev;
      ++per_level[static_cast<std::size_t>(lev - n_min)];
    }
    f.level_spans_.resize(static_cast<std::size_t>(L));
    int acc = 0;
    for (int l = 0; l < L; ++l) {
      f.level_spans_[static_cast<std::size_t>(l)] = {acc, acc + per_level[static_cast<std::size_t>(l)]};
      acc += per_level[static_cast<std::size_t>(l)];
    }

    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto [lev, center] = seeds[i];
      Vertex<Scalar> v;
      v.id = static_cast<int>(i);
      v.level = lev;
      v.center = center;
      v.radius = pow2<Scalar>(-lev);
      v.members = space.ball_members(center, v.radius);
      v.measure = 0;
      for (Index p : v.members) v.measure += space.weight(p);
      f.vertices_.push_back(std::move(v));
    }

    f.adjacency_.assign(f.vertices_.size(), {});
    f.cross_edges_.assign(static_cast<std::size_t>(L), {});
    f.level_edges_.assign(static_cast<std::size_t>(L), {});
    std::vector<Index> stamp(static_cast<std::size_t>(space.size()), -1);
    for (std::size_t ei = 0; ei < edge_list.size(); ++ei) {
      auto [a, b] = edge_list[ei];
      if (a < 0 || b < 0 || a >= static_cast<int>(f.vertices_.size()) ||
          b >= static_cast<int>(f.vertices_.size()) || a == b)
        throw std::domain_error("edge endpoints out of range");
      const auto& va = f.vertices_[static_cast<std::size_t>(a)];
      const auto& vb = f.vertices_[static_cast<std::size_t>(b)];
      if (std::abs(va.level - vb.level) > 1)
        throw std::domain_error("edge endpoints must differ by at most one level");
      int tail = a, head = b;
      if (va.level > vb.level || (va.level == vb.level && a > b)) std::swap(tail, head);
      Edge<Scalar> e;
      e.tail = tail;
      e.head = head;
      e.level = std::min(va.level, vb.level);
      e.union_measure = 0;
      const auto& vt = f.vertices_[static_cast<std::size_t>(tail)];
      const auto& vh = f.vertices_[static_cast<std::size_t>(head)];
      for (Index p : vt.members) {
        stamp[static_cast<std::size_t>(p)] = static_cast<Index>(ei);
        e.union_measure += space.weight(p);
      }
      for (Index p : vh.members)
        if (stamp[static_cast<std::size_t>(p)] != static_cast<Index>(ei))
          e.union_measure += space.weight(p);
      const int id = static_cast<int>(f.edges_.size());
      f.adjacency_[static_cast<std::size_t>(tail)].push_back(head);
      f.adjacency_[static_cast<std::size_t>(head)].push_back(tail);
      if (vt.level != vh.level)
        f.cross_edges_[static_cast<std::size_t>(e.level - n_min)].push_back(id);
      f.level_edges_[static_cast<std::size_t>(e.level - n_min)].push_back(id);
      f.edges_.push_back(e);
    }
    f.max_degree_ = 0;
    for (const auto& nb : f.adjacency_)
      f.max_degree_ = std::max(f.max_degree_, static_cast<int>(nb.size()));
    return f;
  }

  int level_min() const { return n_min_; }
  int level_max() const { return n_max_; }
  int level_count() const { return n_max_ - n_min_ + 1; }

  Index vertex_count() const { return static_cast<Index>(vertices_.size()); }
  Index edge_count() const { return static_cast<Index>(edges_.size()); }

  const std::vector<Vertex<Scalar>>& vertices() const { return vertices_; }
  const std::vector<Edge<Scalar>>& edges() const { return edges_; }
  const Vertex<Scalar>& vertex(int id) const { return vertices_[static_cast<std::size_t>(id)]; }
  const Edge<Scalar>& edge(int id) const { return edges_[static_cast<std::size_t>(id)]; }

  /// Vertex id range [begin, end) of level n.
  std::pair<int, int> level_span(int n) const {
    check_level(n);
    return level_spans_[static_cast<std::size_t>(n - n_min_)];
  }

  Index level_size(int n) const {
    auto [b, e] = level_span(n);
    return e - b;
  }

  const std::vector<int>& neighbors(int vertex_id) const {
    return adjacency_[static_cast<std::size_t>(vertex_id)];
  }

  /// Edge ids joining level n to level n+1 (requires n < level_max).
  const std::vector<int>& cross_edges_at(int n) const {
    check_level(n);
    return cross_edges_[static_cast<std::size_t>(n - n_min_)];
  }

  /// Edge ids whose minimum endpoint level equals k.
  const std::vector<int>& edges_at_level(int k) const {
    check_level(k);
    return level_edges_[static_cast<std::size_t>(k - n_min_)];
  }

  int max_degree() const { return max_degree_; }

  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  void check_level(int n) const {
    if (n < n_min_ || n > n_max_)
      throw std::domain_error("level " + std::to_string(n) + " outside [" +
                              std::to_string(n_min_) + ", " + std::to_string(n_max_) + "]");
  }

 private:
  HyperbolicFilling() = default;

  int n_min_ = 0, n_max_ = 0;
  std::vector<Vertex<Scalar>> vertices_;
  std::vector<Edge<Scalar>> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<std::pair<int, int>> level_spans_;
  std::vector<std::vector<int>> cross_edges_;
  std::vector<std::vector<int>> level_edges_;
  int max_degree_ = 0;
  std::vector<std::string> warnings_;
};

/// Build the hierarchy over `space` for levels n_min..n_max.
///
/// Net selection is greedy in ascending point id: a point joins level n when
/// it is at distance >= 2^{-n-1} from every point already selected there.
/// Edges join distinct vertices whose levels differ by at most one and whose
/// center distance is strictly below the sum of the ball radii.
template <typename Scalar>
HyperbolicFilling<Scalar> build_filling(const PointCloudSpace<Scalar>& space, int n_min,
                                        int n_max) {
  if (space.size() == 0) throw std::domain_error("build_filling: empty space");
  if (n_min > n_max) throw std::domain_error("build_filling: requires n_min <= n_max");

  const Index N = space.size();
  std::vector<std::pair<int, Index>> seeds;
  std::vector<std::vector<Index>> nets(static_cast<std::size_t>(n_max - n_min + 1));
  for (int n = n_min; n <= n_max; ++n) {
    const Scalar sep = pow2<Scalar>(-n - 1);
    auto& net = nets[static_cast<std::size_t>(n - n_min)];
    for (Index p = 0; p < N; ++p) {
      bool keep = true;
      for (Index c : net)
        if (space.distance(p, c) < sep) {
          keep = false;
          break;
        }
      if (keep) net.push_back(p);
    }
    for (Index c : net) seeds.emplace_back(n, c);
  }

  // Edges per level: same-level pairs first, then pairs into the next level.
  std::vector<std::pair<int, int>> edge_list;
  std::vector<int> first_id(static_cast<std::size_t>(n_max - n_min + 1));
  {
    int acc = 0;
    for (int n = n_min; n <= n_max; ++n) {
      first_id[static_cast<std::size_t>(n - n_min)] = acc;
      acc += static_cast<int>(nets[static_cast<std::size_t>(n - n_min)].size());
    }
  }
  for (int n = n_min; n <= n_max; ++n) {
    const auto& net = nets[static_cast<std::size_t>(n - n_min)];
    const int base = first_id[static_cast<std::size_t>(n - n_min)];
    const Scalar r = pow2<Scalar>(-n);
    for (std::size_t i = 0; i < net.size(); ++i)
      for (std::size_t j = i + 1; j < net.size(); ++j)
        if (space.distance(net[i], net[j]) < r + r)
          edge_list.emplace_back(base + static_cast<int>(i), base + static_cast<int>(j));
    if (n < n_max) {
      const auto& fine = nets[static_cast<std::size_t>(n + 1 - n_min)];
      const int fbase = first_id[static_cast<std::size_t>(n + 1 - n_min)];
      const Scalar rr = r + pow2<Scalar>(-n - 1);
      for (std::size_t i = 0; i < net.size(); ++i)
        for (std::size_t j = 0; j < fine.size(); ++j)
          if (space.distance(net[i], fine[j]) < rr)
            edge_list.emplace_back(base + static_cast<int>(i), fbase + static_cast<int>(j));
    }
  }

  auto filling = HyperbolicFilling<Scalar>::from_parts(space, n_min, n_max, seeds, edge_list);
  if (pow2<Scalar>(-n_min) < space.diameter() / Scalar(2))
    filling.add_warning("coarsest radius 2^-" + std::to_string(n_min) +
                        " is below diameter/2; coarse levels will not see the whole space");
  if (space.size() > 1 && pow2<Scalar>(-n_max) < space.min_pairwise_distance())
    filling.add_warning("finest radius 2^-" + std::to_string(n_max) +
                        " is below the minimum pairwise distance; finest-level balls are "
                        "singletons");
  return filling;
}

// ---------------------------------------------------------------------------
// Structural audit
// ---------------------------------------------------------------------------

template <typename Scalar = double>
struct LevelReport {
  int level = 0;
  Index vertex_count = 0;
  Scalar min_center_distance = 0;  // infinity when fewer than two vertices
  Scalar required_separation = 0;
  Index covering_deficiency = 0;          // points missed by half-radius balls
  Index quarter_disjoint_violations = 0;  // points inside two quarter-radius balls
  Index max_overlap = 0;                  // max number of level-n balls containing a point
};

template <typename Scalar = double>
struct StructureReport {
  std::vector<LevelReport<Scalar>> levels;
  int max_degree = 0;
  Index edges_without_shared_members = 0;  // center rule fired, member sets disjoint
  bool separation_ok = true;
  bool covering_ok = true;
  bool disjointness_ok = true;
  bool ok() const { return separation_ok && covering_ok && disjointness_ok; }
};

template <typename Scalar>
StructureReport<Scalar> check_filling(const HyperbolicFilling<Scalar>& filling,
                                      const PointCloudSpace<Scalar>& space) {
  StructureReport<Scalar> rep;
  rep.max_degree = filling.max_degree();
  const Index N = space.size();

  for (int n = filling.level_min(); n <= filling.level_max(); ++n) {
    LevelReport<Scalar> lr;
    lr.level = n;
    lr.required_separation = pow2<Scalar>(-n - 1);
    auto [b, e] = filling.level_span(n);
    lr.vertex_count = e - b;

    lr.min_center_distance = infinity<Scalar>();
    for (int i = b; i < e; ++i)
      for (int j = i + 1; j < e; ++j)
        lr.min_center_distance = std::min(
            lr.min_center_distance, space.distance(filling.vertex(i).center,
                                                   filling.vertex(j).center));
    if (lr.vertex_count > 1 && lr.min_center_distance < lr.required_separation)
      rep.separation_ok = false;

    const Scalar half = pow2<Scalar>(-n - 1);
    const Scalar quarter = pow2<Scalar>(-n - 2);
    for (Index p = 0; p < N; ++p) {
      bool covered = false;
      Index quarter_hits = 0;
      Index overlap = 0;
      for (int i = b; i < e; ++i) {
        const Scalar d = space.distance(filling.vertex(i).center, p);
        if (d < half) covered = true;
        if (d < quarter) ++quarter_hits;
        if (d < filling.vertex(i).radius) ++overlap;
      }
      if (!covered) ++lr.covering_deficiency;
      if (quarter_hits > 1) ++lr.quarter_disjoint_violations;
      lr.max_overlap = std::max(lr.max_overlap, overlap);
    }
    if (lr.covering_deficiency > 0) rep.covering_ok = false;
    if (lr.quarter_disjoint_violations > 0) rep.disjointness_ok = false;
    rep.levels.push_back(lr);
  }

  // Diagnostic: edges admitted by the center-distance rule whose member sets
  // do not actually intersect.
  std::vector<Index> stamp(static_cast<std::size_t>(N), -1);
  Index ei = 0;
  for (const auto& e : filling.edges()) {
    for (Index p : filling.vertex(e.tail).members) stamp[static_cast<std::size_t>(p)] = ei;
    bool shared = false;
    for (Index p : filling.vertex(e.head).members)
      if (stamp[static_cast<std::size_t>(p)] == ei) {
        shared = true;
        break;
      }
    if (!shared) ++rep.edges_without_shared_members;
    ++ei;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Partition of unity
// ---------------------------------------------------------------------------

namespace detail {

/// Normalized tent functions of one level, as a (level size) x N matrix.
/// Row i is psi_i evaluated at every sample point; columns sum to 1.
template <typename Scalar>
MatX<Scalar> tent_matrix(const HyperbolicFilling<Scalar>& filling,
                         const PointCloudSpace<Scalar>& space, int n) {
  auto [b, e] = filling.level_span(n);
  const Index L = e - b;
  const Index N = space.size();
  const Scalar scale = pow2<Scalar>(n);
  MatX<Scalar> M = MatX<Scalar>::Zero(L, N);
  for (int i = b; i < e; ++i) {
    const auto& v = filling.vertex(i);
    for (Index p : v.members) {
      const Scalar phi = Scalar(1) - scale * space.distance(v.center, p);
      if (phi > Scalar(0)) M(i - b, p) = phi;
    }
  }
  VecX<Scalar> colsum = M.colwise().sum();
  for (Index p = 0; p < N; ++p) {
    if (!(colsum[p] > Scalar(0)))
      throw std::logic_error("tent functions fail to cover a sample point");
    M.col(p) /= colsum[p];
  }
  return M;
}

}  // namespace detail

template <typename Scalar = double>
struct PartitionOfUnity {
  int level = 0;
  MatX<Scalar> values;      // (level size) x N, psi_i(point)
  Scalar lipschitz_bound;   // max |psi(xi) - psi(eta)| / d(xi, eta) over sample pairs
};

/// Tent-based partition of unity subordinate to the level-n balls.
/// psi_i vanishes exactly outside B(vertex i) and the rows sum to one at
/// every sample point.
template <typename Scalar>
PartitionOfUnity<Scalar> partition_of_unity(const HyperbolicFilling<Scalar>& filling,
                                            const PointCloudSpace<Scalar>& space, int n) {
  PartitionOfUnity<Scalar> pou;
  pou.level = n;
  pou.values = detail::tent_matrix(filling, space, n);

  // Empirical Lipschitz quotient.  Any pair with a nonzero difference has at
  // least one point inside the support, so scanning (support x all) suffices.
  auto [b, e] = filling.level_span(n);
  const Index N = space.size();
  Scalar lip = 0;
  for (int i = b; i < e; ++i) {
    const auto& v = filling.vertex(i);
    for (Index p : v.members) {
      const Scalar vp = pou.values(i - b, p);
      for (Index q = 0; q < N; ++q) {
        if (q == p) continue;
        const Scalar diff = std::abs(vp - pou.values(i - b, q));
        if (diff == Scalar(0)) continue;
        lip = std::max(lip, diff / space.distance(p, q));
      }
    }
  }
  pou.lipschitz_bound = lip;
  return pou;
}

}  // namespace hypfill
