#pragma once

// Honeycomb tight-binding graph: site addressing, adjacency with Harper
// phase exponents, finite regions, and the order-3 rotation about an
// A-site.
//
// Landau-gauge convention.  Cells are addressed by n = (n1, n2); each cell
// carries an A and a B site.  The A(n) row of the Hamiltonian couples to
// B(n) and B(n+e1) with unit amplitude and to B(n+e2) with amplitude
// e^{-i n1 phi}; the reversed edges carry the conjugate phases, so the
// B(n) row couples to A(n), A(n-e1), and A(n-e2) with exponent +n1 on the
// last hop.  Exponents are kept as exact integers and multiplied by phi
// only when a Hamiltonian is applied.  With this convention the oriented
// exponent sum around every hexagonal face is -1: each face carries flux
// phi up to the global sign fixed here.

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace magnon {

enum class Sub : std::uint8_t { A = 0, B = 1 };

struct Site {
  int n1 = 0;
  int n2 = 0;
  Sub sub = Sub::A;

  friend bool operator==(const Site&, const Site&) = default;
  // lexicographic (n1, n2, sub) with A before B: fixes all enumeration orders
  friend auto operator<=>(const Site&, const Site&) = default;
};

inline Site siteA(int n1, int n2) { return {n1, n2, Sub::A}; }
inline Site siteB(int n1, int n2) { return {n1, n2, Sub::B}; }

inline std::string to_string(const Site& s) {
  return std::string(s.sub == Sub::A ? "A(" : "B(") + std::to_string(s.n1) + "," +
         std::to_string(s.n2) + ")";
}

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept {
    std::uint64_t h = static_cast<std::uint32_t>(s.n1);
    h = h * 0x9e3779b97f4a7c15ull ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.n2)) << 1);
    h = h * 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(s.sub);
    return static_cast<std::size_t>(h ^ (h >> 31));
  }
};

struct Hop {
  Site to;
  int phase_exp;  // hop amplitude is e^{i phase_exp phi}
};

// Every site has exactly three neighbors; the two directions of an edge
// carry negated exponents.
inline std::array<Hop, 3> neighbors(const Site& s) {
  if (s.sub == Sub::A) {
    return {Hop{siteB(s.n1, s.n2), 0}, Hop{siteB(s.n1 + 1, s.n2), 0},
            Hop{siteB(s.n1, s.n2 + 1), -s.n1}};
  }
  return {Hop{siteA(s.n1, s.n2), 0}, Hop{siteA(s.n1 - 1, s.n2), 0},
          Hop{siteA(s.n1, s.n2 - 1), s.n1}};
}

// Order-3 rotation of the hexagonal graph about A(0,0):
//   A(n) -> A(Ln),  B(n) -> B(Ln + e1),  L(n1,n2) = (-n1-n2, n1).
// It permutes the neighbors of A(0,0) as B(0,0) -> B(1,0) -> B(0,1) and is
// a graph automorphism preserving hop distance from the center.
inline Site rotation_map(const Site& s) {
  const int m1 = -s.n1 - s.n2;
  const int m2 = s.n1;
  return s.sub == Sub::A ? siteA(m1, m2) : siteB(m1 + 1, m2);
}

// Rotation about an arbitrary A-site, by pre/post translation.
inline Site rotation_map(const Site& s, const Site& center) {
  if (center.sub != Sub::A)
    throw std::invalid_argument("rotation_map: rotation center must be an A-site");
  Site shifted{s.n1 - center.n1, s.n2 - center.n2, s.sub};
  Site r = rotation_map(shifted);
  return {r.n1 + center.n1, r.n2 + center.n2, r.sub};
}

enum class RegionKind { Box, Ball };

// Finite truncation of the lattice with a fixed linear site enumeration:
// cells lexicographic by (n1, n2), A before B.  Immutable once built.
class Region {
 public:
  // Box(N): all cells |n1| <= N, |n2| <= N, both sublattices.
  static std::shared_ptr<const Region> box(int half_width) {
    if (half_width < 1)
      throw std::invalid_argument("Region::box requires half-width N >= 1");
    std::vector<Site> sites;
    sites.reserve(2 * (2 * half_width + 1) * (2 * half_width + 1));
    for (int n1 = -half_width; n1 <= half_width; ++n1)
      for (int n2 = -half_width; n2 <= half_width; ++n2) {
        sites.push_back(siteA(n1, n2));
        sites.push_back(siteB(n1, n2));
      }
    return std::shared_ptr<const Region>(
        new Region(RegionKind::Box, half_width, siteA(0, 0), std::move(sites)));
  }

  // Ball(c, rho): all sites at hop distance <= rho from c.
  static std::shared_ptr<const Region> ball(const Site& center, int radius) {
    if (radius < 1)
      throw std::invalid_argument("Region::ball requires graph radius rho >= 1");
    std::unordered_map<Site, int, SiteHash> dist;
    dist.emplace(center, 0);
    std::vector<Site> frontier{center};
    for (int d = 0; d < radius; ++d) {
      std::vector<Site> next;
      for (const Site& s : frontier)
        for (const Hop& h : neighbors(s))
          if (dist.emplace(h.to, d + 1).second) next.push_back(h.to);
      frontier = std::move(next);
    }
    std::vector<Site> sites;
    sites.reserve(dist.size());
    for (const auto& [s, d] : dist) sites.push_back(s);
    std::sort(sites.begin(), sites.end());
    return std::shared_ptr<const Region>(
        new Region(RegionKind::Ball, radius, center, std::move(sites)));
  }

  RegionKind kind() const { return kind_; }
  int parameter() const { return parameter_; }  // N for Box, rho for Ball
  const Site& center() const { return center_; }
  const std::vector<Site>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }

  std::optional<std::size_t> index_of(const Site& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const Site& s) const { return index_.count(s) != 0; }

  // Per-site hop distance to the nearest site having a neighbor outside
  // the region (0 on the boundary itself).
  int boundary_distance(const Site& s) const {
    auto i = index_of(s);
    if (!i) throw std::invalid_argument("Region::boundary_distance: site outside region");
    return boundary_dist_[*i];
  }

  // Hop distances from `from` through region sites only (-1 = unreachable).
  std::vector<int> hop_distances(const Site& from) const {
    auto start = index_of(from);
    if (!start) throw std::invalid_argument("Region::hop_distances: site outside region");
    std::vector<int> dist(sites_.size(), -1);
    dist[*start] = 0;
    std::vector<std::size_t> frontier{*start};
    int d = 0;
    while (!frontier.empty()) {
      std::vector<std::size_t> next;
      for (std::size_t i : frontier)
        for (const auto& [j, exp] : adjacency_[i])
          if (j >= 0 && dist[static_cast<std::size_t>(j)] < 0) {
            dist[static_cast<std::size_t>(j)] = d + 1;
            next.push_back(static_cast<std::size_t>(j));
          }
      frontier = std::move(next);
      ++d;
    }
    return dist;
  }

  // Precomputed in-region adjacency: for site i, three (index, exponent)
  // pairs with index -1 when the hop leaves the region (Open truncation).
  struct Edge {
    std::int64_t index;
    int phase_exp;
  };
  const std::array<Edge, 3>& edges(std::size_t i) const { return adjacency_[i]; }
  int min_phase_exp() const { return min_exp_; }
  int max_phase_exp() const { return max_exp_; }

 private:
  Region(RegionKind kind, int parameter, Site center, std::vector<Site> sites)
      : kind_(kind), parameter_(parameter), center_(center), sites_(std::move(sites)) {
    index_.reserve(sites_.size() * 2);
    for (std::size_t i = 0; i < sites_.size(); ++i) index_.emplace(sites_[i], i);
    adjacency_.resize(sites_.size());
    std::vector<std::size_t> boundary;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      auto hops = neighbors(sites_[i]);
      bool on_boundary = false;
      for (int k = 0; k < 3; ++k) {
        auto j = index_of(hops[k].to);
        adjacency_[i][k] = {j ? static_cast<std::int64_t>(*j) : -1, hops[k].phase_exp};
        if (!j) on_boundary = true;
        min_exp_ = std::min(min_exp_, hops[k].phase_exp);
        max_exp_ = std::max(max_exp_, hops[k].phase_exp);
      }
      if (on_boundary) boundary.push_back(i);
    }
    // multi-source BFS from the boundary set
    boundary_dist_.assign(sites_.size(), -1);
    for (std::size_t i : boundary) boundary_dist_[i] = 0;
    std::vector<std::size_t> frontier = boundary;
    int d = 0;
    while (!frontier.empty()) {
      std::vector<std::size_t> next;
      for (std::size_t i : frontier)
        for (const auto& [j, exp] : adjacency_[i])
          if (j >= 0 && boundary_dist_[static_cast<std::size_t>(j)] < 0) {
            boundary_dist_[static_cast<std::size_t>(j)] = d + 1;
            next.push_back(static_cast<std::size_t>(j));
          }
      frontier = std::move(next);
      ++d;
    }
  }

  RegionKind kind_;
  int parameter_;
  Site center_;
  std::vector<Site> sites_;
  std::unordered_map<Site, std::size_t, SiteHash> index_;
  std::vector<std::array<Edge, 3>> adjacency_;
  std::vector<int> boundary_dist_;
  int min_exp_ = 0;
  int max_exp_ = 0;
};

using RegionPtr = std::shared_ptr<const Region>;

}  // namespace magnon
