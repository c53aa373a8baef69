#include "cascade/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace cascade {

namespace {

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// deterministic jitter in [-1, 1]
inline double jitter(std::uint64_t i, std::uint64_t j) {
  const std::uint64_t h = splitmix64(i * 0x100000001b3ULL + j);
  return 2.0 * (double(h >> 11) / double(1ULL << 53)) - 1.0;
}

inline double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool proper_intersect(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                      const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  const double o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
  const double o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 &&
         o4 != 0;
}

/// Incremental Bowyer-Watson triangulation with adjacency, plus flip-based
/// recovery of constrained edges.
class Delaunay {
 public:
  struct Tri {
    int v[3];
    int n[3];  // n[i] = neighbor across the edge opposite v[i], -1 if none
    bool alive = true;
  };

  std::vector<Eigen::Vector2d> pts;
  std::vector<Tri> tris;
  std::vector<int> vert2tri;

  void init_super(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) {
    const Eigen::Vector2d c = 0.5 * (lo + hi);
    const double r = 8.0 * std::max((hi - lo).norm(), 1e-6);
    super_[0] = add_point(c + Eigen::Vector2d(0.0, 2.5 * r));
    super_[1] = add_point(c + Eigen::Vector2d(-2.2 * r, -1.4 * r));
    super_[2] = add_point(c + Eigen::Vector2d(2.2 * r, -1.4 * r));
    Tri t;
    t.v[0] = super_[0];
    t.v[1] = super_[1];
    t.v[2] = super_[2];
    t.n[0] = t.n[1] = t.n[2] = -1;
    tris.push_back(t);
    vert2tri.assign(pts.size(), 0);
  }

  int add_point(const Eigen::Vector2d& p) {
    pts.push_back(p);
    vert2tri.push_back(-1);
    return int(pts.size()) - 1;
  }

  bool is_super(int v) const { return v == super_[0] || v == super_[1] || v == super_[2]; }

  void insert(int vi) {
    const Eigen::Vector2d& p = pts[vi];
    const int t0 = locate(p);
    if (t0 < 0) throw MeshFailure("triangulation: point location failed");

    // grow the cavity of triangles whose circumcircle contains p
    std::vector<int> cavity;
    std::vector<char> mark(tris.size(), 0);
    std::vector<int> stack{t0};
    mark[t0] = 1;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      cavity.push_back(t);
      for (int i = 0; i < 3; ++i) {
        const int nb = tris[t].n[i];
        if (nb < 0 || mark[nb] || !tris[nb].alive) continue;
        if (in_circumcircle(nb, p)) {
          mark[nb] = 1;
          stack.push_back(nb);
        }
      }
    }

    // cavity boundary loop, oriented counterclockwise
    std::unordered_map<int, std::pair<int, int>> loop;  // u -> (w, outer tri)
    for (int t : cavity) {
      for (int i = 0; i < 3; ++i) {
        const int nb = tris[t].n[i];
        if (nb >= 0 && mark[nb]) continue;
        const int u = tris[t].v[(i + 1) % 3];
        const int w = tris[t].v[(i + 2) % 3];
        loop[u] = {w, nb};
      }
    }
    if (loop.empty()) throw MeshFailure("triangulation: empty cavity");
    for (int t : cavity) tris[t].alive = false;

    // fan retriangulation around p
    std::vector<int> fresh;
    std::unordered_map<int, int> tri_of_u;  // loop-start vertex -> new triangle
    const int start = loop.begin()->first;
    int u = start;
    do {
      const auto [w, outer] = loop.at(u);
      Tri t;
      t.v[0] = vi;
      t.v[1] = u;
      t.v[2] = w;
      t.n[0] = outer;
      t.n[1] = t.n[2] = -1;
      const int id = int(tris.size());
      tris.push_back(t);
      if (outer >= 0) set_neighbor(outer, u, w, id);
      tri_of_u[u] = id;
      fresh.push_back(id);
      u = w;
    } while (u != start && int(tri_of_u.size()) <= int(loop.size()));
    if (u != start) throw MeshFailure("triangulation: cavity boundary is not a single loop");

    for (int id : fresh) {
      const int tu = tris[id].v[1];
      const int tw = tris[id].v[2];
      tris[id].n[1] = tri_of_u.at(tw);    // across (w, p)
      // across (p, u): triangle whose loop edge ends at u
      // it is the fan triangle starting at predecessor of u; find via loop
      // predecessor: the triangle with v[2] == u
      // store below after all created
      (void)tu;
    }
    // second pass for predecessor links
    for (int id : fresh) {
      const int w = tris[id].v[2];
      tris[tri_of_u.at(w)].n[2] = id;  // that triangle's (p, u=w) edge neighbor
    }
    for (int id : fresh)
      for (int k = 0; k < 3; ++k) vert2tri[tris[id].v[k]] = id;
    last_ = fresh.front();
  }

  int locate(const Eigen::Vector2d& p) const {
    int cur = last_;
    if (cur < 0 || !tris[cur].alive) {
      cur = -1;
      for (int t = int(tris.size()) - 1; t >= 0; --t)
        if (tris[t].alive) {
          cur = t;
          break;
        }
      if (cur < 0) return -1;
    }
    const int max_steps = int(tris.size()) * 4 + 64;
    int step = 0;
    while (step++ < max_steps) {
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int i = (k + step) % 3;
        const Eigen::Vector2d& a = pts[tris[cur].v[(i + 1) % 3]];
        const Eigen::Vector2d& b = pts[tris[cur].v[(i + 2) % 3]];
        if (orient2d(a, b, p) < 0.0) {
          const int nb = tris[cur].n[i];
          if (nb < 0) return cur;  // outside hull; caller copes
          cur = nb;
          moved = true;
          break;
        }
      }
      if (!moved) return cur;
    }
    // fallback: exhaustive search
    for (int t = 0; t < int(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      const Eigen::Vector2d& a = pts[tris[t].v[0]];
      const Eigen::Vector2d& b = pts[tris[t].v[1]];
      const Eigen::Vector2d& c = pts[tris[t].v[2]];
      if (orient2d(a, b, p) >= 0 && orient2d(b, c, p) >= 0 && orient2d(c, a, p) >= 0) return t;
    }
    return -1;
  }

  bool edge_exists(int a, int b) const {
    for (int t = 0; t < int(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      for (int i = 0; i < 3; ++i)
        if (tris[t].v[i] == a && (tris[t].v[(i + 1) % 3] == b || tris[t].v[(i + 2) % 3] == b))
          return true;
    }
    return false;
  }

  void enforce_edge(int a, int b) {
    const int max_rounds = 500;
    for (int round = 0; round < max_rounds; ++round) {
      if (edge_exists(a, b)) return;
      // find a crossing edge and flip it
      bool flipped = false;
      for (int t = 0; t < int(tris.size()) && !flipped; ++t) {
        if (!tris[t].alive) continue;
        for (int i = 0; i < 3; ++i) {
          const int u = tris[t].v[(i + 1) % 3];
          const int w = tris[t].v[(i + 2) % 3];
          if (u == a || u == b || w == a || w == b) continue;
          if (!proper_intersect(pts[a], pts[b], pts[u], pts[w])) continue;
          if (tris[t].n[i] < 0) continue;
          if (try_flip(t, i)) {
            flipped = true;
            break;
          }
        }
      }
      if (!flipped) throw MeshFailure("triangulation: cannot recover constrained edge");
    }
    throw MeshFailure("triangulation: constrained edge recovery did not terminate");
  }

 private:
  int super_[3] = {-1, -1, -1};
  mutable int last_ = -1;

  bool in_circumcircle(int t, const Eigen::Vector2d& p) const {
    const Eigen::Vector2d& a = pts[tris[t].v[0]];
    const Eigen::Vector2d& b = pts[tris[t].v[1]];
    const Eigen::Vector2d& c = pts[tris[t].v[2]];
    const double adx = a.x() - p.x(), ady = a.y() - p.y();
    const double bdx = b.x() - p.x(), bdy = b.y() - p.y();
    const double cdx = c.x() - p.x(), cdy = c.y() - p.y();
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    const double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                       ad * (bdx * cdy - bdy * cdx);
    const double perm = std::abs(adx * bdy * cd) + std::abs(adx * bd * cdy) +
                        std::abs(ady * bdx * cd) + std::abs(ady * bd * cdx) +
                        std::abs(ad * bdx * cdy) + std::abs(ad * bdy * cdx);
    return det > 1e-12 * perm;
  }

  void set_neighbor(int t, int u, int w, int nb) {
    for (int i = 0; i < 3; ++i) {
      const int x = tris[t].v[(i + 1) % 3];
      const int y = tris[t].v[(i + 2) % 3];
      if ((x == u && y == w) || (x == w && y == u)) {
        tris[t].n[i] = nb;
        return;
      }
    }
    throw MeshFailure("triangulation: broken adjacency");
  }

  bool try_flip(int t, int i) {
    const int s = tris[t].n[i];
    const int p = tris[t].v[i];
    const int u = tris[t].v[(i + 1) % 3];
    const int w = tris[t].v[(i + 2) % 3];
    int j = -1;
    for (int k = 0; k < 3; ++k)
      if (tris[s].n[k] == t) j = k;
    if (j < 0) throw MeshFailure("triangulation: broken adjacency");
    const int q = tris[s].v[j];
    // flippable only if quad (p,u,q,w) is strictly convex
    if (orient2d(pts[p], pts[u], pts[q]) <= 0) return false;
    if (orient2d(pts[u], pts[q], pts[w]) <= 0) return false;
    if (orient2d(pts[q], pts[w], pts[p]) <= 0) return false;
    if (orient2d(pts[w], pts[p], pts[u]) <= 0) return false;

    const int A = tris[t].n[(i + 2) % 3];  // across (p,u)
    const int B = tris[t].n[(i + 1) % 3];  // across (w,p)
    const int C = tris[s].n[(j + 2) % 3];  // across (q,u) in s: s.v[(j+1)]=w, s.v[(j+2)]=u
    const int D = tris[s].n[(j + 1) % 3];  // across (u,q)->? see below

    // s has vertices (q, w, u) in CCW with s.v[j]=q. Edge (j+1) is opposite w,
    // i.e. connects (u, q); edge (j+2) is opposite u, i.e. connects (q, w).
    const int across_uq = tris[s].n[(j + 1) % 3];
    const int across_qw = tris[s].n[(j + 2) % 3];
    (void)C;
    (void)D;

    tris[t].v[0] = p;
    tris[t].v[1] = u;
    tris[t].v[2] = q;
    tris[t].n[0] = across_uq;  // edge (u,q)
    tris[t].n[1] = s;          // edge (q,p)
    tris[t].n[2] = A;          // edge (p,u)

    tris[s].v[0] = p;
    tris[s].v[1] = q;
    tris[s].v[2] = w;
    tris[s].n[0] = across_qw;  // edge (q,w)
    tris[s].n[1] = B;          // edge (w,p)
    tris[s].n[2] = t;          // edge (p,q)

    if (across_uq >= 0) set_neighbor(across_uq, u, q, t);
    if (B >= 0) set_neighbor(B, w, p, s);
    if (A >= 0) set_neighbor(A, p, u, t);
    if (across_qw >= 0) set_neighbor(across_qw, q, w, s);
    vert2tri[p] = t;
    vert2tri[u] = t;
    vert2tri[q] = t;
    vert2tri[w] = s;
    return true;
  }
};

struct SeedPoint {
  Eigen::Vector2d x;
  VertexKind kind;
  double param;  // profile parameter, else -1
};

bool polygon_contains(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& x) {
  bool in = false;
  const int n = int(poly.size());
  for (int i = 0, j = n - 1; i < n; j = i++) {
    if ((poly[i].y() > x.y()) != (poly[j].y() > x.y())) {
      const double xi = poly[j].x() + (x.y() - poly[j].y()) / (poly[i].y() - poly[j].y()) *
                                          (poly[i].x() - poly[j].x());
      if (xi > x.x()) in = !in;
    }
  }
  return in;
}

double dist_to_polyline(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& x,
                        bool closed) {
  double best = std::numeric_limits<double>::max();
  const int n = int(poly.size());
  const int m = closed ? n : n - 1;
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % n];
    const Eigen::Vector2d ab = b - a;
    const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (x - (a + t * ab)).norm());
  }
  return best;
}

}  // namespace

double Mesh::signed_area(int t) const {
  const auto& T = triangles;
  const Eigen::Vector2d a = vertices.row(T(t, 0));
  const Eigen::Vector2d b = vertices.row(T(t, 1));
  const Eigen::Vector2d c = vertices.row(T(t, 2));
  return 0.5 * orient2d(a, b, c);
}

double Mesh::area() const {
  double s = 0.0;
  for (int t = 0; t < num_triangles(); ++t) s += signed_area(t);
  return s;
}

double Mesh::area_by_boundary() const {
  // Green's theorem with F = (x1, 0): area = closed integral of x1 * n1 dl.
  double s = 0.0;
  for (const auto& e : boundary_edges) {
    const Eigen::Vector2d a = vertices.row(e.a);
    const Eigen::Vector2d b = vertices.row(e.b);
    s += 0.5 * (a.x() + b.x()) * (b.y() - a.y());
  }
  return s;
}

void Mesh::validate() const {
  const double scale = std::max(1.0, domain.tau);
  for (int t = 0; t < num_triangles(); ++t)
    if (!(signed_area(t) > 0.0)) throw MeshFailure("mesh: nonpositive triangle area");

  std::unordered_set<int> firsts, seconds;
  for (const auto& [i, j] : periodic_pairs) {
    const Eigen::Vector2d vi = vertices.row(i);
    const Eigen::Vector2d vj = vertices.row(j);
    if ((vj - vi - Eigen::Vector2d(0.0, domain.tau)).norm() > 1e-12 * scale)
      throw MeshFailure("mesh: periodic pair is not an exact tau-translate");
    if (!firsts.insert(i).second || !seconds.insert(j).second)
      throw MeshFailure("mesh: periodic pairing is not a bijection");
  }
  for (const auto& e : boundary_edges) {
    if (e.tag == SegTag::PER0 && (!firsts.count(e.a) || !firsts.count(e.b)))
      throw MeshFailure("mesh: Gamma_0 vertex missing from periodic pairing");
    if (e.tag == SegTag::PER1 && (!seconds.count(e.a) || !seconds.count(e.b)))
      throw MeshFailure("mesh: Gamma_1 vertex missing from periodic pairing");
  }

  // every mesh boundary edge appears exactly once and is tagged
  std::unordered_map<std::uint64_t, int> count;
  for (int t = 0; t < num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) count[edge_key(triangles(t, i), triangles(t, (i + 1) % 3))]++;
  std::size_t nb = 0;
  for (const auto& [k, c] : count)
    if (c == 1) ++nb;
  if (nb != boundary_edges.size()) throw MeshFailure("mesh: tagged edges do not cover the boundary");
  for (const auto& e : boundary_edges)
    if (count[edge_key(e.a, e.b)] != 1) throw MeshFailure("mesh: tagged edge is not on the boundary");

  const double a1 = area(), a2 = area_by_boundary();
  if (std::abs(a1 - a2) > 1e-8 * std::abs(a1))
    throw MeshFailure("mesh: triangle area sum disagrees with boundary quadrature");
}

Mesh generate_mesh(const CascadeDomain& dom, double target_h, double cut_delta) {
  if (!(target_h > 0.0)) throw MeshFailure("generate_mesh: target_h must be positive");
  const double d = dom.d, tau = dom.tau;

  // boundary chain sample counts
  double arc0 = 0.0;
  {
    Eigen::Vector2d prev(0.0, dom.gamma0_height(0.0));
    const int n = 512;
    for (int i = 1; i <= n; ++i) {
      const double x = d * double(i) / n;
      const Eigen::Vector2d cur(x, dom.gamma0_height(x));
      arc0 += (cur - prev).norm();
      prev = cur;
    }
  }
  const int n0 = std::max(2, int(std::ceil(arc0 / target_h)));
  const int nin = std::max(2, int(std::ceil(tau / target_h)));

  int np = 0;
  if (!dom.profile.is_empty()) {
    Eigen::Vector2d plo, phi;
    dom.profile.bounding_box(plo, phi);
    if (target_h > (phi - plo).norm())
      throw MeshFailure("generate_mesh: profile unresolved at target_h");
    const double perim = dom.profile.polyline_length(4096);
    // the profile always gets at least 16 boundary vertices
    np = std::max(16, int(std::ceil(perim / target_h)));
  }

  const bool with_cut = cut_delta > 0.0;
  if (with_cut) {
    if (!(cut_delta < tau)) throw MeshFailure("generate_mesh: cut_delta must lie in (0, tau)");
    if (!dom.profile.is_empty()) {
      for (int i = 0; i < 1024; ++i) {
        const Eigen::Vector2d p = dom.profile.point(double(i) / 1024);
        if (p.y() <= dom.gamma0_height(p.x()) + cut_delta + 0.5 * target_h)
          throw MeshFailure("generate_mesh: cut line intersects or touches the profile");
      }
    }
  }

  std::vector<SeedPoint> seeds;
  std::vector<int> chain_g0, chain_g1, chain_in, chain_out, chain_p, chain_cut;

  auto push = [&](const Eigen::Vector2d& x, VertexKind k, double param = -1.0) {
    seeds.push_back({x, k, param});
    return int(seeds.size()) - 1;
  };

  for (int i = 0; i <= n0; ++i) {
    const double x = d * double(i) / n0;
    chain_g0.push_back(push({x, dom.gamma0_height(x)}, VertexKind::Gamma0));
  }
  for (int i = 0; i <= n0; ++i) {
    const Eigen::Vector2d base = seeds[chain_g0[i]].x;
    chain_g1.push_back(push({base.x(), base.y() + tau}, VertexKind::Gamma1));
  }
  // Gamma_in from A0 to A1 and Gamma_out from B0 to B1. The corners already
  // exist on the periodic chains; when a cut polyline is requested its two
  // endpoints are shared with these chains.
  int cut_in = -1, cut_out = -1;
  auto build_side = [&](double x, double base_y, VertexKind kind, int first, int last,
                        std::vector<int>& chain) -> int {
    chain.push_back(first);
    int cut_id = -1;
    std::vector<double> breaks{0.0};
    if (with_cut) breaks.push_back(cut_delta);
    breaks.push_back(tau);
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
      const double len = breaks[s + 1] - breaks[s];
      const int nseg = std::max(1, int(std::ceil(len / target_h)));
      for (int i = 1; i < nseg; ++i)
        chain.push_back(push({x, base_y + breaks[s] + len * double(i) / nseg}, kind));
      if (s + 2 < breaks.size()) {
        cut_id = push({x, base_y + breaks[s + 1]}, VertexKind::Cut);
        chain.push_back(cut_id);
      }
    }
    chain.push_back(last);
    return cut_id;
  };
  cut_in = build_side(0.0, dom.corner_a02, VertexKind::In, chain_g0.front(), chain_g1.front(),
                      chain_in);
  cut_out = build_side(d, dom.corner_b02, VertexKind::Out, chain_g0.back(), chain_g1.back(),
                       chain_out);

  for (int i = 0; i < np; ++i) {
    const double t = double(i) / np;
    chain_p.push_back(push(dom.profile.point(t), VertexKind::Profile, t));
  }

  if (with_cut) {
    chain_cut.push_back(cut_in);
    for (int i = 1; i < n0; ++i) {
      const Eigen::Vector2d base = seeds[chain_g0[i]].x;
      chain_cut.push_back(push({base.x(), base.y() + cut_delta}, VertexKind::Cut));
    }
    chain_cut.push_back(cut_out);
  }

  // interior lattice with deterministic jitter, keeping clear of constraints
  std::vector<Eigen::Vector2d> profile_poly;
  for (int id : chain_p) profile_poly.push_back(seeds[id].x);
  const int nx = std::max(1, int(std::lround(d / target_h)));
  const int ny = std::max(1, int(std::lround(tau / target_h)));
  const double hx = d / nx, hy = tau / ny;
  Eigen::Vector2d plo(0, 0), phi(0, 0);
  if (np > 0) dom.profile.bounding_box(plo, phi);
  for (int i = 1; i < nx; ++i) {
    for (int j = 1; j < ny; ++j) {
      const double x = i * hx + 0.15 * hx * jitter(i, 2 * j);
      const double y = dom.gamma0_height(x) + j * hy + 0.15 * hy * jitter(i, 2 * j + 1);
      const Eigen::Vector2d pt(x, y);
      if (x < 0.45 * hx || x > d - 0.45 * hx) continue;
      const double c = dom.gamma0_height(x);
      if (y - c < 0.45 * hy || (c + tau) - y < 0.45 * hy) continue;
      if (with_cut && std::abs(y - (c + cut_delta)) < 0.45 * hy) continue;
      if (np > 0 && x > plo.x() - target_h && x < phi.x() + target_h && y > plo.y() - target_h &&
          y < phi.y() + target_h) {
        if (polygon_contains(profile_poly, pt)) continue;
        if (dist_to_polyline(profile_poly, pt, true) < 0.7 * target_h) continue;
      }
      push(pt, VertexKind::Interior);
    }
  }

  // triangulate
  Eigen::Vector2d lo(0.0, dom.corner_a02), hi(d, dom.corner_b02 + tau);
  for (const auto& s : seeds) {
    lo = lo.cwiseMin(s.x);
    hi = hi.cwiseMax(s.x);
  }
  Delaunay dt;
  dt.init_super(lo, hi);
  std::vector<int> dtid(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) dtid[i] = dt.add_point(seeds[i].x);
  for (std::size_t i = 0; i < seeds.size(); ++i) dt.insert(dtid[i]);

  std::unordered_set<std::uint64_t> constrained;
  auto constrain_chain = [&](const std::vector<int>& chain, bool closed) {
    const int n = int(chain.size());
    const int m = closed ? n : n - 1;
    for (int i = 0; i < m; ++i) {
      const int a = dtid[chain[i]];
      const int b = dtid[chain[(i + 1) % n]];
      dt.enforce_edge(a, b);
      constrained.insert(edge_key(a, b));
    }
  };
  constrain_chain(chain_g0, false);
  constrain_chain(chain_g1, false);
  constrain_chain(chain_in, false);
  constrain_chain(chain_out, false);
  if (np > 0) constrain_chain(chain_p, true);
  if (with_cut) constrain_chain(chain_cut, false);

  // drop the exterior (flood from super-vertex triangles, blocked by constraints)
  std::vector<char> exterior(dt.tris.size(), 0);
  std::vector<int> stack;
  for (int t = 0; t < int(dt.tris.size()); ++t) {
    if (!dt.tris[t].alive) continue;
    for (int i = 0; i < 3; ++i)
      if (dt.is_super(dt.tris[t].v[i])) {
        if (!exterior[t]) {
          exterior[t] = 1;
          stack.push_back(t);
        }
      }
  }
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    for (int i = 0; i < 3; ++i) {
      const int nb = dt.tris[t].n[i];
      if (nb < 0 || exterior[nb] || !dt.tris[nb].alive) continue;
      if (constrained.count(edge_key(dt.tris[t].v[(i + 1) % 3], dt.tris[t].v[(i + 2) % 3])))
        continue;
      exterior[nb] = 1;
      stack.push_back(nb);
    }
  }

  std::vector<int> kept;
  for (int t = 0; t < int(dt.tris.size()); ++t) {
    if (!dt.tris[t].alive || exterior[t]) continue;
    if (np > 0) {
      const Eigen::Vector2d c =
          (dt.pts[dt.tris[t].v[0]] + dt.pts[dt.tris[t].v[1]] + dt.pts[dt.tris[t].v[2]]) / 3.0;
      if (polygon_contains(profile_poly, c)) continue;
    }
    kept.push_back(t);
  }
  if (kept.empty()) throw MeshFailure("generate_mesh: no interior triangles");

  // compact into the Mesh structure
  Mesh mesh;
  mesh.domain = dom;
  mesh.cut_delta = with_cut ? cut_delta : -1.0;
  std::vector<int> remap(dt.pts.size(), -1);
  std::vector<Eigen::Vector2d> verts;
  std::vector<VertexKind> vkind;
  std::vector<double> vparam;
  auto map_vertex = [&](int dv) {
    if (remap[dv] < 0) {
      remap[dv] = int(verts.size());
      verts.push_back(dt.pts[dv]);
      // seeds and dt points share indexing up to the 3 super vertices
      const int sid = dv - 3;
      vkind.push_back(seeds[sid].kind);
      vparam.push_back(seeds[sid].param);
    }
    return remap[dv];
  };

  mesh.triangles.resize(int(kept.size()), 3);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto& T = dt.tris[kept[k]];
    int a = map_vertex(T.v[0]), b = map_vertex(T.v[1]), c = map_vertex(T.v[2]);
    if (orient2d(verts[a], verts[b], verts[c]) < 0) std::swap(b, c);
    mesh.triangles(int(k), 0) = a;
    mesh.triangles(int(k), 1) = b;
    mesh.triangles(int(k), 2) = c;
  }
  mesh.vertices.resize(int(verts.size()), 2);
  for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(int(i)) = verts[i];
  mesh.vkind = std::move(vkind);
  mesh.vparam = std::move(vparam);

  // boundary edges, oriented as stored in their (CCW) triangle
  std::unordered_map<std::uint64_t, int> ecount;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i)
      ecount[edge_key(mesh.triangles(t, i), mesh.triangles(t, (i + 1) % 3))]++;
  auto classify_edge = [&](int a, int b) -> SegTag {
    const auto ka = mesh.vkind[a], kb = mesh.vkind[b];
    if (mesh.vertices(a, 0) == 0.0 && mesh.vertices(b, 0) == 0.0) return SegTag::IN;
    if (mesh.vertices(a, 0) == d && mesh.vertices(b, 0) == d) return SegTag::OUT;
    if (ka == VertexKind::Gamma0 && kb == VertexKind::Gamma0) return SegTag::PER0;
    if (ka == VertexKind::Gamma1 && kb == VertexKind::Gamma1) return SegTag::PER1;
    if (ka == VertexKind::Profile && kb == VertexKind::Profile) return SegTag::PROFILE;
    throw MeshFailure("generate_mesh: cannot tag a boundary edge");
  };
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const int a = mesh.triangles(t, i), b = mesh.triangles(t, (i + 1) % 3);
      if (ecount[edge_key(a, b)] == 1) mesh.boundary_edges.push_back({a, b, classify_edge(a, b)});
    }
  }

  for (int i = 0; i <= n0; ++i) {
    const int a = remap[dtid[chain_g0[i]]];
    const int b = remap[dtid[chain_g1[i]]];
    if (a < 0 || b < 0) throw MeshFailure("generate_mesh: periodic chain vertex lost");
    mesh.periodic_pairs.emplace_back(a, b);
  }

  mesh.h_max = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector2d e = mesh.vertices.row(mesh.triangles(t, i)) -
                                mesh.vertices.row(mesh.triangles(t, (i + 1) % 3));
      mesh.h_max = std::max(mesh.h_max, e.norm());
    }

  mesh.validate();
  return mesh;
}

Mesh refine(const Mesh& mesh) {
  Mesh out;
  out.domain = mesh.domain;
  out.cut_delta = mesh.cut_delta;

  const int nv = mesh.num_vertices();
  std::vector<Eigen::Vector2d> verts(nv);
  for (int i = 0; i < nv; ++i) verts[i] = mesh.vertices.row(i);
  out.vkind = mesh.vkind;
  out.vparam = mesh.vparam;

  std::unordered_map<int, int> pair_of;  // Gamma_0 -> Gamma_1
  for (const auto& [i, j] : mesh.periodic_pairs) pair_of[i] = j;
  std::unordered_map<std::uint64_t, SegTag> btag;
  for (const auto& e : mesh.boundary_edges) btag[edge_key(e.a, e.b)] = e.tag;

  out.periodic_pairs = mesh.periodic_pairs;
  std::unordered_map<std::uint64_t, int> mid;

  // Gamma_0 midpoints are created in a pre-pass, so the Gamma_1 branch below
  // can always look its partner up.
  auto midpoint_of = [&](int a, int b) -> int {
    const auto key = edge_key(a, b);
    const auto it = mid.find(key);
    if (it != mid.end()) return it->second;

    const auto bt = btag.find(key);
    Eigen::Vector2d pos = 0.5 * (verts[a] + verts[b]);
    VertexKind kind = VertexKind::Interior;
    double param = -1.0;
    if (bt != btag.end()) {
      switch (bt->second) {
        case SegTag::PROFILE: {
          double ta = mesh.vparam[a], tb = mesh.vparam[b];
          if (std::abs(ta - tb) > 0.5) {
            if (ta < tb)
              ta += 1.0;
            else
              tb += 1.0;
          }
          param = 0.5 * (ta + tb);
          param -= std::floor(param);
          pos = mesh.domain.profile.point(param);
          kind = VertexKind::Profile;
          break;
        }
        case SegTag::PER0:
          kind = VertexKind::Gamma0;
          break;
        case SegTag::PER1:
          kind = VertexKind::Gamma1;
          break;
        case SegTag::IN:
          kind = VertexKind::In;
          pos.x() = 0.0;
          break;
        case SegTag::OUT:
          kind = VertexKind::Out;
          pos.x() = mesh.domain.d;
          break;
      }
    } else if (mesh.vkind[a] == VertexKind::Cut && mesh.vkind[b] == VertexKind::Cut) {
      kind = VertexKind::Cut;
    }

    // Gamma_1 midpoints must be the exact tau-translates of their partners.
    if (kind == VertexKind::Gamma1) {
      int a0 = -1, b0 = -1;
      for (const auto& [p0, p1] : mesh.periodic_pairs) {
        if (p1 == a) a0 = p0;
        if (p1 == b) b0 = p0;
      }
      if (a0 < 0 || b0 < 0) throw MeshFailure("refine: Gamma_1 edge without partners");
      const auto m0_it = mid.find(edge_key(a0, b0));
      if (m0_it == mid.end()) throw MeshFailure("refine: Gamma_0 midpoint missing");
      const int m0 = m0_it->second;
      pos = verts[m0] + Eigen::Vector2d(0.0, mesh.domain.tau);
      const int id = int(verts.size());
      verts.push_back(pos);
      out.vkind.push_back(kind);
      out.vparam.push_back(param);
      mid[key] = id;
      out.periodic_pairs.emplace_back(m0, id);
      return id;
    }

    const int id = int(verts.size());
    verts.push_back(pos);
    out.vkind.push_back(kind);
    out.vparam.push_back(param);
    mid[key] = id;
    return id;
  };

  // create Gamma_0 midpoints first so Gamma_1 lookups always succeed
  for (const auto& e : mesh.boundary_edges)
    if (e.tag == SegTag::PER0) midpoint_of(e.a, e.b);

  const int nt = mesh.num_triangles();
  out.triangles.resize(4 * nt, 3);
  for (int t = 0; t < nt; ++t) {
    const int a = mesh.triangles(t, 0), b = mesh.triangles(t, 1), c = mesh.triangles(t, 2);
    const int ab = midpoint_of(a, b), bc = midpoint_of(b, c), ca = midpoint_of(c, a);
    out.triangles.row(4 * t + 0) << a, ab, ca;
    out.triangles.row(4 * t + 1) << b, bc, ab;
    out.triangles.row(4 * t + 2) << c, ca, bc;
    out.triangles.row(4 * t + 3) << ab, bc, ca;
  }

  for (const auto& e : mesh.boundary_edges) {
    const int m = midpoint_of(e.a, e.b);
    out.boundary_edges.push_back({e.a, m, e.tag});
    out.boundary_edges.push_back({m, e.b, e.tag});
  }

  out.vertices.resize(int(verts.size()), 2);
  for (std::size_t i = 0; i < verts.size(); ++i) out.vertices.row(int(i)) = verts[i];

  out.h_max = 0.0;
  for (int t = 0; t < out.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector2d e = out.vertices.row(out.triangles(t, i)) -
                                out.vertices.row(out.triangles(t, (i + 1) % 3));
      out.h_max = std::max(out.h_max, e.norm());
    }

  out.validate();
  return out;
}

Mesh shift_window(const Mesh& mesh, const CascadeDomain& dom, double delta) {
  if (delta == 0.0) return mesh;
  if (!(delta > 0.0) || !(delta < dom.tau))
    throw NoCutLine("shift_window: delta must lie in [0, tau)");
  if (!dom.gamma0.is_straight())
    throw NoCutLine("shift_window: supported for straight Gamma_0 only");
  if (!dom.profile.is_empty()) {
    for (int i = 0; i < 1024; ++i) {
      const Eigen::Vector2d p = dom.profile.point(double(i) / 1024);
      if (p.y() <= dom.gamma0_height(p.x()) + delta)
        throw NoCutLine("shift_window: profile does not lie above the cut line");
    }
  }

  const double tol = 1e-9 * std::max(1.0, dom.tau);
  auto cut_height = [&](double x) { return dom.gamma0_height(x) + delta; };

  std::vector<int> cut_verts;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (std::abs(mesh.vertices(v, 1) - cut_height(mesh.vertices(v, 0))) <= tol)
      cut_verts.push_back(v);
  if (cut_verts.size() < 2) throw NoCutLine("shift_window: mesh has no cut polyline at this delta");
  std::sort(cut_verts.begin(), cut_verts.end(),
            [&](int a, int b) { return mesh.vertices(a, 0) < mesh.vertices(b, 0); });
  if (std::abs(mesh.vertices(cut_verts.front(), 0)) > tol ||
      std::abs(mesh.vertices(cut_verts.back(), 0) - dom.d) > tol)
    throw NoCutLine("shift_window: cut polyline does not span the strip");
  std::unordered_set<std::uint64_t> edges;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i)
      edges.insert(edge_key(mesh.triangles(t, i), mesh.triangles(t, (i + 1) % 3)));
  for (std::size_t i = 0; i + 1 < cut_verts.size(); ++i)
    if (!edges.count(edge_key(cut_verts[i], cut_verts[i + 1])))
      throw NoCutLine("shift_window: cut polyline is not a connected mesh line");

  std::unordered_map<int, int> g1_of;
  for (const auto& [i, j] : mesh.periodic_pairs) g1_of[i] = j;

  const int nv = mesh.num_vertices();
  std::vector<Eigen::Vector2d> verts(nv);
  for (int v = 0; v < nv; ++v) verts[v] = mesh.vertices.row(v);
  std::vector<VertexKind> vkind = mesh.vkind;
  std::vector<double> vparam = mesh.vparam;

  // vertices referenced by strip triangles map to their tau-translate
  std::unordered_map<int, int> lifted;
  auto lift = [&](int v) -> int {
    if (auto it = g1_of.find(v); it != g1_of.end()) return it->second;
    if (auto it = lifted.find(v); it != lifted.end()) return it->second;
    const int id = int(verts.size());
    verts.push_back(verts[v] + Eigen::Vector2d(0.0, dom.tau));
    vkind.push_back(vkind[v] == VertexKind::Cut ? VertexKind::Gamma1 : vkind[v]);
    vparam.push_back(vparam[v]);
    lifted[v] = id;
    return id;
  };

  Eigen::MatrixX3i tri(mesh.num_triangles(), 3);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Vector2d c = (mesh.vertices.row(mesh.triangles(t, 0)) +
                               mesh.vertices.row(mesh.triangles(t, 1)) +
                               mesh.vertices.row(mesh.triangles(t, 2))) /
                              3.0;
    const bool strip = c.y() < cut_height(c.x());
    for (int i = 0; i < 3; ++i) {
      const int v = mesh.triangles(t, i);
      tri(t, i) = strip ? lift(v) : v;
    }
  }

  // compact unused vertices (the old Gamma_0 chain)
  std::vector<int> remap(verts.size(), -1);
  Mesh out;
  {
    std::vector<Eigen::Vector2d> nverts;
    std::vector<VertexKind> nkind;
    std::vector<double> nparam;
    for (int t = 0; t < tri.rows(); ++t)
      for (int i = 0; i < 3; ++i) {
        const int v = tri(t, i);
        if (remap[v] < 0) {
          remap[v] = int(nverts.size());
          nverts.push_back(verts[v]);
          nkind.push_back(vkind[v]);
          nparam.push_back(vparam[v]);
        }
      }
    out.triangles.resize(tri.rows(), 3);
    for (int t = 0; t < tri.rows(); ++t)
      for (int i = 0; i < 3; ++i) out.triangles(t, i) = remap[tri(t, i)];
    out.vertices.resize(int(nverts.size()), 2);
    for (std::size_t i = 0; i < nverts.size(); ++i) out.vertices.row(int(i)) = nverts[i];
    out.vkind = std::move(nkind);
    out.vparam = std::move(nparam);
  }

  // new vertex kinds along the seam: old cut vertices are the new Gamma_0,
  // old Gamma_1 vertices become interior
  for (int v = 0; v < out.num_vertices(); ++v)
    if (out.vkind[v] == VertexKind::Gamma1 &&
        std::abs(out.vertices(v, 1) - (cut_height(out.vertices(v, 0)) + dom.tau)) > tol)
      out.vkind[v] = VertexKind::Interior;
  for (int v = 0; v < out.num_vertices(); ++v)
    if (out.vkind[v] == VertexKind::Cut) out.vkind[v] = VertexKind::Gamma0;

  // shifted domain description
  Gamma0Curve g0 = dom.gamma0;
  g0.a02 += delta;
  g0.b02 += delta;
  out.domain = build_domain(dom.d, dom.tau, dom.profile, g0);
  out.cut_delta = -1.0;

  // boundary edges recomputed and classified against the shifted domain
  std::unordered_map<std::uint64_t, int> ecount;
  for (int t = 0; t < out.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i)
      ecount[edge_key(out.triangles(t, i), out.triangles(t, (i + 1) % 3))]++;
  auto hcut = [&](double x) { return cut_height(x); };
  for (int t = 0; t < out.num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const int a = out.triangles(t, i), b = out.triangles(t, (i + 1) % 3);
      if (ecount[edge_key(a, b)] != 1) continue;
      SegTag tag;
      const Eigen::Vector2d pa = out.vertices.row(a), pb = out.vertices.row(b);
      if (pa.x() == 0.0 && pb.x() == 0.0)
        tag = SegTag::IN;
      else if (pa.x() == dom.d && pb.x() == dom.d)
        tag = SegTag::OUT;
      else if (std::abs(pa.y() - hcut(pa.x())) <= tol && std::abs(pb.y() - hcut(pb.x())) <= tol)
        tag = SegTag::PER0;
      else if (std::abs(pa.y() - hcut(pa.x()) - dom.tau) <= tol &&
               std::abs(pb.y() - hcut(pb.x()) - dom.tau) <= tol)
        tag = SegTag::PER1;
      else
        tag = SegTag::PROFILE;
      out.boundary_edges.push_back({a, b, tag});
    }
  }

  for (int v : cut_verts) {
    const int bottom = remap[v];
    const int top = remap.at(lifted.at(v));
    if (bottom < 0 || top < 0) throw NoCutLine("shift_window: seam vertex lost");
    out.periodic_pairs.emplace_back(bottom, top);
  }

  out.h_max = mesh.h_max;
  out.validate();
  return out;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("save_mesh: cannot open " + path);
  char buf[64];
  f << "cascade-mesh v1\n";
  f << "V " << mesh.num_vertices() << "\n";
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", mesh.vertices(i, 0), mesh.vertices(i, 1));
    f << buf;
  }
  f << "T " << mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t)
    f << mesh.triangles(t, 0) << ' ' << mesh.triangles(t, 1) << ' ' << mesh.triangles(t, 2)
      << "\n";
  f << "E " << mesh.boundary_edges.size() << "\n";
  for (const auto& e : mesh.boundary_edges)
    f << e.a << ' ' << e.b << ' ' << to_string(e.tag) << "\n";
  f << "P " << mesh.periodic_pairs.size() << "\n";
  for (const auto& [i, j] : mesh.periodic_pairs) f << i << ' ' << j << "\n";
}

Mesh load_mesh(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("load_mesh: cannot open " + path);
  std::string line;
  std::getline(f, line);
  if (line != "cascade-mesh v1") throw Error("load_mesh: bad header");

  Mesh mesh;
  std::string key;
  int n = 0;
  f >> key >> n;
  if (key != "V") throw Error("load_mesh: expected V section");
  mesh.vertices.resize(n, 2);
  for (int i = 0; i < n; ++i) f >> mesh.vertices(i, 0) >> mesh.vertices(i, 1);
  f >> key >> n;
  if (key != "T") throw Error("load_mesh: expected T section");
  mesh.triangles.resize(n, 3);
  for (int i = 0; i < n; ++i) f >> mesh.triangles(i, 0) >> mesh.triangles(i, 1) >> mesh.triangles(i, 2);
  f >> key >> n;
  if (key != "E") throw Error("load_mesh: expected E section");
  for (int i = 0; i < n; ++i) {
    BoundaryEdge e;
    std::string tag;
    f >> e.a >> e.b >> tag;
    if (tag == "IN") e.tag = SegTag::IN;
    else if (tag == "OUT") e.tag = SegTag::OUT;
    else if (tag == "PER0") e.tag = SegTag::PER0;
    else if (tag == "PER1") e.tag = SegTag::PER1;
    else if (tag == "PROFILE") e.tag = SegTag::PROFILE;
    else throw Error("load_mesh: unknown edge tag " + tag);
    mesh.boundary_edges.push_back(e);
  }
  f >> key >> n;
  if (key != "P") throw Error("load_mesh: expected P section");
  for (int i = 0; i < n; ++i) {
    int a, b;
    f >> a >> b;
    mesh.periodic_pairs.emplace_back(a, b);
  }
  if (!f) throw Error("load_mesh: truncated file");

  mesh.vkind.assign(mesh.num_vertices(), VertexKind::Interior);
  mesh.vparam.assign(mesh.num_vertices(), -1.0);
  mesh.h_max = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector2d e = mesh.vertices.row(mesh.triangles(t, i)) -
                                mesh.vertices.row(mesh.triangles(t, (i + 1) % 3));
      mesh.h_max = std::max(mesh.h_max, e.norm());
    }
  return mesh;
}

Eigen::Vector3d barycentric(const Mesh& mesh, int t, const Eigen::Vector2d& x) {
  const Eigen::Vector2d a = mesh.vertices.row(mesh.triangles(t, 0));
  const Eigen::Vector2d b = mesh.vertices.row(mesh.triangles(t, 1));
  const Eigen::Vector2d c = mesh.vertices.row(mesh.triangles(t, 2));
  const double det = orient2d(a, b, c);
  Eigen::Vector3d bary;
  bary[0] = orient2d(x, b, c) / det;
  bary[1] = orient2d(a, x, c) / det;
  bary[2] = 1.0 - bary[0] - bary[1];
  return bary;
}

TriLocator::TriLocator(const Mesh& mesh) : mesh_(&mesh) {
  lo_ = mesh.vertices.colwise().minCoeff().transpose();
  hi_ = mesh.vertices.colwise().maxCoeff().transpose();
  cell_ = std::max(mesh.h_max, 1e-12);
  nx_ = std::max(1, int((hi_.x() - lo_.x()) / cell_) + 1);
  ny_ = std::max(1, int((hi_.y() - lo_.y()) / cell_) + 1);
  bins_.resize(std::size_t(nx_) * ny_);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    Eigen::Vector2d tlo = mesh.vertices.row(mesh.triangles(t, 0));
    Eigen::Vector2d thi = tlo;
    for (int i = 1; i < 3; ++i) {
      const Eigen::Vector2d v = mesh.vertices.row(mesh.triangles(t, i));
      tlo = tlo.cwiseMin(v);
      thi = thi.cwiseMax(v);
    }
    const int i0 = std::clamp(int((tlo.x() - lo_.x()) / cell_), 0, nx_ - 1);
    const int i1 = std::clamp(int((thi.x() - lo_.x()) / cell_), 0, nx_ - 1);
    const int j0 = std::clamp(int((tlo.y() - lo_.y()) / cell_), 0, ny_ - 1);
    const int j1 = std::clamp(int((thi.y() - lo_.y()) / cell_), 0, ny_ - 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) bins_[std::size_t(j) * nx_ + i].push_back(t);
  }
}

int TriLocator::locate(const Eigen::Vector2d& x, Eigen::Vector3d& bary, double tol) const {
  const int i = std::clamp(int((x.x() - lo_.x()) / cell_), 0, nx_ - 1);
  const int j = std::clamp(int((x.y() - lo_.y()) / cell_), 0, ny_ - 1);
  int best = -1;
  double best_min = -std::numeric_limits<double>::max();
  for (int t : bins_[std::size_t(j) * nx_ + i]) {
    const Eigen::Vector3d bc = barycentric(*mesh_, t, x);
    const double mn = bc.minCoeff();
    if (mn > best_min) {
      best_min = mn;
      best = t;
      if (mn >= 0.0) break;
    }
  }
  if (best >= 0 && best_min >= -tol) {
    bary = barycentric(*mesh_, best, x);
    return best;
  }
  return -1;
}

}  // namespace cascade
