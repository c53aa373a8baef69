#include "cascade/geometry.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace cascade {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double point_segment_distance(const Eigen::Vector2d& x, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (x - a).norm();
  const double t = std::clamp((x - a).dot(ab) / len2, 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

bool segments_intersect(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                        const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  auto orient = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                   const Eigen::Vector2d& r) {
    const double v = (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    return (v > 0.0) - (v < 0.0);
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d);
  const int o3 = orient(c, d, a), o4 = orient(c, d, b);
  return o1 != o2 && o3 != o4;
}

}  // namespace

const char* to_string(SegTag tag) {
  switch (tag) {
    case SegTag::IN: return "IN";
    case SegTag::OUT: return "OUT";
    case SegTag::PER0: return "PER0";
    case SegTag::PER1: return "PER1";
    case SegTag::PROFILE: return "PROFILE";
  }
  return "?";
}

ProfileCurve ProfileCurve::empty() { return ProfileCurve(); }

ProfileCurve ProfileCurve::circle(const Eigen::Vector2d& center, double radius) {
  ProfileCurve c;
  c.kind_ = Kind::Circle;
  c.center_ = center;
  c.ax_ = c.ay_ = radius;
  return c;
}

ProfileCurve ProfileCurve::ellipse(const Eigen::Vector2d& center, double ax, double ay) {
  ProfileCurve c;
  c.kind_ = Kind::Ellipse;
  c.center_ = center;
  c.ax_ = ax;
  c.ay_ = ay;
  return c;
}

ProfileCurve ProfileCurve::blade(const Eigen::Vector2d& center, double chord,
                                 double camber, double thickness) {
  ProfileCurve c;
  c.kind_ = Kind::Blade;
  c.mu_ = Eigen::Vector2d(-std::abs(thickness), camber);
  // The generating circle strictly encloses the critical point w = 1, which
  // rounds the trailing edge and keeps the tangent nonzero.
  c.gen_radius_ = 1.02 * (Eigen::Vector2d(1.0, 0.0) - c.mu_).norm();
  // Normalize the raw Joukowski image to the requested chord and center.
  Eigen::Vector2d lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
  Eigen::Vector2d hi = -lo;
  const int n = 2048;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d z = c.blade_raw(double(i) / n);
    lo = lo.cwiseMin(z);
    hi = hi.cwiseMax(z);
  }
  c.scale_ = chord / (hi.x() - lo.x());
  c.shift_ = center - c.scale_ * 0.5 * (lo + hi);
  return c;
}

ProfileCurve ProfileCurve::spline(const Eigen::MatrixX2d& points) {
  if (points.rows() < 4) throw DegenerateCurve("spline profile needs at least 4 control points");
  ProfileCurve c;
  c.kind_ = Kind::Spline;
  c.sp_ = points;
  const int k = int(points.rows());
  const double h = 1.0 / k;
  // Cyclic natural spline: solve (M_{i-1} + 4 M_i + M_{i+1})/6 = (P_{i+1}-2P_i+P_{i-1})/h^2.
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd rhs(k, 2);
  for (int i = 0; i < k; ++i) {
    sys(i, (i + k - 1) % k) += 1.0 / 6.0;
    sys(i, i) += 4.0 / 6.0;
    sys(i, (i + 1) % k) += 1.0 / 6.0;
    rhs.row(i) =
        (points.row((i + 1) % k) - 2.0 * points.row(i) + points.row((i + k - 1) % k)) / (h * h);
  }
  c.sm_ = sys.partialPivLu().solve(rhs);
  return c;
}

Eigen::Vector2d ProfileCurve::blade_raw(double t) const {
  const std::complex<double> w(mu_.x() + gen_radius_ * std::cos(kTwoPi * t),
                               mu_.y() + gen_radius_ * std::sin(kTwoPi * t));
  const std::complex<double> z = w + 1.0 / w;
  return {z.real(), z.imag()};
}

Eigen::Vector2d ProfileCurve::blade_raw_tangent(double t) const {
  const std::complex<double> w(mu_.x() + gen_radius_ * std::cos(kTwoPi * t),
                               mu_.y() + gen_radius_ * std::sin(kTwoPi * t));
  const std::complex<double> dw(-gen_radius_ * kTwoPi * std::sin(kTwoPi * t),
                                gen_radius_ * kTwoPi * std::cos(kTwoPi * t));
  const std::complex<double> dz = dw * (1.0 - 1.0 / (w * w));
  return {dz.real(), dz.imag()};
}

Eigen::Vector2d ProfileCurve::point(double t) const {
  t -= std::floor(t);
  switch (kind_) {
    case Kind::Empty:
      return {0.0, 0.0};
    case Kind::Circle:
    case Kind::Ellipse:
      return center_ + Eigen::Vector2d(ax_ * std::cos(kTwoPi * t), ay_ * std::sin(kTwoPi * t));
    case Kind::Blade:
      return scale_ * blade_raw(t) + shift_;
    case Kind::Spline: {
      const int k = int(sp_.rows());
      const double s = t * k;
      const int i = std::min(int(s), k - 1);
      const double u = s - i;
      const int j = (i + 1) % k;
      const double h = 1.0 / k;
      // standard cubic spline segment in terms of second derivatives
      Eigen::RowVector2d val = (1.0 - u) * sp_.row(i) + u * sp_.row(j) +
                               (h * h / 6.0) * (((1.0 - u) * (1.0 - u) * (1.0 - u) - (1.0 - u)) * sm_.row(i) +
                                                (u * u * u - u) * sm_.row(j));
      return val.transpose();
    }
  }
  return {0.0, 0.0};
}

Eigen::Vector2d ProfileCurve::tangent(double t) const {
  t -= std::floor(t);
  switch (kind_) {
    case Kind::Empty:
      return {0.0, 0.0};
    case Kind::Circle:
    case Kind::Ellipse:
      return {-ax_ * kTwoPi * std::sin(kTwoPi * t), ay_ * kTwoPi * std::cos(kTwoPi * t)};
    case Kind::Blade:
      return scale_ * blade_raw_tangent(t);
    case Kind::Spline: {
      const int k = int(sp_.rows());
      const double s = t * k;
      const int i = std::min(int(s), k - 1);
      const double u = s - i;
      const int j = (i + 1) % k;
      const double h = 1.0 / k;
      Eigen::RowVector2d der = (sp_.row(j) - sp_.row(i)) / h +
                               (h / 6.0) * ((3.0 * u * u - 1.0) * sm_.row(j) -
                                            (3.0 * (1.0 - u) * (1.0 - u) - 1.0) * sm_.row(i));
      return der.transpose();
    }
  }
  return {0.0, 0.0};
}

double ProfileCurve::polyline_length(int n) const {
  if (is_empty()) return 0.0;
  double len = 0.0;
  Eigen::Vector2d prev = point(0.0);
  for (int i = 1; i <= n; ++i) {
    const Eigen::Vector2d cur = point(double(i) / n);
    len += (cur - prev).norm();
    prev = cur;
  }
  return len;
}

void ProfileCurve::bounding_box(Eigen::Vector2d& lo, Eigen::Vector2d& hi, int n) const {
  lo = Eigen::Vector2d(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
  hi = -lo;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d z = point(double(i) / n);
    lo = lo.cwiseMin(z);
    hi = hi.cwiseMax(z);
  }
}

double ProfileCurve::distance(const Eigen::Vector2d& x, int n) const {
  if (is_empty()) return std::numeric_limits<double>::max();
  double best = std::numeric_limits<double>::max();
  Eigen::Vector2d prev = point(0.0);
  for (int i = 1; i <= n; ++i) {
    const Eigen::Vector2d cur = point(double(i) / n);
    best = std::min(best, point_segment_distance(x, prev, cur));
    prev = cur;
  }
  return best;
}

bool ProfileCurve::contains(const Eigen::Vector2d& x, int n) const {
  if (is_empty()) return false;
  bool in = false;
  Eigen::Vector2d a = point(0.0);
  for (int i = 1; i <= n; ++i) {
    const Eigen::Vector2d b = point(double(i) / n);
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xi = a.x() + (x.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (xi > x.x()) in = !in;
    }
    a = b;
  }
  return in;
}

Gamma0Curve Gamma0Curve::line(double a02, double b02) {
  Gamma0Curve g;
  g.kind = Kind::Line;
  g.a02 = a02;
  g.b02 = b02;
  return g;
}

Gamma0Curve Gamma0Curve::sine(double a02, double b02, double amp, int modes) {
  Gamma0Curve g;
  g.kind = Kind::Sine;
  g.a02 = a02;
  g.b02 = b02;
  g.amp = amp;
  g.modes = modes;
  return g;
}

double Gamma0Curve::height(double x1, double d) const {
  double h = a02 + (b02 - a02) * x1 / d;
  if (kind == Kind::Sine) h += amp * std::sin(modes * M_PI * x1 / d);
  return h;
}

double Gamma0Curve::slope(double x1, double d) const {
  double s = (b02 - a02) / d;
  if (kind == Kind::Sine) s += amp * (modes * M_PI / d) * std::cos(modes * M_PI * x1 / d);
  return s;
}

double CascadeDomain::profile_min_x1() const {
  Eigen::Vector2d lo, hi;
  profile.bounding_box(lo, hi);
  return lo.x();
}

double CascadeDomain::profile_max_x1() const {
  Eigen::Vector2d lo, hi;
  profile.bounding_box(lo, hi);
  return hi.x();
}

bool CascadeDomain::inside(const Eigen::Vector2d& x) const {
  if (x.x() <= 0.0 || x.x() >= d) return false;
  const double c = gamma0_height(x.x());
  if (x.y() <= c || x.y() >= c + tau) return false;
  return !profile.contains(x);
}

double CascadeDomain::reference_area(int n) const {
  // The strip between the curves has area d*tau regardless of gamma0.
  double area = d * tau;
  if (!profile.is_empty()) {
    // shoelace on the sampled profile polygon
    double a = 0.0;
    Eigen::Vector2d p0 = profile.point(0.0);
    for (int i = 1; i <= n; ++i) {
      const Eigen::Vector2d p1 = profile.point(double(i) / n);
      a += p0.x() * p1.y() - p1.x() * p0.y();
      p0 = p1;
    }
    area -= std::abs(a) / 2.0;
  }
  return area;
}

CascadeDomain build_domain(double d, double tau, const ProfileCurve& profile,
                           const Gamma0Curve& gamma0) {
  if (!(d > 0.0) || !(tau > 0.0)) throw ValidationError("build_domain: d and tau must be positive");

  CascadeDomain dom;
  dom.d = d;
  dom.tau = tau;
  dom.profile = profile;
  dom.gamma0 = gamma0;
  dom.corner_a02 = gamma0.a02;
  dom.corner_b02 = gamma0.b02;

  if (!profile.is_empty()) {
    const int n = 1024;
    // closedness of the parametrization
    if ((profile.point(0.0) - profile.point(1.0)).norm() > 1e-12)
      throw DegenerateCurve("profile curve is not closed");
    // nonvanishing tangent
    for (int i = 0; i < n; ++i) {
      if (profile.tangent(double(i) / n).norm() <= 1e-12)
        throw DegenerateCurve("profile tangent vanishes");
    }
    // simple (non-self-intersecting) polyline
    std::vector<Eigen::Vector2d> poly(n);
    for (int i = 0; i < n; ++i) poly[i] = profile.point(double(i) / n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;  // adjacent through the seam
        if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
          throw DegenerateCurve("profile curve self-intersects");
      }
    }
    // strict containment in the open period
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d& x = poly[i];
      if (x.x() <= 0.0 || x.x() >= d)
        throw ProfileOutsidePeriod("profile leaves the strip 0 < x1 < d");
      const double c = dom.gamma0_height(x.x());
      if (x.y() <= c || x.y() >= c + tau)
        throw ProfileOutsidePeriod("profile crosses Gamma_0 or Gamma_1");
    }
  }
  return dom;
}

SegTag classify_boundary_point(const CascadeDomain& dom, const Eigen::Vector2d& x,
                               double tol) {
  const Eigen::Vector2d A0 = dom.corner_A0(), A1 = dom.corner_A1();
  const Eigen::Vector2d B0 = dom.corner_B0(), B1 = dom.corner_B1();
  // Dirichlet/outflow segments win at corners.
  if (point_segment_distance(x, A0, A1) <= tol) return SegTag::IN;
  if (point_segment_distance(x, B0, B1) <= tol) return SegTag::OUT;

  const int n = 1024;
  double d0 = std::numeric_limits<double>::max();
  double d1 = std::numeric_limits<double>::max();
  Eigen::Vector2d p0(0.0, dom.corner_a02);
  for (int i = 1; i <= n; ++i) {
    const double x1 = dom.d * double(i) / n;
    const Eigen::Vector2d p1(x1, dom.gamma0_height(x1));
    d0 = std::min(d0, point_segment_distance(x, p0, p1));
    d1 = std::min(d1, point_segment_distance(x, p0 + Eigen::Vector2d(0, dom.tau),
                                             p1 + Eigen::Vector2d(0, dom.tau)));
    p0 = p1;
  }
  if (d0 <= tol) return SegTag::PER0;
  if (d1 <= tol) return SegTag::PER1;
  if (!dom.profile.is_empty() && dom.profile.distance(x) <= tol) return SegTag::PROFILE;
  throw NotOnBoundary("point is not within tol of the boundary");
}

}  // namespace cascade
