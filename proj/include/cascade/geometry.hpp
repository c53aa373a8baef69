#ifndef CASCADE_GEOMETRY_HPP
#define CASCADE_GEOMETRY_HPP

#include <Eigen/Dense>

#include "cascade/errors.hpp"

namespace cascade {

/// Tags for the five pieces of the boundary of one spatial period.
enum class SegTag { IN, OUT, PER0, PER1, PROFILE };

const char* to_string(SegTag tag);

/// Closed C^2 curve bounding the profile. Parametrized over [0,1).
///
/// Profiles come from a fixed catalog (circle, ellipse, Joukowski-like
/// blade, closed periodic cubic spline) so the C^2 property holds by
/// construction.
class ProfileCurve {
 public:
  enum class Kind { Empty, Circle, Ellipse, Blade, Spline };

  ProfileCurve() = default;

  static ProfileCurve empty();
  static ProfileCurve circle(const Eigen::Vector2d& center, double radius);
  static ProfileCurve ellipse(const Eigen::Vector2d& center, double ax, double ay);
  /// Joukowski-type blade. `chord` is the x1-extent after normalization,
  /// `camber` and `thickness` shape the generating circle's offset.
  static ProfileCurve blade(const Eigen::Vector2d& center, double chord,
                            double camber = 0.08, double thickness = 0.10);
  /// Closed periodic cubic spline through the given control points (rows).
  static ProfileCurve spline(const Eigen::MatrixX2d& points);

  bool is_empty() const { return kind_ == Kind::Empty; }
  Kind kind() const { return kind_; }

  Eigen::Vector2d point(double t) const;
  Eigen::Vector2d tangent(double t) const;

  /// Length of the sampling polyline (converges to arc length).
  double polyline_length(int n = 2048) const;

  /// Axis-aligned bounding box from `n` samples.
  void bounding_box(Eigen::Vector2d& lo, Eigen::Vector2d& hi, int n = 2048) const;

  /// Distance from x to the sampled polyline.
  double distance(const Eigen::Vector2d& x, int n = 1024) const;

  /// Winding-number test against the sampled polygon.
  bool contains(const Eigen::Vector2d& x, int n = 1024) const;

 private:
  Kind kind_ = Kind::Empty;
  Eigen::Vector2d center_{0.0, 0.0};
  double ax_ = 0.0, ay_ = 0.0;            // circle (ax==ay) / ellipse semi-axes
  // blade: generating-circle data plus the affine normalization
  Eigen::Vector2d mu_{0.0, 0.0};
  double gen_radius_ = 0.0;
  double scale_ = 1.0;
  Eigen::Vector2d shift_{0.0, 0.0};
  // spline: control points and cyclic second derivatives
  Eigen::MatrixX2d sp_;
  Eigen::MatrixX2d sm_;

  Eigen::Vector2d blade_raw(double t) const;
  Eigen::Vector2d blade_raw_tangent(double t) const;
};

/// Lower artificial boundary Gamma_0, represented as the graph
/// x2 = c(x1) running from A0 = (0, a02) to B0 = (d, b02). The upper
/// curve Gamma_1 is always the tau-translate and is never stored.
struct Gamma0Curve {
  enum class Kind { Line, Sine };
  Kind kind = Kind::Line;
  double a02 = 0.0;
  double b02 = 0.0;
  double amp = 0.0;
  int modes = 1;

  static Gamma0Curve line(double a02, double b02);
  static Gamma0Curve sine(double a02, double b02, double amp, int modes = 1);

  double height(double x1, double d) const;
  double slope(double x1, double d) const;
  bool is_straight() const { return kind == Kind::Line || amp == 0.0; }
};

/// One spatial period Omega of the cascade: the strip 0 < x1 < d between
/// Gamma_0 and Gamma_0 + tau*e2, minus the profile.
struct CascadeDomain {
  double d = 1.0;
  double tau = 1.0;
  ProfileCurve profile;
  Gamma0Curve gamma0;
  double corner_a02 = 0.0;
  double corner_b02 = 0.0;

  double gamma0_height(double x1) const { return gamma0.height(x1, d); }
  double gamma0_slope(double x1) const { return gamma0.slope(x1, d); }

  Eigen::Vector2d corner_A0() const { return {0.0, corner_a02}; }
  Eigen::Vector2d corner_A1() const { return {0.0, corner_a02 + tau}; }
  Eigen::Vector2d corner_B0() const { return {d, corner_b02}; }
  Eigen::Vector2d corner_B1() const { return {d, corner_b02 + tau}; }

  /// x1-extent of the profile (throws if empty).
  double profile_min_x1() const;
  double profile_max_x1() const;

  /// Strict interior test (between the periodic curves, outside the profile).
  bool inside(const Eigen::Vector2d& x) const;

  /// Polygonal area between the curves minus the profile area, from dense
  /// sampling. Independent reference for the mesh module's area checks.
  double reference_area(int n = 4096) const;
};

/// Validates all domain invariants and assembles the description.
CascadeDomain build_domain(double d, double tau, const ProfileCurve& profile,
                           const Gamma0Curve& gamma0);

/// Classifies a near-boundary point into exactly one segment tag.
/// Corner points resolve by the fixed priority IN/OUT over PER0/PER1.
SegTag classify_boundary_point(const CascadeDomain& dom, const Eigen::Vector2d& x,
                               double tol);

}  // namespace cascade

#endif
