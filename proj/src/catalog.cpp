#include "cascade/catalog.hpp"

#include <cmath>

namespace cascade {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void need_params(const std::vector<double>& p, std::size_t n, const char* what) {
  if (p.size() < n) throw ValidationError(std::string(what) + ": not enough parameters");
}

// polynomial in one variable, coefficients by ascending power
struct Poly {
  std::vector<double> c;
  double eval(double t) const {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
    return v;
  }
  Poly deriv() const {
    Poly d;
    for (std::size_t i = 1; i < c.size(); ++i) d.c.push_back(double(i) * c[i]);
    return d;
  }
};

/// C^3 profile cutoff along x1: a bump t^4 (1-t)^4 on [0, xl], identically
/// zero on [xl, xr], and a ramp t^4 on [xr, d].
class StreamShape {
 public:
  StreamShape(double xl, double xr, double d, double a1, double a2)
      : xl_(xl), xr_(xr), d_(d) {
    Poly bump{{0, 0, 0, 0, 1, -4, 6, -4, 1}};  // t^4 (1-t)^4
    Poly ramp{{0, 0, 0, 0, 1}};                // t^4
    bump_[0] = bump;
    ramp_[0] = ramp;
    for (int k = 1; k < 4; ++k) {
      bump_[k] = bump_[k - 1].deriv();
      ramp_[k] = ramp_[k - 1].deriv();
    }
    a1_ = a1;
    a2_ = a2;
  }

  // k-th derivative of s at x, k = 0..3
  double operator()(double x, int k) const {
    if (x <= 0.0 || x >= xl_) {
      if (x < xr_ || xr_ >= d_) {
        if (x > 0.0 && x < xr_) return 0.0;
        if (x <= 0.0) return 0.0;
      }
      if (x >= xr_ && xr_ < d_) {
        const double w = d_ - xr_;
        const double t = (x - xr_) / w;
        return a2_ * ramp_[k].eval(std::min(t, 1.0)) / std::pow(w, k);
      }
      return 0.0;
    }
    const double t = x / xl_;
    return a1_ * bump_[k].eval(t) / std::pow(xl_, k);
  }

 private:
  double xl_, xr_, d_;
  double a1_ = 1.0, a2_ = 1.0;
  Poly bump_[4], ramp_[4];
};

ScalarTrace scaled(const ScalarTrace& t, double s) {
  return {[t, s](double y) { return s * t.value(y); },
          [t, s](double y) { return s * t.deriv(y); },
          [t, s](double y) { return s * t.antideriv(y); }};
}

ScalarTrace cosine_trace(double c, double a, double k, double y0) {
  return {[=](double y) { return c + a * std::cos(k * (y - y0)); },
          [=](double y) { return -a * k * std::sin(k * (y - y0)); },
          [=](double y) { return c * y + (k != 0.0 ? a * std::sin(k * (y - y0)) / k : a * y); }};
}

ScalarTrace sine_trace(double c, double a, double k, double y0) {
  return {[=](double y) { return c + a * std::sin(k * (y - y0)); },
          [=](double y) { return a * k * std::cos(k * (y - y0)); },
          [=](double y) { return c * y - (k != 0.0 ? a * std::cos(k * (y - y0)) / k : 0.0); }};
}

}  // namespace

InflowData make_inflow(const CascadeDomain& dom, const std::string& name,
                       const std::vector<double>& params, double scale) {
  const double tau = dom.tau, a02 = dom.corner_a02;
  if (name == "zero") return {ScalarTrace::zero(), ScalarTrace::zero()};
  if (name == "constant") {
    need_params(params, 2, "inflow constant");
    return {ScalarTrace::constant(scale * params[0]), ScalarTrace::constant(scale * params[1])};
  }
  if (name == "fourier") {
    // params: c, a, m, b, n -> g1 = c + a cos(2 pi m (y-a02)/tau), g2 = b sin(...)
    need_params(params, 5, "inflow fourier");
    const double km = kTwoPi * params[2] / tau, kn = kTwoPi * params[4] / tau;
    return {scaled(cosine_trace(params[0], params[1], km, a02), scale),
            scaled(sine_trace(0.0, params[3], kn, a02), scale)};
  }
  if (name == "plug") {
    // params: c -> g1 = 16 c (t(1-t))^2 with t = (y-a02)/tau, C^2-periodic
    need_params(params, 1, "inflow plug");
    const double c = 16.0 * params[0] * scale;
    return {{[=](double y) {
               const double t = (y - a02) / tau;
               return c * t * t * (1.0 - t) * (1.0 - t);
             },
             [=](double y) {
               const double t = (y - a02) / tau;
               return c * 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / tau;
             },
             [=](double y) {
               const double t = (y - a02) / tau;
               return c * tau * (t * t * t / 3.0 - t * t * t * t / 2.0 + std::pow(t, 5) / 5.0);
             }},
            ScalarTrace::zero()};
  }
  throw ValidationError("unknown inflow catalog entry: " + name);
}

OutflowTrace make_outflow(const CascadeDomain& dom, const std::string& name,
                          const std::vector<double>& params, double scale) {
  const double tau = dom.tau, b02 = dom.corner_b02;
  if (name == "zero") return {ScalarTrace::zero(), ScalarTrace::zero()};
  if (name == "constant") {
    need_params(params, 2, "outflow constant");
    return {ScalarTrace::constant(scale * params[0]), ScalarTrace::constant(scale * params[1])};
  }
  if (name == "fourier") {
    // params: c1, a1, m1, c2, a2, m2
    need_params(params, 6, "outflow fourier");
    const double k1 = kTwoPi * params[2] / tau, k2 = kTwoPi * params[5] / tau;
    return {scaled(cosine_trace(params[0], params[1], k1, b02), scale),
            scaled(sine_trace(params[3], params[4], k2, b02), scale)};
  }
  throw ValidationError("unknown outflow catalog entry: " + name);
}

std::vector<TensorDataPair> tensor_data_catalog(const CascadeDomain& dom) {
  const double k = kTwoPi / dom.tau, a02 = dom.corner_a02;
  std::vector<TensorDataPair> cat;
  cat.push_back({"zero", [](const Eigen::Vector2d&) { return Eigen::Vector2d(0, 0); },
                 make_outflow(dom, "zero", {})});
  cat.push_back({"f-const", [](const Eigen::Vector2d&) { return Eigen::Vector2d(1.0, -0.5); },
                 make_outflow(dom, "zero", {})});
  cat.push_back({"h-const", [](const Eigen::Vector2d&) { return Eigen::Vector2d(0, 0); },
                 make_outflow(dom, "constant", {1.0, 0.25})});
  cat.push_back({"h-fourier", [](const Eigen::Vector2d&) { return Eigen::Vector2d(0, 0); },
                 make_outflow(dom, "fourier", {0.3, 0.5, 1.0, 0.0, 0.4, 1.0})});
  cat.push_back({"f-fourier",
                 [k, a02](const Eigen::Vector2d& x) {
                   return Eigen::Vector2d(0.7 * std::sin(k * (x.y() - a02)) * (1.0 + 0.5 * x.x()),
                                          0.3 * std::cos(k * (x.y() - a02)));
                 },
                 make_outflow(dom, "zero", {})});
  cat.push_back({"mixed",
                 [k, a02](const Eigen::Vector2d& x) {
                   return Eigen::Vector2d(x.x() * std::cos(k * (x.y() - a02)),
                                          0.5 - std::sin(k * (x.y() - a02)));
                 },
                 make_outflow(dom, "fourier", {0.1, 0.2, 1.0, 0.0, -0.3, 2.0})});
  return cat;
}

ManufacturedCase make_manufactured(const CascadeDomain& dom, const std::string& name, double nu,
                                   double scale) {
  ManufacturedCase mc;
  mc.name = name;
  mc.nu = nu;

  if (name == "constant-flow") {
    // uniform stream on the degenerate channel: u = (s, 0), p = 0
    mc.velocity = [scale](const Eigen::Vector2d&) { return Eigen::Vector2d(scale, 0.0); };
    mc.velocity_gradient = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Zero().eval(); };
    mc.velocity_dx2 = [](const Eigen::Vector2d&) { return Eigen::Vector2d(0, 0); };
    mc.pressure = [](const Eigen::Vector2d&) { return 0.0; };
    mc.pressure_dx2 = [](const Eigen::Vector2d&) { return 0.0; };
    mc.body_force = [](const Eigen::Vector2d&) { return Eigen::Vector2d(0, 0); };
    mc.traction = make_outflow(dom, "zero", {});
    mc.inflow = make_inflow(dom, "constant", {1.0, 0.0}, scale);
    return mc;
  }

  if (name != "stream") throw ValidationError("unknown manufactured case: " + name);

  // stream function psi = s(x1) sin(k x2): the cutoff s vanishes to second
  // order at x1 = 0 and identically on a strip covering the profile, so the
  // inflow datum is zero and the polygonal profile approximation never sees
  // the solution
  const double d = dom.d, tau = dom.tau;
  const double k = kTwoPi / tau;
  double xl = 0.45 * d, xr = 0.55 * d;
  if (!dom.profile.is_empty()) {
    xl = 0.9 * dom.profile_min_x1();
    xr = dom.profile_max_x1() + 0.1 * (d - dom.profile_max_x1());
  }
  const auto s = std::make_shared<StreamShape>(xl, xr, d, 0.12 * scale, 0.08 * scale);

  // pressure p = q1(x1) sin(k x2) + q2(x1)
  const double c10 = 0.4 * scale, c11 = 0.3 * scale, c22 = 0.25 * scale;
  auto q1 = [=](double x) { return c10 + c11 * x; };
  auto q2 = [=](double x) { return c22 * x * x; };

  mc.velocity = [s, k](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(k * (*s)(x.x(), 0) * std::cos(k * x.y()),
                           -(*s)(x.x(), 1) * std::sin(k * x.y()));
  };
  mc.velocity_gradient = [s, k](const Eigen::Vector2d& x) {
    Eigen::Matrix2d g;
    const double sn = std::sin(k * x.y()), cs = std::cos(k * x.y());
    g(0, 0) = k * (*s)(x.x(), 1) * cs;
    g(0, 1) = -k * k * (*s)(x.x(), 0) * sn;
    g(1, 0) = -(*s)(x.x(), 2) * sn;
    g(1, 1) = -k * (*s)(x.x(), 1) * cs;
    return g;
  };
  mc.velocity_dx2 = [s, k](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(-k * k * (*s)(x.x(), 0) * std::sin(k * x.y()),
                           -k * (*s)(x.x(), 1) * std::cos(k * x.y()));
  };
  mc.pressure = [=](const Eigen::Vector2d& x) { return q1(x.x()) * std::sin(k * x.y()) + q2(x.x()); };
  mc.pressure_dx2 = [=](const Eigen::Vector2d& x) { return q1(x.x()) * k * std::cos(k * x.y()); };
  mc.body_force = [=](const Eigen::Vector2d& x) {
    const double sn = std::sin(k * x.y()), cs = std::cos(k * x.y());
    const double lap1 = k * ((*s)(x.x(), 2) - k * k * (*s)(x.x(), 0)) * cs;
    const double lap2 = -((*s)(x.x(), 3) - k * k * (*s)(x.x(), 1)) * sn;
    return Eigen::Vector2d(-nu * lap1 + c11 * sn + 2.0 * c22 * x.x(),
                           -nu * lap2 + q1(x.x()) * k * cs);
  };

  // traction h = -nu d1 u + p e1 at x1 = d
  const double s1d = (*s)(d, 1), s2d = (*s)(d, 2);
  const double q1d = q1(d), q2d = q2(d);
  mc.traction.h1 = {
      [=](double y) { return -nu * k * s1d * std::cos(k * y) + q1d * std::sin(k * y) + q2d; },
      [=](double y) { return nu * k * k * s1d * std::sin(k * y) + q1d * k * std::cos(k * y); },
      [=](double y) {
        return -nu * s1d * std::sin(k * y) - q1d * std::cos(k * y) / k + q2d * y;
      }};
  mc.traction.h2 = {[=](double y) { return nu * s2d * std::sin(k * y); },
                    [=](double y) { return nu * s2d * k * std::cos(k * y); },
                    [=](double y) { return -nu * s2d * std::cos(k * y) / k; }};
  mc.inflow = make_inflow(dom, "zero", {});
  return mc;
}

ProfileCurve make_profile(const std::string& name, const std::vector<double>& params) {
  if (name == "none" || name == "empty") return ProfileCurve::empty();
  if (name == "circle") {
    need_params(params, 3, "profile circle");
    return ProfileCurve::circle({params[0], params[1]}, params[2]);
  }
  if (name == "ellipse") {
    need_params(params, 4, "profile ellipse");
    return ProfileCurve::ellipse({params[0], params[1]}, params[2], params[3]);
  }
  if (name == "blade") {
    need_params(params, 3, "profile blade");
    const double camber = params.size() > 3 ? params[3] : 0.08;
    const double thick = params.size() > 4 ? params[4] : 0.10;
    return ProfileCurve::blade({params[0], params[1]}, params[2], camber, thick);
  }
  if (name == "spline") {
    if (params.size() < 8 || params.size() % 2 != 0)
      throw ValidationError("profile spline: need at least 4 x,y pairs");
    Eigen::MatrixX2d pts(params.size() / 2, 2);
    for (std::size_t i = 0; i < params.size() / 2; ++i) {
      pts(int(i), 0) = params[2 * i];
      pts(int(i), 1) = params[2 * i + 1];
    }
    return ProfileCurve::spline(pts);
  }
  throw ValidationError("unknown profile catalog entry: " + name);
}

Gamma0Curve make_gamma0(const std::string& name, const std::vector<double>& params) {
  if (name == "line") {
    const double a02 = params.empty() ? 0.0 : params[0];
    const double b02 = params.size() > 1 ? params[1] : a02;
    return Gamma0Curve::line(a02, b02);
  }
  if (name == "sine") {
    need_params(params, 3, "gamma0 sine");
    const int modes = params.size() > 3 ? int(params[3]) : 1;
    return Gamma0Curve::sine(params[0], params[1], params[2], modes);
  }
  throw ValidationError("unknown gamma0 catalog entry: " + name);
}

}  // namespace cascade
