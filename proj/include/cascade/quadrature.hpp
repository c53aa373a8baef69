#ifndef CASCADE_QUADRATURE_HPP
#define CASCADE_QUADRATURE_HPP

namespace cascade {

/// Degree-5 seven-point rule on the reference triangle, barycentric
/// coordinates and weights summing to one (integral = area * sum w_i f_i).
/// Exceeds the order-4 exactness needed for quadratic-element integrands.
struct TriQuadrature {
  static constexpr int n = 7;
  static constexpr double w[7] = {
      0.225,
      0.13239415278850618, 0.13239415278850618, 0.13239415278850618,
      0.12593918054482715, 0.12593918054482715, 0.12593918054482715};
  static constexpr double l[7][3] = {
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
      {0.05971587178976982, 0.47014206410511509, 0.47014206410511509},
      {0.47014206410511509, 0.05971587178976982, 0.47014206410511509},
      {0.47014206410511509, 0.47014206410511509, 0.05971587178976982},
      {0.79742698535308732, 0.10128650732345634, 0.10128650732345634},
      {0.10128650732345634, 0.79742698535308732, 0.10128650732345634},
      {0.10128650732345634, 0.10128650732345634, 0.79742698535308732}};
};

/// Three-point Gauss rule on [0,1] (degree 5), weights summing to one.
struct EdgeQuadrature {
  static constexpr int n = 3;
  static constexpr double s[3] = {0.11270166537925831, 0.5, 0.88729833462074169};
  static constexpr double w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
};

}  // namespace cascade

#endif
