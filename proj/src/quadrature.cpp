#include "nldd/quadrature.hpp"

#include "nldd/errors.hpp"

#include <string>

namespace nldd {

QuadratureRule quadrature_rule(int degree) {
  QuadratureRule rule;
  rule.degree = degree;
  switch (degree) {
    case 1:
      rule.nodes = {{1.0 / 3.0, 1.0 / 3.0, 0.5}};
      break;
    case 2:
      rule.nodes = {{0.5, 0.0, 1.0 / 6.0}, {0.5, 0.5, 1.0 / 6.0}, {0.0, 0.5, 1.0 / 6.0}};
      break;
    case 4: {
      // Strang-Fix / Dunavant six-point rule.
      constexpr double a = 0.44594849091596488632;
      constexpr double wa = 0.22338158967801146570 / 2.0;
      constexpr double b = 0.091576213509770743460;
      constexpr double wb = 0.10995174365532186764 / 2.0;
      rule.nodes = {{a, a, wa},
                    {1.0 - 2.0 * a, a, wa},
                    {a, 1.0 - 2.0 * a, wa},
                    {b, b, wb},
                    {1.0 - 2.0 * b, b, wb},
                    {b, 1.0 - 2.0 * b, wb}};
      break;
    }
    default:
      throw Error(ErrorCode::UnsupportedDegree, "no quadrature rule of degree " + std::to_string(degree));
  }
  return rule;
}

}  // namespace nldd
