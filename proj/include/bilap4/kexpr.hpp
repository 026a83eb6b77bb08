#pragma once

#include <memory>
#include <string>

#include "bilap4/grid.hpp"

namespace bilap4 {

/// Parsed arithmetic expression over x1..x4, r = |x - c|, numeric literals,
/// + - * / ^ (right-associative), unary minus and exp/log/sqrt/sin/cos.
/// Used for the weight function k(x); immutable after parse.
class KExpr {
 public:
  static KExpr parse(const std::string& src);

  /// Evaluates at x with r measured from r_center.
  double eval(const Point4& x, const Point4& r_center) const;

  /// Canonical fully-parenthesized form; parse(print()) reproduces the tree.
  std::string print() const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
};

struct PositivityReport {
  double min_value = 0.0;
  Point4 argmin{};
  bool pass = false;
};

/// Scans k over Interior nodes; fails if the minimum is <= margin.
PositivityReport check_positive_on(const KExpr& e, const DomainMask& mask,
                                   double margin, const Point4& r_center);

}  // namespace bilap4
