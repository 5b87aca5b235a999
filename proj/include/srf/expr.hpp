#pragma once

#include <memory>
#include <string>
#include <vector>

namespace srf {

/// Arithmetic expression over coordinates and time.
/// Grammar: + - * / ^ (right associative), unary minus, parentheses, numbers,
/// exp(.), log(.), the time variable t and coordinates x, y, z (or x0, x1, x2).
class Expression {
 public:
  Expression() = default;
  static Expression parse(const std::string& text);

  double eval(double t, const double* coords, std::size_t dim) const;
  double eval(double t, const std::vector<double>& coords) const { return eval(t, coords.data(), coords.size()); }
  const std::string& text() const { return text_; }
  bool empty() const { return !root_; }
  // Largest coordinate index referenced, or -1.
  int max_coordinate() const { return max_coord_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  int max_coord_ = -1;
};

}  // namespace srf
