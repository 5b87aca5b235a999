#include "srf/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "srf/error.hpp"

namespace srf {

struct Expression::Node {
  enum Kind { Number, Time, Coord, Neg, Add, Sub, Mul, Div, Pow, Exp, Log } kind;
  double value = 0;
  int coord = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse_all() {
    NodePtr n = parse_sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return n;
  }
  int max_coord = -1;

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw InvalidInput("expression '" + s_ + "' column " + std::to_string(pos_ + 1) + ": " + msg);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  static NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr parse_sum() {
    NodePtr left = parse_product();
    while (true) {
      if (accept('+')) left = make(Node::Add, left, parse_product());
      else if (accept('-')) left = make(Node::Sub, left, parse_product());
      else return left;
    }
  }
  NodePtr parse_product() {
    NodePtr left = parse_unary();
    while (true) {
      if (accept('*')) left = make(Node::Mul, left, parse_unary());
      else if (accept('/')) left = make(Node::Div, left, parse_unary());
      else return left;
    }
  }
  NodePtr parse_unary() {
    if (accept('-')) return make(Node::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }
  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (accept('^')) return make(Node::Pow, base, parse_unary());
    return base;
  }
  NodePtr parse_atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      NodePtr n = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->kind = Node::Number;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      if (id == "exp" || id == "log") {
        if (!accept('(')) fail("expected '(' after " + id);
        NodePtr arg = parse_sum();
        if (!accept(')')) fail("expected ')'");
        return make(id == "exp" ? Node::Exp : Node::Log, arg);
      }
      auto n = std::make_shared<Node>();
      if (id == "t") {
        n->kind = Node::Time;
        return n;
      }
      int idx = -1;
      if (id == "x" || id == "x0") idx = 0;
      else if (id == "y" || id == "x1") idx = 1;
      else if (id == "z" || id == "x2") idx = 2;
      if (idx < 0) {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      n->kind = Node::Coord;
      n->coord = idx;
      max_coord = std::max(max_coord, idx);
      return n;
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double eval_node(const Node& n, double t, const double* x, std::size_t dim) {
  switch (n.kind) {
    case Node::Number: return n.value;
    case Node::Time: return t;
    case Node::Coord:
      if (static_cast<std::size_t>(n.coord) >= dim) throw InvalidInput("expression uses a coordinate beyond the chart dimension");
      return x[n.coord];
    case Node::Neg: return -eval_node(*n.a, t, x, dim);
    case Node::Add: return eval_node(*n.a, t, x, dim) + eval_node(*n.b, t, x, dim);
    case Node::Sub: return eval_node(*n.a, t, x, dim) - eval_node(*n.b, t, x, dim);
    case Node::Mul: return eval_node(*n.a, t, x, dim) * eval_node(*n.b, t, x, dim);
    case Node::Div: return eval_node(*n.a, t, x, dim) / eval_node(*n.b, t, x, dim);
    case Node::Pow: return std::pow(eval_node(*n.a, t, x, dim), eval_node(*n.b, t, x, dim));
    case Node::Exp: return std::exp(eval_node(*n.a, t, x, dim));
    case Node::Log: return std::log(eval_node(*n.a, t, x, dim));
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Parser p(text);
  Expression e;
  e.text_ = text;
  e.root_ = p.parse_all();
  e.max_coord_ = p.max_coord;
  return e;
}

double Expression::eval(double t, const double* coords, std::size_t dim) const {
  if (!root_) throw InvalidInput("empty expression");
  return eval_node(*root_, t, coords, dim);
}

}  // namespace srf
