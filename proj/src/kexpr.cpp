#include "bilap4/kexpr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace bilap4 {

enum class NodeKind { Number, Var, R, Neg, Add, Sub, Mul, Div, Pow, Func };
enum class Func { Exp, Log, Sqrt, Sin, Cos };

struct KExpr::Node {
  NodeKind kind;
  double number = 0.0;
  int var = 0;  // 0..3 for x1..x4
  Func func = Func::Exp;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const KExpr::Node>;
using Node = KExpr::Node;

NodePtr make(NodeKind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

struct Parser {
  const std::string& src;
  size_t pos = 0;

  explicit Parser(const std::string& s) : src(s) {}

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
      ++pos;
  }
  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr t = parse_term();
    for (;;) {
      if (accept('+')) {
        t = make(NodeKind::Add, t, parse_term());
      } else if (accept('-')) {
        t = make(NodeKind::Sub, t, parse_term());
      } else {
        return t;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr t = parse_factor();
    for (;;) {
      if (accept('*')) {
        t = make(NodeKind::Mul, t, parse_factor());
      } else if (accept('/')) {
        t = make(NodeKind::Div, t, parse_factor());
      } else {
        return t;
      }
    }
  }

  // factor := unary ('^' factor)?   -- '^' right-associative
  NodePtr parse_factor() {
    NodePtr u = parse_unary();
    if (accept('^')) return make(NodeKind::Pow, u, parse_factor());
    return u;
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(NodeKind::Neg, parse_unary());
    return parse_atom();
  }

  NodePtr parse_atom() {
    char c = peek();
    if (c == '(') {
      ++pos;
      NodePtr e = parse_expr();
      if (!accept(')')) throw SyntaxError(pos, "')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    throw SyntaxError(pos, "number, variable, function or '('");
  }

  NodePtr parse_number() {
    skip_ws();
    size_t start = pos;
    const char* begin = src.c_str() + pos;
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) throw SyntaxError(start, "number");
    pos += size_t(end - begin);
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Number;
    n->number = value;
    return n;
  }

  NodePtr parse_ident() {
    skip_ws();
    size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string name = src.substr(start, pos - start);
    if (name == "x1" || name == "x2" || name == "x3" || name == "x4") {
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Var;
      n->var = name[1] - '1';
      return n;
    }
    if (name == "r") return make(NodeKind::R);
    Func f;
    if (name == "exp") {
      f = Func::Exp;
    } else if (name == "log") {
      f = Func::Log;
    } else if (name == "sqrt") {
      f = Func::Sqrt;
    } else if (name == "sin") {
      f = Func::Sin;
    } else if (name == "cos") {
      f = Func::Cos;
    } else {
      throw UnknownIdentifier(start, name);
    }
    if (!accept('(')) throw SyntaxError(pos, "'(' after function name");
    NodePtr arg = parse_expr();
    if (!accept(')')) throw SyntaxError(pos, "')'");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Func;
    n->func = f;
    n->a = arg;
    return n;
  }
};

double eval_node(const Node& n, const Point4& x, const Point4& c) {
  switch (n.kind) {
    case NodeKind::Number:
      return n.number;
    case NodeKind::Var:
      return x[n.var];
    case NodeKind::R:
      return dist(x, c);
    case NodeKind::Neg:
      return -eval_node(*n.a, x, c);
    case NodeKind::Add:
      return eval_node(*n.a, x, c) + eval_node(*n.b, x, c);
    case NodeKind::Sub:
      return eval_node(*n.a, x, c) - eval_node(*n.b, x, c);
    case NodeKind::Mul:
      return eval_node(*n.a, x, c) * eval_node(*n.b, x, c);
    case NodeKind::Div: {
      double num = eval_node(*n.a, x, c);
      double den = eval_node(*n.b, x, c);
      double v = num / den;
      if (!std::isfinite(v)) throw NonFinite("division produced a non-finite value");
      return v;
    }
    case NodeKind::Pow: {
      double v = std::pow(eval_node(*n.a, x, c), eval_node(*n.b, x, c));
      if (!std::isfinite(v)) throw NonFinite("power produced a non-finite value");
      return v;
    }
    case NodeKind::Func: {
      double a = eval_node(*n.a, x, c);
      switch (n.func) {
        case Func::Exp: {
          double v = std::exp(a);
          if (!std::isfinite(v)) throw NonFinite("exp overflow");
          return v;
        }
        case Func::Log:
          if (a <= 0.0) throw DomainError("log", x);
          return std::log(a);
        case Func::Sqrt:
          if (a < 0.0) throw DomainError("sqrt", x);
          return std::sqrt(a);
        case Func::Sin:
          return std::sin(a);
        case Func::Cos:
          return std::cos(a);
      }
      return 0.0;
    }
  }
  return 0.0;
}

void print_node(const Node& n, std::ostream& os) {
  switch (n.kind) {
    case NodeKind::Number: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.number;
      os << tmp.str();
      break;
    }
    case NodeKind::Var:
      os << "x" << (n.var + 1);
      break;
    case NodeKind::R:
      os << "r";
      break;
    case NodeKind::Neg:
      os << "(-";
      print_node(*n.a, os);
      os << ")";
      break;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
    case NodeKind::Pow: {
      const char* op = n.kind == NodeKind::Add   ? "+"
                       : n.kind == NodeKind::Sub ? "-"
                       : n.kind == NodeKind::Mul ? "*"
                       : n.kind == NodeKind::Div ? "/"
                                                 : "^";
      os << "(";
      print_node(*n.a, os);
      os << op;
      print_node(*n.b, os);
      os << ")";
      break;
    }
    case NodeKind::Func: {
      const char* f = n.func == Func::Exp    ? "exp"
                      : n.func == Func::Log  ? "log"
                      : n.func == Func::Sqrt ? "sqrt"
                      : n.func == Func::Sin  ? "sin"
                                             : "cos";
      os << f << "(";
      print_node(*n.a, os);
      os << ")";
      break;
    }
  }
}

}  // namespace

KExpr KExpr::parse(const std::string& src) {
  Parser p(src);
  NodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != src.size()) throw SyntaxError(p.pos, "end of input or operator");
  KExpr e;
  e.root_ = root;
  return e;
}

double KExpr::eval(const Point4& x, const Point4& r_center) const {
  double v = eval_node(*root_, x, r_center);
  if (!std::isfinite(v)) throw NonFinite("expression evaluated to a non-finite value");
  return v;
}

std::string KExpr::print() const {
  std::ostringstream os;
  print_node(*root_, os);
  return os.str();
}

PositivityReport check_positive_on(const KExpr& e, const DomainMask& mask,
                                   double margin, const Point4& r_center) {
  PositivityReport rep;
  rep.min_value = 1e300;
  for (int32_t ii : mask.interior) {
    Point4 x = mask.grid.coord(size_t(ii));
    double v = e.eval(x, r_center);
    if (v < rep.min_value) {
      rep.min_value = v;
      rep.argmin = x;
    }
  }
  rep.pass = rep.min_value > margin;
  return rep;
}

}  // namespace bilap4
