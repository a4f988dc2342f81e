#include <charconv>
#include <sstream>

#include "emsim/postdsl.hpp"

namespace emsim::post {

namespace {

int precedence(const FieldExpr& e) {
  switch (e.kind) {
    case FieldExpr::Kind::Binary:
      if (e.op == '+' || e.op == '-') return 1;
      if (e.op == '*' || e.op == '/') return 2;
      return 4;  // ^
    case FieldExpr::Kind::Negate:
      return 3;
    default:
      return 5;
  }
}

std::string number_text(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string wrap(const FieldExpr& e, bool parens) {
  return parens ? "(" + to_string(e) + ")" : to_string(e);
}

}  // namespace

std::string to_string(const FieldExpr& e) {
  switch (e.kind) {
    case FieldExpr::Kind::Number:
      return number_text(e.number);
    case FieldExpr::Kind::Field:
      return "{" + e.name + "}";
    case FieldExpr::Kind::Call: {
      std::string s = e.name + "[";
      for (std::size_t i = 0; i < e.args.size(); ++i) s += (i ? ", " : "") + to_string(e.args[i]);
      return s + "]";
    }
    case FieldExpr::Kind::Negate: {
      const auto& c = e.args[0];
      return "-" + wrap(c, precedence(c) < 3 || c.kind == FieldExpr::Kind::Negate);
    }
    case FieldExpr::Kind::Binary: {
      const auto& l = e.args[0];
      const auto& r = e.args[1];
      const int p = precedence(e);
      if (e.op == '^')
        return wrap(l, precedence(l) < 5) + "^" + wrap(r, precedence(r) < 3);
      return wrap(l, precedence(l) < p) + " " + e.op + " " + wrap(r, precedence(r) <= p);
    }
  }
  return {};
}

std::string pretty_print(const PostProgram& program) {
  std::ostringstream os;
  if (!program.processings.empty()) {
    os << "PostProcessing {\n";
    for (const auto& b : program.processings) {
      os << "  {";
      if (!b.name.empty()) os << " Name " << b.name << ";";
      if (!b.formulation.empty()) os << " NameOfFormulation " << b.formulation << ";";
      os << "\n    PostQuantity {\n";
      for (const auto& q : b.quantities) {
        os << "      { Name " << q.name << "; Value { " << q.wrapper << " { [ " << to_string(q.expr)
           << " ]; In ";
        if (q.region_list) {
          os << "Region[{";
          for (std::size_t i = 0; i < q.regions.size(); ++i) os << (i ? ", " : "") << q.regions[i];
          os << "}]";
        } else {
          os << q.regions.front();
        }
        os << "; Jacobian " << q.jacobian << "; } } }\n";
      }
      os << "    }\n  }\n";
    }
    os << "}\n";
  }
  if (!program.operations.empty()) {
    if (!program.processings.empty()) os << "\n";
    os << "PostOperation {\n";
    for (const auto& b : program.operations) {
      os << "  {";
      if (!b.name.empty()) os << " Name " << b.name << ";";
      if (!b.processing.empty()) os << " NameOfPostProcessing " << b.processing << ";";
      os << "\n    Operation {\n";
      for (const auto& p : b.prints) {
        os << "      Print[ " << p.quantity << ", OnElementsOf " << p.region;
        if (!p.file.empty()) os << ", File \"" << p.file << "\"";
        if (!p.label.empty()) os << ", Name \"" << p.label << "\"";
        if (!p.format.empty()) os << ", Format " << p.format;
        os << " ];\n";
      }
      os << "    }\n  }\n";
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace emsim::post
