#include <algorithm>

#include "emsim/layoutlang.hpp"

namespace emsim::layout {

namespace {

bool calls(const Expr& e, const std::string& fn) {
  if (e.kind == Expr::Kind::Call && e.name == fn) return true;
  for (const auto& a : e.args)
    if (calls(a, fn)) return true;
  return false;
}

struct Shape {
  int emits = 0;
  int max_loop_depth_at_emit = 0;
  bool trig_pair = false;    // an emission uses both sin and cos
  bool floor_used = false;   // alternating offsets (hexagonal packing)
  bool single_trig = false;  // curve y = f(x) with one trig call
};

void scan(const std::vector<Stmt>& stmts, int depth, Shape& s,
          const std::vector<const Expr*>& lets) {
  std::vector<const Expr*> scope = lets;
  for (const auto& st : stmts) {
    switch (st.kind) {
      case Stmt::Kind::Let:
        scope.push_back(&st.exprs[0]);
        break;
      case Stmt::Kind::Emit: {
        ++s.emits;
        s.max_loop_depth_at_emit = std::max(s.max_loop_depth_at_emit, depth);
        bool has_sin = calls(st.exprs[0], "sin");
        bool has_cos = calls(st.exprs[0], "cos");
        bool has_floor = calls(st.exprs[0], "floor");
        for (const Expr* l : scope) {
          has_sin = has_sin || calls(*l, "sin");
          has_cos = has_cos || calls(*l, "cos");
          has_floor = has_floor || calls(*l, "floor");
        }
        if (depth > 0 && has_sin && has_cos) s.trig_pair = true;
        else if (depth > 0 && (has_sin || has_cos)) s.single_trig = true;
        if (has_floor) s.floor_used = true;
        break;
      }
      case Stmt::Kind::For:
        scan(st.body, depth + 1, s, scope);
        break;
      case Stmt::Kind::If:
        if (std::any_of(st.exprs.begin(), st.exprs.end(), [](const Expr& e) {
              return e.kind == Expr::Kind::Compare;
            }))
          s.floor_used = s.floor_used || calls(st.exprs[0], "floor");
        scan(st.body, depth, s, scope);
        scan(st.else_body, depth, s, scope);
        break;
    }
  }
}

}  // namespace

std::string describe_pattern(const LayoutScript& script) {
  Shape s;
  scan(script.statements, 0, s, {});
  if (s.emits == 0) return "custom arrangement";
  if (s.trig_pair) return "circular arrangement (circle)";
  if (s.max_loop_depth_at_emit >= 2)
    return s.floor_used ? "hexagonal grid arrangement" : "rectangular grid arrangement";
  if (s.single_trig) return "curved arrangement";
  if (s.max_loop_depth_at_emit == 1) return "linear arrangement";
  if (s.emits == 1) return "single conductor";
  return "custom arrangement";
}

}  // namespace emsim::layout
