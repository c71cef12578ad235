#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtlscan/assets.hpp"
#include "rtlscan/digest.hpp"
#include "rtlscan/width.hpp"

namespace rtlscan {

enum class CheckId {
  WidthMismatch,
  ReverseConnectedBus,
  ImproperRangeIndex,
  ConcatInArrayAssign,
  ConcatUsingUnsizedNumbers,
  RhsHasConcat,
  IfWithoutElse,
  InferredLatch,
};

inline std::string to_string(CheckId c) {
  switch (c) {
    case CheckId::WidthMismatch: return "WidthMismatch";
    case CheckId::ReverseConnectedBus: return "ReverseConnectedBus";
    case CheckId::ImproperRangeIndex: return "ImproperRangeIndex";
    case CheckId::ConcatInArrayAssign: return "ConcatInArrayAssign";
    case CheckId::ConcatUsingUnsizedNumbers: return "ConcatUsingUnsizedNumbers";
    case CheckId::RhsHasConcat: return "RhsHasConcat";
    case CheckId::IfWithoutElse: return "IfWithoutElse";
    case CheckId::InferredLatch: return "InferredLatch";
  }
  return "?";
}

// 1191 maps to the six assignment-shape checks, 1300 to the two
// conditional-coverage checks; no check belongs to both.
inline CweId cwe_of_check(CheckId c) {
  switch (c) {
    case CheckId::IfWithoutElse:
    case CheckId::InferredLatch: return 1300;
    default: return 1191;
  }
}

inline const std::vector<CheckId>& checks_for_cwe(CweId cwe) {
  static const std::vector<CheckId> lint1191 = {
      CheckId::WidthMismatch,       CheckId::ReverseConnectedBus,
      CheckId::ImproperRangeIndex,  CheckId::ConcatInArrayAssign,
      CheckId::ConcatUsingUnsizedNumbers, CheckId::RhsHasConcat};
  static const std::vector<CheckId> lint1300 = {CheckId::IfWithoutElse,
                                                CheckId::InferredLatch};
  static const std::vector<CheckId> none;
  if (cwe == 1191) return lint1191;
  if (cwe == 1300) return lint1300;
  return none;
}

inline bool is_lint_cwe(CweId cwe) { return cwe == 1191 || cwe == 1300; }

// Raw structural hit, before asset filtering.
struct RawHit {
  CheckId check = CheckId::WidthMismatch;
  SourceSpan span;
  std::string statement;  // exact source slice
  std::string lhsexpr;
  // Referenced identifiers in first-occurrence order. For IfWithoutElse and
  // InferredLatch these are the conditional's signals only.
  std::vector<std::string> signals;
};

struct LintViolation {
  std::string id;  // stable join key used by contextualization
  CheckId check = CheckId::WidthMismatch;
  CweId cwe = 1191;
  int line_no = 0;
  std::string statement;
  std::string lhsexpr;
  std::string security_sensitive_signal;
  std::string module;
  SourceSpan span;
};

namespace detail {

struct AssignSite {
  ExprPtr lhs;
  ExprPtr rhs;
  SourceSpan span;
  const Stmt* stmt = nullptr;  // null for continuous assigns
};

inline void gather_assigns(const Stmt& s, std::vector<AssignSite>& out) {
  switch (s.kind) {
    case Stmt::Kind::BlockingAssign:
    case Stmt::Kind::NonblockingAssign:
      out.push_back({s.lhs, s.rhs, s.span, &s});
      return;
    case Stmt::Kind::If:
      gather_assigns(*s.then_branch, out);
      if (s.else_branch) gather_assigns(*s.else_branch, out);
      return;
    case Stmt::Kind::Case:
      for (const auto& item : s.case_items) gather_assigns(*item.body, out);
      if (s.case_default) gather_assigns(*s.case_default, out);
      return;
    case Stmt::Kind::Block:
      for (const auto& sub : s.stmts) gather_assigns(*sub, out);
      return;
    case Stmt::Kind::For:
      gather_assigns(*s.body, out);
      return;
  }
}

inline std::vector<AssignSite> all_assign_sites(const DesignUnit& unit) {
  std::vector<AssignSite> sites;
  for (const auto& a : unit.continuous_assigns)
    sites.push_back({a.lhs, a.rhs, a.span, nullptr});
  for (const auto& b : unit.always_blocks) gather_assigns(*b.body, sites);
  return sites;
}

inline void walk_exprs(const Expr& e, const std::function<void(const Expr&)>& fn) {
  fn(e);
  for (const auto& op : e.operands)
    if (op) walk_exprs(*op, fn);
}

// Base identifiers written by an lvalue (concat lvalues may carry several).
inline void lvalue_bases(const Expr& e, std::vector<std::string>& out) {
  switch (e.kind) {
    case Expr::Kind::Identifier: out.push_back(e.text); return;
    case Expr::Kind::Index:
    case Expr::Kind::PartSelect: lvalue_bases(*e.operands[0], out); return;
    case Expr::Kind::Concat:
      for (const auto& op : e.operands) lvalue_bases(*op, out);
      return;
    default: return;
  }
}

inline RawHit make_hit(CheckId check, const SourceSpan& span,
                       std::string_view source, std::string lhsexpr,
                       std::vector<std::string> signals) {
  RawHit hit;
  hit.check = check;
  hit.span = span;
  hit.statement = slice_span(source, span);
  hit.lhsexpr = std::move(lhsexpr);
  hit.signals = std::move(signals);
  return hit;
}

// --- per-check implementations --------------------------------------------

inline void check_width_mismatch(const DesignUnit& unit, std::string_view source,
                                 const SymbolTable& syms,
                                 std::vector<RawHit>& hits) {
  for (const auto& site : all_assign_sites(unit)) {
    auto lw = expr_width(*site.lhs, syms);
    auto rw = expr_width(*site.rhs, syms);
    // unknown widths abstain rather than guess
    if (!lw || !rw || *lw == *rw) continue;
    std::vector<std::string> sigs;
    lvalue_bases(*site.lhs, sigs);
    for (const auto& n : collect_signal_refs_ordered(*site.rhs))
      if (std::find(sigs.begin(), sigs.end(), n) == sigs.end()) sigs.push_back(n);
    hits.push_back(make_hit(CheckId::WidthMismatch, site.span, source,
                            render_expr(*site.lhs), std::move(sigs)));
  }
}

inline bool select_reversed(const Expr& part, const SymbolTable& syms) {
  if (part.kind != Expr::Kind::PartSelect) return false;
  const Expr& base = *part.operands[0];
  if (base.kind != Expr::Kind::Identifier) return false;
  const SignalDecl* decl = syms.lookup(base.text);
  if (!decl) return false;
  auto m = const_eval(*part.operands[1]);
  auto l = const_eval(*part.operands[2]);
  if (!m || !l || *m == *l) return false;
  bool select_descending = *m > *l;
  return select_descending != decl->descending();
}

inline void check_reverse_connected(const DesignUnit& unit,
                                    std::string_view source,
                                    const SymbolTable& syms,
                                    std::vector<RawHit>& hits) {
  auto scan_expr = [&](const Expr& root, const SourceSpan& site_span,
                       const std::vector<std::string>& site_sigs) {
    walk_exprs(root, [&](const Expr& e) {
      if (!select_reversed(e, syms)) return;
      hits.push_back(make_hit(CheckId::ReverseConnectedBus, site_span, source,
                              render_expr(e), site_sigs));
    });
  };
  for (const auto& site : all_assign_sites(unit)) {
    std::vector<std::string> sigs;
    lvalue_bases(*site.lhs, sigs);
    for (const auto& n : collect_signal_refs_ordered(*site.rhs))
      if (std::find(sigs.begin(), sigs.end(), n) == sigs.end()) sigs.push_back(n);
    scan_expr(*site.lhs, site.span, sigs);
    scan_expr(*site.rhs, site.span, sigs);
  }
  // Instance connections are the other reversal site.
  for (const auto& inst : unit.instances) {
    for (const auto& conn : inst.connections) {
      if (!conn.expr) continue;
      scan_expr(*conn.expr, inst.span, collect_signal_refs_ordered(*conn.expr));
    }
  }
}

inline void check_improper_range(const DesignUnit& unit, std::string_view source,
                                 const SymbolTable& syms,
                                 std::vector<RawHit>& hits) {
  auto out_of_range = [&](const Expr& e) -> bool {
    if (e.kind == Expr::Kind::Index) {
      const Expr& base = *e.operands[0];
      if (base.kind != Expr::Kind::Identifier) return false;
      const SignalDecl* decl = syms.lookup(base.text);
      if (!decl) return false;
      auto idx = const_eval(*e.operands[1]);
      if (!idx) return false;
      int lo = decl->is_array ? std::min(decl->array_left, decl->array_right)
                              : std::min(decl->msb, decl->lsb);
      int hi = decl->is_array ? std::max(decl->array_left, decl->array_right)
                              : std::max(decl->msb, decl->lsb);
      return *idx < lo || *idx > hi;
    }
    if (e.kind == Expr::Kind::PartSelect) {
      const Expr& base = *e.operands[0];
      if (base.kind != Expr::Kind::Identifier) return false;
      const SignalDecl* decl = syms.lookup(base.text);
      if (!decl || decl->is_array) return false;
      auto m = const_eval(*e.operands[1]);
      auto l = const_eval(*e.operands[2]);
      if (!m || !l) return false;
      int lo = std::min(decl->msb, decl->lsb);
      int hi = std::max(decl->msb, decl->lsb);
      return *m < lo || *m > hi || *l < lo || *l > hi;
    }
    return false;
  };
  for (const auto& site : all_assign_sites(unit)) {
    std::vector<std::string> sigs;
    lvalue_bases(*site.lhs, sigs);
    for (const auto& n : collect_signal_refs_ordered(*site.rhs))
      if (std::find(sigs.begin(), sigs.end(), n) == sigs.end()) sigs.push_back(n);
    bool flagged = false;
    auto scan = [&](const Expr& root) {
      walk_exprs(root, [&](const Expr& e) {
        if (flagged || !out_of_range(e)) return;
        flagged = true;
        hits.push_back(make_hit(CheckId::ImproperRangeIndex, site.span, source,
                                render_expr(e), sigs));
      });
    };
    scan(*site.lhs);
    scan(*site.rhs);
  }
}

inline void check_concat_in_array_assign(const DesignUnit& unit,
                                         std::string_view source,
                                         const SymbolTable& syms,
                                         std::vector<RawHit>& hits) {
  for (const auto& site : all_assign_sites(unit)) {
    if (site.lhs->kind != Expr::Kind::Index) continue;
    const Expr& base = *site.lhs->operands[0];
    if (base.kind != Expr::Kind::Identifier) continue;
    const SignalDecl* decl = syms.lookup(base.text);
    if (!decl || !decl->is_array) continue;
    if (site.rhs->kind != Expr::Kind::Concat &&
        site.rhs->kind != Expr::Kind::Replication)
      continue;
    std::vector<std::string> sigs;
    lvalue_bases(*site.lhs, sigs);
    for (const auto& n : collect_signal_refs_ordered(*site.rhs))
      if (std::find(sigs.begin(), sigs.end(), n) == sigs.end()) sigs.push_back(n);
    hits.push_back(make_hit(CheckId::ConcatInArrayAssign, site.span, source,
                            render_expr(*site.lhs), std::move(sigs)));
  }
}

inline void check_concat_unsized(const DesignUnit& unit, std::string_view source,
                                 std::vector<RawHit>& hits) {
  for (const auto& site : all_assign_sites(unit)) {
    bool flagged = false;
    auto scan_operand = [&](const Expr& op) {
      if (op.kind == Expr::Kind::Number && !op.number.sized) flagged = true;
    };
    walk_exprs(*site.rhs, [&](const Expr& e) {
      if (e.kind == Expr::Kind::Concat) {
        for (const auto& op : e.operands) scan_operand(*op);
      } else if (e.kind == Expr::Kind::Replication) {
        // replication counts are not value operands; only the replicated
        // expression counts when it is itself a bare literal
        scan_operand(*e.operands[1]);
      }
    });
    if (!flagged) continue;
    std::vector<std::string> sigs;
    lvalue_bases(*site.lhs, sigs);
    for (const auto& n : collect_signal_refs_ordered(*site.rhs))
      if (std::find(sigs.begin(), sigs.end(), n) == sigs.end()) sigs.push_back(n);
    hits.push_back(make_hit(CheckId::ConcatUsingUnsizedNumbers, site.span,
                            source, render_expr(*site.lhs), std::move(sigs)));
  }
}

inline void check_rhs_has_concat(const DesignUnit& unit, std::string_view source,
                                 std::vector<RawHit>& hits) {
  for (const auto& site : all_assign_sites(unit)) {
    if (site.rhs->kind != Expr::Kind::Concat &&
        site.rhs->kind != Expr::Kind::Replication)
      continue;
    std::vector<std::string> sigs;
    lvalue_bases(*site.lhs, sigs);
    for (const auto& n : collect_signal_refs_ordered(*site.rhs))
      if (std::find(sigs.begin(), sigs.end(), n) == sigs.end()) sigs.push_back(n);
    hits.push_back(make_hit(CheckId::RhsHasConcat, site.span, source,
                            render_expr(*site.lhs), std::move(sigs)));
  }
}

inline void gather_ifs(const Stmt& s, std::vector<const Stmt*>& out) {
  switch (s.kind) {
    case Stmt::Kind::If:
      out.push_back(&s);
      gather_ifs(*s.then_branch, out);
      if (s.else_branch) gather_ifs(*s.else_branch, out);
      return;
    case Stmt::Kind::Case:
      for (const auto& item : s.case_items) gather_ifs(*item.body, out);
      if (s.case_default) gather_ifs(*s.case_default, out);
      return;
    case Stmt::Kind::Block:
      for (const auto& sub : s.stmts) gather_ifs(*sub, out);
      return;
    case Stmt::Kind::For:
      gather_ifs(*s.body, out);
      return;
    default:
      return;
  }
}

inline void check_if_without_else(const DesignUnit& unit,
                                  std::string_view source,
                                  std::vector<RawHit>& hits) {
  for (const auto& b : unit.always_blocks) {
    std::vector<const Stmt*> ifs;
    gather_ifs(*b.body, ifs);
    for (const Stmt* s : ifs) {
      if (s->else_branch) continue;
      hits.push_back(make_hit(CheckId::IfWithoutElse, s->span, source,
                              render_expr(*s->cond),
                              collect_signal_refs_ordered(*s->cond)));
    }
  }
}

// Must-assign analysis: which signals are written on every control path.
inline void must_assigned(const Stmt& s, std::set<std::string>& out) {
  switch (s.kind) {
    case Stmt::Kind::BlockingAssign:
    case Stmt::Kind::NonblockingAssign: {
      std::vector<std::string> bases;
      lvalue_bases(*s.lhs, bases);
      out.insert(bases.begin(), bases.end());
      return;
    }
    case Stmt::Kind::Block:
      for (const auto& sub : s.stmts) must_assigned(*sub, out);
      return;
    case Stmt::Kind::If: {
      if (!s.else_branch) return;
      std::set<std::string> a, b;
      must_assigned(*s.then_branch, a);
      must_assigned(*s.else_branch, b);
      for (const auto& n : a)
        if (b.count(n)) out.insert(n);
      return;
    }
    case Stmt::Kind::Case: {
      if (!s.case_default) return;
      bool first = true;
      std::set<std::string> acc;
      auto merge_branch = [&](const Stmt& body) {
        std::set<std::string> cur;
        must_assigned(body, cur);
        if (first) {
          acc = std::move(cur);
          first = false;
        } else {
          std::set<std::string> inter;
          for (const auto& n : acc)
            if (cur.count(n)) inter.insert(n);
          acc = std::move(inter);
        }
      };
      for (const auto& item : s.case_items) merge_branch(*item.body);
      merge_branch(*s.case_default);
      out.insert(acc.begin(), acc.end());
      return;
    }
    case Stmt::Kind::For:
      // constant-bound loops in the subset run at least once
      must_assigned(*s.body, out);
      return;
  }
}

inline void any_assigned(const Stmt& s, std::vector<std::string>& out) {
  for (const auto& site : [&] {
         std::vector<AssignSite> sites;
         gather_assigns(s, sites);
         return sites;
       }()) {
    std::vector<std::string> bases;
    lvalue_bases(*site.lhs, bases);
    for (auto& n : bases)
      if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  }
}

inline void condition_signals(const Stmt& s, std::vector<std::string>& out) {
  auto add_all = [&](const Expr& e) {
    for (const auto& n : collect_signal_refs_ordered(e))
      if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  switch (s.kind) {
    case Stmt::Kind::If:
      add_all(*s.cond);
      condition_signals(*s.then_branch, out);
      if (s.else_branch) condition_signals(*s.else_branch, out);
      return;
    case Stmt::Kind::Case:
      add_all(*s.cond);
      for (const auto& item : s.case_items) condition_signals(*item.body, out);
      if (s.case_default) condition_signals(*s.case_default, out);
      return;
    case Stmt::Kind::Block:
      for (const auto& sub : s.stmts) condition_signals(*sub, out);
      return;
    case Stmt::Kind::For:
      condition_signals(*s.body, out);
      return;
    default:
      return;
  }
}

inline void check_inferred_latch(const DesignUnit& unit, std::string_view source,
                                 std::vector<RawHit>& hits) {
  for (const auto& b : unit.always_blocks) {
    if (!b.sensitivity.combinational()) continue;
    std::vector<std::string> assigned;
    any_assigned(*b.body, assigned);
    std::set<std::string> covered;
    must_assigned(*b.body, covered);
    std::vector<std::string> conds;
    condition_signals(*b.body, conds);
    for (const auto& name : assigned) {
      if (covered.count(name)) continue;
      hits.push_back(make_hit(CheckId::InferredLatch, b.span, source, name, conds));
    }
  }
}

}  // namespace detail

/// Run one structural check over a unit. Hits come back in source order and
/// are not yet asset-filtered.
inline std::vector<RawHit> run_check(CheckId check, const DesignUnit& unit,
                                     std::string_view file_source) {
  SymbolTable syms(unit);
  std::vector<RawHit> hits;
  switch (check) {
    case CheckId::WidthMismatch:
      detail::check_width_mismatch(unit, file_source, syms, hits);
      break;
    case CheckId::ReverseConnectedBus:
      detail::check_reverse_connected(unit, file_source, syms, hits);
      break;
    case CheckId::ImproperRangeIndex:
      detail::check_improper_range(unit, file_source, syms, hits);
      break;
    case CheckId::ConcatInArrayAssign:
      detail::check_concat_in_array_assign(unit, file_source, syms, hits);
      break;
    case CheckId::ConcatUsingUnsizedNumbers:
      detail::check_concat_unsized(unit, file_source, hits);
      break;
    case CheckId::RhsHasConcat:
      detail::check_rhs_has_concat(unit, file_source, hits);
      break;
    case CheckId::IfWithoutElse:
      detail::check_if_without_else(unit, file_source, hits);
      break;
    case CheckId::InferredLatch:
      detail::check_inferred_latch(unit, file_source, hits);
      break;
  }
  std::stable_sort(hits.begin(), hits.end(), [](const RawHit& a, const RawHit& b) {
    if (a.span.line_start != b.span.line_start)
      return a.span.line_start < b.span.line_start;
    return a.span.col_start < b.span.col_start;
  });
  return hits;
}

/// Keep hits whose signal set intersects the asset names; the matched asset
/// becomes the violation's security_sensitive_signal (first textual
/// occurrence wins).
inline std::vector<LintViolation> filter_by_assets(const std::vector<RawHit>& hits,
                                                   const AssetSet& assets,
                                                   const DesignUnit& unit,
                                                   Diagnostics& diags) {
  std::vector<LintViolation> out;
  if (assets.signals.empty()) {
    if (!hits.empty())
      add_diag(diags, Severity::Warning, "empty-assets",
               "asset set for CWE-" + std::to_string(assets.cwe) +
                   " is empty; all " + std::to_string(hits.size()) +
                   " hits dropped (asset identification likely failed)");
    return out;
  }
  std::set<std::string> names(assets.signals.begin(), assets.signals.end());
  for (const auto& hit : hits) {
    const std::string* matched = nullptr;
    for (const auto& sig : hit.signals) {
      if (names.count(sig)) {
        matched = &sig;
        break;
      }
    }
    if (!matched) continue;
    LintViolation v;
    v.check = hit.check;
    v.cwe = cwe_of_check(hit.check);
    v.line_no = hit.span.line_start;
    v.statement = hit.statement;
    v.lhsexpr = hit.lhsexpr;
    v.security_sensitive_signal = *matched;
    v.module = unit.name;
    v.span = hit.span;
    v.id = digest_of({"violation", unit.name, to_string(hit.check),
                      std::to_string(v.line_no), v.statement,
                      v.security_sensitive_signal});
    out.push_back(std::move(v));
  }
  return out;
}

struct UnitSource {
  const DesignUnit* unit;
  std::string_view source;  // full file text the unit was parsed from
};

/// Linter-based strategy: union of the CWE's checks, asset-filtered, ordered
/// by (file, line, check).
inline std::vector<LintViolation> run_lint_strategy(CweId cwe,
                                                    const std::vector<UnitSource>& units,
                                                    const AssetSet& assets,
                                                    Diagnostics& diags) {
  if (!is_lint_cwe(cwe))
    throw std::invalid_argument("CWE-" + std::to_string(cwe) +
                                " uses the assertion strategy, not lint");
  std::vector<LintViolation> all;
  for (const auto& us : units) {
    for (CheckId check : checks_for_cwe(cwe)) {
      auto hits = run_check(check, *us.unit, us.source);
      auto violations = filter_by_assets(hits, assets, *us.unit, diags);
      all.insert(all.end(), violations.begin(), violations.end());
    }
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const LintViolation& a, const LintViolation& b) {
                     if (a.span.file != b.span.file) return a.span.file < b.span.file;
                     if (a.line_no != b.line_no) return a.line_no < b.line_no;
                     return static_cast<int>(a.check) < static_cast<int>(b.check);
                   });
  return all;
}

}  // namespace rtlscan
