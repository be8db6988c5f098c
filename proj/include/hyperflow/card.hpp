// Cardinality abstract domain. A row l▸x:n bounds by n the number of final
// values x can take across runs that agree on the l-visible part of the
// initial state. Rows are ordered by <=, joined by max; n = 1 recovers the
// dependence fact l▸x.
#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperflow/dep.hpp"
#include "hyperflow/extnat.hpp"
#include "hyperflow/lang.hpp"
#include "hyperflow/lattice.hpp"

namespace hyperflow {

struct CardSet {
    ShapePtr shape;
    std::vector<ExtNat> rows;  // level-major: rows[l * var_count + x]

    static CardSet uniform(ShapePtr s, ExtNat n) {
        std::size_t count = static_cast<std::size_t>(s->levels()) * s->var_count();
        return CardSet{std::move(s), std::vector<ExtNat>(count, n)};
    }

    std::size_t at(int l, std::size_t x) const {
        return static_cast<std::size_t>(l) * shape->var_count() + x;
    }
    ExtNat get(int l, std::size_t x) const { return rows[at(l, x)]; }
    ExtNat get(int l, const std::string& x) const { return get(l, shape->var_index(x)); }
    void set(int l, std::size_t x, ExtNat n) { rows[at(l, x)] = n; }

    friend bool operator==(const CardSet& a, const CardSet& b) { return a.rows == b.rows; }
    friend bool operator!=(const CardSet& a, const CardSet& b) { return !(a == b); }
};

inline bool card_order(const CardSet& a, const CardSet& b) {
    detail::require_same_shape(*a.shape, *b.shape, "cardinality");
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        if (!(a.rows[i] <= b.rows[i])) return false;
    return true;
}

inline CardSet card_join(CardSet a, const CardSet& b) {
    detail::require_same_shape(*a.shape, *b.shape, "cardinality");
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        a.rows[i] = max(a.rows[i], b.rows[i]);
    return a;
}

// Initial rows over the diagonal traces: one value per l-visible variable;
// variables above l are unknown, bounded by `high` (infinity by default, the
// value-range size in oracle mode).
inline CardSet initial_card(ShapePtr shape, const TypingContext& ctx, ExtNat high = ExtNat::inf()) {
    CardSet c = CardSet::uniform(std::move(shape), high);
    for (std::size_t x = 0; x < c.shape->var_count(); ++x)
        for (int l = 0; l < c.shape->levels(); ++l)
            if (c.shape->lattice->leq(ctx.levels[x], l)) c.set(l, x, ExtNat::fin(1));
    return c;
}

// l-cardinality of an expression: constants are single-valued, variables look
// up their row, arithmetic multiplies, comparisons cap the product at 2.
inline ExtNat card_expr(const Expr& e, int l, const CardSet& c) {
    if (std::holds_alternative<IntLit>(e.node)) return ExtNat::fin(1);
    if (const auto* v = std::get_if<VarRef>(&e.node)) return c.get(l, v->name);
    if (const auto* b = std::get_if<BinArith>(&e.node))
        return card_expr(*b->lhs, l, c) * card_expr(*b->rhs, l, c);
    const auto& cmp = std::get<Compare>(e.node);
    return min(ExtNat::fin(2), card_expr(*cmp.lhs, l, c) * card_expr(*cmp.rhs, l, c));
}

// Sum combinator joining the branches of a conditional whose guard may
// disagree: a modified variable can take values from either branch, an
// untouched one keeps its pre-branch row.
inline CardSet card_sum_combine(const CardSet& c1, const CardSet& c2, const std::vector<bool>& w,
                                const CardSet& c0ref) {
    detail::require_same_shape(*c1.shape, *c2.shape, "cardinality");
    detail::require_same_shape(*c1.shape, *c0ref.shape, "cardinality");
    CardSet out = c1;
    for (int l = 0; l < out.shape->levels(); ++l)
        for (std::size_t x = 0; x < out.shape->var_count(); ++x)
            out.set(l, x, w[x] ? c1.get(l, x) + c2.get(l, x) : c0ref.get(l, x));
    return out;
}

// Pointwise extrapolation: a row that did not grow keeps its value, a growing
// row is pushed to infinity, so each row can rise at most once.
inline CardSet widen(CardSet c1, const CardSet& c2) {
    detail::require_same_shape(*c1.shape, *c2.shape, "cardinality");
    for (std::size_t i = 0; i < c1.rows.size(); ++i)
        if (!(c2.rows[i] <= c1.rows[i])) c1.rows[i] = ExtNat::inf();
    return c1;
}

// Guard refinement: under x1 == x2 both sides take the smaller row at every
// level. Other guard shapes learn nothing.
inline CardSet card_guard_refine(const Expr& b, CardSet c) {
    const auto* cmp = std::get_if<Compare>(&b.node);
    if (!cmp || cmp->op != CmpOp::Eq) return c;
    const auto* v1 = std::get_if<VarRef>(&cmp->lhs->node);
    const auto* v2 = std::get_if<VarRef>(&cmp->rhs->node);
    if (!v1 || !v2) return c;
    std::size_t x1 = c.shape->var_index(v1->name);
    std::size_t x2 = c.shape->var_index(v2->name);
    for (int l = 0; l < c.shape->levels(); ++l) {
        ExtNat m = min(c.get(l, x1), c.get(l, x2));
        c.set(l, x1, m);
        c.set(l, x2, m);
    }
    return c;
}

struct CardStats {
    std::size_t max_loop_head_iterations = 0;
};

struct CardOptions {
    bool improved_guards = false;
    CardStats* stats = nullptr;
};

class analysis_divergence_error : public std::runtime_error {
public:
    explicit analysis_divergence_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline CardSet card_cmd(const Command& c, CardSet cs, const CardOptions& opt);

// Conditional transfer shared by If and the While unrolling. Branch entries
// are refined by the guard when improved_guards is set; the per-level choice
// and the untouched-variable rows both use the unrefined pre-state.
inline CardSet card_if(const Expr& guard, const Command& then_c, const Command& else_c,
                       const std::vector<bool>& w, const CardSet& cs, const CardOptions& opt) {
    CardSet entry1 = cs, entry2 = cs;
    if (opt.improved_guards) {
        entry1 = card_guard_refine(guard, std::move(entry1));
        entry2 = card_guard_refine(*negate_guard(guard), std::move(entry2));
    }
    CardSet c1 = card_cmd(then_c, std::move(entry1), opt);
    CardSet c2 = card_cmd(else_c, std::move(entry2), opt);
    CardSet sum = card_sum_combine(c1, c2, w, cs);
    CardSet out = cs;
    for (int l = 0; l < cs.shape->levels(); ++l) {
        bool agree = card_expr(guard, l, cs) == ExtNat::fin(1);
        for (std::size_t x = 0; x < cs.shape->var_count(); ++x)
            out.set(l, x, agree ? max(c1.get(l, x), c2.get(l, x)) : sum.get(l, x));
    }
    return out;
}

inline std::size_t card_loop_cap(const AnalysisShape& shape) {
    std::size_t product = static_cast<std::size_t>(shape.levels()) * shape.var_count();
    std::size_t bound = 2 * (product + 2);
    return bound < 32 ? 32 : bound;
}

inline CardSet card_cmd(const Command& c, CardSet cs, const CardOptions& opt) {
    if (std::holds_alternative<Skip>(c.node)) return cs;
    if (const auto* a = std::get_if<Assign>(&c.node)) {
        std::size_t x = cs.shape->var_index(a->target);
        CardSet out = cs;
        for (int l = 0; l < cs.shape->levels(); ++l) out.set(l, x, card_expr(*a->rhs, l, cs));
        return out;
    }
    if (const auto* s = std::get_if<Seq>(&c.node))
        return card_cmd(*s->second, card_cmd(*s->first, std::move(cs), opt), opt);
    if (const auto* i = std::get_if<If>(&c.node)) {
        std::vector<bool> w = mod_mask(c, *cs.shape);
        return card_if(*i->guard, *i->then_branch, *i->else_branch, w, cs, opt);
    }
    const auto& wl = std::get<While>(c.node);
    std::vector<bool> w = mod_mask(*wl.body, *cs.shape);
    Command skip_cmd{Skip{}, c.line, c.col};
    const std::size_t cap = card_loop_cap(*cs.shape);
    CardSet head = std::move(cs);
    std::size_t iterations = 0;
    for (;;) {
        ++iterations;
        if (iterations > cap) {
            std::ostringstream msg;
            msg << "cardinality analysis did not stabilize: loop at line " << c.line << ", column "
                << c.col << " exceeded " << cap << " head iterations (" << head.shape->levels()
                << " levels, " << head.shape->var_count() << " variables)";
            throw analysis_divergence_error(msg.str());
        }
        CardSet raw = card_join(head, card_if(*wl.guard, *wl.body, skip_cmd, w, head, opt));
        CardSet next = iterations >= 2 ? widen(head, raw) : std::move(raw);
        if (next == head) break;
        head = std::move(next);
    }
    if (opt.stats && iterations > opt.stats->max_loop_head_iterations)
        opt.stats->max_loop_head_iterations = iterations;
    if (opt.improved_guards) head = card_guard_refine(*negate_guard(*wl.guard), std::move(head));
    return head;
}

}  // namespace detail

inline CardSet card_analyze(const Command& c, CardSet c0, const CardOptions& opt = {}) {
    return detail::card_cmd(c, std::move(c0), opt);
}

// ---------------------------------------------------------------------------
// Decomposition to dependences: a row of at most 1 is exactly an agreement.

inline DepSet to_dep(const CardSet& c) {
    DepSet d = DepSet::none(c.shape);
    for (int l = 0; l < c.shape->levels(); ++l)
        for (std::size_t x = 0; x < c.shape->var_count(); ++x)
            if (c.get(l, x) <= ExtNat::fin(1)) d.insert(l, x);
    return dep_close(std::move(d));
}

inline CardSet from_dep(const DepSet& d) {
    CardSet c = CardSet::uniform(d.shape, ExtNat::inf());
    for (int l = 0; l < d.shape->levels(); ++l)
        for (std::size_t x = 0; x < d.shape->var_count(); ++x)
            if (d.contains(l, x)) c.set(l, x, ExtNat::fin(1));
    return c;
}

// ---------------------------------------------------------------------------
// Leakage in bits (min-capacity): log2 of the bound on distinguishable final
// values. A zero row means the program point is unreachable from the inputs.

struct LeakageBits {
    bool unreachable = false;
    bool infinite = false;
    double bits = 0.0;
};

inline LeakageBits leakage_bits(const CardSet& c, int l, const std::string& x) {
    ExtNat n = c.get(l, x);
    if (n.is_inf()) return LeakageBits{false, true, 0.0};
    if (n == ExtNat::fin(0)) return LeakageBits{true, false, 0.0};
    return LeakageBits{false, false, std::log2(static_cast<double>(n.finite_value()))};
}

inline std::string to_string(const LeakageBits& lk) {
    if (lk.unreachable) return "unreachable";
    if (lk.infinite) return "inf";
    std::ostringstream out;
    if (lk.bits == static_cast<double>(static_cast<long long>(lk.bits)))
        out << static_cast<long long>(lk.bits) << ".0";
    else
        out << lk.bits;
    return out.str();
}

// ---------------------------------------------------------------------------
// SR(l,k,x): at most k final values for x when inputs agree up to l. The
// analysis can establish the bound, never refute it.

enum class SrVerdict { Satisfied, Unknown };

inline std::string to_string(SrVerdict v) {
    return v == SrVerdict::Satisfied ? "SATISFIED" : "UNKNOWN";
}

inline SrVerdict check_sr(const CardSet& c, int l, ExtNat k, const std::string& x) {
    if (k < ExtNat::fin(1)) throw std::invalid_argument("SR bound k must be at least 1");
    return c.get(l, x) <= k ? SrVerdict::Satisfied : SrVerdict::Unknown;
}

}  // namespace hyperflow
