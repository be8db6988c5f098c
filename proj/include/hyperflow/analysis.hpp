// Joint analysis walker: runs any subset of the dependence, cardinality and
// interval domains over a program in one pass, records a snapshot at every
// statement boundary, and in product mode applies the reduction maps after
// every transfer so each domain sharpens the others.
#pragma once

#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "hyperflow/card.hpp"
#include "hyperflow/dep.hpp"
#include "hyperflow/extnat.hpp"
#include "hyperflow/intervals.hpp"
#include "hyperflow/lang.hpp"

namespace hyperflow {

struct DomainState {
    std::optional<DepSet> dep;
    std::optional<CardSet> card;
    std::optional<IntervalEnv> itv;
};

inline bool state_equal(const DomainState& a, const DomainState& b) {
    if (a.dep.has_value() != b.dep.has_value() || (a.dep && *a.dep != *b.dep)) return false;
    if (a.card.has_value() != b.card.has_value() || (a.card && *a.card != *b.card)) return false;
    if (a.itv.has_value() != b.itv.has_value() || (a.itv && *a.itv != *b.itv)) return false;
    return true;
}

enum class PointKind { Initial, After };

struct ProgramPoint {
    PointKind kind;
    int line = 0;
    int col = 0;
    DomainState state;
};

struct AnalyzeOptions {
    bool improved_guards = false;
    bool product = false;  // interleave the interval reduction maps
    CardStats* stats = nullptr;
};

struct AnalysisResult {
    DomainState final_state;
    std::vector<ProgramPoint> points;  // program order, Initial first
};

namespace detail {

struct WalkCtx {
    const AnalyzeOptions* opt;
    std::vector<ProgramPoint>* points;  // null while iterating loop fixpoints

    WalkCtx silent() const { return WalkCtx{opt, nullptr}; }
};

// Cardinality of an expression with every node additionally capped by the
// number of values its interval box allows.
inline ExtNat card_expr_reduced(const Expr& e, int l, const CardSet& c, const IntervalEnv* env) {
    ExtNat raw;
    if (std::holds_alternative<IntLit>(e.node))
        raw = ExtNat::fin(1);
    else if (const auto* v = std::get_if<VarRef>(&e.node))
        raw = c.get(l, v->name);
    else if (const auto* b = std::get_if<BinArith>(&e.node))
        raw = card_expr_reduced(*b->lhs, l, c, env) * card_expr_reduced(*b->rhs, l, c, env);
    else {
        const auto& cmp = std::get<Compare>(e.node);
        raw = min(ExtNat::fin(2),
                  card_expr_reduced(*cmp.lhs, l, c, env) * card_expr_reduced(*cmp.rhs, l, c, env));
    }
    if (env) raw = min(raw, size(eval_interval(e, *env)));
    return raw;
}

inline DomainState reduce_state(DomainState s, const AnalyzeOptions& opt) {
    if (!opt.product || !s.itv) return s;
    if (s.card) s.card = tocard(std::move(*s.card), *s.itv);
    if (s.dep) s.dep = todep(std::move(*s.dep), *s.itv);
    // toint is the identity: intervals take nothing back from cardinalities
    return s;
}

// Branch-entry refinement: interval environments always learn from guards,
// the other domains only with improved guards enabled.
inline DomainState refine_state(const Expr& b, DomainState s, const AnalyzeOptions& opt) {
    if (opt.improved_guards) {
        if (s.dep) s.dep = dep_guard_refine(b, std::move(*s.dep));
        if (s.card) s.card = card_guard_refine(b, std::move(*s.card));
    }
    if (s.itv) s.itv = interval_guard_refine(b, std::move(*s.itv));
    return reduce_state(std::move(s), opt);
}

inline DomainState join_state(DomainState a, const DomainState& b) {
    if (a.dep) a.dep = dep_join(std::move(*a.dep), *b.dep);
    if (a.card) a.card = card_join(std::move(*a.card), *b.card);
    if (a.itv) a.itv = env_join(std::move(*a.itv), *b.itv);
    return a;
}

inline void record(const WalkCtx& ctx, PointKind kind, int line, int col, const DomainState& s) {
    if (ctx.points) ctx.points->push_back(ProgramPoint{kind, line, col, s});
}

inline DomainState walk(const Command& c, DomainState s, const WalkCtx& ctx);

// Conditional transfer shared by If and the While unrolling: refined branch
// entries, per-level join against the unrefined pre-state conditions.
inline DomainState cond_transfer(const Expr& guard, const Command& then_c, const Command& else_c,
                                 const DomainState& pre, const WalkCtx& ctx) {
    const AnalyzeOptions& opt = *ctx.opt;
    DomainState s1 = walk(then_c, refine_state(guard, pre, opt), ctx);
    ExprPtr nb = negate_guard(guard);
    DomainState s2 = walk(else_c, refine_state(*nb, pre, opt), ctx);

    DomainState out;
    const IntervalEnv* clamp = opt.product && pre.itv ? &*pre.itv : nullptr;
    if (pre.dep) {
        const DepSet& d = *pre.dep;
        std::vector<bool> w = mod_mask(then_c, *d.shape);
        std::vector<bool> w2 = mod_mask(else_c, *d.shape);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] || w2[i];
        DepSet j = DepSet::none(d.shape);
        for (int l = 0; l < d.shape->levels(); ++l) {
            if (agree_expr(guard, l, d)) {
                for (std::size_t x = 0; x < d.shape->var_count(); ++x)
                    if (s1.dep->contains(l, x) && s2.dep->contains(l, x)) j.insert(l, x);
            } else {
                for (std::size_t x = 0; x < d.shape->var_count(); ++x)
                    if (d.contains(l, x) && !w[x]) j.insert(l, x);
            }
        }
        out.dep = dep_close(std::move(j));
    }
    if (pre.card) {
        const CardSet& cs = *pre.card;
        std::vector<bool> w = mod_mask(then_c, *cs.shape);
        std::vector<bool> w2 = mod_mask(else_c, *cs.shape);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] || w2[i];
        CardSet sum = card_sum_combine(*s1.card, *s2.card, w, cs);
        CardSet j = cs;
        for (int l = 0; l < cs.shape->levels(); ++l) {
            bool agree = card_expr_reduced(guard, l, cs, clamp) == ExtNat::fin(1);
            for (std::size_t x = 0; x < cs.shape->var_count(); ++x)
                j.set(l, x, agree ? max(s1.card->get(l, x), s2.card->get(l, x)) : sum.get(l, x));
        }
        out.card = std::move(j);
    }
    if (pre.itv) out.itv = env_join(std::move(*s1.itv), *s2.itv);
    return reduce_state(std::move(out), opt);
}

inline std::size_t joint_loop_cap(const DomainState& s) {
    std::size_t rows = 0, vars = 0;
    if (s.card) rows += static_cast<std::size_t>(s.card->shape->levels()) * s.card->shape->var_count();
    if (s.dep) rows += static_cast<std::size_t>(s.dep->shape->levels()) * s.dep->shape->var_count();
    if (s.itv) vars = s.itv->vals.size();
    std::size_t cap = 2 * (rows + 2) + 4 * vars + 8;
    return cap < 64 ? 64 : cap;
}

inline DomainState walk(const Command& c, DomainState s, const WalkCtx& ctx) {
    const AnalyzeOptions& opt = *ctx.opt;
    if (std::holds_alternative<Skip>(c.node)) {
        record(ctx, PointKind::After, c.line, c.col, s);
        return s;
    }
    if (const auto* a = std::get_if<Assign>(&c.node)) {
        if (s.dep) {
            DepSet d = *s.dep;
            std::size_t x = d.shape->var_index(a->target);
            for (int l = 0; l < d.shape->levels(); ++l) {
                if (agree_expr(*a->rhs, l, *s.dep))
                    d.insert(l, x);
                else
                    d.erase(l, x);
            }
            s.dep = dep_close(std::move(d));
        }
        if (s.card) {
            const IntervalEnv* clamp = opt.product && s.itv ? &*s.itv : nullptr;
            CardSet cs = *s.card;
            std::size_t x = cs.shape->var_index(a->target);
            for (int l = 0; l < cs.shape->levels(); ++l)
                cs.set(l, x, card_expr_reduced(*a->rhs, l, *s.card, clamp));
            s.card = std::move(cs);
        }
        if (s.itv) {
            Interval v = eval_interval(*a->rhs, *s.itv);
            s.itv->set(a->target, v);
        }
        s = reduce_state(std::move(s), opt);
        record(ctx, PointKind::After, c.line, c.col, s);
        return s;
    }
    if (const auto* q = std::get_if<Seq>(&c.node)) return walk(*q->second, walk(*q->first, std::move(s), ctx), ctx);
    if (const auto* i = std::get_if<If>(&c.node)) {
        DomainState out = cond_transfer(*i->guard, *i->then_branch, *i->else_branch, s, ctx);
        record(ctx, PointKind::After, c.line, c.col, out);
        return out;
    }

    const auto& w = std::get<While>(c.node);
    Command skip_cmd{Skip{}, c.line, c.col};
    const WalkCtx silent = ctx.silent();
    const std::size_t cap = joint_loop_cap(s);
    DomainState entry = s;
    DomainState head = std::move(s);
    std::size_t iterations = 0;
    for (;;) {
        ++iterations;
        if (iterations > cap) {
            std::ostringstream msg;
            msg << "joint analysis did not stabilize: loop at line " << c.line << ", column " << c.col
                << " exceeded " << cap << " head iterations";
            throw analysis_divergence_error(msg.str());
        }
        DomainState raw = join_state(head, cond_transfer(*w.guard, *w.body, skip_cmd, head, silent));
        DomainState next = std::move(raw);
        if (iterations >= 2) {
            if (next.card) next.card = widen(*head.card, std::move(*next.card));
            if (next.itv) next.itv = env_widen(*head.itv, std::move(*next.itv));
        }
        if (state_equal(next, head)) break;
        head = std::move(next);
    }
    if (opt.stats && iterations > opt.stats->max_loop_head_iterations)
        opt.stats->max_loop_head_iterations = iterations;
    if (head.itv) {
        IntervalEnv refit =
            env_join(*entry.itv, itv_cmd(*w.body, interval_guard_refine(*w.guard, *head.itv)));
        head.itv = env_narrow(std::move(*head.itv), refit);
    }
    if (ctx.points) {
        // Reporting pass: body snapshots show the stabilized head flowing in.
        walk(*w.body, refine_state(*w.guard, head, opt), ctx);
    }
    head = refine_state(*negate_guard(*w.guard), std::move(head), opt);
    record(ctx, PointKind::After, c.line, c.col, head);
    return head;
}

}  // namespace detail

inline AnalysisResult analyze_program(const Command& c, DomainState initial, const AnalyzeOptions& opt = {}) {
    AnalysisResult res;
    detail::WalkCtx ctx{&opt, &res.points};
    DomainState start = detail::reduce_state(std::move(initial), opt);
    res.points.push_back(ProgramPoint{PointKind::Initial, 0, 0, start});
    res.final_state = detail::walk(c, std::move(start), ctx);
    return res;
}

}  // namespace hyperflow
