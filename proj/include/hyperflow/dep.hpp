// Dependence abstract domain. A fact l▸x asserts that runs agreeing on the
// l-visible part of the initial state agree on the final value of x. The
// domain order is reverse inclusion (more facts = more precise), so join is
// set intersection. Sets are kept well-formed: upward closed in the level.
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperflow/lang.hpp"
#include "hyperflow/lattice.hpp"

namespace hyperflow {

// A security lattice plus the ordered program variables; every abstract
// value carries one so mixed-shape operations can be rejected.
struct AnalysisShape {
    SecurityLatticePtr lattice;
    std::shared_ptr<const std::vector<std::string>> vars;

    int levels() const { return lattice->size(); }
    std::size_t var_count() const { return vars->size(); }
    std::size_t var_index(const std::string& name) const {
        for (std::size_t i = 0; i < vars->size(); ++i)
            if ((*vars)[i] == name) return i;
        throw std::out_of_range("variable '" + name + "' not in analysis shape");
    }
    bool same_as(const AnalysisShape& o) const {
        if (this == &o) return true;
        return (lattice == o.lattice || lattice->level_names() == o.lattice->level_names()) &&
               (vars == o.vars || *vars == *o.vars);
    }
};

using ShapePtr = std::shared_ptr<const AnalysisShape>;

inline ShapePtr make_shape(SecurityLatticePtr lat, std::shared_ptr<const std::vector<std::string>> vars) {
    return std::make_shared<const AnalysisShape>(AnalysisShape{std::move(lat), std::move(vars)});
}
inline ShapePtr make_shape(SecurityLatticePtr lat, std::vector<std::string> vars) {
    return make_shape(std::move(lat), share_vars(std::move(vars)));
}

struct DepSet {
    ShapePtr shape;
    std::vector<bool> bits;  // level-major: bits[l * var_count + x]

    static DepSet none(ShapePtr s) {
        std::size_t n = static_cast<std::size_t>(s->levels()) * s->var_count();
        return DepSet{std::move(s), std::vector<bool>(n, false)};
    }
    static DepSet all(ShapePtr s) {
        std::size_t n = static_cast<std::size_t>(s->levels()) * s->var_count();
        return DepSet{std::move(s), std::vector<bool>(n, true)};
    }

    std::size_t at(int l, std::size_t x) const {
        return static_cast<std::size_t>(l) * shape->var_count() + x;
    }
    bool contains(int l, std::size_t x) const { return bits[at(l, x)]; }
    bool contains(int l, const std::string& x) const { return contains(l, shape->var_index(x)); }
    void insert(int l, std::size_t x) { bits[at(l, x)] = true; }
    void erase(int l, std::size_t x) { bits[at(l, x)] = false; }

    friend bool operator==(const DepSet& a, const DepSet& b) { return a.bits == b.bits; }
    friend bool operator!=(const DepSet& a, const DepSet& b) { return !(a == b); }
};

namespace detail {
inline void require_same_shape(const AnalysisShape& a, const AnalysisShape& b, const char* what) {
    if (!a.same_as(b))
        throw std::invalid_argument(std::string(what) + " operands have different (lattice, variables) shapes");
}
}  // namespace detail

// D1 is below D2 when D1 makes every claim D2 makes (reverse inclusion).
inline bool dep_order(const DepSet& a, const DepSet& b) {
    detail::require_same_shape(*a.shape, *b.shape, "dependence");
    for (std::size_t i = 0; i < a.bits.size(); ++i)
        if (b.bits[i] && !a.bits[i]) return false;
    return true;
}

inline DepSet dep_join(DepSet a, const DepSet& b) {
    detail::require_same_shape(*a.shape, *b.shape, "dependence");
    for (std::size_t i = 0; i < a.bits.size(); ++i)
        a.bits[i] = a.bits[i] && b.bits[i];
    return a;
}

// Upward closure in the level: l▸x and l ⊑ l' imply l'▸x.
inline DepSet dep_close(DepSet d) {
    const auto& lat = *d.shape->lattice;
    for (int l = 0; l < d.shape->levels(); ++l)
        for (std::size_t x = 0; x < d.shape->var_count(); ++x)
            if (d.contains(l, x))
                for (int u : lat.upset(l)) d.insert(u, x);
    return d;
}

inline bool dep_well_formed(const DepSet& d) {
    const auto& lat = *d.shape->lattice;
    for (int l = 0; l < d.shape->levels(); ++l)
        for (std::size_t x = 0; x < d.shape->var_count(); ++x)
            if (d.contains(l, x))
                for (int u : lat.upset(l))
                    if (!d.contains(u, x)) return false;
    return true;
}

// The abstraction of the diagonal initial traces: l▸x for every x typed at or
// below l.
inline DepSet initial_dep(ShapePtr shape, const TypingContext& ctx) {
    DepSet d = DepSet::none(std::move(shape));
    for (std::size_t x = 0; x < d.shape->var_count(); ++x)
        for (int l = 0; l < d.shape->levels(); ++l)
            if (d.shape->lattice->leq(ctx.levels[x], l)) d.insert(l, x);
    return d;
}

// l-agreement of an expression: its value is determined by the l-visible
// inputs. Constants always agree; variables by membership; binary nodes need
// both operands.
inline bool agree_expr(const Expr& e, int l, const DepSet& d) {
    if (std::holds_alternative<IntLit>(e.node)) return true;
    if (const auto* v = std::get_if<VarRef>(&e.node)) return d.contains(l, v->name);
    if (const auto* b = std::get_if<BinArith>(&e.node))
        return agree_expr(*b->lhs, l, d) && agree_expr(*b->rhs, l, d);
    const auto& c = std::get<Compare>(e.node);
    return agree_expr(*c.lhs, l, d) && agree_expr(*c.rhs, l, d);
}

// Guard refinement: under x1 == x2 an agreement for either side holds for
// both. Other guard shapes learn nothing.
inline DepSet dep_guard_refine(const Expr& b, DepSet d) {
    const auto* cmp = std::get_if<Compare>(&b.node);
    if (!cmp || cmp->op != CmpOp::Eq) return d;
    const auto* v1 = std::get_if<VarRef>(&cmp->lhs->node);
    const auto* v2 = std::get_if<VarRef>(&cmp->rhs->node);
    if (!v1 || !v2) return d;
    std::size_t x1 = d.shape->var_index(v1->name);
    std::size_t x2 = d.shape->var_index(v2->name);
    for (int l = 0; l < d.shape->levels(); ++l)
        if (d.contains(l, x1) || d.contains(l, x2)) {
            d.insert(l, x1);
            d.insert(l, x2);
        }
    return dep_close(std::move(d));
}

struct DepOptions {
    bool improved_guards = false;
};

namespace detail {

inline std::vector<bool> mod_mask(const Command& c, const AnalysisShape& shape) {
    std::vector<bool> mask(shape.var_count(), false);
    for (const std::string& x : mod_vars(c)) mask[shape.var_index(x)] = true;
    return mask;
}

inline DepSet dep_cmd(const Command& c, DepSet d, const DepOptions& opt);

// Conditional transfer shared by If and the While unrolling. Branch entries
// are refined by the guard when improved_guards is set; the per-level choice
// and the fallback slice both use the unrefined pre-state.
inline DepSet dep_if(const Expr& guard, const Command& then_c, const Command& else_c,
                     const std::vector<bool>& w, const DepSet& d, const DepOptions& opt) {
    DepSet entry1 = d, entry2 = d;
    if (opt.improved_guards) {
        entry1 = dep_guard_refine(guard, std::move(entry1));
        entry2 = dep_guard_refine(*negate_guard(guard), std::move(entry2));
    }
    DepSet d1 = dep_cmd(then_c, std::move(entry1), opt);
    DepSet d2 = dep_cmd(else_c, std::move(entry2), opt);
    DepSet out = DepSet::none(d.shape);
    for (int l = 0; l < d.shape->levels(); ++l) {
        if (agree_expr(guard, l, d)) {
            for (std::size_t x = 0; x < d.shape->var_count(); ++x)
                if (d1.contains(l, x) && d2.contains(l, x)) out.insert(l, x);
        } else {
            for (std::size_t x = 0; x < d.shape->var_count(); ++x)
                if (d.contains(l, x) && !w[x]) out.insert(l, x);
        }
    }
    return dep_close(std::move(out));
}

inline DepSet dep_cmd(const Command& c, DepSet d, const DepOptions& opt) {
    if (std::holds_alternative<Skip>(c.node)) return d;
    if (const auto* a = std::get_if<Assign>(&c.node)) {
        std::size_t x = d.shape->var_index(a->target);
        DepSet out = d;
        for (int l = 0; l < d.shape->levels(); ++l) {
            if (agree_expr(*a->rhs, l, d))
                out.insert(l, x);
            else
                out.erase(l, x);
        }
        return dep_close(std::move(out));
    }
    if (const auto* s = std::get_if<Seq>(&c.node))
        return dep_cmd(*s->second, dep_cmd(*s->first, std::move(d), opt), opt);
    if (const auto* i = std::get_if<If>(&c.node)) {
        std::vector<bool> w = mod_mask(c, *d.shape);
        return dep_if(*i->guard, *i->then_branch, *i->else_branch, w, d, opt);
    }
    const auto& wl = std::get<While>(c.node);
    std::vector<bool> w = mod_mask(*wl.body, *d.shape);
    Command skip_cmd{Skip{}, c.line, c.col};
    DepSet head = std::move(d);
    for (;;) {
        DepSet next = dep_join(head, dep_if(*wl.guard, *wl.body, skip_cmd, w, head, opt));
        if (next == head) break;
        head = std::move(next);
    }
    if (opt.improved_guards) head = dep_guard_refine(*negate_guard(*wl.guard), std::move(head));
    return head;
}

}  // namespace detail

inline DepSet dep_analyze(const Command& c, DepSet d0, const DepOptions& opt = {}) {
    return detail::dep_cmd(c, dep_close(std::move(d0)), opt);
}

// ---------------------------------------------------------------------------
// Flow-sensitive security type checker (the comparison point for precision).

struct TypeEnv {
    ShapePtr shape;
    std::vector<int> levels;  // indexed by shape variable order

    int of(std::size_t x) const { return levels[x]; }
    int of(const std::string& x) const { return levels[shape->var_index(x)]; }

    friend bool operator==(const TypeEnv& a, const TypeEnv& b) { return a.levels == b.levels; }
    friend bool operator!=(const TypeEnv& a, const TypeEnv& b) { return !(a == b); }
};

inline TypeEnv make_type_env(ShapePtr shape, const TypingContext& ctx) {
    return TypeEnv{std::move(shape), ctx.levels};
}

inline bool type_env_leq(const TypeEnv& a, const TypeEnv& b) {
    detail::require_same_shape(*a.shape, *b.shape, "type environment");
    for (std::size_t i = 0; i < a.levels.size(); ++i)
        if (!a.shape->lattice->leq(a.levels[i], b.levels[i])) return false;
    return true;
}

inline TypeEnv type_env_join(TypeEnv a, const TypeEnv& b) {
    detail::require_same_shape(*a.shape, *b.shape, "type environment");
    for (std::size_t i = 0; i < a.levels.size(); ++i)
        a.levels[i] = a.shape->lattice->join(a.levels[i], b.levels[i]);
    return a;
}

// The level of an expression: join of the levels of its variables.
inline int expr_level(const Expr& e, const TypeEnv& env) {
    if (std::holds_alternative<IntLit>(e.node)) return env.shape->lattice->bottom();
    if (const auto* v = std::get_if<VarRef>(&e.node)) return env.of(v->name);
    if (const auto* b = std::get_if<BinArith>(&e.node))
        return env.shape->lattice->join(expr_level(*b->lhs, env), expr_level(*b->rhs, env));
    const auto& c = std::get<Compare>(e.node);
    return env.shape->lattice->join(expr_level(*c.lhs, env), expr_level(*c.rhs, env));
}

// Algorithmic flow-sensitive typing: assignment joins the program counter in,
// branches raise the counter by the guard's level, loops iterate the
// conditional rule to a fixpoint (finite lattice, monotone).
inline TypeEnv hs_typecheck(const Command& c, int pc, TypeEnv env) {
    if (std::holds_alternative<Skip>(c.node)) return env;
    if (const auto* a = std::get_if<Assign>(&c.node)) {
        std::size_t x = env.shape->var_index(a->target);
        env.levels[x] = env.shape->lattice->join(expr_level(*a->rhs, env), pc);
        return env;
    }
    if (const auto* s = std::get_if<Seq>(&c.node))
        return hs_typecheck(*s->second, pc, hs_typecheck(*s->first, pc, std::move(env)));
    if (const auto* i = std::get_if<If>(&c.node)) {
        int pc2 = env.shape->lattice->join(pc, expr_level(*i->guard, env));
        TypeEnv e1 = hs_typecheck(*i->then_branch, pc2, env);
        TypeEnv e2 = hs_typecheck(*i->else_branch, pc2, std::move(env));
        return type_env_join(std::move(e1), e2);
    }
    const auto& w = std::get<While>(c.node);
    TypeEnv head = std::move(env);
    for (;;) {
        int pc2 = head.shape->lattice->join(pc, expr_level(*w.guard, head));
        TypeEnv next = type_env_join(head, hs_typecheck(*w.body, pc2, head));
        if (next == head) break;
        head = std::move(next);
    }
    return head;
}

// Meet of the levels claiming x; no claim at all means the top level.
inline TypeEnv alpha_hs(const DepSet& d) {
    const auto& lat = *d.shape->lattice;
    TypeEnv env{d.shape, std::vector<int>(d.shape->var_count(), lat.top())};
    for (std::size_t x = 0; x < d.shape->var_count(); ++x) {
        bool any = false;
        int acc = lat.top();
        for (int l = 0; l < d.shape->levels(); ++l)
            if (d.contains(l, x)) {
                acc = any ? lat.meet(acc, l) : l;
                any = true;
            }
        env.levels[x] = acc;
    }
    return env;
}

inline DepSet gamma_hs(const TypeEnv& env) {
    DepSet d = DepSet::none(env.shape);
    for (std::size_t x = 0; x < env.shape->var_count(); ++x)
        for (int l = 0; l < env.shape->levels(); ++l)
            if (env.shape->lattice->leq(env.levels[x], l)) d.insert(l, x);
    return d;
}

}  // namespace hyperflow
