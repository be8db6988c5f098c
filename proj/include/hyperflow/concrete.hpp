// Executable denotational semantics over relational traces, plus the
// first-order collecting semantics and guard filter used as oracle ground
// truth. Arithmetic is total: two's-complement 64-bit wrap-around, Euclidean
// division/modulo (remainder in [0, |divisor|-1]), and division or modulo by
// zero yields 0.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperflow/lang.hpp"

namespace hyperflow {

using Value = long long;

// Variable valuation over Var_P; the variable list is shared across all
// states of one analysis run.
struct State {
    std::shared_ptr<const std::vector<std::string>> vars;
    std::vector<Value> vals;

    Value get(const std::string& name) const {
        for (std::size_t i = 0; i < vars->size(); ++i)
            if ((*vars)[i] == name) return vals[i];
        throw std::out_of_range("variable '" + name + "' not in scope");
    }
    void set(const std::string& name, Value v) {
        for (std::size_t i = 0; i < vars->size(); ++i)
            if ((*vars)[i] == name) {
                vals[i] = v;
                return;
            }
        throw std::out_of_range("variable '" + name + "' not in scope");
    }

    friend bool operator==(const State& a, const State& b) { return a.vals == b.vals; }
    friend bool operator<(const State& a, const State& b) { return a.vals < b.vals; }
};

inline State make_state(std::shared_ptr<const std::vector<std::string>> vars, std::vector<Value> vals) {
    return State{std::move(vars), std::move(vals)};
}

// A relational trace: initial and final ("current") state.
struct Trace {
    State initial, final;

    friend bool operator==(const Trace& a, const Trace& b) {
        return a.initial == b.initial && a.final == b.final;
    }
    friend bool operator<(const Trace& a, const Trace& b) {
        if (a.initial.vals != b.initial.vals) return a.initial.vals < b.initial.vals;
        return a.final.vals < b.final.vals;
    }
};

// Bottom (nontermination or fuel exhaustion) is the empty optional.
using MaybeTrace = std::optional<Trace>;

using TraceSet = std::set<Trace>;

// ---------------------------------------------------------------------------
// Total machine arithmetic.

inline Value wrap_add(Value a, Value b) {
    return static_cast<Value>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
inline Value wrap_sub(Value a, Value b) {
    return static_cast<Value>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
inline Value wrap_mul(Value a, Value b) {
    return static_cast<Value>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}
inline Value wrap_neg(Value a) { return static_cast<Value>(0 - static_cast<std::uint64_t>(a)); }

// Euclidean modulo: result in [0, |b|-1]; b == 0 yields 0.
inline Value euclid_mod(Value a, Value b) {
    if (b == 0) return 0;
    if (b == -1) return 0;
    Value r = a % b;  // |b| >= 2 here when a == INT64_MIN, so no overflow
    if (r < 0) r += (b > 0 ? b : -b);
    return r;
}

// Euclidean division, consistent with euclid_mod: a == b*q + r (mod 2^64).
inline Value euclid_div(Value a, Value b) {
    if (b == 0) return 0;
    if (b == -1) return wrap_neg(a);
    Value q = a / b;
    Value r = a % b;
    if (r < 0) q += (b > 0 ? -1 : 1);
    return q;
}

inline Value apply_arith(ArithOp op, Value a, Value b) {
    switch (op) {
    case ArithOp::Add: return wrap_add(a, b);
    case ArithOp::Sub: return wrap_sub(a, b);
    case ArithOp::Mul: return wrap_mul(a, b);
    case ArithOp::Div: return euclid_div(a, b);
    case ArithOp::Mod: return euclid_mod(a, b);
    }
    return 0;
}

inline Value apply_cmp(CmpOp op, Value a, Value b) {
    switch (op) {
    case CmpOp::Eq: return a == b ? 1 : 0;
    case CmpOp::Ne: return a != b ? 1 : 0;
    case CmpOp::Lt: return a < b ? 1 : 0;
    case CmpOp::Le: return a <= b ? 1 : 0;
    case CmpOp::Gt: return a > b ? 1 : 0;
    case CmpOp::Ge: return a >= b ? 1 : 0;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Expression evaluation. Comparisons evaluate to 1 or 0.

inline Value eval_expr(const Expr& e, const State& s) {
    if (const auto* i = std::get_if<IntLit>(&e.node)) return i->value;
    if (const auto* v = std::get_if<VarRef>(&e.node)) return s.get(v->name);
    if (const auto* b = std::get_if<BinArith>(&e.node))
        return apply_arith(b->op, eval_expr(*b->lhs, s), eval_expr(*b->rhs, s));
    const auto& c = std::get<Compare>(e.node);
    return apply_cmp(c.op, eval_expr(*c.lhs, s), eval_expr(*c.rhs, s));
}

// Evaluates e in the current (final) state of the trace.
inline Value eval_expr_final(const Expr& e, const Trace& t) { return eval_expr(e, t.final); }

// Evaluates e in the initial state of the trace.
inline Value eval_expr_initial(const Expr& e, const Trace& t) { return eval_expr(e, t.initial); }

// ---------------------------------------------------------------------------
// Command semantics. Fuel counts loop-body executions across the whole run of
// one trace; exhaustion yields Bottom, modelling divergence.

constexpr long long kDefaultFuel = 10000;

namespace detail {
inline MaybeTrace run(const Command& c, Trace t, long long& fuel) {
    if (std::holds_alternative<Skip>(c.node)) return t;
    if (const auto* a = std::get_if<Assign>(&c.node)) {
        t.final.set(a->target, eval_expr(*a->rhs, t.final));
        return t;
    }
    if (const auto* s = std::get_if<Seq>(&c.node)) {
        MaybeTrace mid = run(*s->first, std::move(t), fuel);
        if (!mid) return std::nullopt;
        return run(*s->second, std::move(*mid), fuel);
    }
    if (const auto* i = std::get_if<If>(&c.node)) {
        const Command& branch = eval_expr(*i->guard, t.final) == 1 ? *i->then_branch : *i->else_branch;
        return run(branch, std::move(t), fuel);
    }
    const auto& w = std::get<While>(c.node);
    while (eval_expr(*w.guard, t.final) == 1) {
        if (fuel <= 0) return std::nullopt;
        --fuel;
        MaybeTrace next = run(*w.body, std::move(t), fuel);
        if (!next) return std::nullopt;
        t = std::move(*next);
    }
    return t;
}
}  // namespace detail

// Strict in Bottom.
inline MaybeTrace run_command(const Command& c, MaybeTrace t, long long fuel = kDefaultFuel) {
    if (!t) return std::nullopt;
    long long budget = fuel;
    return detail::run(c, std::move(*t), budget);
}

// ---------------------------------------------------------------------------
// Collecting semantics: the set of non-Bottom results over T (direct image).

inline TraceSet collect(const Command& c, const TraceSet& T, long long fuel = kDefaultFuel) {
    TraceSet out;
    for (const Trace& t : T) {
        MaybeTrace r = run_command(c, t, fuel);
        if (r) out.insert(std::move(*r));
    }
    return out;
}

// Filter keeping the traces whose current state satisfies b.
inline TraceSet guard_filter(const Expr& b, const TraceSet& T) {
    TraceSet out;
    for (const Trace& t : T)
        if (eval_expr_final(b, t) == 1) out.insert(t);
    return out;
}

// Compositional fixpoint form of the collecting semantics; agrees with the
// direct image on programs whose traces all terminate within fuel. Loops are
// the least fixpoint above T of the one-step conditional image, followed by
// the exit-guard filter.
inline TraceSet collect_fixpoint(const Command& c, const TraceSet& T, long long fuel = kDefaultFuel) {
    if (std::holds_alternative<Skip>(c.node)) return T;
    if (std::holds_alternative<Assign>(c.node)) return collect(c, T, fuel);
    if (const auto* s = std::get_if<Seq>(&c.node))
        return collect_fixpoint(*s->second, collect_fixpoint(*s->first, T, fuel), fuel);
    if (const auto* i = std::get_if<If>(&c.node)) {
        TraceSet then_part = collect_fixpoint(*i->then_branch, guard_filter(*i->guard, T), fuel);
        TraceSet else_part = collect_fixpoint(*i->else_branch, guard_filter(*negate_guard(i->guard), T), fuel);
        then_part.insert(else_part.begin(), else_part.end());
        return then_part;
    }
    const auto& w = std::get<While>(c.node);
    ExprPtr not_b = negate_guard(w.guard);
    TraceSet acc = T;
    for (long long iter = 0; iter <= fuel; ++iter) {
        // One conditional step: advance guard-true traces through the body.
        TraceSet active = guard_filter(*w.guard, acc);
        TraceSet stepped = collect_fixpoint(*w.body, active, fuel);
        std::size_t before = acc.size();
        bool grew = false;
        for (const Trace& t : stepped) grew |= acc.insert(t).second;
        if (!grew && acc.size() == before) break;
    }
    return guard_filter(*not_b, acc);
}

// All diagonal traces (sigma, sigma) with sigma drawing each variable from
// the given finite value set.
inline TraceSet initial_traces(const std::vector<std::string>& vars, const std::vector<Value>& values) {
    auto shared = share_vars(vars);
    TraceSet out;
    std::vector<Value> current(vars.size(), 0);
    if (vars.empty()) {
        State s = make_state(shared, {});
        out.insert(Trace{s, s});
        return out;
    }
    if (values.empty()) return out;
    std::vector<std::size_t> idx(vars.size(), 0);
    for (;;) {
        for (std::size_t i = 0; i < vars.size(); ++i) current[i] = values[idx[i]];
        State s = make_state(shared, current);
        out.insert(Trace{s, s});
        std::size_t pos = 0;
        while (pos < idx.size()) {
            if (++idx[pos] < values.size()) break;
            idx[pos] = 0;
            ++pos;
        }
        if (pos == idx.size()) break;
    }
    return out;
}

inline std::vector<Value> value_range(Value lo, Value hi) {
    std::vector<Value> out;
    for (Value v = lo; v <= hi; ++v) {
        out.push_back(v);
        if (v == hi) break;  // guard against overflow at numeric limits
    }
    return out;
}

}  // namespace hyperflow
