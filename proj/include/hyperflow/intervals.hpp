// Interval analysis of final-state values, and the reduction maps that let
// intervals sharpen cardinality and dependence results. Interval arithmetic
// is conservative: any bound computation that could overflow 64 bits returns
// the unbounded interval, which stays sound under the wrap-around concrete
// semantics. Remainders are Euclidean, so e % k always lands in [0, |k|-1].
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hyperflow/card.hpp"
#include "hyperflow/concrete.hpp"
#include "hyperflow/dep.hpp"
#include "hyperflow/extnat.hpp"
#include "hyperflow/lang.hpp"

namespace hyperflow {

struct Interval {
    bool empty = false;
    bool lo_unbounded = true;
    bool hi_unbounded = true;
    Value lo = 0;
    Value hi = 0;

    static Interval top() { return Interval{}; }
    static Interval none() { return Interval{true, false, false, 0, 0}; }
    static Interval constant(Value v) { return Interval{false, false, false, v, v}; }
    static Interval range(Value lo, Value hi) {
        if (lo > hi) return none();
        return Interval{false, false, false, lo, hi};
    }
    static Interval at_least(Value lo) { return Interval{false, false, true, lo, 0}; }
    static Interval at_most(Value hi) { return Interval{false, true, false, 0, hi}; }

    bool is_top() const { return !empty && lo_unbounded && hi_unbounded; }
    bool is_singleton() const { return !empty && !lo_unbounded && !hi_unbounded && lo == hi; }
    bool contains(Value v) const {
        if (empty) return false;
        return (lo_unbounded || lo <= v) && (hi_unbounded || v <= hi);
    }

    friend bool operator==(const Interval& a, const Interval& b) {
        if (a.empty || b.empty) return a.empty == b.empty;
        if (a.lo_unbounded != b.lo_unbounded || a.hi_unbounded != b.hi_unbounded) return false;
        return (a.lo_unbounded || a.lo == b.lo) && (a.hi_unbounded || a.hi == b.hi);
    }
    friend bool operator!=(const Interval& a, const Interval& b) { return !(a == b); }
};

inline bool itv_leq(const Interval& a, const Interval& b) {
    if (a.empty) return true;
    if (b.empty) return false;
    bool lo_ok = b.lo_unbounded || (!a.lo_unbounded && b.lo <= a.lo);
    bool hi_ok = b.hi_unbounded || (!a.hi_unbounded && a.hi <= b.hi);
    return lo_ok && hi_ok;
}

inline Interval itv_join(const Interval& a, const Interval& b) {
    if (a.empty) return b;
    if (b.empty) return a;
    Interval out;
    out.empty = false;
    out.lo_unbounded = a.lo_unbounded || b.lo_unbounded;
    out.hi_unbounded = a.hi_unbounded || b.hi_unbounded;
    if (!out.lo_unbounded) out.lo = a.lo < b.lo ? a.lo : b.lo;
    if (!out.hi_unbounded) out.hi = a.hi > b.hi ? a.hi : b.hi;
    return out;
}

inline Interval itv_meet(const Interval& a, const Interval& b) {
    if (a.empty || b.empty) return Interval::none();
    Interval out;
    out.empty = false;
    out.lo_unbounded = a.lo_unbounded && b.lo_unbounded;
    out.hi_unbounded = a.hi_unbounded && b.hi_unbounded;
    if (!out.lo_unbounded) out.lo = a.lo_unbounded ? b.lo : (b.lo_unbounded ? a.lo : (a.lo > b.lo ? a.lo : b.lo));
    if (!out.hi_unbounded) out.hi = a.hi_unbounded ? b.hi : (b.hi_unbounded ? a.hi : (a.hi < b.hi ? a.hi : b.hi));
    if (!out.lo_unbounded && !out.hi_unbounded && out.lo > out.hi) return Interval::none();
    return out;
}

// A bound that moved since the previous iterate is extrapolated to infinity.
inline Interval itv_widen(const Interval& a, const Interval& b) {
    if (a.empty) return b;
    if (b.empty) return a;
    Interval out = itv_join(a, b);
    if (!a.lo_unbounded && (out.lo_unbounded || out.lo < a.lo)) out.lo_unbounded = true;
    if (!a.hi_unbounded && (out.hi_unbounded || out.hi > a.hi)) out.hi_unbounded = true;
    if (!out.lo_unbounded) out.lo = a.lo;
    if (!out.hi_unbounded) out.hi = a.hi;
    return out;
}

// One decreasing step: only bounds the widening pushed to infinity may come
// back down to the refit iterate's bounds.
inline Interval itv_narrow(const Interval& a, const Interval& b) {
    if (a.empty || b.empty) return b;
    Interval out = a;
    if (a.lo_unbounded && !b.lo_unbounded) {
        out.lo_unbounded = false;
        out.lo = b.lo;
    }
    if (a.hi_unbounded && !b.hi_unbounded) {
        out.hi_unbounded = false;
        out.hi = b.hi;
    }
    if (!out.lo_unbounded && !out.hi_unbounded && out.lo > out.hi) return Interval::none();
    return out;
}

inline ExtNat size(const Interval& i) {
    if (i.empty) return ExtNat::fin(0);
    if (i.lo_unbounded || i.hi_unbounded) return ExtNat::inf();
    unsigned __int128 span =
        static_cast<unsigned __int128>(static_cast<std::uint64_t>(i.hi) - static_cast<std::uint64_t>(i.lo)) + 1;
    if (span >= static_cast<unsigned __int128>(UINT64_MAX)) return ExtNat::inf();
    return ExtNat::fin(static_cast<std::uint64_t>(span));
}

namespace detail {

constexpr __int128 kI64Min = std::numeric_limits<Value>::min();
constexpr __int128 kI64Max = std::numeric_limits<Value>::max();

inline bool fits64(__int128 v) { return v >= kI64Min && v <= kI64Max; }

// Builds an interval from exact wide bounds, falling back to unbounded when a
// bound does not fit (wrap-around can land anywhere outside the 64-bit box).
inline Interval itv_from_wide(__int128 lo, __int128 hi) {
    if (!fits64(lo) || !fits64(hi)) return Interval::top();
    return Interval::range(static_cast<Value>(lo), static_cast<Value>(hi));
}

}  // namespace detail

inline Interval itv_add(const Interval& a, const Interval& b) {
    if (a.empty || b.empty) return Interval::none();
    if (a.lo_unbounded || a.hi_unbounded || b.lo_unbounded || b.hi_unbounded) return Interval::top();
    return detail::itv_from_wide(static_cast<__int128>(a.lo) + b.lo, static_cast<__int128>(a.hi) + b.hi);
}

inline Interval itv_sub(const Interval& a, const Interval& b) {
    if (a.empty || b.empty) return Interval::none();
    if (a.lo_unbounded || a.hi_unbounded || b.lo_unbounded || b.hi_unbounded) return Interval::top();
    return detail::itv_from_wide(static_cast<__int128>(a.lo) - b.hi, static_cast<__int128>(a.hi) - b.lo);
}

inline Interval itv_mul(const Interval& a, const Interval& b) {
    if (a.empty || b.empty) return Interval::none();
    if (a.is_singleton() && a.lo == 0) return Interval::constant(0);
    if (b.is_singleton() && b.lo == 0) return Interval::constant(0);
    if (a.lo_unbounded || a.hi_unbounded || b.lo_unbounded || b.hi_unbounded) return Interval::top();
    __int128 c1 = static_cast<__int128>(a.lo) * b.lo;
    __int128 c2 = static_cast<__int128>(a.lo) * b.hi;
    __int128 c3 = static_cast<__int128>(a.hi) * b.lo;
    __int128 c4 = static_cast<__int128>(a.hi) * b.hi;
    __int128 lo = c1, hi = c1;
    for (__int128 c : {c2, c3, c4}) {
        if (c < lo) lo = c;
        if (c > hi) hi = c;
    }
    return detail::itv_from_wide(lo, hi);
}

// Sound only for strictly positive finite divisor ranges; everything else is
// given up as unbounded (division by zero yields 0, which top covers).
inline Interval itv_div(const Interval& a, const Interval& b) {
    if (a.empty || b.empty) return Interval::none();
    bool divisor_positive = !b.lo_unbounded && b.lo >= 1 && !b.hi_unbounded;
    if (!divisor_positive || a.lo_unbounded || a.hi_unbounded) return Interval::top();
    Value corners[4] = {euclid_div(a.lo, b.lo), euclid_div(a.lo, b.hi), euclid_div(a.hi, b.lo),
                        euclid_div(a.hi, b.hi)};
    Value lo = corners[0], hi = corners[0];
    for (Value c : corners) {
        if (c < lo) lo = c;
        if (c > hi) hi = c;
    }
    return Interval::range(lo, hi);
}

// Euclidean remainders are nonnegative and below the divisor's magnitude, so
// only the divisor's bounds matter.
inline Interval itv_mod(const Interval& a, const Interval& b) {
    if (a.empty || b.empty) return Interval::none();
    if (b.lo_unbounded || b.hi_unbounded) return Interval::at_least(0);
    std::uint64_t m1 = b.lo < 0 ? static_cast<std::uint64_t>(0) - static_cast<std::uint64_t>(b.lo)
                                : static_cast<std::uint64_t>(b.lo);
    std::uint64_t m2 = b.hi < 0 ? static_cast<std::uint64_t>(0) - static_cast<std::uint64_t>(b.hi)
                                : static_cast<std::uint64_t>(b.hi);
    std::uint64_t m = m1 > m2 ? m1 : m2;
    if (m == 0) return Interval::constant(0);
    __int128 hi = static_cast<__int128>(m) - 1;
    return detail::itv_from_wide(0, hi);
}

inline Interval itv_arith(ArithOp op, const Interval& a, const Interval& b) {
    switch (op) {
    case ArithOp::Add: return itv_add(a, b);
    case ArithOp::Sub: return itv_sub(a, b);
    case ArithOp::Mul: return itv_mul(a, b);
    case ArithOp::Div: return itv_div(a, b);
    case ArithOp::Mod: return itv_mod(a, b);
    }
    return Interval::top();
}

// Comparisons evaluate to 1 or 0; decided outright when the operand boxes
// cannot overlap the failing side.
inline Interval itv_compare(CmpOp op, const Interval& a, const Interval& b) {
    if (a.empty || b.empty) return Interval::none();
    // a entirely below b / a entirely above b, when the relevant bounds exist
    bool lt = !a.hi_unbounded && !b.lo_unbounded && a.hi < b.lo;
    bool le = !a.hi_unbounded && !b.lo_unbounded && a.hi <= b.lo;
    bool gt = !a.lo_unbounded && !b.hi_unbounded && a.lo > b.hi;
    bool ge = !a.lo_unbounded && !b.hi_unbounded && a.lo >= b.hi;
    bool eq = a.is_singleton() && b.is_singleton() && a.lo == b.lo;
    bool always = false, never = false;
    switch (op) {
    case CmpOp::Eq: always = eq; never = lt || gt; break;
    case CmpOp::Ne: always = lt || gt; never = eq; break;
    case CmpOp::Lt: always = lt; never = ge; break;
    case CmpOp::Le: always = le; never = gt; break;
    case CmpOp::Gt: always = gt; never = le; break;
    case CmpOp::Ge: always = ge; never = lt; break;
    }
    if (always) return Interval::constant(1);
    if (never) return Interval::constant(0);
    return Interval::range(0, 1);
}

// ---------------------------------------------------------------------------
// Interval environments, total on the program variables.

struct IntervalEnv {
    std::shared_ptr<const std::vector<std::string>> vars;
    std::vector<Interval> vals;

    static IntervalEnv top(std::shared_ptr<const std::vector<std::string>> vars) {
        std::size_t n = vars->size();
        return IntervalEnv{std::move(vars), std::vector<Interval>(n, Interval::top())};
    }

    std::size_t index(const std::string& name) const {
        for (std::size_t i = 0; i < vars->size(); ++i)
            if ((*vars)[i] == name) return i;
        throw std::out_of_range("variable '" + name + "' not in interval environment");
    }
    const Interval& get(const std::string& name) const { return vals[index(name)]; }
    void set(const std::string& name, Interval i) { vals[index(name)] = i; }

    // Some variable has no possible value: the program point is unreachable.
    bool unreachable() const {
        for (const Interval& i : vals)
            if (i.empty) return true;
        return false;
    }

    friend bool operator==(const IntervalEnv& a, const IntervalEnv& b) { return a.vals == b.vals; }
    friend bool operator!=(const IntervalEnv& a, const IntervalEnv& b) { return !(a == b); }
};

inline bool env_leq(const IntervalEnv& a, const IntervalEnv& b) {
    if (a.unreachable()) return true;
    for (std::size_t i = 0; i < a.vals.size(); ++i)
        if (!itv_leq(a.vals[i], b.vals[i])) return false;
    return true;
}

inline IntervalEnv env_join(IntervalEnv a, const IntervalEnv& b) {
    if (a.unreachable()) return b;
    if (b.unreachable()) return a;
    for (std::size_t i = 0; i < a.vals.size(); ++i) a.vals[i] = itv_join(a.vals[i], b.vals[i]);
    return a;
}

inline IntervalEnv env_widen(IntervalEnv a, const IntervalEnv& b) {
    if (a.unreachable()) return b;
    if (b.unreachable()) return a;
    for (std::size_t i = 0; i < a.vals.size(); ++i) a.vals[i] = itv_widen(a.vals[i], b.vals[i]);
    return a;
}

inline IntervalEnv env_narrow(IntervalEnv a, const IntervalEnv& b) {
    for (std::size_t i = 0; i < a.vals.size(); ++i) a.vals[i] = itv_narrow(a.vals[i], b.vals[i]);
    return a;
}

inline Interval eval_interval(const Expr& e, const IntervalEnv& env) {
    if (env.unreachable()) return Interval::none();
    if (const auto* i = std::get_if<IntLit>(&e.node)) return Interval::constant(i->value);
    if (const auto* v = std::get_if<VarRef>(&e.node)) return env.get(v->name);
    if (const auto* b = std::get_if<BinArith>(&e.node))
        return itv_arith(b->op, eval_interval(*b->lhs, env), eval_interval(*b->rhs, env));
    const auto& c = std::get<Compare>(e.node);
    return itv_compare(c.op, eval_interval(*c.lhs, env), eval_interval(*c.rhs, env));
}

// ---------------------------------------------------------------------------
// Guard refinement on variable-vs-variable and variable-vs-constant
// comparisons; other shapes learn nothing.

namespace detail {

// Tightens ix under the constraint "x op rhs" where rhs has interval iy.
inline Interval refine_left(CmpOp op, const Interval& ix, const Interval& iy) {
    if (ix.empty || iy.empty) return Interval::none();
    switch (op) {
    case CmpOp::Eq: return itv_meet(ix, iy);
    case CmpOp::Ne:
        if (iy.is_singleton() && !ix.lo_unbounded && !ix.hi_unbounded) {
            if (ix.lo == ix.hi && ix.lo == iy.lo) return Interval::none();
            if (ix.lo == iy.lo) return Interval::range(ix.lo + 1, ix.hi);
            if (ix.hi == iy.lo) return Interval::range(ix.lo, ix.hi - 1);
        }
        return ix;
    case CmpOp::Lt:
        if (!iy.hi_unbounded)
            return itv_meet(ix, iy.hi == std::numeric_limits<Value>::min() ? Interval::none()
                                                                           : Interval::at_most(iy.hi - 1));
        return ix;
    case CmpOp::Le:
        if (!iy.hi_unbounded) return itv_meet(ix, Interval::at_most(iy.hi));
        return ix;
    case CmpOp::Gt:
        if (!iy.lo_unbounded)
            return itv_meet(ix, iy.lo == std::numeric_limits<Value>::max() ? Interval::none()
                                                                           : Interval::at_least(iy.lo + 1));
        return ix;
    case CmpOp::Ge:
        if (!iy.lo_unbounded) return itv_meet(ix, Interval::at_least(iy.lo));
        return ix;
    }
    return ix;
}

inline CmpOp flip(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return CmpOp::Eq;
    case CmpOp::Ne: return CmpOp::Ne;
    case CmpOp::Lt: return CmpOp::Gt;
    case CmpOp::Le: return CmpOp::Ge;
    case CmpOp::Gt: return CmpOp::Lt;
    case CmpOp::Ge: return CmpOp::Le;
    }
    return op;
}

}  // namespace detail

inline IntervalEnv interval_guard_refine(const Expr& b, IntervalEnv env) {
    const auto* cmp = std::get_if<Compare>(&b.node);
    if (!cmp || env.unreachable()) return env;
    const auto* vl = std::get_if<VarRef>(&cmp->lhs->node);
    const auto* vr = std::get_if<VarRef>(&cmp->rhs->node);
    bool lhs_simple = vl || std::holds_alternative<IntLit>(cmp->lhs->node);
    bool rhs_simple = vr || std::holds_alternative<IntLit>(cmp->rhs->node);
    if (!lhs_simple || !rhs_simple || (!vl && !vr)) return env;
    Interval il = eval_interval(*cmp->lhs, env);
    Interval ir = eval_interval(*cmp->rhs, env);
    if (vl) env.set(vl->name, detail::refine_left(cmp->op, il, ir));
    if (vr) env.set(vr->name, detail::refine_left(detail::flip(cmp->op), ir, il));
    return env;
}

// ---------------------------------------------------------------------------
// The analysis proper: branch entries are refined by the guard, loops widen
// at the head from the second iterate, take one narrowing pass, and exit
// through the negated guard.

namespace detail {

inline IntervalEnv itv_cmd(const Command& c, IntervalEnv env) {
    if (std::holds_alternative<Skip>(c.node)) return env;
    if (const auto* a = std::get_if<Assign>(&c.node)) {
        Interval v = eval_interval(*a->rhs, env);
        env.set(a->target, v);
        return env;
    }
    if (const auto* s = std::get_if<Seq>(&c.node)) return itv_cmd(*s->second, itv_cmd(*s->first, std::move(env)));
    if (const auto* i = std::get_if<If>(&c.node)) {
        IntervalEnv e1 = itv_cmd(*i->then_branch, interval_guard_refine(*i->guard, env));
        IntervalEnv e2 = itv_cmd(*i->else_branch, interval_guard_refine(*negate_guard(*i->guard), std::move(env)));
        return env_join(std::move(e1), e2);
    }
    const auto& w = std::get<While>(c.node);
    ExprPtr not_b = negate_guard(*w.guard);
    IntervalEnv head = env;
    for (std::size_t iter = 1;; ++iter) {
        IntervalEnv stepped = itv_cmd(*w.body, interval_guard_refine(*w.guard, head));
        IntervalEnv raw = env_join(head, std::move(stepped));
        IntervalEnv next = iter >= 2 ? env_widen(head, raw) : std::move(raw);
        if (next == head) break;
        head = std::move(next);
    }
    IntervalEnv refit = env_join(env, itv_cmd(*w.body, interval_guard_refine(*w.guard, head)));
    head = env_narrow(std::move(head), refit);
    return interval_guard_refine(*not_b, std::move(head));
}

}  // namespace detail

inline IntervalEnv interval_analyze(const Command& c, IntervalEnv env0) {
    return detail::itv_cmd(c, std::move(env0));
}

// ---------------------------------------------------------------------------
// Reduction maps of the product with cardinalities and dependences: a
// variable boxed into k values has at most k final values at every level, and
// a singleton box pins the variable at every level outright.

inline CardSet tocard(CardSet c, const IntervalEnv& env) {
    for (std::size_t x = 0; x < c.shape->var_count(); ++x) {
        ExtNat bound = size(env.vals[x]);
        for (int l = 0; l < c.shape->levels(); ++l) c.set(l, x, min(c.get(l, x), bound));
    }
    return c;
}

inline const IntervalEnv& toint(const CardSet&, const IntervalEnv& env) { return env; }

inline DepSet todep(DepSet d, const IntervalEnv& env) {
    for (std::size_t x = 0; x < d.shape->var_count(); ++x)
        if (size(env.vals[x]) == ExtNat::fin(1))
            for (int l = 0; l < d.shape->levels(); ++l) d.insert(l, x);
    return dep_close(std::move(d));
}

}  // namespace hyperflow
