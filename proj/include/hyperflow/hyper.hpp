// Hypercollecting semantics: a transformer on sets of trace sets, executable
// at oracle scale, together with the variety and cardinality abstractions
// that connect it to the dependence and cardinality domains. Everything here
// is the semantic ground truth the analyzers are tested against.
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperflow/card.hpp"
#include "hyperflow/concrete.hpp"
#include "hyperflow/dep.hpp"
#include "hyperflow/extnat.hpp"
#include "hyperflow/lang.hpp"
#include "hyperflow/lattice.hpp"

namespace hyperflow {

using HyperSet = std::set<TraceSet>;
using ValueSet = std::set<Value>;
using ValueSetSet = std::set<ValueSet>;

class fuel_exhausted_error : public std::runtime_error {
public:
    explicit fuel_exhausted_error(const std::string& what) : std::runtime_error(what) {}
};

inline HyperSet guard_hyper(const Expr& b, const HyperSet& tt) {
    HyperSet out;
    for (const TraceSet& t : tt) out.insert(guard_filter(b, t));
    return out;
}

namespace detail {

// One conditional image: traces satisfying b go through c1, the rest through
// c2, and the results are unioned. This is the per-element step of both the
// If clause and the While unrolling.
inline TraceSet hyper_if_step(const Expr& b, const Command& c1, const Command& c2, const TraceSet& t,
                              long long fuel) {
    TraceSet out = collect(c1, guard_filter(b, t), fuel);
    TraceSet other = collect(c2, guard_filter(*negate_guard(b), t), fuel);
    out.insert(other.begin(), other.end());
    return out;
}

}  // namespace detail

// Follows the defining clauses: Skip is the identity, Assign the elementwise
// direct image, Seq composition; If maps each member to the union of its
// guard-partition's branch images; While is the least fixpoint *over sets of
// sets* above the input, filtered by the negated guard on the way out.
inline HyperSet hyper_collect(const Command& c, const HyperSet& tt, long long fuel = kDefaultFuel) {
    if (std::holds_alternative<Skip>(c.node)) return tt;
    if (std::holds_alternative<Assign>(c.node)) {
        HyperSet out;
        for (const TraceSet& t : tt) out.insert(collect(c, t, fuel));
        return out;
    }
    if (const auto* s = std::get_if<Seq>(&c.node))
        return hyper_collect(*s->second, hyper_collect(*s->first, tt, fuel), fuel);
    if (const auto* i = std::get_if<If>(&c.node)) {
        HyperSet out;
        for (const TraceSet& t : tt)
            out.insert(detail::hyper_if_step(*i->guard, *i->then_branch, *i->else_branch, t, fuel));
        return out;
    }
    const auto& w = std::get<While>(c.node);
    Command skip_cmd{Skip{}, c.line, c.col};
    HyperSet acc = tt;
    long long iterations = 0;
    for (;;) {
        if (++iterations > fuel)
            throw fuel_exhausted_error("hypercollecting loop fixpoint not reached within fuel at line " +
                                       std::to_string(c.line));
        HyperSet next = acc;
        for (const TraceSet& t : acc) next.insert(detail::hyper_if_step(*w.guard, *w.body, skip_cmd, t, fuel));
        if (next == acc) break;
        acc = std::move(next);
    }
    return guard_hyper(*negate_guard(*w.guard), acc);
}

// ---------------------------------------------------------------------------
// Initial l-equivalence and l-variety.

namespace detail {

// Indices of the variables observable at level l (typed at or below l).
inline std::vector<std::size_t> low_indices(int l, const TypingContext& ctx, const SecurityLattice& lat) {
    std::vector<std::size_t> out;
    for (std::size_t x = 0; x < ctx.levels.size(); ++x)
        if (lat.leq(ctx.levels[x], l)) out.push_back(x);
    return out;
}

inline std::vector<Value> project_initial(const Trace& t, const std::vector<std::size_t>& idx) {
    std::vector<Value> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(t.initial.vals[i]);
    return out;
}

}  // namespace detail

// All trace pairs agree initially on every variable observable at l.
inline bool initially_l_equivalent(const TraceSet& t, int l, const TypingContext& ctx,
                                   const SecurityLattice& lat) {
    if (t.size() <= 1) return true;
    std::vector<std::size_t> low = detail::low_indices(l, ctx, lat);
    std::vector<Value> first = detail::project_initial(*t.begin(), low);
    for (const Trace& tr : t)
        if (detail::project_initial(tr, low) != first) return false;
    return true;
}

// The value sets an expression can be driven to while holding the l-visible
// inputs fixed: one set per maximal initial-l-equivalence class. The empty
// trace set has no classes.
inline ValueSetSet variety(const Expr& e, int l, const TraceSet& t, const TypingContext& ctx,
                           const SecurityLattice& lat) {
    std::vector<std::size_t> low = detail::low_indices(l, ctx, lat);
    std::map<std::vector<Value>, ValueSet> classes;
    for (const Trace& tr : t) classes[detail::project_initial(tr, low)].insert(eval_expr_final(e, tr));
    ValueSetSet out;
    for (auto& [key, vals] : classes) out.insert(std::move(vals));
    return out;
}

// Literal subset-of-T definition, exponential; cross-checks the class-based
// computation at tiny sizes.
inline ValueSetSet variety_subsets(const Expr& e, int l, const TraceSet& t, const TypingContext& ctx,
                                   const SecurityLattice& lat) {
    std::vector<Trace> traces(t.begin(), t.end());
    if (traces.size() > 16) throw std::invalid_argument("subset variety is limited to 16 traces");
    ValueSetSet out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << traces.size()); ++mask) {
        TraceSet r;
        for (std::size_t i = 0; i < traces.size(); ++i)
            if (mask & (std::size_t{1} << i)) r.insert(traces[i]);
        if (!initially_l_equivalent(r, l, ctx, lat)) continue;
        ValueSet vals;
        for (const Trace& tr : r) vals.insert(eval_expr_final(e, tr));
        out.insert(std::move(vals));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cardinality and agreement abstractions over value-set sets.

inline ExtNat crdval(const ValueSet& v) { return ExtNat::fin(v.size()); }

inline ExtNat alpha_crdv(const ValueSetSet& vs) {
    ExtNat acc = ExtNat::fin(0);
    for (const ValueSet& v : vs) acc = max(acc, crdval(v));
    return acc;
}

// Membership in the concretization of n: sets of at most n values.
inline bool gamma_crdv(ExtNat n, const ValueSet& v) { return crdval(v) <= n; }

inline bool agree(const ValueSet& v) { return v.size() <= 1; }

inline bool alpha_agree(const ValueSetSet& vs) {
    for (const ValueSet& v : vs)
        if (!agree(v)) return false;
    return true;
}

// Membership in the concretization of an agreement claim; no claim admits
// every value set.
inline bool gamma_agree(bool claim, const ValueSet& v) { return claim ? agree(v) : true; }

// Order on agreement claims: a claim is more precise than no claim.
inline bool agree_leq(bool a, bool b) { return a || !b; }

// ---------------------------------------------------------------------------
// Trace-set abstractions into the two domains, the oracle side of every
// soundness test.

namespace detail {

// Per level, per class, per variable: the set of final values. Shared by
// crdtr and deptr.
inline std::vector<std::map<std::vector<Value>, std::vector<ValueSet>>> class_images(
    const TraceSet& t, const AnalysisShape& shape, const TypingContext& ctx) {
    std::vector<std::map<std::vector<Value>, std::vector<ValueSet>>> per_level(
        static_cast<std::size_t>(shape.levels()));
    for (int l = 0; l < shape.levels(); ++l) {
        std::vector<std::size_t> low = low_indices(l, ctx, *shape.lattice);
        auto& classes = per_level[static_cast<std::size_t>(l)];
        for (const Trace& tr : t) {
            auto& images = classes[project_initial(tr, low)];
            if (images.empty()) images.resize(shape.var_count());
            for (std::size_t x = 0; x < shape.var_count(); ++x) images[x].insert(tr.final.vals[x]);
        }
    }
    return per_level;
}

}  // namespace detail

inline CardSet crdtr(const TraceSet& t, ShapePtr shape, const TypingContext& ctx) {
    CardSet c = CardSet::uniform(std::move(shape), ExtNat::fin(0));
    auto per_level = detail::class_images(t, *c.shape, ctx);
    for (int l = 0; l < c.shape->levels(); ++l)
        for (const auto& [key, images] : per_level[static_cast<std::size_t>(l)])
            for (std::size_t x = 0; x < c.shape->var_count(); ++x)
                c.set(l, x, max(c.get(l, x), ExtNat::fin(images[x].size())));
    return c;
}

inline DepSet deptr(const TraceSet& t, ShapePtr shape, const TypingContext& ctx) {
    DepSet d = DepSet::all(std::move(shape));
    auto per_level = detail::class_images(t, *d.shape, ctx);
    for (int l = 0; l < d.shape->levels(); ++l)
        for (const auto& [key, images] : per_level[static_cast<std::size_t>(l)])
            for (std::size_t x = 0; x < d.shape->var_count(); ++x)
                if (images[x].size() > 1) d.erase(l, x);
    return d;
}

}  // namespace hyperflow
