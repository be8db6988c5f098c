// Report assembly and text rendering: per-point constraint facts, an
// annotated re-print of the program, the leakage table, security-requirement
// verdicts and oracle outcomes. Constraint lists are ordered by level name,
// then variable name, so output is deterministic for a fixed input.
#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hyperflow/analysis.hpp"
#include "hyperflow/card.hpp"
#include "hyperflow/dep.hpp"
#include "hyperflow/intervals.hpp"
#include "hyperflow/lang.hpp"

namespace hyperflow {

struct SrResult {
    std::string level;
    std::uint64_t k = 0;
    std::string var;
    SrVerdict verdict = SrVerdict::Unknown;
};

struct LeakageEntry {
    std::string level;
    std::string var;
    LeakageBits bits;
};

struct OracleCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Report {
    AnalysisResult analysis;
    std::vector<LeakageEntry> leakage;
    std::vector<SrResult> sr;
    std::vector<std::pair<std::string, std::string>> hs;  // variable -> inferred level
    std::vector<OracleCheck> oracle;
    std::vector<std::string> warnings;
};

inline std::string card_value_text(ExtNat n) {
    return n.is_inf() ? "∞" : std::to_string(n.finite_value());
}

inline std::string interval_text(const Interval& v) {
    if (v.empty) return "⊥";
    std::string lo = v.lo_unbounded ? "-∞" : std::to_string(v.lo);
    std::string hi = v.hi_unbounded ? "+∞" : std::to_string(v.hi);
    return "[" + lo + "," + hi + "]";
}

namespace detail {

// (level, var) index pairs ordered by level name, then variable name.
inline std::vector<std::pair<int, std::size_t>> constraint_order(const AnalysisShape& shape) {
    std::vector<std::pair<int, std::size_t>> order;
    order.reserve(static_cast<std::size_t>(shape.levels()) * shape.var_count());
    for (int l = 0; l < shape.levels(); ++l)
        for (std::size_t x = 0; x < shape.var_count(); ++x) order.emplace_back(l, x);
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        const std::string& la = shape.lattice->name(a.first);
        const std::string& lb = shape.lattice->name(b.first);
        if (la != lb) return la < lb;
        return (*shape.vars)[a.second] < (*shape.vars)[b.second];
    });
    return order;
}

inline std::vector<std::string> sorted_var_names(const IntervalEnv& env) {
    std::vector<std::string> names(env.vars->begin(), env.vars->end());
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace detail

// Every fact a state carries, in report order: dependences, cardinalities,
// then interval boxes.
inline std::vector<std::string> state_facts(const DomainState& s) {
    std::vector<std::string> facts;
    if (s.dep) {
        const AnalysisShape& shape = *s.dep->shape;
        for (const auto& [l, x] : detail::constraint_order(shape))
            if (s.dep->contains(l, x))
                facts.push_back(shape.lattice->name(l) + "▸" + (*shape.vars)[x]);
    }
    if (s.card) {
        const AnalysisShape& shape = *s.card->shape;
        for (const auto& [l, x] : detail::constraint_order(shape))
            facts.push_back(shape.lattice->name(l) + "▸" + (*shape.vars)[x] + ":" +
                            card_value_text(s.card->get(l, x)));
    }
    if (s.itv) {
        for (const std::string& x : detail::sorted_var_names(*s.itv))
            facts.push_back(x + ":" + interval_text(s.itv->get(x)));
    }
    return facts;
}

inline std::string fact_line(const DomainState& s) {
    std::vector<std::string> facts = state_facts(s);
    if (facts.empty()) return "(none)";
    std::string out;
    for (std::size_t i = 0; i < facts.size(); ++i) {
        if (i) out += ", ";
        out += facts[i];
    }
    return out;
}

namespace detail {

struct AnnotateCursor {
    const std::vector<ProgramPoint>* points;
    std::size_t next = 0;

    const DomainState* take() {
        if (!points || next >= points->size()) return nullptr;
        return &(*points)[next++].state;
    }
};

inline void annotate_command(std::ostream& os, const Command& c, int indent, AnnotateCursor& cur) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (std::holds_alternative<Skip>(c.node)) {
        os << pad << "skip;";
        if (const DomainState* s = cur.take()) os << "  // " << fact_line(*s);
        os << "\n";
    } else if (const auto* a = std::get_if<Assign>(&c.node)) {
        os << pad << a->target << " := ";
        print_expr(os, *a->rhs);
        os << ";";
        if (const DomainState* s = cur.take()) os << "  // " << fact_line(*s);
        os << "\n";
    } else if (const auto* q = std::get_if<Seq>(&c.node)) {
        annotate_command(os, *q->first, indent, cur);
        annotate_command(os, *q->second, indent, cur);
    } else if (const auto* i = std::get_if<If>(&c.node)) {
        os << pad << "if (";
        print_expr(os, *i->guard);
        os << ") then {\n";
        annotate_command(os, *i->then_branch, indent + 1, cur);
        os << pad << "} else {\n";
        annotate_command(os, *i->else_branch, indent + 1, cur);
        os << pad << "}\n";
        if (const DomainState* s = cur.take()) os << pad << "// " << fact_line(*s) << "\n";
    } else if (const auto* w = std::get_if<While>(&c.node)) {
        os << pad << "while (";
        print_expr(os, *w->guard);
        os << ") do {\n";
        annotate_command(os, *w->body, indent + 1, cur);
        os << pad << "}";
        if (const DomainState* s = cur.take()) os << "  // " << fact_line(*s);
        os << "\n";
    }
}

}  // namespace detail

// Re-emits the program with a constraint comment at every statement boundary:
// the initial state on a leading line, loop exits on the closing brace line,
// and the joined state after a conditional on its own line.
inline std::string annotate(const Program& p, const AnalysisResult& analysis) {
    std::ostringstream os;
    detail::AnnotateCursor cur{&analysis.points, 0};
    if (const DomainState* s = cur.take()) os << "// " << fact_line(*s) << "\n";
    detail::annotate_command(os, *p.body, 0, cur);
    return os.str();
}

inline std::string annotate(const Program& p, const Report& r) { return annotate(p, r.analysis); }

inline std::vector<LeakageEntry> build_leakage_table(const CardSet& c) {
    std::vector<LeakageEntry> out;
    const AnalysisShape& shape = *c.shape;
    for (const auto& [l, x] : detail::constraint_order(shape))
        out.push_back(LeakageEntry{shape.lattice->name(l), (*shape.vars)[x],
                                   leakage_bits(c, l, (*shape.vars)[x])});
    return out;
}

inline std::string render_text(const Program& p, const Report& r) {
    std::ostringstream os;
    if (!r.analysis.points.empty()) {
        os << "== annotated program ==\n" << annotate(p, r);
        os << "\n== final constraints ==\n" << fact_line(r.analysis.final_state) << "\n";
    }
    if (!r.hs.empty()) {
        os << "\n== type system ==\n";
        for (const auto& [var, level] : r.hs) os << var << ": " << level << "\n";
    }
    if (!r.leakage.empty()) {
        os << "\n== leakage ==\n";
        for (const LeakageEntry& e : r.leakage)
            os << "leakage " << e.var << "@" << e.level << " = " << to_string(e.bits) << " bits\n";
    }
    if (!r.sr.empty()) {
        os << "\n== security requirements ==\n";
        for (const SrResult& q : r.sr)
            os << "SR " << q.level << " " << q.k << " " << q.var << ": " << to_string(q.verdict)
               << "\n";
    }
    if (!r.oracle.empty()) {
        os << "\n== oracle checks ==\n";
        for (const OracleCheck& c : r.oracle) {
            os << (c.pass ? "PASS" : "FAIL") << " " << c.name;
            if (!c.detail.empty()) os << ": " << c.detail;
            os << "\n";
        }
    }
    if (!r.warnings.empty()) {
        os << "\n== warnings ==\n";
        for (const std::string& w : r.warnings) os << "warning: " << w << "\n";
    }
    return os.str();
}

}  // namespace hyperflow
