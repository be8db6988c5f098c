// Structured (JSON) report rendering: one record per program point with
// sorted constraint lists. Cardinalities print as integers or "inf";
// unbounded interval ends print as null.
#pragma once

#include <string>

#include "json.hpp"

#include "hyperflow/report.hpp"

namespace hyperflow {

inline nlohmann::json json_of_extnat(ExtNat n) {
    if (n.is_inf()) return "inf";
    return n.finite_value();
}

inline nlohmann::json json_of_interval(const Interval& v) {
    nlohmann::json j;
    j["empty"] = v.empty;
    if (!v.empty) {
        j["lo"] = v.lo_unbounded ? nlohmann::json() : nlohmann::json(v.lo);
        j["hi"] = v.hi_unbounded ? nlohmann::json() : nlohmann::json(v.hi);
    }
    return j;
}

inline nlohmann::json json_of_state(const DomainState& s) {
    nlohmann::json j;
    if (s.dep) {
        const AnalysisShape& shape = *s.dep->shape;
        nlohmann::json facts = nlohmann::json::array();
        for (const auto& [l, x] : detail::constraint_order(shape))
            if (s.dep->contains(l, x))
                facts.push_back({{"level", shape.lattice->name(l)}, {"var", (*shape.vars)[x]}});
        j["dep"] = std::move(facts);
    }
    if (s.card) {
        const AnalysisShape& shape = *s.card->shape;
        nlohmann::json facts = nlohmann::json::array();
        for (const auto& [l, x] : detail::constraint_order(shape))
            facts.push_back({{"level", shape.lattice->name(l)},
                             {"var", (*shape.vars)[x]},
                             {"value", json_of_extnat(s.card->get(l, x))}});
        j["card"] = std::move(facts);
    }
    if (s.itv) {
        nlohmann::json boxes = nlohmann::json::array();
        for (const std::string& x : detail::sorted_var_names(*s.itv)) {
            nlohmann::json b = json_of_interval(s.itv->get(x));
            b["var"] = x;
            boxes.push_back(std::move(b));
        }
        j["intervals"] = std::move(boxes);
    }
    return j;
}

inline nlohmann::json json_of_report(const Report& r) {
    nlohmann::json j;
    nlohmann::json points = nlohmann::json::array();
    for (const ProgramPoint& p : r.analysis.points) {
        nlohmann::json rec = json_of_state(p.state);
        rec["kind"] = p.kind == PointKind::Initial ? "initial" : "after";
        rec["line"] = p.line;
        rec["col"] = p.col;
        points.push_back(std::move(rec));
    }
    j["points"] = std::move(points);

    nlohmann::json leaks = nlohmann::json::array();
    for (const LeakageEntry& e : r.leakage) {
        nlohmann::json rec{{"level", e.level}, {"var", e.var}};
        if (e.bits.unreachable)
            rec["bits"] = "unreachable";
        else if (e.bits.infinite)
            rec["bits"] = "inf";
        else
            rec["bits"] = e.bits.bits;
        leaks.push_back(std::move(rec));
    }
    j["leakage"] = std::move(leaks);

    nlohmann::json hs = nlohmann::json::array();
    for (const auto& [var, level] : r.hs) hs.push_back({{"var", var}, {"level", level}});
    j["hs"] = std::move(hs);

    nlohmann::json srs = nlohmann::json::array();
    for (const SrResult& q : r.sr)
        srs.push_back({{"level", q.level},
                       {"k", q.k},
                       {"var", q.var},
                       {"verdict", to_string(q.verdict)}});
    j["sr"] = std::move(srs);

    nlohmann::json checks = nlohmann::json::array();
    for (const OracleCheck& c : r.oracle)
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    j["oracle"] = std::move(checks);

    j["warnings"] = r.warnings;
    return j;
}

inline std::string render_structured(const Report& r) { return json_of_report(r).dump(2) + "\n"; }

}  // namespace hyperflow
