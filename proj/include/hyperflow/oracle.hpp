// Exhaustive soundness oracle: runs the concrete collecting semantics over
// every initial state in a finite value range, abstracts the resulting trace
// set with crdtr/deptr, and checks that the analyzer's answers only ever
// claim less. Inputs really are bounded here, so the analyzer starts from the
// exact initial abstractions of that bounded trace set.
#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "hyperflow/analysis.hpp"
#include "hyperflow/concrete.hpp"
#include "hyperflow/config.hpp"
#include "hyperflow/hyper.hpp"
#include "hyperflow/report.hpp"

namespace hyperflow {

struct OracleParams {
    Value lo = 0;
    Value hi = 1;
    long long fuel = kDefaultFuel;
    bool improved_guards = false;
    bool product = false;
};

inline IntervalEnv bounded_env(std::shared_ptr<const std::vector<std::string>> vars, Value lo, Value hi) {
    IntervalEnv env = IntervalEnv::top(std::move(vars));
    for (const std::string& x : *env.vars) env.set(x, Interval::range(lo, hi));
    return env;
}

// The analyzer's input abstractions for traces starting in [lo,hi]^Var:
// cardinality rows are 1 for low variables and |range| otherwise, and every
// interval box is [lo,hi].
inline DomainState bounded_initial_state(const AnalysisSetup& setup, const OracleParams& prm) {
    DomainState init;
    init.dep = initial_dep(setup.shape, setup.gamma);
    std::uint64_t span = static_cast<std::uint64_t>(prm.hi - prm.lo) + 1;
    init.card = initial_card(setup.shape, setup.gamma, ExtNat::fin(span));
    if (prm.product) init.itv = bounded_env(setup.shape->vars, prm.lo, prm.hi);
    return init;
}

inline std::vector<OracleCheck> run_soundness_oracle(const Program& p, const AnalysisSetup& setup,
                                                     const OracleParams& prm) {
    if (prm.lo > prm.hi) throw std::invalid_argument("oracle value range is empty");
    TraceSet t0 = initial_traces(p.vars, value_range(prm.lo, prm.hi));
    TraceSet t = collect(*p.body, t0, prm.fuel);
    CardSet card_oracle = crdtr(t, setup.shape, setup.gamma);
    DepSet dep_oracle = deptr(t, setup.shape, setup.gamma);

    AnalyzeOptions opt;
    opt.improved_guards = prm.improved_guards;
    opt.product = prm.product;
    DomainState final_state = analyze_program(*p.body, bounded_initial_state(setup, prm), opt).final_state;
    const CardSet& card_abs = *final_state.card;
    const DepSet& dep_abs = *final_state.dep;

    std::vector<OracleCheck> checks;
    {
        OracleCheck c;
        c.name = "cardinality soundness";
        c.pass = true;
        for (int l = 0; l < setup.shape->levels() && c.pass; ++l)
            for (std::size_t x = 0; x < setup.shape->var_count() && c.pass; ++x)
                if (!(card_oracle.get(l, x) <= card_abs.get(l, x))) {
                    c.pass = false;
                    std::ostringstream msg;
                    msg << "row " << setup.lattice->name(l) << "▸" << (*setup.shape->vars)[x]
                        << ": concrete " << to_string(card_oracle.get(l, x)) << " exceeds inferred "
                        << to_string(card_abs.get(l, x));
                    c.detail = msg.str();
                }
        if (c.pass) {
            std::ostringstream msg;
            msg << "every concrete row is within the inferred bound over " << t.size() << " traces";
            c.detail = msg.str();
        }
        checks.push_back(std::move(c));
    }
    {
        OracleCheck c;
        c.name = "dependence soundness";
        c.pass = true;
        for (int l = 0; l < setup.shape->levels() && c.pass; ++l)
            for (std::size_t x = 0; x < setup.shape->var_count() && c.pass; ++x)
                if (dep_abs.contains(l, x) && !dep_oracle.contains(l, x)) {
                    c.pass = false;
                    c.detail = "claim " + setup.lattice->name(l) + "▸" + (*setup.shape->vars)[x] +
                               " does not hold in the concrete trace set";
                }
        if (c.pass)
            c.detail = "every inferred agreement holds over " + std::to_string(t.size()) + " traces";
        checks.push_back(std::move(c));
    }
    return checks;
}

}  // namespace hyperflow
