// Seeded random generators for programs, lattices and typing contexts, plus
// the fuel-termination filter the randomized suites rely on. Everything is
// deterministic for a fixed seed.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hyperflow/concrete.hpp"
#include "hyperflow/dep.hpp"
#include "hyperflow/lang.hpp"
#include "hyperflow/lattice.hpp"

namespace hftest {

using Rng = std::mt19937_64;

inline int pick(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool chance(Rng& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

// --- expressions -----------------------------------------------------------

inline hyperflow::ExprPtr random_arith(Rng& rng, const std::vector<std::string>& vars, int depth) {
    using namespace hyperflow;
    if (depth <= 0 || chance(rng, 0.45)) {
        if (!vars.empty() && chance(rng, 0.6)) return make_var(vars[static_cast<std::size_t>(
            pick(rng, 0, static_cast<int>(vars.size()) - 1))]);
        return make_int(pick(rng, 0, 2));
    }
    static const ArithOp ops[] = {ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div,
                                  ArithOp::Mod};
    ArithOp op = ops[pick(rng, 0, 4)];
    return make_arith(op, random_arith(rng, vars, depth - 1), random_arith(rng, vars, depth - 1));
}

inline hyperflow::ExprPtr random_guard(Rng& rng, const std::vector<std::string>& vars, int depth) {
    using namespace hyperflow;
    static const CmpOp ops[] = {CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge};
    return make_compare(ops[pick(rng, 0, 5)], random_arith(rng, vars, depth),
                        random_arith(rng, vars, depth));
}

// An assignment right-hand side: usually arithmetic, sometimes a comparison.
inline hyperflow::ExprPtr random_rhs(Rng& rng, const std::vector<std::string>& vars, int depth) {
    if (chance(rng, 0.15)) return random_guard(rng, vars, depth > 0 ? depth - 1 : 0);
    return random_arith(rng, vars, depth);
}

// --- commands ---------------------------------------------------------------

// Sequences are generated left-nested (never as a right child of another
// sequence), the canonical shape the parser produces, so parse after
// pretty-print is the structural identity.
inline hyperflow::CommandPtr random_command(Rng& rng, const std::vector<std::string>& vars,
                                            int depth, bool allow_seq = true) {
    using namespace hyperflow;
    const std::string& target = vars[static_cast<std::size_t>(
        pick(rng, 0, static_cast<int>(vars.size()) - 1))];
    int kind = depth <= 0 ? pick(rng, 0, 2) : pick(rng, 0, 9);
    if (!allow_seq && (kind == 4 || kind == 5)) kind = pick(rng, 0, 1) ? 1 : 6;
    switch (kind) {
        case 0:
            return make_skip();
        case 1:
        case 2:
        case 3:
            return make_assign(target, random_rhs(rng, vars, 2));
        case 4:
        case 5:
            return make_seq(random_command(rng, vars, depth - 1, true),
                            random_command(rng, vars, depth - 1, false));
        case 6:
        case 7:
            return make_if(random_guard(rng, vars, 1), random_command(rng, vars, depth - 1),
                           random_command(rng, vars, depth - 1));
        default: {
            // Loops count down a fresh copy of a variable so that most samples
            // terminate; the filter below rejects the rest.
            if (chance(rng, 0.5)) {
                const std::string& counter = vars[static_cast<std::size_t>(
                    pick(rng, 0, static_cast<int>(vars.size()) - 1))];
                CommandPtr body = make_seq(random_command(rng, vars, depth - 1),
                                           make_assign(counter, make_arith(ArithOp::Sub,
                                                                           make_var(counter),
                                                                           make_int(1))));
                return make_while(make_compare(CmpOp::Gt, make_var(counter), make_int(0)),
                                  std::move(body));
            }
            return make_while(random_guard(rng, vars, 1), random_command(rng, vars, depth - 1));
        }
    }
}

// True iff every initial state over the value grid terminates within fuel.
inline bool terminates_everywhere(const hyperflow::Command& c, const std::vector<std::string>& vars,
                                  const std::vector<hyperflow::Value>& values, long long fuel) {
    using namespace hyperflow;
    for (const Trace& t : initial_traces(vars, values))
        if (!run_command(c, t, fuel).has_value()) return false;
    return true;
}

// A random program over `nvars` variables, retried until fuel-terminating
// over the given value grid; falls back to a loop-free body.
inline hyperflow::Program random_program(Rng& rng, int nvars, int depth,
                                         const std::vector<hyperflow::Value>& values,
                                         long long fuel = 200) {
    using namespace hyperflow;
    static const std::vector<std::string> pool = {"x", "y", "z", "u", "v", "w"};
    std::vector<std::string> vars(pool.begin(), pool.begin() + nvars);
    for (int attempt = 0; attempt < 64; ++attempt) {
        CommandPtr body = random_command(rng, vars, depth);
        if (terminates_everywhere(*body, vars, values, fuel)) return Program{vars, std::move(body)};
    }
    CommandPtr body = make_assign(vars[0], random_rhs(rng, vars, 2));
    return Program{vars, std::move(body)};
}

// --- lattices and contexts ---------------------------------------------------

// A random 2- to 4-point lattice: a chain or the diamond.
inline hyperflow::SecurityLatticePtr random_lattice(Rng& rng) {
    using P = std::pair<std::string, std::string>;
    switch (pick(rng, 0, 3)) {
        case 0:
            return std::make_shared<hyperflow::SecurityLattice>(
                std::vector<std::string>{"L", "H"}, std::vector<P>{{"L", "H"}});
        case 1:
            return std::make_shared<hyperflow::SecurityLattice>(
                std::vector<std::string>{"L", "M", "H"}, std::vector<P>{{"L", "M"}, {"M", "H"}});
        case 2:
            return std::make_shared<hyperflow::SecurityLattice>(
                std::vector<std::string>{"L", "A", "B", "H"},
                std::vector<P>{{"L", "A"}, {"L", "B"}, {"A", "H"}, {"B", "H"}});
        default:
            return std::make_shared<hyperflow::SecurityLattice>(
                std::vector<std::string>{"L", "M", "N", "H"},
                std::vector<P>{{"L", "M"}, {"M", "N"}, {"N", "H"}});
    }
}

inline hyperflow::TypingContext random_context(Rng& rng, const hyperflow::SecurityLattice& lat,
                                               std::size_t nvars) {
    hyperflow::TypingContext gamma;
    for (std::size_t i = 0; i < nvars; ++i) gamma.levels.push_back(pick(rng, 0, lat.size() - 1));
    return gamma;
}

struct RandomCase {
    hyperflow::Program program;
    hyperflow::SecurityLatticePtr lattice;
    hyperflow::TypingContext gamma;
    hyperflow::ShapePtr shape;
};

inline RandomCase random_case(Rng& rng, int nvars, int depth,
                              const std::vector<hyperflow::Value>& values) {
    RandomCase c{random_program(rng, nvars, depth, values), random_lattice(rng), {}, nullptr};
    c.gamma = random_context(rng, *c.lattice, c.program.vars.size());
    c.shape = hyperflow::make_shape(c.lattice, c.program.vars);
    return c;
}

}  // namespace hftest
