#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <limits>

#include "hyperflow/concrete.hpp"
#include "support/generators.hpp"

using namespace hyperflow;

namespace {

State st(std::shared_ptr<const std::vector<std::string>> vars, std::vector<Value> vals) {
    return make_state(std::move(vars), std::move(vals));
}

TraceSet run_from(const std::string& src, std::vector<Value> init, long long fuel = kDefaultFuel) {
    Program p = parse_program(src);
    auto vars = share_vars(p.vars);
    State s = st(vars, std::move(init));
    return collect(*p.body, TraceSet{Trace{s, s}}, fuel);
}

}  // namespace

TEST_CASE("division and modulo are Euclidean") {
    CHECK(euclid_div(7, 2) == 3);
    CHECK(euclid_mod(7, 2) == 1);
    CHECK(euclid_div(-7, 2) == -4);
    CHECK(euclid_mod(-7, 2) == 1);
    CHECK(euclid_div(7, -2) == -3);
    CHECK(euclid_mod(7, -2) == 1);
    CHECK(euclid_div(-7, -2) == 4);
    CHECK(euclid_mod(-7, -2) == 1);
    SECTION("degenerate divisors") {
        CHECK(euclid_div(5, 0) == 0);
        CHECK(euclid_mod(5, 0) == 0);
        CHECK(euclid_div(5, -1) == -5);
        CHECK(euclid_mod(5, -1) == 0);
        CHECK(euclid_div(std::numeric_limits<Value>::min(), -1) ==
              std::numeric_limits<Value>::min());  // wrap-negate
    }
    SECTION("division identity with a nonnegative remainder below |b|") {
        hftest::Rng rng(7);
        for (int i = 0; i < 2000; ++i) {
            Value a = hftest::pick(rng, -50, 50), b = hftest::pick(rng, -6, 6);
            if (b == 0 || b == -1) continue;
            Value q = euclid_div(a, b), r = euclid_mod(a, b);
            CHECK(wrap_add(wrap_mul(b, q), r) == a);
            CHECK(r >= 0);
            CHECK(r < (b < 0 ? -b : b));
        }
    }
}

TEST_CASE("arithmetic wraps around two's complement") {
    const Value maxv = std::numeric_limits<Value>::max();
    const Value minv = std::numeric_limits<Value>::min();
    CHECK(wrap_add(maxv, 1) == minv);
    CHECK(wrap_sub(minv, 1) == maxv);
    CHECK(wrap_mul(maxv, 2) == -2);
    auto vars = share_vars({"x"});
    State s = st(vars, {maxv});
    Trace t{s, s};
    Program p = parse_program("x := x + 1");
    CHECK(run_command(*p.body, t)->final.get("x") == minv);
}

TEST_CASE("expression evaluation and comparisons") {
    auto vars = share_vars({"x", "y"});
    State s = st(vars, {4, 3});
    Trace t{s, s};
    Program p = parse_program("z := x * y + 2");
    const Expr& e = *std::get<Assign>(p.body->node).rhs;
    CHECK(eval_expr_final(e, t) == 14);
    Program q = parse_program("z := x <= y");
    CHECK(eval_expr_final(*std::get<Assign>(q.body->node).rhs, t) == 0);
    Program r = parse_program("z := x != y");
    CHECK(eval_expr_final(*std::get<Assign>(r.body->node).rhs, t) == 1);
}

TEST_CASE("commands run to the expected final states") {
    // Variables are collected in order of first occurrence: y, then x.
    TraceSet out = run_from("y := 1; if (x > 0) then { y := x } else { y := 0 - x }", {0, -5});
    REQUIRE(out.size() == 1);
    CHECK(out.begin()->final.get("y") == 5);
    CHECK(out.begin()->initial.get("x") == -5);  // initial states are preserved

    out = run_from("while (x < 10) do { x := x + 3 }", {1});
    REQUIRE(out.size() == 1);
    CHECK(out.begin()->final.get("x") == 10);
}

TEST_CASE("the guard of an if decides the branch by evaluating to one") {
    TraceSet out = run_from("x := x == 2; if (x == 1) then { y := 1 } else { y := 2 }", {2, 0});
    REQUIRE(out.size() == 1);
    CHECK(out.begin()->final.get("y") == 1);
}

TEST_CASE("fuel exhaustion yields no trace") {
    Program p = parse_program("while (x == x) do { skip }");
    auto vars = share_vars(p.vars);
    State s = st(vars, {0});
    CHECK(!run_command(*p.body, Trace{s, s}, 50).has_value());
    CHECK(collect(*p.body, TraceSet{Trace{s, s}}, 50).empty());
}

TEST_CASE("fuel counts loop body executions globally") {
    Program p = parse_program("while (x > 0) do { x := x - 1 }");
    auto vars = share_vars(p.vars);
    State s = st(vars, {10});
    CHECK(run_command(*p.body, Trace{s, s}, 10).has_value());
    CHECK(!run_command(*p.body, Trace{s, s}, 9).has_value());
}

TEST_CASE("guard_filter keeps exactly the traces whose final state satisfies the guard") {
    Program p = parse_program("z := x < y");
    const Expr& g = *std::get<Assign>(p.body->node).rhs;
    auto vars = share_vars({"x", "y"});
    TraceSet t;
    for (Value a : {0, 1, 2})
        for (Value b : {0, 1, 2}) {
            State s = st(vars, {a, b});
            t.insert(Trace{s, s});
        }
    TraceSet kept = guard_filter(g, t);
    CHECK(kept.size() == 3);
    for (const Trace& tr : kept) CHECK(tr.final.get("x") < tr.final.get("y"));
}

TEST_CASE("initial trace sets are the diagonal over the value grid") {
    TraceSet t = initial_traces({"x", "y"}, {0, 1, 2});
    CHECK(t.size() == 9);
    for (const Trace& tr : t) CHECK(tr.initial == tr.final);
    TraceSet none = initial_traces({}, {0, 1});
    REQUIRE(none.size() == 1);  // the single empty state
    CHECK(none.begin()->initial.vals.empty());
}

TEST_CASE("value_range enumerates inclusive bounds") {
    CHECK(value_range(-2, 1) == std::vector<Value>{-2, -1, 0, 1});
    CHECK(value_range(3, 3) == std::vector<Value>{3});
}

TEST_CASE("direct-image and fixpoint collecting semantics agree") {
    hftest::Rng rng(20260814);
    const std::vector<Value> values{0, 1, 2};
    int checked = 0;
    while (checked < 150) {
        Program p = hftest::random_program(rng, 3, 4, values);
        TraceSet t0 = initial_traces(p.vars, values);
        TraceSet direct = collect(*p.body, t0);
        TraceSet fix = collect_fixpoint(*p.body, t0);
        REQUIRE(direct == fix);
        ++checked;
    }
}

TEST_CASE("execution is deterministic") {
    hftest::Rng rng(99);
    const std::vector<Value> values{0, 1, 2};
    for (int i = 0; i < 100; ++i) {
        Program p = hftest::random_program(rng, 2, 3, values);
        TraceSet t0 = initial_traces(p.vars, values);
        CHECK(collect(*p.body, t0) == collect(*p.body, t0));
        for (const Trace& tr : t0) {
            MaybeTrace a = run_command(*p.body, tr);
            MaybeTrace b = run_command(*p.body, tr);
            REQUIRE(a.has_value() == b.has_value());
            if (a) CHECK(a->final == b->final);
        }
    }
}
