// hyperflow: command-line driver. "analyze" runs the selected abstract
// analyses and prints annotated constraints, leakage and security-requirement
// verdicts; "oracle" compares both analyses against the exhaustive concrete
// collecting semantics over a finite value range.
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hyperflow/analysis.hpp"
#include "hyperflow/config.hpp"
#include "hyperflow/oracle.hpp"
#include "hyperflow/report.hpp"
#include "hyperflow/report_json.hpp"

namespace hf = hyperflow;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

hf::LatticeConfig merged_config(const std::string& source, const std::string& config_path,
                                std::vector<std::string>& warnings) {
    hf::LatticeConfig embedded = hf::parse_lattice_config(hf::extract_embedded_config(source));
    hf::LatticeConfig external;
    if (!config_path.empty()) external = hf::parse_lattice_config(read_file(config_path));
    return hf::merge_configs(embedded, external, warnings);
}

struct SrQuerySpec {
    std::string level;
    std::uint64_t k = 0;
    std::string var;
};

SrQuerySpec parse_sr_query(const std::string& text) {
    std::istringstream is(text);
    std::string head;
    SrQuerySpec q;
    if (!(is >> head >> q.level >> q.k >> q.var) || head != "SR" || (is >> head))
        throw std::runtime_error("malformed --check query '" + text + "' (expected \"SR <level> <k> <var>\")");
    if (q.k < 1) throw std::runtime_error("--check requires k >= 1 in '" + text + "'");
    return q;
}

std::pair<hf::Value, hf::Value> parse_value_range(const std::string& text) {
    std::size_t dots = text.find("..");
    if (dots == std::string::npos)
        throw std::runtime_error("malformed --values range '" + text + "' (expected \"lo..hi\")");
    std::size_t lo_end = 0, hi_end = 0;
    std::string lo_s = text.substr(0, dots), hi_s = text.substr(dots + 2);
    hf::Value lo = std::stoll(lo_s, &lo_end);
    hf::Value hi = std::stoll(hi_s, &hi_end);
    if (lo_end != lo_s.size() || hi_end != hi_s.size() || lo > hi)
        throw std::runtime_error("malformed --values range '" + text + "'");
    return {lo, hi};
}

struct AnalyzeArgs {
    std::string program_path;
    std::string config_path;
    bool dep = false, card = false, intervals = false, hs = false;
    bool improved_guards = false, product = false;
    std::vector<std::string> checks;
    std::string format = "text";
    bool strict = false;
};

int run_analyze(const AnalyzeArgs& a) {
    if (!a.dep && !a.card && !a.intervals && !a.hs)
        throw std::runtime_error("select at least one analysis (--dep, --card, --intervals, --hs)");
    if (a.product && !(a.intervals && (a.dep || a.card)))
        throw std::runtime_error("--product needs --intervals together with --dep or --card");
    if (!a.checks.empty() && !a.card) throw std::runtime_error("--check requires --card");

    std::string source = read_file(a.program_path);
    hf::Program program = hf::parse_program(source);
    hf::Report report;
    hf::LatticeConfig cfg = merged_config(source, a.config_path, report.warnings);
    hf::AnalysisSetup setup = hf::resolve_setup(program, cfg, report.warnings);

    std::vector<SrQuerySpec> queries;
    for (const std::string& text : a.checks) {
        SrQuerySpec q = parse_sr_query(text);
        setup.lattice->level(q.level);       // throws on unknown level
        setup.shape->var_index(q.var);       // throws on unknown variable
        queries.push_back(std::move(q));
    }

    if (a.dep || a.card || a.intervals) {
        hf::DomainState init;
        if (a.dep) init.dep = hf::initial_dep(setup.shape, setup.gamma);
        if (a.card) init.card = hf::initial_card(setup.shape, setup.gamma);
        if (a.intervals) init.itv = hf::IntervalEnv::top(setup.shape->vars);
        hf::AnalyzeOptions opt;
        opt.improved_guards = a.improved_guards;
        opt.product = a.product;
        report.analysis = hf::analyze_program(*program.body, std::move(init), opt);
    }
    if (a.card) {
        const hf::CardSet& final_card = *report.analysis.final_state.card;
        report.leakage = hf::build_leakage_table(final_card);
        for (const SrQuerySpec& q : queries) {
            hf::SrResult res;
            res.level = q.level;
            res.k = q.k;
            res.var = q.var;
            res.verdict = hf::check_sr(final_card, setup.lattice->level(q.level),
                                       hf::ExtNat::fin(q.k), q.var);
            report.sr.push_back(std::move(res));
        }
    }
    if (a.hs) {
        hf::TypeEnv delta = hf::hs_typecheck(*program.body, setup.lattice->bottom(),
                                             hf::make_type_env(setup.shape, setup.gamma));
        std::vector<std::string> names(program.vars);
        std::sort(names.begin(), names.end());
        for (const std::string& x : names)
            report.hs.emplace_back(x, setup.lattice->name(delta.of(x)));
    }

    if (a.format == "structured")
        std::cout << hf::render_structured(report);
    else
        std::cout << hf::render_text(program, report);

    bool unknown = std::any_of(report.sr.begin(), report.sr.end(), [](const hf::SrResult& r) {
        return r.verdict == hf::SrVerdict::Unknown;
    });
    return a.strict && unknown ? 2 : 0;
}

struct OracleArgs {
    std::string program_path;
    std::string config_path;
    std::string values = "0..1";
    long long fuel = hf::kDefaultFuel;
    bool improved_guards = false, product = false;
    std::uint64_t seed = 0;  // reserved for sampled suites; exhaustive mode ignores it
    std::string format = "text";
};

int run_oracle(const OracleArgs& a) {
    std::string source = read_file(a.program_path);
    hf::Program program = hf::parse_program(source);
    hf::Report report;
    hf::LatticeConfig cfg = merged_config(source, a.config_path, report.warnings);
    hf::AnalysisSetup setup = hf::resolve_setup(program, cfg, report.warnings);

    hf::OracleParams prm;
    std::tie(prm.lo, prm.hi) = parse_value_range(a.values);
    if (a.fuel <= 0) throw std::runtime_error("--fuel must be positive");
    prm.fuel = a.fuel;
    prm.improved_guards = a.improved_guards;
    prm.product = a.product;
    report.oracle = hf::run_soundness_oracle(program, setup, prm);

    if (a.format == "structured")
        std::cout << hf::render_structured(report);
    else
        std::cout << hf::render_text(program, report);

    bool all_pass = std::all_of(report.oracle.begin(), report.oracle.end(),
                                [](const hf::OracleCheck& c) { return c.pass; });
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyperflow: information-flow analysis for a small while-language"};
    app.require_subcommand(1);

    AnalyzeArgs an;
    CLI::App* analyze = app.add_subcommand("analyze", "run the abstract analyses on a program");
    analyze->add_option("program", an.program_path, "program file")->required()->check(CLI::ExistingFile);
    analyze->add_option("--config", an.config_path, "external lattice/context config file")
        ->check(CLI::ExistingFile);
    analyze->add_flag("--dep", an.dep, "dependence analysis");
    analyze->add_flag("--card", an.card, "cardinality analysis");
    analyze->add_flag("--intervals", an.intervals, "interval analysis of final states");
    analyze->add_flag("--hs", an.hs, "flow-sensitive type system");
    analyze->add_flag("--improved-guards", an.improved_guards, "equality guard refinement");
    analyze->add_flag("--product", an.product, "reduced product with intervals");
    analyze->add_option("--check", an.checks, "security requirement \"SR <level> <k> <var>\"");
    analyze->add_option("--format", an.format, "output format")
        ->check(CLI::IsMember({"text", "structured"}));
    analyze->add_flag("--strict", an.strict, "exit 2 if any SR verdict is UNKNOWN");

    OracleArgs orc;
    CLI::App* oracle = app.add_subcommand("oracle", "compare the analyses against exhaustive execution");
    oracle->add_option("program", orc.program_path, "program file")->required()->check(CLI::ExistingFile);
    oracle->add_option("--config", orc.config_path, "external lattice/context config file")
        ->check(CLI::ExistingFile);
    oracle->add_option("--values", orc.values, "initial value range \"lo..hi\" (default 0..1)");
    oracle->add_option("--fuel", orc.fuel, "loop-iteration budget for concrete execution");
    oracle->add_flag("--improved-guards", orc.improved_guards, "equality guard refinement");
    oracle->add_flag("--product", orc.product, "reduced product with intervals");
    oracle->add_option("--seed", orc.seed, "reserved for sampled oracle suites");
    oracle->add_option("--format", orc.format, "output format")
        ->check(CLI::IsMember({"text", "structured"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (analyze->parsed()) return run_analyze(an);
        return run_oracle(orc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
