// Analysis configuration: extraction of config lines embedded in program
// sources ("//! lattice: ...", "//! context: ..."), merging with an external
// config (embedded wins, with a warning), and resolution to a lattice,
// typing context and analysis shape.
#pragma once

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hyperflow/dep.hpp"
#include "hyperflow/lang.hpp"
#include "hyperflow/lattice.hpp"

namespace hyperflow {

// Collects the bodies of all "//!" comment lines, in order. The parser treats
// them as ordinary comments, so a program file carries its own config.
inline std::string extract_embedded_config(const std::string& source) {
    std::istringstream is(source);
    std::string line, out;
    while (std::getline(is, line)) {
        std::string t = detail::trim(line);
        if (t.rfind("//!", 0) == 0) out += detail::trim(t.substr(3)) + "\n";
    }
    return out;
}

// Field-wise merge: the embedded config wins on conflict and the conflict is
// reported as a warning.
inline LatticeConfig merge_configs(const LatticeConfig& embedded, const LatticeConfig& external,
                                   std::vector<std::string>& warnings) {
    LatticeConfig out;
    if (embedded.has_lattice_line) {
        out.has_lattice_line = true;
        out.universal = embedded.universal;
        out.covers = embedded.covers;
        if (external.has_lattice_line)
            warnings.push_back("embedded lattice declaration overrides the --config lattice");
    } else {
        out.has_lattice_line = external.has_lattice_line;
        out.universal = external.universal;
        out.covers = external.covers;
    }
    if (embedded.has_context_line) {
        out.has_context_line = true;
        out.context = embedded.context;
        if (external.has_context_line)
            warnings.push_back("embedded typing context overrides the --config context");
    } else {
        out.has_context_line = external.has_context_line;
        out.context = external.context;
    }
    return out;
}

struct AnalysisSetup {
    SecurityLatticePtr lattice;
    TypingContext gamma;
    ShapePtr shape;
};

// Resolves a merged config against a parsed program. "lattice: universal"
// derives the powerset-of-variables lattice and its canonical context; an
// explicit context alongside it is ignored with a warning.
inline AnalysisSetup resolve_setup(const Program& p, const LatticeConfig& cfg,
                                   std::vector<std::string>& warnings) {
    AnalysisSetup s;
    if (!cfg.has_lattice_line) throw lattice_error("no lattice declared (embedded or --config)");
    if (cfg.universal) {
        if (cfg.has_context_line && !cfg.context.empty())
            warnings.push_back("typing context ignored: the universal lattice fixes its own context");
        auto [lat, gamma] = universal_flow_lattice(p.vars);
        s.lattice = std::move(lat);
        s.gamma = std::move(gamma);
    } else {
        s.lattice = lattice_from_config(cfg);
        s.gamma = build_context(*s.lattice, cfg, p.vars);
    }
    s.shape = make_shape(s.lattice, p.vars);
    return s;
}

}  // namespace hyperflow
