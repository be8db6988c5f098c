// Finite security lattices, typing contexts, and their text configuration.
#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperflow {

class lattice_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A finite lattice over named levels. The order is the reflexive-transitive
// closure of the declared covers; join/meet are tabulated and validated as
// least upper / greatest lower bounds at construction time.
class SecurityLattice {
public:
    // covers: pairs (a, b) meaning a < b.
    SecurityLattice(std::vector<std::string> levels, const std::vector<std::pair<std::string, std::string>>& covers)
        : names_(std::move(levels)) {
        const std::size_t n = names_.size();
        if (n == 0) throw lattice_error("lattice must have at least one level");
        for (std::size_t i = 0; i < n; ++i) {
            if (!index_.emplace(names_[i], static_cast<int>(i)).second)
                throw lattice_error("duplicate level '" + names_[i] + "'");
        }
        leq_.assign(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) leq_[i][i] = true;
        for (const auto& [a, b] : covers) leq_[static_cast<std::size_t>(level(a))][static_cast<std::size_t>(level(b))] = true;
        // Transitive closure.
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (leq_[i][k])
                    for (std::size_t j = 0; j < n; ++j)
                        if (leq_[k][j]) leq_[i][j] = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j && leq_[i][j] && leq_[j][i])
                    throw lattice_error("cycle in lattice order between '" + names_[i] + "' and '" + names_[j] + "'");
        join_.assign(n, std::vector<int>(n, -1));
        meet_.assign(n, std::vector<int>(n, -1));
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                join_[a][b] = bound(static_cast<int>(a), static_cast<int>(b), /*upper=*/true);
                meet_[a][b] = bound(static_cast<int>(a), static_cast<int>(b), /*upper=*/false);
            }
        }
        bottom_ = 0;
        top_ = 0;
        for (std::size_t i = 1; i < n; ++i) {
            bottom_ = meet_[static_cast<std::size_t>(bottom_)][i];
            top_ = join_[static_cast<std::size_t>(top_)][i];
        }
        // Upsets, for well-formedness closures.
        up_.assign(n, {});
        for (std::size_t l = 0; l < n; ++l)
            for (std::size_t u = 0; u < n; ++u)
                if (leq_[l][u]) up_[l].push_back(static_cast<int>(u));
    }

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int l) const { return names_[static_cast<std::size_t>(l)]; }
    const std::vector<std::string>& level_names() const { return names_; }

    int level(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw lattice_error("unknown level '" + name + "'");
        return it->second;
    }
    bool has_level(const std::string& name) const { return index_.count(name) != 0; }

    bool leq(int a, int b) const { return leq_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
    int join(int a, int b) const { return join_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
    int meet(int a, int b) const { return meet_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
    int bottom() const { return bottom_; }
    int top() const { return top_; }
    const std::vector<int>& upset(int l) const { return up_[static_cast<std::size_t>(l)]; }

private:
    // Least upper (or greatest lower) bound of {a, b}; throws if none or not unique.
    int bound(int a, int b, bool upper) const {
        const std::size_t n = names_.size();
        std::vector<int> cands;
        for (std::size_t u = 0; u < n; ++u) {
            bool ok = upper ? (leq(a, static_cast<int>(u)) && leq(b, static_cast<int>(u)))
                            : (leq(static_cast<int>(u), a) && leq(static_cast<int>(u), b));
            if (ok) cands.push_back(static_cast<int>(u));
        }
        for (int c : cands) {
            bool least = true;
            for (int d : cands) {
                bool rel = upper ? leq(c, d) : leq(d, c);
                if (!rel) {
                    least = false;
                    break;
                }
            }
            if (least) return c;
        }
        throw lattice_error(std::string("not a lattice: levels '") + names_[static_cast<std::size_t>(a)] + "' and '" +
                            names_[static_cast<std::size_t>(b)] + "' have no " + (upper ? "least upper" : "greatest lower") +
                            " bound");
    }

    std::vector<std::string> names_;
    std::map<std::string, int> index_;
    std::vector<std::vector<bool>> leq_;
    std::vector<std::vector<int>> join_, meet_;
    std::vector<std::vector<int>> up_;
    int bottom_ = 0, top_ = 0;
};

using SecurityLatticePtr = std::shared_ptr<const SecurityLattice>;

// Typing context / type environment: a level per program variable, in Var_P order.
struct TypingContext {
    std::vector<int> levels;
};

// ---------------------------------------------------------------------------
// The universal flow lattice: the powerset of Var_P ordered by inclusion,
// with the initial typing context x |-> {x}.

inline std::string subset_level_name(const std::vector<std::string>& vars, unsigned mask) {
    std::string out = "{";
    bool first = true;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (mask & (1u << i)) {
            if (!first) out += ",";
            out += vars[i];
            first = false;
        }
    }
    out += "}";
    return out;
}

inline std::pair<SecurityLatticePtr, TypingContext> universal_flow_lattice(const std::vector<std::string>& vars) {
    if (vars.size() > 10) throw lattice_error("universal flow lattice capped at 10 variables");
    const unsigned count = 1u << vars.size();
    std::vector<std::string> names;
    names.reserve(count);
    for (unsigned m = 0; m < count; ++m) names.push_back(subset_level_name(vars, m));
    std::vector<std::pair<std::string, std::string>> covers;
    for (unsigned m = 0; m < count; ++m)
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (!(m & (1u << i))) covers.emplace_back(names[m], names[m | (1u << i)]);
    auto lat = std::make_shared<SecurityLattice>(std::move(names), covers);
    TypingContext gamma;
    for (std::size_t i = 0; i < vars.size(); ++i)
        gamma.levels.push_back(lat->level(subset_level_name(vars, 1u << i)));
    return {std::move(lat), std::move(gamma)};
}

// ---------------------------------------------------------------------------
// Config text:
//   lattice: L < H; L < M
//   context: x:H, y:L
//   lattice: universal
// Chains "A < B < C" are allowed; ';' separates chains on one line.

struct LatticeConfig {
    bool universal = false;
    std::vector<std::pair<std::string, std::string>> covers;    // a < b
    std::vector<std::pair<std::string, std::string>> context;   // var -> level name
    bool has_lattice_line = false;
    bool has_context_line = false;
};

namespace detail {
inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}
}  // namespace detail

inline LatticeConfig parse_lattice_config(const std::string& text) {
    LatticeConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.rfind("lattice:", 0) == 0) {
            cfg.has_lattice_line = true;
            std::string body = detail::trim(line.substr(8));
            if (body == "universal") {
                cfg.universal = true;
                continue;
            }
            for (const std::string& chain : detail::split(body, ';')) {
                std::vector<std::string> parts = detail::split(chain, '<');
                if (parts.size() < 2)
                    throw lattice_error("malformed lattice declaration '" + detail::trim(chain) + "'");
                for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
                    std::string a = detail::trim(parts[i]);
                    std::string b = detail::trim(parts[i + 1]);
                    if (a.empty() || b.empty())
                        throw lattice_error("malformed lattice declaration '" + detail::trim(chain) + "'");
                    cfg.covers.emplace_back(a, b);
                }
            }
        } else if (line.rfind("context:", 0) == 0) {
            cfg.has_context_line = true;
            std::string body = detail::trim(line.substr(8));
            if (body.empty()) continue;
            for (const std::string& entry : detail::split(body, ',')) {
                std::vector<std::string> kv = detail::split(entry, ':');
                if (kv.size() != 2)
                    throw lattice_error("malformed context entry '" + detail::trim(entry) + "'");
                cfg.context.emplace_back(detail::trim(kv[0]), detail::trim(kv[1]));
            }
        } else {
            throw lattice_error("unrecognized config line '" + line + "'");
        }
    }
    return cfg;
}

// Builds the lattice declared by an explicit (non-universal) config.
inline SecurityLatticePtr lattice_from_config(const LatticeConfig& cfg) {
    if (cfg.universal) throw lattice_error("an explicit lattice is required here, not 'universal'");
    std::vector<std::string> levels;
    std::set<std::string> seen;
    auto add = [&](const std::string& name) {
        if (seen.insert(name).second) levels.push_back(name);
    };
    for (const auto& [a, b] : cfg.covers) {
        add(a);
        add(b);
    }
    if (levels.empty()) throw lattice_error("config declares no lattice levels");
    auto lat = std::make_shared<SecurityLattice>(std::move(levels), cfg.covers);
    // Context levels must exist.
    for (const auto& [var, lvl] : cfg.context) {
        (void)var;
        lat->level(lvl);
    }
    return lat;
}

inline SecurityLatticePtr load_lattice(const std::string& text) {
    return lattice_from_config(parse_lattice_config(text));
}

// Resolves a parsed context against a lattice and the program variables.
inline TypingContext build_context(const SecurityLattice& lat, const LatticeConfig& cfg,
                                   const std::vector<std::string>& vars) {
    std::map<std::string, int> by_var;
    for (const auto& [var, lvl] : cfg.context) {
        if (!by_var.emplace(var, lat.level(lvl)).second)
            throw lattice_error("duplicate context entry for variable '" + var + "'");
    }
    TypingContext gamma;
    for (const std::string& v : vars) {
        auto it = by_var.find(v);
        if (it == by_var.end()) throw lattice_error("context missing variable '" + v + "'");
        gamma.levels.push_back(it->second);
    }
    return gamma;
}

// A single-level lattice, handy as a default and in tests.
inline SecurityLatticePtr trivial_lattice() {
    return std::make_shared<SecurityLattice>(std::vector<std::string>{"D"},
                                             std::vector<std::pair<std::string, std::string>>{});
}

inline SecurityLatticePtr two_point_lattice() {
    return std::make_shared<SecurityLattice>(std::vector<std::string>{"L", "H"},
                                             std::vector<std::pair<std::string, std::string>>{{"L", "H"}});
}

}  // namespace hyperflow
