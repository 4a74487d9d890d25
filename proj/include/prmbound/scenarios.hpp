#pragma once

// Standard includes
#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prmbound/polynomial.hpp"
#include "prmbound/tensor.hpp"

namespace prmbound {

struct BellBounds {
    std::optional<double> classical;
    std::optional<double> quantum;
    // Set when only a strict upper bound on the quantum value is known.
    std::optional<double> quantumStrictlyBelow;
    double noSignalling = 0;
};

// Linear functional on a two-setting table, stored in the n = 2 layout; the
// (2,2) slot carries the constant term.
struct BellFunctional {
    std::string name;
    RationalMatrix coeffs = RationalMatrix(3, 3);
    BellBounds bounds;
    std::optional<Rational> alpha, gamma;

    int settings() const { return 2; }

    RationalMatrix embed(int n) const {
        if (n < settings()) throw std::invalid_argument("BellFunctional: needs at least 2 settings");
        auto slot = [n](std::size_t i) { return i == 2 ? static_cast<std::size_t>(n) : i; };
        RationalMatrix m(n + 1, n + 1);
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) m(slot(r), slot(c)) = coeffs(r, c);
        return m;
    }

    template <class T>
    auto evaluate(const BipartiteState<T>& s) const {
        return frobenius(embed(s.n).template map<T>([](const Rational& r) { return T(r); }), s.table);
    }
};

inline BellFunctional chsh() {
    BellFunctional f;
    f.name = "chsh";
    auto& w = f.coeffs;
    w(0, 0) = 1;
    w(1, 0) = 1;
    w(0, 1) = 1;
    w(1, 1) = -1;
    w(0, 2) = -1;
    w(2, 0) = -1;
    f.bounds.classical = 0.0;
    f.bounds.quantum = (std::sqrt(2.0) - 1.0) / 2.0;
    f.bounds.noSignalling = 0.5;
    return f;
}

// gamma<A0> + alpha<A0B0> + alpha<A1B0> + <A0B1> - <A1B1>, outcome 0 counted as +1.
inline BellFunctional amp(const Rational& alpha, const Rational& gamma) {
    if (alpha < 1) throw std::invalid_argument("amp: alpha must be >= 1");
    if (gamma < 0 || gamma >= 2) throw std::invalid_argument("amp: gamma must lie in [0, 2)");
    BellFunctional f;
    f.name = "amp";
    f.alpha = alpha;
    f.gamma = gamma;
    auto& w = f.coeffs;
    w(0, 0) = 4 * alpha;
    w(1, 0) = 4 * alpha;
    w(0, 1) = 4;
    w(1, 1) = -4;
    w(0, 2) = 2 * gamma - 2 * alpha - 2;
    w(1, 2) = 2 - 2 * alpha;
    w(2, 0) = -4 * alpha;
    w(2, 1) = 0;
    w(2, 2) = 2 * alpha - gamma;
    double a = to_double(alpha), g = to_double(gamma);
    f.bounds.classical = 2 * a + g;
    f.bounds.quantum = 2 * std::sqrt((1 + a * a) * (1 + g * g / 4));
    f.bounds.noSignalling = 2 + 2 * a;
    return f;
}

inline BellFunctional aq() {
    BellFunctional f;
    f.name = "aq";
    auto& w = f.coeffs;
    w(0, 2) = Rational(30, 31);
    w(1, 2) = Rational(-167, 9);
    w(2, 0) = Rational(30, 31);
    w(2, 1) = Rational(-167, 9);
    w(0, 0) = Rational(-74, 11);
    w(1, 0) = Rational(174, 11);
    w(0, 1) = Rational(174, 11);
    w(1, 1) = Rational(244, 23);
    f.bounds.classical = 30.0 / 31.0;
    f.bounds.quantumStrictlyBelow = 1.0;
    f.bounds.noSignalling = 3.5347;
    return f;
}

struct AmpRow {
    int index;
    std::string alpha, gamma;  // decimal literals as tabulated
    Rational alphaValue() const { return parse_rational(alpha); }
    Rational gammaValue() const { return parse_rational(gamma); }
};

inline std::vector<AmpRow> amp_table() {
    static const char* gammas[6][6] = {
        {"0", "0.4", "0.8", "1.2", "1.6", "2"},
        {"0", "0.133333333", "0.266666667", "0.4", "0.533333333", "0.666666667"},
        {"0", "0.08", "0.16", "0.24", "0.32", "0.4"},
        {"0", "0.057142857", "0.114285714", "0.171428571", "0.228571429", "0.285714286"},
        {"0", "0.04444444", "0.088888889", "0.133333333", "0.177777778", "0.222222222"},
        {"0", "0.036363636", "0.072727273", "0.109090909", "0.145454545", "0.181818182"},
    };
    static const char* alphas[6] = {"1", "3", "5", "7", "9", "11"};
    std::vector<AmpRow> rows;
    for (int a = 0; a < 6; ++a)
        for (int g = 0; g < 6; ++g) rows.push_back({a * 6 + g, alphas[a], gammas[a][g]});
    return rows;
}

struct Signature {
    std::string name;                       // "1".."8"
    std::string tag;                        // "quantum", "mirror-quantum" or empty
    std::vector<std::array<int, 3>> signs;  // per effect, signs for (XX, YY, ZZ)
};

inline std::vector<Signature> signatures() {
    using T = std::array<int, 3>;
    const int m = -1, p = 1;
    std::vector<Signature> s = {
        {"1", "", {T{m, m, m}, T{m, m, p}, T{p, p, m}, T{p, p, p}}},
        {"2", "", {T{m, m, m}, T{m, p, m}, T{p, m, p}, T{p, p, p}}},
        {"3", "", {T{m, m, m}, T{m, p, p}, T{p, m, m}, T{p, p, p}}},
        {"4", "quantum", {T{m, m, m}, T{m, p, p}, T{p, m, p}, T{p, p, m}}},
        {"5", "mirror-quantum", {T{m, m, p}, T{m, p, m}, T{p, m, m}, T{p, p, p}}},
        {"6", "", {T{m, m, p}, T{m, p, m}, T{p, m, p}, T{p, p, m}}},
        {"7", "", {T{m, m, p}, T{m, p, p}, T{p, m, m}, T{p, p, m}}},
        {"8", "", {T{m, p, m}, T{m, p, p}, T{p, m, m}, T{p, m, p}}},
    };
    return s;
}

// Accepts "quantum", "mirror", "mirror-quantum" or a 1-based index.
inline PrmRestriction signature_restriction(const std::string& key) {
    for (auto& s : signatures()) {
        bool hit = key == s.name || (!s.tag.empty() && key == s.tag) ||
                   (s.tag == "mirror-quantum" && (key == "mirror" || key == "mirror_quantum"));
        if (hit) return PrmRestriction::signature(s.tag.empty() ? s.name : s.tag, s.signs);
    }
    throw std::invalid_argument("unknown signature '" + key + "'");
}

inline PrmRestriction parse_restriction(const std::string& text) {
    if (text == "none" || text.empty()) return PrmRestriction::none();
    if (text == "span") return PrmRestriction::span();
    const std::string pre = "signature:";
    if (text.rfind(pre, 0) == 0) return signature_restriction(text.substr(pre.size()));
    throw std::invalid_argument("unknown restriction '" + text + "'");
}

struct NamedPoly {
    std::string label;
    std::string group;
    Poly poly;
};

struct ConstraintSystem {
    VariableRegistry vars;
    std::vector<NamedPoly> inequalities;  // each >= 0
    std::vector<NamedPoly> equalities;    // each == 0
    Poly objective;

    int n = 0;
    std::vector<int> iota;
    std::string inequality;
    PrmRestriction restriction;
    Matrix<Poly> stateTable;
    SymbolicPrm prm;

    std::vector<VarId> state_vars() const { return vars.group(VarGroup::State); }
    std::vector<VarId> prm_vars() const { return vars.group(VarGroup::Prm); }

    std::size_t count(const std::string& group) const {
        std::size_t k = 0;
        for (auto& g : inequalities)
            if (g.group == group) ++k;
        return k;
    }

    // Values of all variables for a concrete state table and free PRM parameters.
    std::vector<double> point(const Matrix<double>& table, const std::vector<double>& prmValues) const {
        std::vector<double> v(vars.size(), 0.0);
        for (int y = 0; y <= n; ++y)
            for (int x = 0; x <= n; ++x) {
                const Poly& p = stateTable(x, y);
                if (p.size() == 1 && p.terms().begin()->first.degree() == 1)
                    v[p.terms().begin()->first.factors()[0].first] = table(x, y);
            }
        auto pv = prm_vars();
        if (prmValues.size() != pv.size()) throw std::invalid_argument("ConstraintSystem::point: wrong number of PRM values");
        for (std::size_t k = 0; k < pv.size(); ++k) v[pv[k]] = prmValues[k];
        return v;
    }

    nlohmann::json to_json() const {
        auto name = vars.namer();
        auto poly_json = [&](const Poly& p) {
            nlohmann::json terms = nlohmann::json::array();
            for (auto& [m, c] : p.terms()) {
                nlohmann::json mono = nlohmann::json::array();
                for (auto& [v, e] : m.factors()) mono.push_back({{"var", name(v)}, {"exp", e}});
                terms.push_back({{"coeff", to_string(c)}, {"monomial", mono}});
            }
            return terms;
        };
        nlohmann::json j;
        j["n"] = n;
        j["iota"] = iota;
        j["inequality"] = inequality;
        j["restriction"] = restriction.str();
        nlohmann::json vs = nlohmann::json::array();
        for (VarId v = 0; v < vars.size(); ++v)
            vs.push_back({{"id", v}, {"name", vars.name(v)}, {"group", vars.at(v).group == VarGroup::State ? "state" : "prm"}});
        j["variables"] = vs;
        auto list = [&](const std::vector<NamedPoly>& ps) {
            nlohmann::json a = nlohmann::json::array();
            for (auto& g : ps) a.push_back({{"label", g.label}, {"group", g.group}, {"terms", poly_json(g.poly)}});
            return a;
        };
        j["inequalities"] = list(inequalities);
        j["equalities"] = list(equalities);
        j["objective"] = poly_json(objective);
        return j;
    }
};

// Builds the polynomial system: state validity, PRM positivity on the state and on
// every product of steered states, objective = functional on the state table.
inline ConstraintSystem assemble(int n, const std::vector<int>& iota, const BellFunctional& ineq,
                                 const PrmRestriction& restriction = {}) {
    if (n < 2 || n > 3) throw std::invalid_argument("assemble: n must be 2 or 3");
    if (ineq.settings() > n) throw std::invalid_argument("assemble: inequality uses more settings than n");
    for (int x = 0; x < ineq.settings(); ++x)
        if (std::find(iota.begin(), iota.end(), x) == iota.end())
            throw std::invalid_argument("assemble: inequality setting " + std::to_string(x) + " not covered by iota");
    ConstraintSystem sys;
    sys.n = n;
    sys.iota = iota;
    sys.inequality = ineq.name;
    sys.restriction = restriction;

    Matrix<Poly> t(n + 1, n + 1);
    auto digit = [](int v) { return std::to_string(v); };
    for (int y = 0; y <= n; ++y)
        for (int x = 0; x <= n; ++x) {
            if (x == n && y == n) continue;
            std::string nm;
            if (x < n && y < n) nm = "p(00|" + digit(x) + digit(y) + ")";
            else if (y == n) nm = "pA(0|" + digit(x) + ")";
            else nm = "pB(0|" + digit(y) + ")";
            t(x, y) = Poly::var(sys.vars.add(nm, VarGroup::State));
        }
    t(n, n) = Poly(1);
    sys.stateTable = t;
    BipartiteState<Poly> s(n, t);

    sys.prm = prm_parameterize(n, iota, restriction, sys.vars);

    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    sys.inequalities.push_back({"p(" + digit(a) + digit(b) + "|" + digit(x) + digit(y) + ")", "state", s.joint(a, b, x, y)});

    for (std::size_t k = 0; k < sys.prm.outcome_count(); ++k)
        sys.inequalities.push_back({"P" + sys.prm.outcome_label(k) + ".s", "prm-on-state", apply_effect(sys.prm.effects[k], s)});

    auto st = steered_states(s, FiducialMeasurement(n));
    for (auto& u : st) {
        if (u.tag.party != 1) continue;
        for (auto& v : st) {
            if (v.tag.party != 2) continue;
            // u^T E v for each effect
            std::string pair = "s1[" + digit(u.tag.outcome) + "|" + digit(u.tag.setting) + "]xs2[" + digit(v.tag.outcome) + "|" +
                               digit(v.tag.setting) + "]";
            for (std::size_t k = 0; k < sys.prm.outcome_count(); ++k) {
                const auto& e = sys.prm.effects[k];
                Poly acc;
                for (int i = 0; i <= n; ++i) {
                    if (u.state.coeffs[i].is_zero()) continue;
                    Poly row;
                    for (int j = 0; j <= n; ++j) {
                        if (e(i, j).is_zero() || v.state.coeffs[j].is_zero()) continue;
                        row += e(i, j) * v.state.coeffs[j];
                    }
                    acc += u.state.coeffs[i] * row;
                }
                sys.inequalities.push_back({"P" + sys.prm.outcome_label(k) + "." + pair, "steered", acc});
            }
        }
    }

    sys.objective = frobenius(to_poly(ineq.embed(n)), t);
    return sys;
}

}  // namespace prmbound
