#pragma once

// Standard includes
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "prmbound/exact_linear.hpp"
#include "prmbound/matrix.hpp"
#include "prmbound/rational.hpp"
#include "prmbound/scenarios.hpp"
#include "prmbound/tensor.hpp"

namespace prmbound {

struct LinearEquation {
    std::string label;
    RationalVector row;
    Rational rhs;
};

// sum_i lambda_i (row_i, rhs_i) = (0, residual) with residual != 0.
struct InfeasibilityCertificate {
    std::vector<std::string> variables;
    std::vector<LinearEquation> equations;
    RationalVector combination;
    Rational residual;

    bool check() const {
        if (combination.size() != equations.size() || equations.empty()) return false;
        RationalVector acc(equations.front().row.size(), Rational(0));
        Rational rhs = 0;
        for (std::size_t i = 0; i < equations.size(); ++i) {
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += combination[i] * equations[i].row[j];
            rhs += combination[i] * equations[i].rhs;
        }
        for (auto& a : acc)
            if (!a.is_zero()) return false;
        return !rhs.is_zero() && rhs == residual;
    }
};

inline std::string format_equation(const LinearEquation& e, const std::vector<std::string>& vars) {
    std::string s;
    for (std::size_t j = 0; j < e.row.size(); ++j) {
        const Rational& c = e.row[j];
        if (c.is_zero()) continue;
        bool neg = c < 0;
        Rational mag = neg ? Rational(-c) : c;
        if (s.empty()) s += neg ? "-" : "";
        else s += neg ? " - " : " + ";
        if (mag != 1) s += to_string(mag) + "*";
        s += vars[j];
    }
    if (s.empty()) s = "0";
    return s + " = " + to_string(e.rhs);
}

// Exact consistency test of a linear system; returns a certificate when inconsistent.
inline std::optional<InfeasibilityCertificate> certify_infeasible(const std::vector<std::string>& vars,
                                                                  const std::vector<LinearEquation>& eqs) {
    RationalMatrix a(eqs.size(), vars.size());
    RationalVector b(eqs.size());
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        if (eqs[i].row.size() != vars.size()) throw std::invalid_argument("certify_infeasible: row length mismatch");
        for (std::size_t j = 0; j < vars.size(); ++j) a(i, j) = eqs[i].row[j];
        b[i] = eqs[i].rhs;
    }
    auto sol = solve_affine(a, b);
    if (sol.consistent) return std::nullopt;
    InfeasibilityCertificate cert{vars, eqs, sol.inconsistency, 0};
    // scale so the first nonzero multiplier is 1
    Rational lead = 0;
    for (auto& l : cert.combination)
        if (!l.is_zero()) {
            lead = l;
            break;
        }
    for (auto& l : cert.combination) l /= lead;
    for (std::size_t i = 0; i < eqs.size(); ++i) cert.residual += cert.combination[i] * eqs[i].rhs;
    return cert;
}

// Square-bit vertices in (p(0|X), p(0|Z), 1) coordinates, indexed as in the warm-up:
// s1: X=0,Z=0   s2: X=0,Z=1   s3: X=1,Z=0   s4: X=1,Z=1
inline std::array<std::vector<Rational>, 4> warmup_square_bit() {
    using V = std::vector<Rational>;
    return {V{1, 1, 1}, V{1, 0, 1}, V{0, 1, 1}, V{0, 0, 1}};
}

inline std::vector<std::string> free_block_names() {
    std::vector<std::string> v;
    for (int r = 1; r <= 3; ++r)
        for (int c = 1; c <= 3; ++c) v.push_back("c" + std::to_string(r) + std::to_string(c));
    return v;
}

// Outcome data for the four PRM formulas p_qr = (2 a R_XX + 2 b R_ZZ + sign * C.p + k) / 4.
struct PrmFormulaRow {
    const char* label;
    int xx, zz, sign, constant;
};
inline const std::array<PrmFormulaRow, 4>& prm_formula() {
    static const std::array<PrmFormulaRow, 4> rows = {{
        {"00", 1, 1, 1, -1},
        {"01", 1, -1, -1, 1},
        {"10", -1, 1, -1, 1},
        {"11", -1, -1, 1, 3},
    }};
    return rows;
}

// Positivity of the four PRM outcomes on s4 (x) sj pins C.s to one value; one equation per j.
inline std::vector<LinearEquation> warmup_conditions() {
    auto sq = warmup_square_bit();
    auto rxx = parity_matrix(2, 0), rzz = parity_matrix(2, 1);
    std::vector<LinearEquation> eqs;
    for (int j = 0; j < 4; ++j) {
        RationalMatrix st = outer(sq[3], sq[j]);
        Rational r0 = frobenius(rxx, st), r1 = frobenius(rzz, st);
        std::optional<Rational> lo, hi;
        for (auto& f : prm_formula()) {
            Rational a = 2 * f.xx * r0 + 2 * f.zz * r1 + f.constant;
            // a + sign * t >= 0
            if (f.sign > 0) lo = lo ? std::max(*lo, Rational(-a)) : Rational(-a);
            else hi = hi ? std::min(*hi, a) : a;
        }
        if (!lo || !hi || *lo != *hi) throw std::logic_error("warmup_conditions: positivity does not pin C.s");
        LinearEquation e;
        e.label = "s4" + std::to_string(j + 1);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) e.row.push_back(st(r, c));
        e.rhs = *lo;
        eqs.push_back(std::move(e));
    }
    return eqs;
}

inline InfeasibilityCertificate warmup_pr_exclusion() {
    auto cert = certify_infeasible(free_block_names(), warmup_conditions());
    if (!cert || !cert->check()) throw std::logic_error("warmup_pr_exclusion: system was not certified infeasible");
    return *cert;
}

inline nlohmann::json certificate_to_json(const InfeasibilityCertificate& c) {
    nlohmann::json eqs = nlohmann::json::array();
    for (auto& e : c.equations) eqs.push_back({{"label", e.label}, {"equation", format_equation(e, c.variables)}});
    nlohmann::json lam = nlohmann::json::array();
    for (auto& l : c.combination) lam.push_back(to_string(l));
    return {{"equations", eqs},
            {"combination", lam},
            {"contradiction", "0 = " + to_string(c.residual)},
            {"verified", c.check()}};
}

struct NamedCheck {
    std::string name;
    std::string lhs, rhs;
    bool pass = false;
};

struct CheckReport {
    std::vector<NamedCheck> checks;
    nlohmann::json extra = nlohmann::json::object();

    void add(std::string name, std::string lhs, std::string rhs, bool pass) {
        checks.push_back({std::move(name), std::move(lhs), std::move(rhs), pass});
    }
    void equal(std::string name, const Rational& lhs, const Rational& rhs) { add(std::move(name), to_string(lhs), to_string(rhs), lhs == rhs); }
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const NamedCheck& c) { return c.pass; });
    }
    std::vector<std::string> failures() const {
        std::vector<std::string> out;
        for (auto& c : checks)
            if (!c.pass) out.push_back(c.name);
        return out;
    }
    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (auto& c : checks) j[c.name] = {{"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}};
        return j;
    }
};

inline std::string matrix_string(const RationalMatrix& m) {
    std::string s = "[";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        s += r ? ";" : "";
        for (std::size_t c = 0; c < m.cols(); ++c) s += (c ? "," : "") + to_string(m(r, c));
    }
    return s + "]";
}

// Effect with a holistic coefficient: value on (p_LT, w) is lt . p_LT + nl * w.
struct HolisticEffect {
    RationalMatrix lt = RationalMatrix(3, 3);
    Rational nl;

    bool operator==(const HolisticEffect& o) const { return lt == o.lt && nl == o.nl; }
    std::string str() const { return matrix_string(lt) + "|" + to_string(nl); }
    Rational value(const RationalMatrix& p, const Rational& w) const { return frobenius(lt, p) + nl * w; }
};

inline HolisticEffect operator+(const HolisticEffect& a, const HolisticEffect& b) { return {a.lt + b.lt, a.nl + b.nl}; }

// PRM effects from the R/C formula with C = (cLT, cNL).
inline std::array<HolisticEffect, 4> prm_effects_rc(const RationalMatrix& cLT, const Rational& cNL) {
    auto r0 = parity_matrix(2, 0), r1 = parity_matrix(2, 1), one = unit_effect(2);
    std::array<HolisticEffect, 4> out;
    for (std::size_t k = 0; k < 4; ++k) {
        auto& f = prm_formula()[k];
        RationalMatrix m = r0.scaled(Rational(2 * f.xx)) + r1.scaled(Rational(2 * f.zz)) + cLT.scaled(Rational(f.sign)) +
                           one.scaled(Rational(f.constant));
        out[k] = {m.scaled(Rational(1, 4)), Rational(f.sign) * cNL / 4};
    }
    return out;
}

inline RationalMatrix rational_matrix(std::initializer_list<std::initializer_list<int>> rows, Rational scale = 1) {
    RationalMatrix m(rows.size(), rows.begin()->size());
    std::size_t r = 0;
    for (auto& row : rows) {
        std::size_t c = 0;
        for (int v : row) m(r, c++) = scale * v;
        ++r;
    }
    return m;
}

inline RationalMatrix nonlt_h() { return rational_matrix({{4, 0, -2}, {0, 4, -2}, {-2, -2, 4}}); }

inline BipartiteState<Rational> pr_box_state() {
    Rational h(1, 2);
    RationalMatrix t(3, 3);
    t(0, 0) = h, t(0, 1) = h, t(0, 2) = h;
    t(1, 0) = h, t(1, 1) = 0, t(1, 2) = h;
    t(2, 0) = h, t(2, 1) = h, t(2, 2) = 1;
    return BipartiteState<Rational>(2, t);
}

// The four effect matrices as printed alongside the construction, transcribed verbatim.
inline std::array<HolisticEffect, 4> nonlt_displayed_effects() {
    Rational q(1, 4);
    return {{
        {rational_matrix({{4, 0, -2}, {0, 4, -2}, {-2, -2, -1}}, q), q},
        {rational_matrix({{4, 0, -2}, {0, -4, 2}, {-2, 2, 1}}), -1},
        {rational_matrix({{-4, 0, 2}, {0, 4, -2}, {2, -2, 1}}, q), -q},
        {rational_matrix({{-4, 0, 2}, {0, -4, 2}, {2, 2, 3}}), 1},
    }};
}

// Vertices in the order used by the construction: (0,0,1), (0,1,1), (1,0,1), (1,1,1).
inline std::array<std::vector<Rational>, 4> nonlt_square_bit() {
    using V = std::vector<Rational>;
    return {V{0, 0, 1}, V{0, 1, 1}, V{1, 0, 1}, V{1, 1, 1}};
}

// Inequalities P_qr . (s_i (x) s_j, g . p) >= 0 written as rows over the 9 entries of g.
inline std::pair<RationalMatrix, RationalVector> nonlt_g_system(std::vector<std::string>* labels = nullptr) {
    auto sq = nonlt_square_bit();
    auto r0 = parity_matrix(2, 0), r1 = parity_matrix(2, 1);
    RationalMatrix a(64, 9);
    RationalVector b(64);
    std::size_t row = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            RationalMatrix p = outer(sq[i], sq[j]);
            Rational x0 = frobenius(r0, p), x1 = frobenius(r1, p), one = p(2, 2);
            for (auto& f : prm_formula()) {
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c) a(row, r * 3 + c) = Rational(f.sign) * p(r, c) / 4;
                b[row] = -(2 * f.xx * x0 + 2 * f.zz * x1 + f.constant * one) / 4;
                if (labels) labels->push_back(std::string("P") + f.label + ".s" + std::to_string(i + 1) + "s" + std::to_string(j + 1));
                ++row;
            }
        }
    return {a, b};
}

inline CheckReport verify_nonlt_construction() {
    CheckReport rep;
    const RationalMatrix zero(3, 3);
    const Rational cNL = 1, wPR = -1;
    const auto h = nonlt_h();
    auto effects = prm_effects_rc(zero, cNL);
    auto shown = nonlt_displayed_effects();
    const char* names[4] = {"P00", "P01", "P10", "P11"};

    // (i) displayed matrices against the formula
    for (int k = 0; k < 4; ++k)
        rep.add(std::string("effects.") + names[k], shown[k].str(), effects[k].str(), shown[k] == effects[k]);

    // (ii) values on the PR box
    auto pr = pr_box_state();
    rep.equal("pr.R0", frobenius(parity_matrix(2, 0), pr.table), 1);
    rep.equal("pr.R1", frobenius(parity_matrix(2, 1), pr.table), 0);
    rep.equal("pr.C.p", frobenius(zero, pr.table) + cNL * wPR, -1);
    Rational total = 0;
    for (int k = 0; k < 4; ++k) {
        Rational v = effects[k].value(pr.table, wPR);
        total += v;
        rep.add(std::string("pr.") + names[k] + ".nonnegative", to_string(v), ">= 0", v >= 0);
        rep.add(std::string("pr.") + names[k] + ".in{0,1/2}", to_string(v), "0 or 1/2", v == 0 || v == Rational(1, 2));
    }
    rep.equal("pr.sum", total, 1);
    rep.equal("pr.chsh", chsh().evaluate(pr), Rational(1, 2));

    // steered states of the PR box are the square-bit vertices
    auto sq = nonlt_square_bit();
    auto steered = steered_states(pr, FiducialMeasurement(2));
    for (auto& st : steered) {
        std::vector<Rational> v = st.state.coeffs;
        for (auto& x : v) x /= st.state.weight();
        bool hit = std::find(sq.begin(), sq.end(), v) != sq.end();
        std::string name = "steered.party" + std::to_string(st.tag.party) + ".x" + std::to_string(st.tag.setting) + ".a" +
                           std::to_string(st.tag.outcome);
        rep.add(name, "(" + to_string(v[0]) + "," + to_string(v[1]) + "," + to_string(v[2]) + ")", "square-bit vertex", hit);
    }

    // (iii) positivity on all 16 steered products, holistic value h . p
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            RationalMatrix p = outer(sq[i], sq[j]);
            Rational w = holistic_value(h, {sq[i]}, {sq[j]});
            for (int k = 0; k < 4; ++k) {
                Rational v = effects[k].value(p, w);
                rep.add(std::string("steered.") + names[k] + ".s" + std::to_string(i + 1) + "s" + std::to_string(j + 1), to_string(v),
                        ">= 0", v >= 0);
            }
        }

    // holistic values against the pairs-of-steered caption: 2 same, 1 one shared value, 0 opposite
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            int shared = (sq[i][0] == sq[j][0]) + (sq[i][1] == sq[j][1]);
            rep.equal("holistic.w.s" + std::to_string(i + 1) + "s" + std::to_string(j + 1), holistic_value(h, {sq[i]}, {sq[j]}),
                      shared);
        }

    // (iv) parity sums and normalisation, holistic parts included
    HolisticEffect r0{parity_matrix(2, 0), 0}, r1{parity_matrix(2, 1), 0}, one{unit_effect(2), 0};
    rep.add("parity.R0", (effects[0] + effects[1]).str(), r0.str(), effects[0] + effects[1] == r0);
    rep.add("parity.R1", (effects[0] + effects[2]).str(), r1.str(), effects[0] + effects[2] == r1);
    HolisticEffect sum = effects[0] + effects[1] + effects[2] + effects[3];
    rep.add("parity.total", sum.str(), one.str(), sum == one);

    // (v) uniqueness of g by exact LP over the 64 steered inequalities
    std::vector<std::string> labels;
    auto [a, b] = nonlt_g_system(&labels);
    RationalVector gDisplayed;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) gDisplayed.push_back(h(r, c));
    std::vector<std::string> violated;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Rational lhs = 0;
        for (std::size_t j = 0; j < 9; ++j) lhs += a(i, j) * gDisplayed[j];
        if (lhs < b[i]) violated.push_back(labels[i]);
    }
    rep.add("g.candidate-feasible", std::to_string(violated.size()) + " violated", "0 violated", violated.empty());
    auto lp = lp_feasible(a, b);
    rep.add("g.lp-feasible", lp.feasible ? "feasible" : "infeasible", "feasible", lp.feasible);
    if (lp.feasible) {
        // tangent cone at the LP point must be {0}
        RationalVector g = lp.point;
        std::vector<std::size_t> tight;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            Rational lhs = 0;
            for (std::size_t j = 0; j < 9; ++j) lhs += a(i, j) * g[j];
            if (lhs == b[i]) tight.push_back(i);
        }
        bool unique = true;
        for (std::size_t k = 0; k < 9 && unique; ++k)
            for (int sg : {1, -1}) {
                RationalMatrix ca(tight.size() + 1, 9);
                RationalVector cb(tight.size() + 1, Rational(0));
                for (std::size_t t = 0; t < tight.size(); ++t)
                    for (std::size_t j = 0; j < 9; ++j) ca(t, j) = a(tight[t], j);
                ca(tight.size(), k) = sg;
                cb[tight.size()] = 1;
                if (lp_feasible(ca, cb).feasible) {
                    unique = false;
                    break;
                }
            }
        rep.add("g.unique", unique ? "unique" : "not unique", "unique", unique);
        rep.add("g.equals-h", matrix_string(RationalMatrix(3, 3)), matrix_string(h), g == gDisplayed);
    } else {
        nlohmann::json support = nlohmann::json::array();
        for (std::size_t i = 0; i < lp.farkas.size(); ++i)
            if (!lp.farkas[i].is_zero()) support.push_back({{"inequality", labels[i]}, {"multiplier", to_string(lp.farkas[i])}});
        rep.extra["g.farkas"] = support;
    }
    nlohmann::json vj = nlohmann::json::array();
    for (auto& v : violated) vj.push_back(v);
    rep.extra["g.candidate-violations"] = vj;
    rep.extra["chsh"] = to_string(chsh().evaluate(pr));
    return rep;
}

struct FeasiblePoint {
    int n = 2;
    std::vector<int> iota;
    std::string source;
    Matrix<double> table;
    std::vector<Matrix<double>> prmEffects;
    std::vector<double> prmValues;
    double objectiveValue = 0;
    double minSlack = 0;
    std::string worstConstraint;
    double equalityResidual = 0;
    double effectFitResidual = 0;
    double partialTraceError = 0;
    double normalisationError = 0;

    bool feasible(double tol = 1e-12) const {
        return minSlack >= -tol && equalityResidual <= tol && effectFitResidual <= tol && partialTraceError <= tol &&
               normalisationError <= tol;
    }

    nlohmann::json to_json() const {
        nlohmann::json t = nlohmann::json::array();
        for (std::size_t r = 0; r < table.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t c = 0; c < table.cols(); ++c) row.push_back(table(r, c));
            t.push_back(row);
        }
        return {{"n", n},
                {"iota", iota},
                {"source", source},
                {"table", t},
                {"prmValues", prmValues},
                {"objectiveValue", objectiveValue},
                {"minSlack", minSlack},
                {"worstConstraint", worstConstraint},
                {"equalityResidual", equalityResidual},
                {"effectFitResidual", effectFitResidual},
                {"partialTraceError", partialTraceError},
                {"normalisationError", normalisationError},
                {"feasible", feasible()}};
    }
};

// Fits the free PRM parameters of the CHSH system to numeric effects and evaluates every constraint.
inline FeasiblePoint evaluate_witness(int n, const std::vector<int>& iota, const Matrix<double>& table,
                                      const std::vector<Matrix<double>>& effects, std::string source) {
    auto sys = assemble(n, iota, chsh());
    const auto& prm = sys.prm;
    if (effects.size() != prm.outcome_count()) throw std::invalid_argument("evaluate_witness: effect count mismatch");
    auto pv = prm.freeVars;
    std::size_t entries = (n + 1) * (n + 1);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(effects.size() * entries, pv.size());
    Eigen::VectorXd rhs(effects.size() * entries);
    for (std::size_t k = 0; k < effects.size(); ++k)
        for (int r = 0; r <= n; ++r)
            for (int c = 0; c <= n; ++c) {
                std::size_t row = k * entries + r * (n + 1) + c;
                const Poly& p = prm.effects[k](r, c);
                rhs(row) = effects[k](r, c) - to_double(p.constant());
                for (std::size_t v = 0; v < pv.size(); ++v) a(row, v) = to_double(p.coefficient(Monomial::var(pv[v])));
            }
    Eigen::VectorXd x = pv.empty() ? Eigen::VectorXd() : Eigen::VectorXd(a.colPivHouseholderQr().solve(rhs));

    FeasiblePoint fp;
    fp.n = n;
    fp.iota = iota;
    fp.source = std::move(source);
    fp.table = table;
    fp.prmEffects = effects;
    fp.prmValues.assign(x.data(), x.data() + x.size());
    fp.effectFitResidual = pv.empty() ? rhs.cwiseAbs().maxCoeff() : (a * x - rhs).cwiseAbs().maxCoeff();

    // values are indexed by system variable id; prm free vars map in order
    std::vector<double> prmVals(sys.prm_vars().size(), 0.0);
    auto sv = sys.prm_vars();
    for (std::size_t v = 0; v < pv.size(); ++v) {
        auto it = std::find(sv.begin(), sv.end(), pv[v]);
        prmVals[it - sv.begin()] = fp.prmValues[v];
    }
    auto point = sys.point(table, prmVals);
    fp.minSlack = std::numeric_limits<double>::infinity();
    for (auto& g : sys.inequalities) {
        double v = evaluate(g.poly, point);
        if (v < fp.minSlack) {
            fp.minSlack = v;
            fp.worstConstraint = g.label;
        }
    }
    for (auto& e : sys.equalities) fp.equalityResidual = std::max(fp.equalityResidual, std::abs(evaluate(e.poly, point)));
    fp.objectiveValue = evaluate(sys.objective, point);

    for (std::size_t i = 0; i < iota.size(); ++i) {
        auto rm = parity_matrix(n, iota[i]);
        for (int r = 0; r <= n; ++r)
            for (int c = 0; c <= n; ++c) {
                double acc = 0;
                for (std::size_t k = 0; k < effects.size(); ++k)
                    if (prm.bits[k][i] == 0) acc += effects[k](r, c);
                fp.partialTraceError = std::max(fp.partialTraceError, std::abs(acc - to_double(rm(r, c))));
            }
    }
    for (int r = 0; r <= n; ++r)
        for (int c = 0; c <= n; ++c) {
            double acc = 0;
            for (auto& e : effects) acc += e(r, c);
            fp.normalisationError = std::max(fp.normalisationError, std::abs(acc - (r == n && c == n ? 1.0 : 0.0)));
        }
    return fp;
}

namespace qubit {
using Op = Eigen::Matrix2cd;
using Op2 = Eigen::Matrix4cd;

inline Op pauli(char which) {
    using C = std::complex<double>;
    Op m;
    switch (which) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, C(0, -1), C(0, 1), 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("pauli: unknown label");
    }
    return m;
}

inline Op2 kron(const Op& a, const Op& b) {
    Op2 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

inline double expect(const Op2& rho, const Op2& op) { return (rho * op).trace().real(); }

// Fiducial observables per setting: X, Z, then Y.
inline std::vector<Op> observables(int n) {
    const char labels[3] = {'X', 'Z', 'Y'};
    if (n < 1 || n > 3) throw std::invalid_argument("qubit::observables: n must be 1..3");
    std::vector<Op> out;
    for (int x = 0; x < n; ++x) out.push_back(pauli(labels[x]));
    return out;
}

// Table entries tr(rho Pi_x (x) Pi_y) with Pi_x = (I + sigma_x)/2 and Pi_n = I.
inline Matrix<double> state_table(const Op2& rho, int n) {
    auto obs = observables(n);
    std::vector<Op> proj;
    for (auto& o : obs) proj.push_back((pauli('I') + o) / 2.0);
    proj.push_back(pauli('I'));
    Matrix<double> t(n + 1, n + 1);
    for (int r = 0; r <= n; ++r)
        for (int c = 0; c <= n; ++c) t(r, c) = expect(rho, kron(proj[r], proj[c]));
    return t;
}

// Coefficients of an operator in the table basis via the dual frame {sigma_x, (I - sum sigma)/2}.
inline Matrix<double> effect_matrix(const Op2& effect, int n) {
    auto obs = observables(n);
    std::vector<Op> dual = obs;
    Op rest = pauli('I');
    for (auto& o : obs) rest -= o;
    dual.push_back(rest / 2.0);
    Matrix<double> m(n + 1, n + 1);
    for (int r = 0; r <= n; ++r)
        for (int c = 0; c <= n; ++c) m(r, c) = expect(effect, kron(dual[r], dual[c]));
    return m;
}

// Bell projector with XX parity bit bx and ZZ parity bit bz (0 = agree).
inline Op2 bell_projector(int bx, int bz) {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    double s = 1 / std::sqrt(2.0);
    if (bz == 0) {
        v(0) = s;
        v(3) = bx == 0 ? s : -s;
    } else {
        v(1) = s;
        v(2) = bx == 0 ? s : -s;
    }
    return v * v.adjoint();
}
}  // namespace qubit

// Top eigenvector of X(x)X + X(x)Z + Z(x)X - Z(x)Z.
inline Eigen::Vector4d chsh_operator_top_eigenvector(double* eigenvalue = nullptr) {
    using namespace qubit;
    Op2 op = kron(pauli('X'), pauli('X')) + kron(pauli('X'), pauli('Z')) + kron(pauli('Z'), pauli('X')) -
             kron(pauli('Z'), pauli('Z'));
    Eigen::Matrix4d real = op.real();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(real);
    if (eigenvalue) *eigenvalue = es.eigenvalues()(3);
    return es.eigenvectors().col(3);
}

// Quantum point: CHSH-optimal two-qubit state, fiducials X, Z (and Y for n = 3), PRM from the
// Bell measurement coarse-grained by C_X and C_Z; checked against the iota = {0, 1} system.
inline FeasiblePoint quantum_chsh_witness(int n = 2) {
    using namespace qubit;
    if (n != 2 && n != 3) throw std::invalid_argument("quantum_chsh_witness: n must be 2 or 3");
    Eigen::Vector4cd psi = chsh_operator_top_eigenvector().cast<std::complex<double>>();
    Op2 rho = psi * psi.adjoint();
    auto table = state_table(rho, n);
    auto prm = prm_parameterize(n, {0, 1});
    std::vector<Matrix<double>> effects;
    for (std::size_t k = 0; k < prm.outcome_count(); ++k) effects.push_back(effect_matrix(bell_projector(prm.bits[k][0], prm.bits[k][1]), n));
    return evaluate_witness(n, {0, 1}, table, effects, n == 2 ? "qubit, fiducials X,Z" : "qubit, fiducials X,Z,Y");
}

// Closed-form n = 2 point reaching (sqrt2 - 1)/2 with a free block C = diag(0, 0, 3 - 2 sqrt2).
inline FeasiblePoint tsirelson_point_n2() {
    const double r2 = std::sqrt(2.0);
    Matrix<double> t(3, 3);
    t(0, 0) = r2 / 4, t(0, 1) = 0.5, t(0, 2) = 0.5;
    t(1, 0) = 0.5, t(1, 1) = (2 - r2) / 4, t(1, 2) = 0.5;
    t(2, 0) = 0.5, t(2, 1) = 0.5, t(2, 2) = 1;
    RationalMatrix zero(3, 3);
    auto base = prm_effects_rc(zero, 0);
    auto prm = prm_parameterize(2, {0, 1});
    std::vector<Matrix<double>> effects;
    for (std::size_t k = 0; k < prm.outcome_count(); ++k) {
        // outcome label -> formula row
        std::size_t f = 0;
        while (std::string(prm_formula()[f].label) != prm.outcome_label(k)) ++f;
        Matrix<double> m = base[f].lt.map<double>([](const Rational& r) { return to_double(r); });
        m(2, 2) += prm_formula()[f].sign * (3 - 2 * r2) / 4;
        effects.push_back(m);
    }
    return evaluate_witness(2, {0, 1}, t, effects, "closed form");
}

}  // namespace prmbound
