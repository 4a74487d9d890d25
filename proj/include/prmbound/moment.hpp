#pragma once

// Standard includes
#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "prmbound/polynomial.hpp"
#include "prmbound/scenarios.hpp"
#include "prmbound/sdp.hpp"

namespace prmbound {

enum class Level { L1, L1ABstar, L1AB, L2 };

inline std::string level_name(Level l) {
    switch (l) {
        case Level::L1: return "1";
        case Level::L1ABstar: return "1abstar";
        case Level::L1AB: return "1ab";
        case Level::L2: return "2";
    }
    return "?";
}

inline Level parse_level(const std::string& s) {
    if (s == "1") return Level::L1;
    if (s == "1abstar" || s == "1ab*") return Level::L1ABstar;
    if (s == "1ab") return Level::L1AB;
    if (s == "2") return Level::L2;
    throw std::invalid_argument("unknown level '" + s + "'");
}

struct MomentBasis {
    Level level = Level::L1;
    std::vector<Monomial> labels;
    std::vector<Monomial> moments;  // id -> monomial, id 0 is the constant
    std::unordered_map<Monomial, int, MonomialHash> momentIndex;

    int id(const Monomial& m) const {
        auto it = momentIndex.find(m);
        return it == momentIndex.end() ? -1 : it->second;
    }
    bool representable(const Poly& p) const {
        for (auto& [m, c] : p.terms())
            if (id(m) < 0) return false;
        return true;
    }
};

inline MomentBasis build_basis(const ConstraintSystem& system, Level level) {
    MomentBasis b;
    b.level = level;
    auto all = system.vars.all();
    auto st = system.state_vars();
    auto pr = system.prm_vars();
    std::vector<Monomial> labels{Monomial()};
    for (auto v : all) labels.push_back(Monomial::var(v));
    switch (level) {
        case Level::L1: break;
        case Level::L1ABstar:
            for (auto p : st)
                for (auto c : pr) labels.push_back(Monomial::var(p) * Monomial::var(c));
            break;
        case Level::L1AB:
            for (std::size_t i = 0; i < all.size(); ++i)
                for (std::size_t j = i + 1; j < all.size(); ++j) labels.push_back(Monomial::var(all[i]) * Monomial::var(all[j]));
            break;
        case Level::L2:
            for (std::size_t i = 0; i < all.size(); ++i)
                for (std::size_t j = i; j < all.size(); ++j) labels.push_back(Monomial::var(all[i]) * Monomial::var(all[j]));
            break;
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    b.labels = labels;
    std::vector<Monomial> prods;
    prods.reserve(labels.size() * (labels.size() + 1) / 2);
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i; j < labels.size(); ++j) prods.push_back(labels[i] * labels[j]);
    std::sort(prods.begin(), prods.end());
    prods.erase(std::unique(prods.begin(), prods.end()), prods.end());
    b.moments = prods;
    b.momentIndex.reserve(prods.size() * 2);
    for (std::size_t k = 0; k < prods.size(); ++k) b.momentIndex.emplace(prods[k], static_cast<int>(k));
    return b;
}

struct BlockInfo {
    std::string kind;   // "moment", "localizing", "scalars"
    std::string label;  // constraint label for localizing blocks
    std::vector<int> basis;
};

// Moment relaxation in linear-matrix-inequality form: SDP variable k is the
// moment with id k+1 (the constant moment is fixed to 1).
struct Relaxation {
    SdpProblem problem;
    MomentBasis basis;
    std::vector<BlockInfo> blocks;
    std::vector<std::string> scalarLabels;  // one per entry of the scalar block
    std::vector<std::string> dropped;       // constraint labels with unrepresentable monomials
    std::vector<std::string> warnings;
    double objectiveScale = 1;
    double objectiveConstant = 0;

    // Certified value from the primal matrices (upper bound on the relaxation).
    double bound(const Solution& s) const { return objectiveConstant - s.primalValue / objectiveScale; }
    // Objective value of the moment vector.
    double moment_bound(const Solution& s) const { return objectiveConstant - s.dualValue / objectiveScale; }

    // SDP variables obtained by evaluating every moment at a point.
    std::vector<double> lift(const std::vector<double>& point) const {
        std::vector<double> y(basis.moments.size() - 1);
        for (std::size_t k = 1; k < basis.moments.size(); ++k) y[k - 1] = evaluate(basis.moments[k], point);
        return y;
    }

    // sum_k y_k A_k - C: every localizing/moment block at the given moments.
    BlockMatrix blocks_at(const std::vector<double>& y) const {
        BlockMatrix out = detail::to_blocks(problem.objective, problem.blocks);
        for (auto& b : out) {
            if (b.diagonal) b.diag = -b.diag;
            else b.dense = -b.dense;
        }
        for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
            BlockMatrix a = detail::to_blocks(problem.constraints[k], problem.blocks);
            detail::axpy(out, y.at(k), a);
        }
        return out;
    }

    double objective_at(const std::vector<double>& y) const {
        double s = 0;
        for (std::size_t k = 0; k < y.size(); ++k) s += problem.rhs[k] * y[k];
        return objectiveConstant - s / objectiveScale;
    }
};

namespace detail {

// Accumulates sum_alpha coef * (b_i b_j alpha) for one cell of a block.
inline void add_cell(const MomentBasis& mb, const Poly& g, const Monomial& bb, int block, int r, int c, SdpMatrix& objective,
                     std::vector<SdpMatrix>& cons) {
    for (auto& [mono, coef] : g.terms()) {
        int id = mb.id(bb * mono);
        if (id < 0) throw std::logic_error("relax: unrepresentable moment");
        double v = to_double(coef);
        if (id == 0) objective.add(block, r, c, -v);
        else cons[id - 1].add(block, r, c, v);
    }
}

}  // namespace detail

inline Relaxation relax(const ConstraintSystem& system, Level level) {
    Relaxation rel;
    rel.basis = build_basis(system, level);
    const auto& mb = rel.basis;
    const std::size_t nm = mb.moments.size();
    auto& prob = rel.problem;
    std::vector<SdpMatrix> cons(nm - 1);

    // moment matrix
    const int L = static_cast<int>(mb.labels.size());
    prob.blocks.push_back({L, false});
    BlockInfo mom{"moment", "", {}};
    for (int i = 0; i < L; ++i) mom.basis.push_back(i);
    rel.blocks.push_back(mom);
    for (int i = 0; i < L; ++i)
        for (int j = i; j < L; ++j) detail::add_cell(mb, Poly(1), mb.labels[i] * mb.labels[j], 0, i, j, prob.objective, cons);

    // localizing blocks
    struct Pending {
        const NamedPoly* g;
        Poly poly;
        std::vector<int> basis;
    };
    std::vector<Pending> scalars;
    auto localize = [&](const NamedPoly& g, const Poly& poly) {
        std::vector<int> bg;
        for (int i = 0; i < L; ++i) {
            const Monomial& cand = mb.labels[i];
            bool ok = mb.representable(Poly(cand * cand) * poly);
            for (std::size_t t = 0; ok && t < bg.size(); ++t) ok = mb.representable(Poly(cand * mb.labels[bg[t]]) * poly);
            if (ok) bg.push_back(i);
        }
        if (bg.empty()) {
            rel.dropped.push_back(g.label);
            return;
        }
        if (bg.size() == 1) {
            scalars.push_back({&g, poly, bg});
            return;
        }
        int block = static_cast<int>(prob.blocks.size());
        prob.blocks.push_back({static_cast<int>(bg.size()), false});
        rel.blocks.push_back({"localizing", g.label, bg});
        for (std::size_t i = 0; i < bg.size(); ++i)
            for (std::size_t j = i; j < bg.size(); ++j)
                detail::add_cell(mb, poly, mb.labels[bg[i]] * mb.labels[bg[j]], block, static_cast<int>(i), static_cast<int>(j),
                                 prob.objective, cons);
    };
    for (auto& g : system.inequalities) localize(g, g.poly);
    // equalities become paired scalar inequalities on each representable multiple b*h
    std::vector<NamedPoly> eqRows;
    for (auto& h : system.equalities)
        for (int i = 0; i < L; ++i) {
            Poly bh = Poly(mb.labels[i]) * h.poly;
            if (!mb.representable(bh)) continue;
            eqRows.push_back({h.label + "*" + mb.labels[i].str(system.vars.namer()) + "+", "equality", bh});
            eqRows.push_back({h.label + "*" + mb.labels[i].str(system.vars.namer()) + "-", "equality", -bh});
        }
    for (auto& e : eqRows) {
        if (!mb.representable(e.poly)) continue;
        scalars.push_back({nullptr, e.poly, {0}});
        scalars.back().g = nullptr;
        rel.scalarLabels.push_back(e.label);
    }
    if (!scalars.empty()) {
        int block = static_cast<int>(prob.blocks.size());
        prob.blocks.push_back({static_cast<int>(scalars.size()), true});
        rel.blocks.push_back({"scalars", "", {}});
        std::vector<std::string> labels;
        std::size_t eqIdx = 0;
        for (std::size_t k = 0; k < scalars.size(); ++k) {
            const auto& s = scalars[k];
            labels.push_back(s.g ? s.g->label : rel.scalarLabels[eqIdx++]);
            const Monomial& b = mb.labels[s.basis[0]];
            detail::add_cell(mb, s.poly, b * b, block, static_cast<int>(k), static_cast<int>(k), prob.objective, cons);
        }
        rel.scalarLabels = labels;
    }
    for (auto& d : rel.dropped) rel.warnings.push_back("dropped constraint '" + d + "': monomials not representable at level " + level_name(level));

    // objective: maximise f0 + sum f_a y_a  ->  rhs b_a = -s f_a
    double fmax = 0;
    for (auto& [m, c] : system.objective.terms()) {
        if (m.is_one()) continue;
        if (mb.id(m) < 0) throw std::logic_error("relax: objective monomial not representable");
        fmax = std::max(fmax, std::abs(to_double(c)));
    }
    rel.objectiveScale = fmax > 0 ? 1.0 / fmax : 1.0;
    rel.objectiveConstant = to_double(system.objective.constant());
    prob.rhs.assign(nm - 1, 0.0);
    for (auto& [m, c] : system.objective.terms()) {
        if (m.is_one()) continue;
        prob.rhs[mb.id(m) - 1] = -rel.objectiveScale * to_double(c);
    }
    prob.constraints = std::move(cons);
    prob.metadata["level"] = level_name(level);
    prob.metadata["objective_scale"] = std::to_string(rel.objectiveScale);
    prob.metadata["objective_constant"] = std::to_string(rel.objectiveConstant);
    prob.metadata["moments"] = std::to_string(nm);
    prob.metadata["labels"] = std::to_string(L);
    return rel;
}

struct BoundResult {
    Level level = Level::L1;
    SdpStatus status = SdpStatus::NumericalFailure;
    double bound = 0;      // from the primal matrices
    double dualBound = 0;  // from the moment vector
    double gap = 0;
    double primalInfeasibility = 0, dualInfeasibility = 0;
    int iterations = 0;
    double seconds = 0;
    int labels = 0;
    int moments = 0;
    int blocks = 0;
    std::vector<std::string> warnings;
};

inline BoundResult solve_relaxation(const ConstraintSystem& system, Level level, const SolverOptions& opts = {}) {
    auto t0 = std::chrono::steady_clock::now();
    Relaxation rel = relax(system, level);
    Solution s = solve(rel.problem, opts);
    BoundResult r;
    r.level = level;
    r.status = s.status;
    r.bound = rel.bound(s);
    r.dualBound = rel.moment_bound(s);
    r.gap = s.gap;
    r.primalInfeasibility = s.primalInfeasibility;
    r.dualInfeasibility = s.dualInfeasibility;
    r.iterations = s.iterations;
    r.labels = static_cast<int>(rel.basis.labels.size());
    r.moments = static_cast<int>(rel.basis.moments.size());
    r.blocks = static_cast<int>(rel.problem.blocks.size());
    r.warnings = rel.warnings;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline std::map<Level, BoundResult> level_compare(const ConstraintSystem& system, const std::vector<Level>& levels,
                                                  const SolverOptions& opts = {}) {
    if (levels.size() < 2) throw std::invalid_argument("level_compare: needs at least two levels");
    std::map<Level, BoundResult> out;
    for (auto l : levels) out[l] = solve_relaxation(system, l, opts);
    return out;
}

}  // namespace prmbound
