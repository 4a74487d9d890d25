#pragma once

// Standard includes
#include <optional>
#include <stdexcept>
#include <vector>

#include "prmbound/matrix.hpp"
#include "prmbound/rational.hpp"

namespace prmbound {

using RationalMatrix = Matrix<Rational>;
using RationalVector = std::vector<Rational>;

struct Rref {
    RationalMatrix reduced;        // reduced row echelon form
    std::vector<std::size_t> pivots;  // pivot column of each nonzero row
    RationalMatrix transform;      // reduced = transform * original
};

// Gauss-Jordan elimination; pivots on the leftmost available column.
inline Rref rref(const RationalMatrix& a) {
    Rref out;
    out.reduced = a;
    std::size_t m = a.rows(), n = a.cols();
    out.transform = RationalMatrix(m, m);
    for (std::size_t i = 0; i < m; ++i) out.transform(i, i) = 1;
    auto& r = out.reduced;
    auto& t = out.transform;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < m; ++col) {
        std::size_t p = row;
        while (p < m && r(p, col) == 0) ++p;
        if (p == m) continue;
        if (p != row) {
            for (std::size_t c = 0; c < n; ++c) std::swap(r(p, c), r(row, c));
            for (std::size_t c = 0; c < m; ++c) std::swap(t(p, c), t(row, c));
        }
        Rational inv = 1 / r(row, col);
        for (std::size_t c = 0; c < n; ++c) r(row, c) *= inv;
        for (std::size_t c = 0; c < m; ++c) t(row, c) *= inv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row || r(i, col) == 0) continue;
            Rational f = r(i, col);
            for (std::size_t c = 0; c < n; ++c) r(i, c) -= f * r(row, c);
            for (std::size_t c = 0; c < m; ++c) t(i, c) -= f * t(row, c);
        }
        out.pivots.push_back(col);
        ++row;
    }
    return out;
}

// Basis of {x : a x = 0}, one vector per free column.
inline std::vector<RationalVector> nullspace(const RationalMatrix& a) {
    Rref e = rref(a);
    std::size_t n = a.cols();
    std::vector<bool> isPivot(n, false);
    for (auto p : e.pivots) isPivot[p] = true;
    std::vector<RationalVector> basis;
    for (std::size_t f = 0; f < n; ++f) {
        if (isPivot[f]) continue;
        RationalVector v(n, Rational(0));
        v[f] = 1;
        for (std::size_t k = 0; k < e.pivots.size(); ++k) v[e.pivots[k]] = -e.reduced(k, f);
        basis.push_back(v);
    }
    return basis;
}

// Affine solution set of a x = b: x = particular + sum_f t_f * direction_f.
struct AffineSolution {
    bool consistent = false;
    RationalVector particular;
    std::vector<std::size_t> freeColumns;
    std::vector<RationalVector> directions;
    RationalVector inconsistency;  // lambda with lambda^T a = 0, lambda^T b != 0 when inconsistent
};

inline AffineSolution solve_affine(const RationalMatrix& a, const RationalVector& b) {
    if (b.size() != a.rows()) throw std::invalid_argument("solve_affine: rhs size mismatch");
    std::size_t m = a.rows(), n = a.cols();
    RationalMatrix aug(m, n + 1);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
        aug(i, n) = b[i];
    }
    Rref e = rref(aug);
    AffineSolution s;
    for (std::size_t k = 0; k < e.pivots.size(); ++k) {
        if (e.pivots[k] == n) {
            s.consistent = false;
            s.inconsistency.assign(m, Rational(0));
            for (std::size_t i = 0; i < m; ++i) s.inconsistency[i] = e.transform(k, i);
            return s;
        }
    }
    s.consistent = true;
    std::vector<bool> isPivot(n, false);
    for (auto p : e.pivots) isPivot[p] = true;
    s.particular.assign(n, Rational(0));
    for (std::size_t k = 0; k < e.pivots.size(); ++k) s.particular[e.pivots[k]] = e.reduced(k, n);
    for (std::size_t f = 0; f < n; ++f) {
        if (isPivot[f]) continue;
        s.freeColumns.push_back(f);
        RationalVector v(n, Rational(0));
        v[f] = 1;
        for (std::size_t k = 0; k < e.pivots.size(); ++k) v[e.pivots[k]] = -e.reduced(k, f);
        s.directions.push_back(v);
    }
    return s;
}

// Feasibility of {x free : a x >= b} by exact phase-one simplex with Bland's rule.
// Infeasible systems come with y >= 0, y^T a = 0, y^T b > 0.
struct LpFeasibility {
    bool feasible = false;
    RationalVector point;
    RationalVector farkas;
};

inline LpFeasibility lp_feasible(const RationalMatrix& a, const RationalVector& b) {
    std::size_t m = a.rows(), n = a.cols();
    if (b.size() != m) throw std::invalid_argument("lp_feasible: rhs size mismatch");
    // columns: x+ (n), x- (n), surplus s (m), artificial (m)
    std::size_t nOrig = 2 * n + m, nCol = nOrig + m;
    RationalMatrix tab(m, nCol + 1);
    std::vector<int> rowSign(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        rowSign[i] = b[i] < 0 ? -1 : 1;
        Rational sg = rowSign[i];
        for (std::size_t j = 0; j < n; ++j) {
            tab(i, j) = sg * a(i, j);
            tab(i, n + j) = -sg * a(i, j);
        }
        tab(i, 2 * n + i) = -sg;
        tab(i, nOrig + i) = 1;
        tab(i, nCol) = sg * b[i];
    }
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) basis[i] = nOrig + i;
    // reduced costs of phase-one objective sum(artificial)
    RationalVector cost(nCol + 1, Rational(0));
    for (std::size_t j = nOrig; j < nCol; ++j) cost[j] = 1;
    RationalVector red(nCol + 1, Rational(0));
    auto recompute = [&]() {
        for (std::size_t j = 0; j <= nCol; ++j) {
            Rational v = j < nCol ? cost[j] : Rational(0);
            for (std::size_t i = 0; i < m; ++i) v -= cost[basis[i]] * tab(i, j);
            red[j] = v;
        }
    };
    recompute();
    for (;;) {
        std::size_t enter = nCol;
        for (std::size_t j = 0; j < nCol; ++j)
            if (red[j] < 0) {
                enter = j;
                break;
            }
        if (enter == nCol) break;
        std::size_t leave = m;
        Rational best;
        for (std::size_t i = 0; i < m; ++i) {
            if (tab(i, enter) <= 0) continue;
            Rational ratio = tab(i, nCol) / tab(i, enter);
            if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave == m) throw std::logic_error("lp_feasible: phase one unbounded");
        Rational inv = 1 / tab(leave, enter);
        for (std::size_t j = 0; j <= nCol; ++j) tab(leave, j) *= inv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == leave || tab(i, enter) == 0) continue;
            Rational f = tab(i, enter);
            for (std::size_t j = 0; j <= nCol; ++j) tab(i, j) -= f * tab(leave, j);
        }
        Rational f = red[enter];
        for (std::size_t j = 0; j <= nCol; ++j) red[j] -= f * tab(leave, j);
        basis[leave] = enter;
    }
    Rational objective = -red[nCol];
    LpFeasibility out;
    if (objective == 0) {
        out.feasible = true;
        RationalVector z(nCol, Rational(0));
        for (std::size_t i = 0; i < m; ++i) z[basis[i]] = tab(i, nCol);
        out.point.assign(n, Rational(0));
        for (std::size_t j = 0; j < n; ++j) out.point[j] = z[j] - z[n + j];
        return out;
    }
    // simplex multipliers pi_i = 1 - reduced cost of artificial i (in sign-flipped rows)
    out.farkas.assign(m, Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
        Rational pi = 1 - red[nOrig + i];
        out.farkas[i] = pi * Rational(rowSign[i]);
    }
    return out;
}

}  // namespace prmbound
