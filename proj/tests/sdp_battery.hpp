#pragma once

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "prmbound/sdp.hpp"

namespace prmbound::battery {

inline std::vector<Eigen::MatrixXd> dense(const SdpMatrix& m, const std::vector<SdpBlock>& blocks) {
    std::vector<Eigen::MatrixXd> out;
    for (auto& b : blocks) out.push_back(Eigen::MatrixXd::Zero(b.dim, b.dim));
    for (auto& e : m.entries) {
        out[e.block](e.row, e.col) += e.value;
        if (e.row != e.col) out[e.block](e.col, e.row) += e.value;
    }
    return out;
}

inline Eigen::MatrixXd block_of(const BlockValue& b) { return b.diagonal ? Eigen::MatrixXd(b.diag.asDiagonal()) : b.dense; }

inline double inner(const SdpMatrix& m, const std::vector<SdpBlock>& blocks, const BlockMatrix& x) {
    auto d = dense(m, blocks);
    double s = 0;
    for (std::size_t k = 0; k < d.size(); ++k) s += (d[k].array() * block_of(x[k]).array()).sum();
    return s;
}

inline double min_eig(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    return es.eigenvalues()(0);
}

inline Eigen::MatrixXd random_pd(std::mt19937& rng, int n) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    return a * a.transpose() / n + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

// Feasible and bounded by construction: b from a definite primal point, C from a definite dual slack.
inline SdpProblem random_problem(std::mt19937& rng) {
    std::uniform_int_distribution<int> nb(1, 2), dim(1, 6), mcount(1, 8), coin(0, 3);
    std::normal_distribution<double> g;
    SdpProblem p;
    int blocks = nb(rng);
    for (int b = 0; b < blocks; ++b) p.blocks.push_back({dim(rng), coin(rng) == 0});
    int m = mcount(rng);
    std::vector<Eigen::MatrixXd> x0, z0;
    for (auto& b : p.blocks) {
        Eigen::MatrixXd x = random_pd(rng, b.dim), z = random_pd(rng, b.dim);
        if (b.diagonal) x = Eigen::MatrixXd(x.diagonal().asDiagonal()), z = Eigen::MatrixXd(z.diagonal().asDiagonal());
        x0.push_back(x);
        z0.push_back(z);
    }
    std::vector<double> y0(m);
    for (auto& v : y0) v = g(rng);
    std::vector<Eigen::MatrixXd> cmat;
    for (auto& b : p.blocks) cmat.push_back(Eigen::MatrixXd::Zero(b.dim, b.dim));
    for (int k = 0; k < m; ++k) {
        SdpMatrix a;
        double rhs = 0;
        for (std::size_t b = 0; b < p.blocks.size(); ++b) {
            int n = p.blocks[b].dim;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    if (p.blocks[b].diagonal && i != j) continue;
                    if (coin(rng) == 0) continue;
                    double v = g(rng);
                    a.add(static_cast<int>(b), i, j, v);
                    rhs += (i == j ? 1 : 2) * v * x0[b](i, j);
                    cmat[b](i, j) += y0[k] * v;
                    if (i != j) cmat[b](j, i) += y0[k] * v;
                }
        }
        if (a.entries.empty()) {
            a.add(0, 0, 0, 1.0);
            rhs += x0[0](0, 0);
            cmat[0](0, 0) += y0[k];
        }
        p.constraints.push_back(a);
        p.rhs.push_back(rhs);
    }
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        Eigen::MatrixXd c = cmat[b] - z0[b];
        for (int i = 0; i < p.blocks[b].dim; ++i)
            for (int j = i; j < p.blocks[b].dim; ++j)
                if (c(i, j) != 0 && (!p.blocks[b].diagonal || i == j)) p.objective.add(static_cast<int>(b), i, j, c(i, j));
    }
    return p;
}

// Empty when X, Z and y satisfy the optimality conditions independently of the solver's own report.
inline std::string kkt_violation(const SdpProblem& p, const Solution& s, double tol = 1e-7) {
    std::ostringstream why;
    for (std::size_t k = 0; k < p.constraints.size(); ++k) {
        double r = inner(p.constraints[k], p.blocks, s.blocks) - p.rhs[k];
        if (std::abs(r) > tol * (1 + std::abs(p.rhs[k]))) why << "equality " << k << " residual " << r << "; ";
    }
    auto c = dense(p.objective, p.blocks);
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        if (min_eig(block_of(s.blocks[b])) < -tol) why << "X block " << b << " not psd; ";
        Eigen::MatrixXd z = -c[b];
        for (std::size_t k = 0; k < p.constraints.size(); ++k) z += s.dualVector[k] * dense(p.constraints[k], p.blocks)[b];
        if (min_eig(z) < -tol) why << "Z block " << b << " not psd; ";
    }
    double pobj = inner(p.objective, p.blocks, s.blocks), dobj = 0;
    for (std::size_t k = 0; k < p.rhs.size(); ++k) dobj += p.rhs[k] * s.dualVector[k];
    if (std::abs(pobj - dobj) > 10 * tol * (1 + std::abs(pobj))) why << "objective mismatch " << pobj << " vs " << dobj << "; ";
    if (dobj < pobj - tol * (1 + std::abs(pobj))) why << "weak duality violated; ";
    return why.str();
}

}  // namespace prmbound::battery
