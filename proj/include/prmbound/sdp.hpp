#pragma once

// Standard includes
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

// Eigen
#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace prmbound {

struct SdpBlock {
    int dim = 0;
    bool diagonal = false;
};

// Entry of a symmetric block-diagonal matrix, row <= col, 0-based.
struct SdpEntry {
    int block = 0;
    int row = 0;
    int col = 0;
    double value = 0;
};

struct SdpMatrix {
    std::vector<SdpEntry> entries;

    void add(int block, int row, int col, double value) {
        if (row > col) std::swap(row, col);
        entries.push_back({block, row, col, value});
    }
};

// maximise <C, X>  s.t.  <A_k, X> = b_k,  X psd (block diagonal)
// minimise b^T y   s.t.  sum_k y_k A_k - C = Z psd
struct SdpProblem {
    std::vector<SdpBlock> blocks;
    SdpMatrix objective;
    std::vector<SdpMatrix> constraints;
    std::vector<double> rhs;
    std::map<std::string, std::string> metadata;

    std::size_t total_dim() const {
        std::size_t n = 0;
        for (auto& b : blocks) n += static_cast<std::size_t>(b.dim);
        return n;
    }

    void validate() const {
        if (constraints.size() != rhs.size()) throw std::invalid_argument("SdpProblem: rhs size differs from constraint count");
        auto check = [&](const SdpMatrix& m) {
            for (auto& e : m.entries) {
                if (e.block < 0 || e.block >= static_cast<int>(blocks.size())) throw std::invalid_argument("SdpProblem: bad block index");
                const auto& b = blocks[e.block];
                if (e.row < 0 || e.col < e.row || e.col >= b.dim) throw std::invalid_argument("SdpProblem: entry out of range");
                if (b.diagonal && e.row != e.col) throw std::invalid_argument("SdpProblem: off-diagonal entry in diagonal block");
                if (!std::isfinite(e.value)) throw std::invalid_argument("SdpProblem: non-finite coefficient");
            }
        };
        check(objective);
        for (auto& c : constraints) check(c);
        for (double v : rhs)
            if (!std::isfinite(v)) throw std::invalid_argument("SdpProblem: non-finite rhs");
    }
};

enum class SdpStatus { Optimal, MaxIter, PrimalInfeasible, DualInfeasible, NumericalFailure };

inline const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::Optimal: return "Optimal";
        case SdpStatus::MaxIter: return "MaxIter";
        case SdpStatus::PrimalInfeasible: return "PrimalInfeasible";
        case SdpStatus::DualInfeasible: return "DualInfeasible";
        case SdpStatus::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

// One block of a block-diagonal matrix; diagonal blocks keep only the diagonal.
struct BlockValue {
    bool diagonal = false;
    Eigen::MatrixXd dense;
    Eigen::VectorXd diag;
};

using BlockMatrix = std::vector<BlockValue>;

struct SolverOptions {
    double gapTol = 1e-8;
    int maxIter = 200;
    double eigTol = 1e-7;
    double feasTol = 1e-8;
    double stepFraction = 0.98;
    std::function<void(const std::string&)> log;  // per-iteration progress when set
};

struct Solution {
    SdpStatus status = SdpStatus::NumericalFailure;
    double primalValue = 0;  // <C, X>
    double dualValue = 0;    // b^T y
    double gap = 0;          // |p - d| / (1 + |p| + |d|)
    double primalInfeasibility = 0;
    double dualInfeasibility = 0;
    BlockMatrix blocks;  // X
    BlockMatrix slack;   // Z
    std::vector<double> dualVector;
    int iterations = 0;
    double seconds = 0;
};

namespace detail {

struct FullEntry {
    int r, c;
    double v;
};

inline BlockMatrix zeros_like(const std::vector<SdpBlock>& blocks) {
    BlockMatrix m(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        m[b].diagonal = blocks[b].diagonal;
        if (blocks[b].diagonal) m[b].diag = Eigen::VectorXd::Zero(blocks[b].dim);
        else m[b].dense = Eigen::MatrixXd::Zero(blocks[b].dim, blocks[b].dim);
    }
    return m;
}

inline BlockMatrix scaled_identity(const std::vector<SdpBlock>& blocks, double s) {
    BlockMatrix m = zeros_like(blocks);
    for (auto& b : m) {
        if (b.diagonal) b.diag.setConstant(s);
        else b.dense.diagonal().setConstant(s);
    }
    return m;
}

inline double inner(const BlockMatrix& a, const BlockMatrix& b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k].diagonal ? a[k].diag.dot(b[k].diag) : (a[k].dense.array() * b[k].dense.array()).sum();
    return s;
}

inline double frob_norm(const BlockMatrix& a) { return std::sqrt(inner(a, a)); }

inline void axpy(BlockMatrix& y, double alpha, const BlockMatrix& x) {
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (y[k].diagonal) y[k].diag += alpha * x[k].diag;
        else y[k].dense += alpha * x[k].dense;
    }
}

inline BlockMatrix to_blocks(const SdpMatrix& m, const std::vector<SdpBlock>& blocks) {
    BlockMatrix out = zeros_like(blocks);
    for (auto& e : m.entries) {
        auto& b = out[e.block];
        if (b.diagonal) {
            b.diag(e.row) += e.value;
        } else {
            b.dense(e.row, e.col) += e.value;
            if (e.row != e.col) b.dense(e.col, e.row) += e.value;
        }
    }
    return out;
}

// Largest alpha with x + alpha*dx psd (infinity if unbounded).
inline double max_step(const BlockMatrix& x, const BlockMatrix& dx) {
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k].diagonal) {
            for (Eigen::Index i = 0; i < x[k].diag.size(); ++i)
                if (dx[k].diag(i) < 0) alpha = std::min(alpha, -x[k].diag(i) / dx[k].diag(i));
            continue;
        }
        if (x[k].dense.rows() == 0) continue;
        Eigen::LLT<Eigen::MatrixXd> llt(x[k].dense);
        if (llt.info() != Eigen::Success) return 0;
        Eigen::MatrixXd t = llt.matrixL().solve(dx[k].dense);
        t = llt.matrixL().solve(t.transpose()).transpose();
        Eigen::MatrixXd sym = 0.5 * (t + t.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
        double lmin = es.eigenvalues()(0);
        if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
    }
    return alpha;
}

}  // namespace detail

// Primal-dual interior point method, HKM direction with Mehrotra predictor-corrector.
class SdpSolver {
public:
    SdpSolver(const SdpProblem& p, SolverOptions opts) : p_(p), opts_(std::move(opts)) {
        p_.validate();
        m_ = static_cast<int>(p_.constraints.size());
        nb_ = p_.blocks.size();
        denseCons_.resize(nb_);
        diagCons_.resize(nb_);
        for (std::size_t b = 0; b < nb_; ++b)
            if (p_.blocks[b].diagonal) diagCons_[b].resize(p_.blocks[b].dim);
        for (int k = 0; k < m_; ++k) {
            std::map<int, std::vector<detail::FullEntry>> perBlock;
            for (auto& e : p_.constraints[k].entries) {
                if (p_.blocks[e.block].diagonal) {
                    diagCons_[e.block][e.row].push_back({k, e.value});
                } else {
                    auto& list = perBlock[e.block];
                    list.push_back({e.row, e.col, e.value});
                    if (e.row != e.col) list.push_back({e.col, e.row, e.value});
                }
            }
            for (auto& [b, list] : perBlock) denseCons_[b].push_back({k, std::move(list)});
        }
        // merge duplicate diagonal entries of one constraint
        for (auto& blk : diagCons_)
            for (auto& list : blk) {
                std::sort(list.begin(), list.end(), [](auto& a, auto& b) { return a.first < b.first; });
                std::vector<std::pair<int, double>> merged;
                for (auto& kv : list) {
                    if (!merged.empty() && merged.back().first == kv.first) merged.back().second += kv.second;
                    else merged.push_back(kv);
                }
                list = std::move(merged);
            }
        C_ = detail::to_blocks(p_.objective, p_.blocks);
        b_ = Eigen::Map<const Eigen::VectorXd>(p_.rhs.data(), m_);
    }

    Solution solve() {
        using namespace detail;
        const auto& blocks = p_.blocks;
        const double N = static_cast<double>(std::max<std::size_t>(1, p_.total_dim()));
        double cmax = 0;
        for (auto& e : p_.objective.entries) cmax = std::max(cmax, std::abs(e.value));
        double bmax = b_.size() ? b_.cwiseAbs().maxCoeff() : 0.0;
        double mu0 = 1.0 + std::max(bmax, cmax);
        BlockMatrix X = scaled_identity(blocks, mu0);
        BlockMatrix Z = scaled_identity(blocks, mu0);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
        const double bnorm = b_.norm(), cnorm = frob_norm(C_);

        Solution sol;
        M_.resize(m_, m_);
        for (int iter = 0;; ++iter) {
            Eigen::VectorXd rp = b_ - apply_A(X);
            BlockMatrix Rd = C_;
            axpy(Rd, -1.0, apply_At(y));
            axpy(Rd, 1.0, Z);
            double pobj = inner(C_, X), dobj = b_.dot(y);
            double mu = inner(X, Z) / N;
            double relgap = std::abs(pobj - dobj) / (1 + std::abs(pobj) + std::abs(dobj));
            double pinf = rp.norm() / (1 + bnorm);
            double dinf = frob_norm(Rd) / (1 + cnorm);
            sol.iterations = iter;
            fill(sol, X, Z, y, pobj, dobj, relgap, pinf, dinf);
            if (opts_.log) {
                char buf[200];
                std::snprintf(buf, sizeof buf, "%3d  p=% .10e  d=% .10e  gap=%.2e  pinf=%.2e  dinf=%.2e  mu=%.2e", iter, pobj, dobj, relgap,
                              pinf, dinf, mu);
                opts_.log(buf);
            }
            if (relgap <= opts_.gapTol && pinf <= opts_.feasTol && dinf <= opts_.feasTol) {
                sol.status = SdpStatus::Optimal;
                return sol;
            }
            // infeasibility: y/(-b^T y) is a ray with A^T y psd; X/<C,X> is a ray with A(X) = 0
            if (dobj < 0) {
                BlockMatrix atyz = C_;
                axpy(atyz, -1.0, Rd);
                if (frob_norm(atyz) <= 1e-8 * (-dobj) && -dobj > 1e6 * (1 + cnorm)) {
                    sol.status = SdpStatus::PrimalInfeasible;
                    return sol;
                }
            }
            if (pobj > 0) {
                Eigen::VectorXd ax = b_ - rp;
                if (ax.norm() <= 1e-8 * pobj && pobj > 1e6 * (1 + bnorm)) {
                    sol.status = SdpStatus::DualInfeasible;
                    return sol;
                }
            }
            if (iter >= opts_.maxIter) {
                sol.status = SdpStatus::MaxIter;
                return sol;
            }

            // Z^{-1}
            BlockMatrix Zi = zeros_like(blocks);
            for (std::size_t k = 0; k < nb_; ++k) {
                if (Z[k].diagonal) {
                    Zi[k].diag = Z[k].diag.cwiseInverse();
                } else if (Z[k].dense.rows() > 0) {
                    Eigen::LLT<Eigen::MatrixXd> llt(Z[k].dense);
                    if (llt.info() != Eigen::Success) {
                        sol.status = SdpStatus::NumericalFailure;
                        note("dual slack lost definiteness");
                        return sol;
                    }
                    Zi[k].dense = llt.solve(Eigen::MatrixXd::Identity(Z[k].dense.rows(), Z[k].dense.rows()));
                    Zi[k].dense = 0.5 * (Zi[k].dense + Zi[k].dense.transpose());
                }
            }
            if (!factor_schur(X, Zi)) {
                sol.status = SdpStatus::NumericalFailure;
                note("Schur complement factorization failed");
                return sol;
            }

            // X Rd Z^{-1}
            BlockMatrix XRdZi = product3(X, Rd, Zi);

            // predictor
            BlockMatrix Rc = X;
            for (auto& b : Rc) {
                if (b.diagonal) b.diag = -b.diag;
                else b.dense = -b.dense;
            }
            BlockMatrix dX, dZ;
            Eigen::VectorXd dy;
            direction(Rc, XRdZi, rp, Rd, X, Zi, dX, dy, dZ);
            double ap = std::min(1.0, max_step(X, dX));
            double ad = std::min(1.0, max_step(Z, dZ));
            BlockMatrix Xa = X, Za = Z;
            axpy(Xa, ap, dX);
            axpy(Za, ad, dZ);
            double muAff = inner(Xa, Za) / N;
            double sigma = std::pow(std::max(0.0, muAff / mu), 3);
            sigma = std::min(1.0, std::max(sigma, 0.0));

            // corrector: sigma*mu*Z^{-1} - X - dXp dZp Z^{-1}
            BlockMatrix corr = product3(dX, dZ, Zi);
            Rc = Zi;
            for (std::size_t k = 0; k < nb_; ++k) {
                if (Rc[k].diagonal) Rc[k].diag = sigma * mu * Zi[k].diag - X[k].diag - corr[k].diag;
                else Rc[k].dense = sigma * mu * Zi[k].dense - X[k].dense - corr[k].dense;
            }
            direction(Rc, XRdZi, rp, Rd, X, Zi, dX, dy, dZ);
            ap = std::min(1.0, opts_.stepFraction * max_step(X, dX));
            ad = std::min(1.0, opts_.stepFraction * max_step(Z, dZ));
            if (!(ap > 0) || !(ad > 0) || !std::isfinite(ap) || !std::isfinite(ad)) {
                sol.status = SdpStatus::NumericalFailure;
                note("zero step length");
                return sol;
            }
            axpy(X, ap, dX);
            axpy(Z, ad, dZ);
            y += ad * dy;
            if (!std::isfinite(inner(X, X)) || !std::isfinite(y.squaredNorm())) {
                sol.status = SdpStatus::NumericalFailure;
                return sol;
            }
        }
    }

private:
    Eigen::VectorXd apply_A(const BlockMatrix& g) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
        for (int k = 0; k < m_; ++k) {
            double s = 0;
            for (auto& e : p_.constraints[k].entries) {
                const auto& b = g[e.block];
                if (b.diagonal) s += e.value * b.diag(e.row);
                else s += e.value * (e.row == e.col ? b.dense(e.row, e.col) : b.dense(e.row, e.col) + b.dense(e.col, e.row));
            }
            out(k) = s;
        }
        return out;
    }

    BlockMatrix apply_At(const Eigen::VectorXd& y) const {
        BlockMatrix out = detail::zeros_like(p_.blocks);
        for (int k = 0; k < m_; ++k) {
            double yk = y(k);
            if (yk == 0) continue;
            for (auto& e : p_.constraints[k].entries) {
                auto& b = out[e.block];
                if (b.diagonal) {
                    b.diag(e.row) += yk * e.value;
                } else {
                    b.dense(e.row, e.col) += yk * e.value;
                    if (e.row != e.col) b.dense(e.col, e.row) += yk * e.value;
                }
            }
        }
        return out;
    }

    BlockMatrix product3(const BlockMatrix& a, const BlockMatrix& b, const BlockMatrix& c) const {
        BlockMatrix out = detail::zeros_like(p_.blocks);
        for (std::size_t k = 0; k < nb_; ++k) {
            if (out[k].diagonal) out[k].diag = a[k].diag.cwiseProduct(b[k].diag).cwiseProduct(c[k].diag);
            else if (out[k].dense.rows() > 0) out[k].dense.noalias() = a[k].dense * (b[k].dense * c[k].dense);
        }
        return out;
    }

    // Schur complement M_ij = <A_i, X A_j Z^{-1}>, factored in place.
    bool factor_schur(const BlockMatrix& X, const BlockMatrix& Zi) {
        M_.setZero();
        for (std::size_t b = 0; b < nb_; ++b) {
            if (p_.blocks[b].diagonal) {
                for (std::size_t d = 0; d < diagCons_[b].size(); ++d) {
                    const auto& list = diagCons_[b][d];
                    double f = X[b].diag(d) * Zi[b].diag(d);
                    for (std::size_t i = 0; i < list.size(); ++i)
                        for (std::size_t j = i; j < list.size(); ++j) {
                            int ki = list[i].first, kj = list[j].first;
                            double v = f * list[i].second * list[j].second;
                            if (ki <= kj) M_(ki, kj) += v;
                            else M_(kj, ki) += v;
                        }
                }
                continue;
            }
            const Eigen::MatrixXd& Xb = X[b].dense;
            const Eigen::MatrixXd& Wb = Zi[b].dense;
            const auto& list = denseCons_[b];
            const Eigen::Index n = Xb.rows(), K = static_cast<Eigen::Index>(list.size());
            if (K * n * n <= (Eigen::Index(1) << 24)) {
                // local Schur block: Q(i,:) = vec(X A_i W), Mb = Q P^T with P(j,:) = vec(A_j)
                Eigen::MatrixXd Q(K, n * n);
                Eigen::MatrixXd G(n, n);
                for (Eigen::Index i = 0; i < K; ++i) {
                    G.setZero();
                    for (const auto& e : list[i].second) G.noalias() += e.v * Xb.col(e.r) * Wb.row(e.c);
                    Q.row(i) = Eigen::Map<const Eigen::RowVectorXd>(G.data(), n * n);
                }
                Eigen::VectorXd col(K);
                for (Eigen::Index j = 0; j < K; ++j) {
                    col.setZero();
                    for (const auto& f : list[j].second) col += f.v * Q.col(f.r + f.c * n);
                    const int kj = list[j].first;
                    for (Eigen::Index i = 0; i <= j; ++i) M_(list[i].first, kj) += col(i);
                }
                continue;
            }
            // column-ordered pair formula for large sparse blocks
            for (Eigen::Index j = 0; j < K; ++j) {
                const auto& ej = list[j].second;
                const int kj = list[j].first;
                for (Eigen::Index i = 0; i <= j; ++i) {
                    const auto& ei = list[i].second;
                    double acc = 0;
                    for (const auto& e : ei)
                        for (const auto& f : ej) acc += e.v * f.v * Xb(e.c, f.r) * Wb(f.c, e.r);
                    M_(list[i].first, kj) += acc;
                }
            }
        }
        Eigen::VectorXd diag = M_.diagonal();
        diag_ = diag;
        mirror_upper();
        llt_ = std::make_unique<Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>>>(M_);
        if (llt_->info() == Eigen::Success) return true;
        mirror_upper();
        double reg = 1e-12 * std::max(1.0, diag.cwiseAbs().maxCoeff());
        M_.diagonal() = diag.array() + reg;
        llt_ = std::make_unique<Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>>>(M_);
        return llt_->info() == Eigen::Success;
    }

    // Schur solve with iterative refinement against the intact upper triangle.
    Eigen::VectorXd schur_solve(const Eigen::VectorXd& rhs) const {
        Eigen::VectorXd x = llt_->solve(rhs);
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXd r = rhs - diag_.cwiseProduct(x);
            r.noalias() -= M_.triangularView<Eigen::StrictlyUpper>() * x;
            r.noalias() -= M_.triangularView<Eigen::StrictlyUpper>().transpose() * x;
            x += llt_->solve(r);
        }
        return x;
    }

    void note(const char* msg) const {
        if (opts_.log) opts_.log(std::string("stopped: ") + msg);
    }

    void mirror_upper() {
        const Eigen::Index n = M_.rows(), tile = 64;
        for (Eigen::Index jb = 0; jb < n; jb += tile)
            for (Eigen::Index ib = jb; ib < n; ib += tile)
                for (Eigen::Index j = jb; j < std::min(n, jb + tile); ++j)
                    for (Eigen::Index i = std::max(ib, j + 1); i < std::min(n, ib + tile); ++i) M_(i, j) = M_(j, i);
    }

    void direction(const BlockMatrix& Rc, const BlockMatrix& XRdZi, const Eigen::VectorXd& rp, const BlockMatrix& Rd,
                   const BlockMatrix& X, const BlockMatrix& Zi, BlockMatrix& dX, Eigen::VectorXd& dy, BlockMatrix& dZ) const {
        BlockMatrix g = Rc;
        detail::axpy(g, 1.0, XRdZi);
        Eigen::VectorXd rhs = apply_A(g) - rp;
        dy = schur_solve(rhs);
        dZ = apply_At(dy);
        detail::axpy(dZ, -1.0, Rd);
        BlockMatrix t = product3(X, dZ, Zi);
        dX = Rc;
        for (std::size_t k = 0; k < nb_; ++k) {
            if (dX[k].diagonal) dX[k].diag -= t[k].diag;
            else {
                dX[k].dense -= t[k].dense;
                dX[k].dense = 0.5 * (dX[k].dense + dX[k].dense.transpose()).eval();
            }
        }
    }

    void fill(Solution& s, const BlockMatrix& X, const BlockMatrix& Z, const Eigen::VectorXd& y, double p, double d, double gap,
              double pinf, double dinf) const {
        s.primalValue = p;
        s.dualValue = d;
        s.gap = gap;
        s.primalInfeasibility = pinf;
        s.dualInfeasibility = dinf;
        s.blocks = X;
        s.slack = Z;
        s.dualVector.assign(y.data(), y.data() + y.size());
    }

    SdpProblem p_;
    SolverOptions opts_;
    int m_ = 0;
    std::size_t nb_ = 0;
    std::vector<std::vector<std::pair<int, std::vector<detail::FullEntry>>>> denseCons_;
    std::vector<std::vector<std::vector<std::pair<int, double>>>> diagCons_;
    BlockMatrix C_;
    Eigen::VectorXd b_;
    Eigen::MatrixXd M_;
    Eigen::VectorXd diag_;
    std::unique_ptr<Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>>> llt_;
};

inline Solution solve(const SdpProblem& p, const SolverOptions& opts = {}) {
    auto t0 = std::chrono::steady_clock::now();
    SdpSolver s(p, opts);
    Solution sol = s.solve();
    sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
}

// Smallest eigenvalue over all blocks.
inline double min_eigenvalue(const BlockMatrix& m) {
    double lo = std::numeric_limits<double>::infinity();
    for (auto& b : m) {
        if (b.diagonal) {
            if (b.diag.size()) lo = std::min(lo, b.diag.minCoeff());
        } else if (b.dense.rows() > 0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.dense, Eigen::EigenvaluesOnly);
            lo = std::min(lo, es.eigenvalues()(0));
        }
    }
    return lo;
}

}  // namespace prmbound
