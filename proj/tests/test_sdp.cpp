#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "prmbound/sdp.hpp"
#include "prmbound/sdpa.hpp"
#include "sdp_battery.hpp"

using namespace prmbound;
using namespace prmbound::battery;

namespace {

SdpProblem trace_problem(double rhs) {
    SdpProblem p;
    p.blocks = {{2, false}};
    SdpMatrix a;
    a.add(0, 0, 0, 1);
    a.add(0, 1, 1, 1);
    p.constraints = {a};
    p.rhs = {rhs};
    return p;
}

}  // namespace

TEST(Sdp, DiagonalObjectiveUnitTrace) {
    auto p = trace_problem(1);
    p.objective.add(0, 0, 0, 1);
    p.objective.add(0, 1, 1, -1);
    auto s = solve(p);
    ASSERT_EQ(s.status, SdpStatus::Optimal);
    EXPECT_NEAR(s.primalValue, 1, 1e-7);
    EXPECT_NEAR(s.dualValue, 1, 1e-7);
}

TEST(Sdp, LargestEigenvalue) {
    // min t s.t. t I - [[2,1],[1,2]] psd
    auto p = trace_problem(1);
    p.objective.add(0, 0, 0, 2);
    p.objective.add(0, 1, 1, 2);
    p.objective.add(0, 0, 1, 1);
    auto s = solve(p);
    ASSERT_EQ(s.status, SdpStatus::Optimal);
    EXPECT_NEAR(s.dualValue, 3, 1e-7);
    EXPECT_NEAR(s.dualVector[0], 3, 1e-6);
}

TEST(Sdp, NegativeTraceIsPrimalInfeasible) {
    auto p = trace_problem(-1);
    p.objective.add(0, 0, 0, 1);
    p.objective.add(0, 1, 1, 1);
    EXPECT_EQ(solve(p).status, SdpStatus::PrimalInfeasible);
}

TEST(Sdp, UnboundedPrimalIsDualInfeasible) {
    // maximise X11 with only X22 = 1 fixed
    SdpProblem p;
    p.blocks = {{2, false}};
    SdpMatrix a;
    a.add(0, 1, 1, 1);
    p.constraints = {a};
    p.rhs = {1};
    p.objective.add(0, 0, 0, 1);
    EXPECT_EQ(solve(p).status, SdpStatus::DualInfeasible);
}

TEST(Sdp, RandomFeasibleBattery) {
    std::mt19937 rng(20240601);
    int optimal = 0;
    for (int t = 0; t < 100; ++t) {
        auto p = random_problem(rng);
        auto s = solve(p);
        EXPECT_EQ(s.status, SdpStatus::Optimal) << "problem " << t;
        if (s.status != SdpStatus::Optimal) continue;
        ++optimal;
        EXPECT_LE(s.gap, 1e-7) << t;
        // independent verification: primal and dual feasibility plus matching objectives
        for (std::size_t k = 0; k < p.constraints.size(); ++k)
            EXPECT_NEAR(inner(p.constraints[k], p.blocks, s.blocks), p.rhs[k], 1e-7 * (1 + std::abs(p.rhs[k]))) << t;
        auto c = dense(p.objective, p.blocks);
        for (std::size_t b = 0; b < p.blocks.size(); ++b) {
            EXPECT_GE(min_eig(block_of(s.blocks[b])), -1e-7) << t;
            Eigen::MatrixXd z = -c[b];
            for (std::size_t k = 0; k < p.constraints.size(); ++k) z += s.dualVector[k] * dense(p.constraints[k], p.blocks)[b];
            EXPECT_GE(min_eig(z), -1e-7) << t;
        }
        double pobj = inner(p.objective, p.blocks, s.blocks), dobj = 0;
        for (std::size_t k = 0; k < p.rhs.size(); ++k) dobj += p.rhs[k] * s.dualVector[k];
        EXPECT_NEAR(pobj, s.primalValue, 1e-9 * (1 + std::abs(pobj)));
        EXPECT_NEAR(pobj, dobj, 1e-6 * (1 + std::abs(pobj))) << t;
        EXPECT_GE(dobj, pobj - 1e-7 * (1 + std::abs(pobj))) << t;
    }
    EXPECT_EQ(optimal, 100);
}

TEST(Sdp, Deterministic) {
    std::mt19937 rng(7);
    auto p = random_problem(rng);
    auto a = solve(p), b = solve(p);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(a.primalValue, b.primalValue);
    EXPECT_EQ(a.dualVector, b.dualVector);
}

TEST(Sdpa, RoundTripIsIdentity) {
    std::mt19937 rng(11);
    for (int t = 0; t < 30; ++t) {
        auto p = random_problem(rng);
        auto q = parse_sdpa(format_sdpa(p));
        ASSERT_EQ(q.blocks.size(), p.blocks.size());
        for (std::size_t b = 0; b < p.blocks.size(); ++b) {
            EXPECT_EQ(q.blocks[b].dim, p.blocks[b].dim);
            EXPECT_EQ(q.blocks[b].diagonal, p.blocks[b].diagonal);
        }
        ASSERT_EQ(q.rhs.size(), p.rhs.size());
        for (std::size_t k = 0; k < p.rhs.size(); ++k) EXPECT_LE(std::abs(q.rhs[k] - p.rhs[k]), 1e-15 * std::abs(p.rhs[k]));
        auto same = [](const SdpMatrix& x, const SdpMatrix& y) {
            if (x.entries.size() != y.entries.size()) return false;
            for (std::size_t i = 0; i < x.entries.size(); ++i) {
                auto &e = x.entries[i], &f = y.entries[i];
                if (e.block != f.block || e.row != f.row || e.col != f.col) return false;
                if (std::abs(e.value - f.value) > 1e-15 * std::abs(e.value)) return false;
            }
            return true;
        };
        EXPECT_TRUE(same(p.objective, q.objective));
        for (std::size_t k = 0; k < p.constraints.size(); ++k) EXPECT_TRUE(same(p.constraints[k], q.constraints[k]));
        EXPECT_EQ(format_sdpa(q), format_sdpa(p));
    }
}

TEST(Sdpa, HeaderLayout) {
    auto p = trace_problem(1);
    p.objective.add(0, 0, 0, 1);
    auto text = format_sdpa(p);
    EXPECT_EQ(text, "1\n1\n2\n1\n0 1 1 1 1\n1 1 1 1 1\n1 1 2 2 1\n");
}

TEST(Sdpa, NegativeBlockSizeIsDiagonal) {
    auto p = parse_sdpa("1\n2\n2 -3\n1.5\n0 2 3 3 1\n1 1 1 2 0.5\n");
    ASSERT_EQ(p.blocks.size(), 2u);
    EXPECT_EQ(p.blocks[1].dim, 3);
    EXPECT_TRUE(p.blocks[1].diagonal);
    EXPECT_FALSE(p.blocks[0].diagonal);
    EXPECT_EQ(p.rhs[0], 1.5);
}

TEST(Sdpa, CommentsAndPunctuation) {
    auto p = parse_sdpa("* comment\n\"title\n1\n1\n{2}\n(3.0)\n1 1 1 1 1\n");
    EXPECT_EQ(p.rhs[0], 3.0);
    EXPECT_EQ(p.constraints[0].entries.size(), 1u);
}

TEST(Sdpa, MalformedInputs) {
    EXPECT_THROW(parse_sdpa(""), std::runtime_error);
    EXPECT_THROW(parse_sdpa("1\n1\n2\n"), std::runtime_error);
    EXPECT_THROW(parse_sdpa("1\n1\n2\n1\n2 1 1 1 1\n"), std::runtime_error);
    EXPECT_THROW(parse_sdpa("1\n1\n-2\n1\n1 1 1 2 1\n"), std::runtime_error);
    EXPECT_THROW(parse_sdpa("1\n1\n2\n1\n1 1 1 3 1\n"), std::runtime_error);
    EXPECT_THROW(parse_sdpa("1\n1\n2\n1\n1 1 1\n"), std::runtime_error);
    EXPECT_THROW(read_sdpa("/nonexistent/file.dat-s"), std::runtime_error);
}
