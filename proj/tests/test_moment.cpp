#include <cmath>

#include <gtest/gtest.h>

#include "prmbound/certificates.hpp"
#include "prmbound/moment.hpp"

using namespace prmbound;

namespace {

ConstraintSystem disc_system(int vars) {
    ConstraintSystem sys;
    Poly radius(1);
    Poly objective;
    for (int k = 0; k < vars; ++k) {
        auto v = sys.vars.add("x" + std::to_string(k), VarGroup::State);
        radius = radius - Poly::var(v) * Poly::var(v);
        objective = objective + Poly::var(v);
    }
    sys.inequalities.push_back({"disc", "toy", radius});
    sys.objective = objective;
    return sys;
}

double min_eig(const BlockMatrix& m) { return min_eigenvalue(m); }

}  // namespace

TEST(Moment, LabelCountsPerLevel) {
    auto sys = assemble(2, {0, 1}, chsh());
    EXPECT_EQ(build_basis(sys, Level::L1).labels.size(), 18u);
    EXPECT_EQ(build_basis(sys, Level::L1ABstar).labels.size(), 90u);
    EXPECT_EQ(build_basis(sys, Level::L1AB).labels.size(), 154u);
    EXPECT_EQ(build_basis(sys, Level::L2).labels.size(), 171u);
}

TEST(Moment, LevelNamesRoundTrip) {
    for (auto l : {Level::L1, Level::L1ABstar, Level::L1AB, Level::L2}) EXPECT_EQ(parse_level(level_name(l)), l);
    EXPECT_THROW(parse_level("3"), std::invalid_argument);
}

TEST(Moment, BasesAreNested) {
    auto sys = assemble(2, {0, 1}, chsh());
    auto l1 = build_basis(sys, Level::L1), star = build_basis(sys, Level::L1ABstar), ab = build_basis(sys, Level::L1AB),
         l2 = build_basis(sys, Level::L2);
    auto contains = [](const MomentBasis& big, const MomentBasis& small) {
        for (auto& m : small.labels)
            if (big.id(m) < 0 || std::find(big.labels.begin(), big.labels.end(), m) == big.labels.end()) return false;
        return true;
    };
    EXPECT_TRUE(contains(star, l1));
    EXPECT_TRUE(contains(ab, star));
    EXPECT_TRUE(contains(l2, ab));
    EXPECT_EQ(l1.moments.front(), Monomial());
}

TEST(Moment, UnitIntervalToy) {
    for (auto level : {Level::L1, Level::L2}) {
        auto sys = disc_system(1);
        auto rel = relax(sys, level);
        auto s = solve(rel.problem);
        ASSERT_EQ(s.status, SdpStatus::Optimal);
        EXPECT_NEAR(rel.bound(s), 1.0, 1e-6);
        EXPECT_NEAR(rel.moment_bound(s), 1.0, 1e-6);
    }
}

TEST(Moment, DiscToyReachesSqrtTwo) {
    auto sys = disc_system(2);
    auto r = solve_relaxation(sys, Level::L2);
    ASSERT_EQ(r.status, SdpStatus::Optimal);
    EXPECT_NEAR(r.bound, std::sqrt(2.0), 1e-6);
}

TEST(Moment, EqualityToyBinaryVariable) {
    ConstraintSystem sys;
    auto x = sys.vars.add("x", VarGroup::State);
    sys.equalities.push_back({"binary", "toy", Poly::var(x) * Poly::var(x) - Poly::var(x)});
    sys.objective = Poly::var(x);
    auto r = solve_relaxation(sys, Level::L2);
    ASSERT_EQ(r.status, SdpStatus::Optimal);
    EXPECT_NEAR(r.bound, 1.0, 1e-6);
}

TEST(Moment, MomentVectorIsThePointAtOptimum) {
    auto sys = disc_system(1);
    auto rel = relax(sys, Level::L2);
    auto s = solve(rel.problem);
    ASSERT_EQ(s.status, SdpStatus::Optimal);
    int idx = rel.basis.id(Monomial::var(0));
    EXPECT_NEAR(s.dualVector[idx - 1], 1.0, 1e-5);
    EXPECT_NEAR(rel.blocks_at(s.dualVector)[0].dense(0, 0), 1.0, 1e-12);
}

TEST(Moment, UnrepresentableConstraintIsDroppedWithWarning) {
    ConstraintSystem sys;
    auto x = sys.vars.add("x", VarGroup::State);
    Poly px = Poly::var(x);
    sys.inequalities.push_back({"cubic", "toy", Poly(1) - px * px * px});
    sys.inequalities.push_back({"box", "toy", Poly(1) - px * px});
    sys.objective = px;
    auto rel = relax(sys, Level::L1);
    ASSERT_EQ(rel.dropped.size(), 1u);
    EXPECT_EQ(rel.dropped[0], "cubic");
    ASSERT_EQ(rel.warnings.size(), 1u);
}

TEST(Moment, ObjectiveScalingIsUndone) {
    auto sys = disc_system(1);
    sys.objective = Poly(Rational(7)) * sys.objective + Poly(Rational(2));
    auto r = solve_relaxation(sys, Level::L1);
    ASSERT_EQ(r.status, SdpStatus::Optimal);
    EXPECT_NEAR(r.bound, 9.0, 1e-5);
}

TEST(Moment, WitnessLiftIsFeasibleForEveryBlock) {
    for (auto w : {quantum_chsh_witness(3), tsirelson_point_n2()}) {
        ASSERT_TRUE(w.feasible());
        auto sys = assemble(w.n, w.iota, chsh());
        auto point = sys.point(w.table, w.prmValues);
        for (auto level : {Level::L1, Level::L1ABstar}) {
            auto rel = relax(sys, level);
            auto y = rel.lift(point);
            EXPECT_GE(min_eig(rel.blocks_at(y)), -1e-9) << w.source << " " << level_name(level);
            EXPECT_NEAR(rel.objective_at(y), w.objectiveValue, 1e-12);
        }
    }
}

TEST(Moment, LevelOneBoundsEveryWitness) {
    auto w = tsirelson_point_n2();
    auto r = solve_relaxation(assemble(2, {0, 1}, chsh()), Level::L1);
    ASSERT_EQ(r.status, SdpStatus::Optimal);
    EXPECT_GE(r.bound, w.objectiveValue - 1e-7);
    EXPECT_LE(r.bound, 0.5 + 1e-6);
    EXPECT_NEAR(r.bound, r.dualBound, 1e-6);
}

TEST(Moment, LevelCompareNeedsTwoLevels) {
    auto sys = disc_system(1);
    EXPECT_THROW(level_compare(sys, {Level::L1}), std::invalid_argument);
    auto cmp = level_compare(sys, {Level::L1, Level::L2});
    EXPECT_LE(cmp[Level::L2].bound, cmp[Level::L1].bound + 1e-7);
}
