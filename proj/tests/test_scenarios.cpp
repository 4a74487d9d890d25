#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "prmbound/certificates.hpp"
#include "prmbound/scenarios.hpp"

using namespace prmbound;

TEST(Scenarios, ReferenceBounds) {
    auto c = chsh();
    EXPECT_EQ(*c.bounds.classical, 0.0);
    EXPECT_NEAR(*c.bounds.quantum, 0.20710678118654752, 1e-15);
    EXPECT_EQ(c.bounds.noSignalling, 0.5);

    auto a = amp(1, 0);
    EXPECT_DOUBLE_EQ(*a.bounds.classical, 2.0);
    EXPECT_DOUBLE_EQ(*a.bounds.quantum, 2 * std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(a.bounds.noSignalling, 4.0);

    auto q = aq();
    EXPECT_NEAR(*q.bounds.classical, 30.0 / 31.0, 1e-15);
    EXPECT_FALSE(q.bounds.quantum.has_value());
    EXPECT_EQ(q.bounds.quantumStrictlyBelow, 1.0);
}

TEST(Scenarios, BoundsAreOrdered) {
    for (auto& row : amp_table()) {
        if (row.gammaValue() >= 2) continue;
        auto f = amp(row.alphaValue(), row.gammaValue());
        EXPECT_LE(*f.bounds.classical, *f.bounds.quantum + 1e-12) << row.index;
        EXPECT_LE(*f.bounds.quantum, f.bounds.noSignalling + 1e-12) << row.index;
    }
    auto c = chsh();
    EXPECT_LE(*c.bounds.classical, *c.bounds.quantum);
    EXPECT_LE(*c.bounds.quantum, c.bounds.noSignalling);
}

TEST(Scenarios, AmpRangeChecks) {
    EXPECT_THROW(amp(Rational(1, 2), 0), std::invalid_argument);
    EXPECT_THROW(amp(1, 2), std::invalid_argument);
    EXPECT_THROW(amp(1, -1), std::invalid_argument);
}

TEST(Scenarios, AmpAtOneZeroIsScaledChsh) {
    auto a = amp(1, 0).coeffs, c = chsh().coeffs;
    EXPECT_EQ(a, c.scaled(Rational(4)) + unit_effect(2).scaled(Rational(2)));
}

TEST(Scenarios, AmpTable) {
    auto t = amp_table();
    ASSERT_EQ(t.size(), 36u);
    EXPECT_EQ(t[0].alphaValue(), 1);
    EXPECT_EQ(t[0].gammaValue(), 0);
    EXPECT_EQ(t[11].alpha, "3");
    EXPECT_EQ(t[11].gamma, "0.666666667");
    EXPECT_EQ(t[35].alpha, "11");
    EXPECT_EQ(t[35].gamma, "0.181818182");
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_EQ(t[i].index, static_cast<int>(i));
        if (i == 5) EXPECT_THROW(amp(t[i].alphaValue(), t[i].gammaValue()), std::invalid_argument);
        else EXPECT_NO_THROW(amp(t[i].alphaValue(), t[i].gammaValue()));
    }
    EXPECT_EQ(t[5].gamma, "2");
}

TEST(Scenarios, ChshTwoSettingCounts) {
    auto s = assemble(2, {0, 1}, chsh());
    EXPECT_EQ(s.vars.size(), 17u);
    EXPECT_EQ(s.state_vars().size(), 8u);
    EXPECT_EQ(s.prm_vars().size(), 9u);
    EXPECT_EQ(s.count("state"), 16u);
    EXPECT_EQ(s.count("prm-on-state"), 4u);
    EXPECT_EQ(s.count("steered"), 64u);
    EXPECT_TRUE(s.equalities.empty());
}

TEST(Scenarios, ThreeSettingCounts) {
    auto s = assemble(3, {0, 1}, chsh());
    EXPECT_EQ(s.state_vars().size(), 15u);
    EXPECT_EQ(s.prm_vars().size(), 16u);

    auto q = assemble(3, {0, 1, 2}, aq(), signature_restriction("quantum"));
    EXPECT_EQ(q.prm.outcome_count(), 4u);
    // independent listing: 2 outcomes x 3 settings steered states per party
    std::size_t pairs = 0;
    for (int x = 0; x < 3; ++x)
        for (int a = 0; a < 2; ++a)
            for (int y = 0; y < 3; ++y)
                for (int b = 0; b < 2; ++b) ++pairs;
    EXPECT_EQ(q.count("steered"), pairs * 4);
    EXPECT_EQ(q.count("state"), 36u);
}

TEST(Scenarios, ConstraintDegrees) {
    for (auto& s : {assemble(2, {0, 1}, chsh()), assemble(3, {0, 1}, chsh())}) {
        EXPECT_EQ(s.objective.degree(), 1);
        for (auto& g : s.inequalities) {
            if (g.group == "state") EXPECT_EQ(g.poly.degree(), 1) << g.label;
            if (g.group == "prm-on-state") EXPECT_EQ(g.poly.degree(), 2) << g.label;
            if (g.group == "steered") EXPECT_LE(g.poly.degree(), 3) << g.label;
        }
        std::set<VarId> used;
        for (auto& g : s.inequalities)
            for (auto v : g.poly.variables()) used.insert(v);
        for (auto v : s.objective.variables()) used.insert(v);
        EXPECT_EQ(used.size(), s.vars.size());
        for (auto v : s.objective.variables()) EXPECT_EQ(s.vars.at(v).group, VarGroup::State);
    }
}

TEST(Scenarios, ObjectiveAtPrBox) {
    auto s = assemble(2, {0, 1}, chsh());
    auto pr = pr_box_state();
    Assignment a;
    for (int r = 0; r <= 2; ++r)
        for (int c = 0; c <= 2; ++c)
            if (s.stateTable(r, c).degree() == 1) a[s.stateTable(r, c).terms().begin()->first.factors()[0].first] = pr.table(r, c);
    EXPECT_EQ(evaluate(s.objective, a), Rational(1, 2));
    EXPECT_EQ(chsh().evaluate(pr), Rational(1, 2));
}

TEST(Scenarios, Signatures) {
    auto s = signatures();
    ASSERT_EQ(s.size(), 8u);
    EXPECT_EQ(s[3].tag, "quantum");
    EXPECT_EQ(s[4].tag, "mirror-quantum");
    using T = std::array<int, 3>;
    std::set<T> quantum(s[3].signs.begin(), s[3].signs.end()), mirror(s[4].signs.begin(), s[4].signs.end());
    EXPECT_EQ(quantum, (std::set<T>{{-1, -1, -1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, -1}}));
    EXPECT_EQ(mirror, (std::set<T>{{-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}, {1, 1, 1}}));
    std::set<std::set<T>> distinct;
    for (auto& sig : s) {
        std::set<T> set(sig.signs.begin(), sig.signs.end());
        EXPECT_EQ(set.size(), 4u);
        distinct.insert(set);
    }
    EXPECT_EQ(distinct.size(), 8u);
    EXPECT_EQ(signature_restriction("mirror").name, "mirror-quantum");
    EXPECT_THROW(signature_restriction("nine"), std::invalid_argument);
}

TEST(Scenarios, AssembleRejectsBadShapes) {
    EXPECT_THROW(assemble(4, {0, 1}, chsh()), std::invalid_argument);
    EXPECT_THROW(assemble(3, {0, 2}, chsh()), std::invalid_argument);
    EXPECT_THROW(parse_restriction("bogus"), std::invalid_argument);
}

TEST(Scenarios, QuantumRealisationsSatisfyConstraints) {
    for (auto fp : {quantum_chsh_witness(3), tsirelson_point_n2()}) {
        EXPECT_GE(fp.minSlack, -1e-12) << fp.source << " " << fp.worstConstraint;
        EXPECT_NEAR(fp.objectiveValue, (std::sqrt(2.0) - 1) / 2, 1e-12) << fp.source;
    }
}

TEST(Scenarios, JsonDump) {
    auto j = assemble(2, {0, 1}, chsh()).to_json();
    EXPECT_EQ(j["variables"].size(), 17u);
    EXPECT_EQ(j["inequalities"].size(), 84u);
    EXPECT_EQ(j["restriction"], "none");
    EXPECT_FALSE(j["objective"].empty());
}
