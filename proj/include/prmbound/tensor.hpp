#pragma once

// Standard includes
#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "prmbound/exact_linear.hpp"
#include "prmbound/matrix.hpp"
#include "prmbound/polynomial.hpp"
#include "prmbound/rational.hpp"

namespace prmbound {

// Local state vector: fiducial outcome-0 probabilities, then the weight.
template <class T>
struct LocalState {
    std::vector<T> coeffs;

    int n() const { return static_cast<int>(coeffs.size()) - 1; }
    const T& weight() const { return coeffs.back(); }
};

// Bipartite table in the layout
//   [ p(00|xy)   ... p1(0|x) ]
//   [ p2(0|y)    ...    1    ]
// rows indexed by party-1 settings, columns by party-2 settings.
template <class T>
struct BipartiteState {
    int n = 0;
    Matrix<T> table;
    std::optional<T> holistic;

    BipartiteState() = default;
    BipartiteState(int n_, Matrix<T> t, std::optional<T> w = std::nullopt) : n(n_), table(std::move(t)), holistic(std::move(w)) {
        if (n <= 0 || table.rows() != static_cast<std::size_t>(n + 1) || table.cols() != static_cast<std::size_t>(n + 1))
            throw std::invalid_argument("BipartiteState: table must be (n+1)x(n+1)");
    }

    const T& weight() const { return table(n, n); }
    const T& marginal1(int x) const { return table(x, n); }
    const T& marginal2(int y) const { return table(n, y); }

    // p(ab|xy) reconstructed from the table; subnormalised tables give subnormalised joints.
    T joint(int a, int b, int x, int y) const {
        const T& t = table(x, y);
        if (a == 0 && b == 0) return t;
        if (a == 0 && b == 1) return table(x, n) - t;
        if (a == 1 && b == 0) return table(n, y) - t;
        return table(n, n) - table(x, n) - table(n, y) + t;
    }
};

// Numeric validity: bottom-right 1, all reconstructed joints >= -tol.
template <class T>
bool is_valid_state(const BipartiteState<T>& s, const T& tol) {
    if (s.table(s.n, s.n) - T(1) > tol || T(1) - s.table(s.n, s.n) > tol) return false;
    for (int x = 0; x < s.n; ++x)
        for (int y = 0; y < s.n; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    if (s.joint(a, b, x, y) < -tol) return false;
    return true;
}

// Rebuilds a table from a full set of joint distributions p[x][y][a][b].
template <class T>
BipartiteState<T> table_from_joints(int n, const std::vector<std::vector<std::array<std::array<T, 2>, 2>>>& p) {
    Matrix<T> t(n + 1, n + 1);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) t(x, y) = p[x][y][0][0];
    for (int x = 0; x < n; ++x) t(x, n) = p[x][0][0][0] + p[x][0][0][1];
    for (int y = 0; y < n; ++y) t(n, y) = p[0][y][0][0] + p[0][y][1][0];
    t(n, n) = T(1);
    return BipartiteState<T>(n, t);
}

// Fiducial measurement: e_{0|x} is the x-th coordinate covector, e_{1|x} = u - e_{0|x}.
struct FiducialMeasurement {
    int n = 0;

    explicit FiducialMeasurement(int n_) : n(n_) {
        if (n <= 0) throw std::invalid_argument("FiducialMeasurement: n must be positive");
    }

    std::vector<Rational> effect(int x, int a) const {
        if (x < 0 || x >= n || (a != 0 && a != 1)) throw std::out_of_range("FiducialMeasurement: bad setting/outcome");
        std::vector<Rational> e(n + 1, Rational(0));
        if (a == 0) {
            e[x] = 1;
        } else {
            e[n] = 1;
            e[x] = -1;
        }
        return e;
    }
    std::vector<Rational> unit() const {
        std::vector<Rational> u(n + 1, Rational(0));
        u[n] = 1;
        return u;
    }
    // F^a_{x,v}
    Rational entry(int a, int x, int v) const { return effect(x, a).at(v); }
};

struct SteeredState {
    int party = 0;    // 1 or 2: whose local state this is
    int setting = 0;  // setting of the other party's fiducial effect
    int outcome = 0;
};

template <class T>
struct SteeredLocal {
    SteeredState tag;
    LocalState<T> state;
};

// Party 1's state steered by party 2's effect e_{b|y}: column combination.
// Party 2's state steered by party 1's effect e_{a|x}: row combination.
template <class T>
std::vector<SteeredLocal<T>> steered_states(const BipartiteState<T>& s, const FiducialMeasurement& F) {
    if (F.n != s.n) throw std::invalid_argument("steered_states: dimension mismatch");
    int n = s.n;
    std::vector<SteeredLocal<T>> out;
    for (int party = 1; party <= 2; ++party)
        for (int x = 0; x < n; ++x)
            for (int a = 0; a < 2; ++a) {
                auto e = F.effect(x, a);
                LocalState<T> ls;
                ls.coeffs.assign(n + 1, T(0));
                for (int i = 0; i <= n; ++i)
                    for (int j = 0; j <= n; ++j) {
                        const Rational& coef = party == 1 ? e[j] : e[i];
                        if (coef == 0) continue;
                        int slot = party == 1 ? i : j;
                        ls.coeffs[slot] += s.table(i, j) * T(coef);
                    }
                out.push_back({{party, x, a}, ls});
            }
    return out;
}

template <class T>
BipartiteState<T> product_state(const LocalState<T>& left, const LocalState<T>& right) {
    if (left.n() != right.n()) throw std::invalid_argument("product_state: dimension mismatch");
    return BipartiteState<T>(left.n(), outer(left.coeffs, right.coeffs));
}

// R^i = e_i (x) e_i + (u - e_i) (x) (u - e_i): probability that setting i agrees on both sides.
inline RationalMatrix parity_matrix(int n, int i) {
    if (i < 0 || i >= n) throw std::out_of_range("parity_matrix: setting out of range");
    RationalMatrix r(n + 1, n + 1);
    r(i, i) = 2;
    r(i, n) = -1;
    r(n, i) = -1;
    r(n, n) = 1;
    return r;
}

inline RationalMatrix unit_effect(int n) {
    RationalMatrix u(n + 1, n + 1);
    u(n, n) = 1;
    return u;
}

// Correlator matrix for setting i: 2 R^i - 1, so that its value is <A_i B_i>.
inline RationalMatrix correlator_matrix(int n, int i) {
    return parity_matrix(n, i).scaled(Rational(2)) - unit_effect(n);
}

inline Matrix<Poly> to_poly(const RationalMatrix& m) {
    return m.map<Poly>([](const Rational& r) { return Poly(r); });
}

struct PrmRestriction {
    enum class Kind { None, Signature, Span };
    Kind kind = Kind::None;
    std::string name;                        // signature name when Kind::Signature
    std::vector<std::array<int, 3>> signs;   // +1 / -1 per (XX, YY, ZZ), one tuple per effect

    static PrmRestriction none() { return {}; }
    static PrmRestriction span() { return {Kind::Span, "span", {}}; }
    static PrmRestriction signature(std::string name, std::vector<std::array<int, 3>> signs) {
        return {Kind::Signature, std::move(name), std::move(signs)};
    }
    std::string str() const {
        switch (kind) {
            case Kind::None: return "none";
            case Kind::Span: return "span";
            case Kind::Signature: return "signature:" + name;
        }
        return "none";
    }
};

// PRM effects as (n+1)x(n+1) matrices whose entries are affine in the free variables.
struct SymbolicPrm {
    int n = 0;
    std::vector<int> iota;
    PrmRestriction restriction;
    // bits[k][i] = parity bit reported for setting iota[i] (0 = agree) by effect k
    std::vector<std::vector<int>> bits;
    std::vector<Matrix<Poly>> effects;
    std::vector<VarId> freeVars;
    std::vector<std::string> freeNames;

    std::size_t outcome_count() const { return effects.size(); }

    std::string outcome_label(std::size_t k) const {
        std::string s;
        for (int b : bits.at(k)) s += static_cast<char>('0' + b);
        return s;
    }

    Matrix<Poly> total() const {
        Matrix<Poly> acc(n + 1, n + 1);
        for (auto& e : effects) acc += e;
        return acc;
    }
    // Sum of all effects whose parity bit for iota[i] equals bit.
    Matrix<Poly> marginal(std::size_t i, int bit = 0) const {
        Matrix<Poly> acc(n + 1, n + 1);
        for (std::size_t k = 0; k < effects.size(); ++k)
            if (bits[k].at(i) == bit) acc += effects[k];
        return acc;
    }
    // Effect with every free variable set to zero.
    RationalMatrix fixed_part(std::size_t k) const {
        Assignment zero;
        for (auto v : freeVars) zero[v] = 0;
        return effects.at(k).map<Rational>([&](const Poly& p) { return evaluate(p, zero); });
    }
    // Agreement-weighted combination sum_k (-1)^{sum bits} P_k; the free block C for |iota|=2.
    Matrix<Poly> character() const {
        Matrix<Poly> acc(n + 1, n + 1);
        for (std::size_t k = 0; k < effects.size(); ++k) {
            int parity = 0;
            for (int b : bits[k]) parity ^= b;
            acc += parity ? effects[k].scaled(Rational(-1)) : effects[k];
        }
        return acc;
    }
    bool invariants_hold() const {
        if (total() != to_poly(unit_effect(n))) return false;
        for (std::size_t i = 0; i < iota.size(); ++i)
            if (marginal(i) != to_poly(parity_matrix(n, iota[i]))) return false;
        return true;
    }
    // Numeric effects for a full assignment of the free variables.
    std::vector<RationalMatrix> instantiate(const Assignment& a) const {
        std::vector<RationalMatrix> out;
        for (auto& e : effects) out.push_back(e.map<Rational>([&](const Poly& p) { return evaluate(p, a); }));
        return out;
    }
};

namespace detail {

inline std::string block_index_name(int r, int c) { return std::to_string(r + 1) + std::to_string(c + 1); }

// Writes the affine solution of one unknown vector as polynomials, registering free variables.
inline std::vector<Poly> affine_to_polys(const AffineSolution& sol, const std::vector<std::string>& columnNames,
                                         VariableRegistry& reg, SymbolicPrm& prm) {
    std::vector<Poly> coords(sol.particular.size());
    for (std::size_t j = 0; j < coords.size(); ++j) coords[j] = Poly(sol.particular[j]);
    for (std::size_t f = 0; f < sol.freeColumns.size(); ++f) {
        const std::string& nm = columnNames[sol.freeColumns[f]];
        VarId v = reg.add(nm, VarGroup::Prm);
        prm.freeVars.push_back(v);
        prm.freeNames.push_back(nm);
        Poly pv = Poly::var(v);
        for (std::size_t j = 0; j < coords.size(); ++j)
            if (sol.directions[f][j] != 0) coords[j] += pv * sol.directions[f][j];
    }
    return coords;
}

// Basis of linear functionals vanishing on span{2R^j - 1 (all j), 1}.
inline std::vector<RationalVector> span_annihilator(int n) {
    std::size_t d = static_cast<std::size_t>((n + 1) * (n + 1));
    RationalMatrix b(n + 1, d);
    for (int j = 0; j < n; ++j) {
        auto cm = correlator_matrix(n, j);
        for (std::size_t e = 0; e < d; ++e) b(j, e) = cm.data()[e];
    }
    b(n, d - 1) = 1;
    return nullspace(b);
}

}  // namespace detail

// Parameterises the PRM on settings iota over exact rationals; free variables are added to reg.
inline SymbolicPrm prm_parameterize(int n, const std::vector<int>& iota, const PrmRestriction& restriction,
                                    VariableRegistry& reg) {
    const std::size_t k = iota.size();
    if (k != 2 && k != 3) throw std::invalid_argument("prm_parameterize: |iota| must be 2 or 3");
    if (n < static_cast<int>(k)) throw std::invalid_argument("prm_parameterize: n must be at least |iota|");
    for (std::size_t i = 0; i < k; ++i) {
        if (iota[i] < 0 || iota[i] >= n) throw std::invalid_argument("prm_parameterize: iota is not a subset of the settings");
        for (std::size_t j = 0; j < i; ++j)
            if (iota[i] == iota[j]) throw std::invalid_argument("prm_parameterize: repeated setting in iota");
    }
    SymbolicPrm prm;
    prm.n = n;
    prm.iota = iota;
    prm.restriction = restriction;
    const std::size_t d = static_cast<std::size_t>((n + 1) * (n + 1));
    const RationalMatrix one = unit_effect(n);

    if (restriction.kind == PrmRestriction::Kind::Signature) {
        if (k != 3) throw std::invalid_argument("prm_parameterize: signature restriction needs |iota| = 3");
        const std::size_t ne = restriction.signs.size();
        if (ne == 0) throw std::invalid_argument("prm_parameterize: empty signature");
        // unknowns: entry e of effect q at column q*d + e; equations per entry
        RationalMatrix a((k + 1) * d, ne * d);
        RationalVector rhs((k + 1) * d, Rational(0));
        std::vector<RationalMatrix> targets{one};
        for (std::size_t i = 0; i < k; ++i) targets.push_back(parity_matrix(n, iota[i]));
        for (std::size_t eq = 0; eq <= k; ++eq)
            for (std::size_t e = 0; e < d; ++e) {
                std::size_t row = eq * d + e;
                for (std::size_t q = 0; q < ne; ++q) {
                    bool in = eq == 0 || restriction.signs[q][eq - 1] > 0;
                    if (in) a(row, q * d + e) = 1;
                }
                rhs[row] = targets[eq].data()[e];
            }
        AffineSolution sol = solve_affine(a, rhs);
        if (!sol.consistent) throw std::invalid_argument("prm_parameterize: signature '" + restriction.name + "' is inconsistent with the parity constraints");
        std::vector<std::string> names(ne * d);
        for (std::size_t q = 0; q < ne; ++q)
            for (int r = 0; r <= n; ++r)
                for (int c = 0; c <= n; ++c)
                    names[q * d + r * (n + 1) + c] = "e" + std::to_string(q) + "_" + detail::block_index_name(r, c);
        auto coords = detail::affine_to_polys(sol, names, reg, prm);
        for (std::size_t q = 0; q < ne; ++q) {
            Matrix<Poly> m(n + 1, n + 1);
            for (std::size_t e = 0; e < d; ++e) m(e / (n + 1), e % (n + 1)) = coords[q * d + e];
            prm.effects.push_back(m);
            std::vector<int> b;
            for (std::size_t i = 0; i < k; ++i) b.push_back(restriction.signs[q][i] > 0 ? 0 : 1);
            prm.bits.push_back(b);
        }
        return prm;
    }

    // Character blocks K_S for S subset of {0..k-1}, ordered by size then lexicographically.
    std::vector<std::vector<std::size_t>> subsets;
    for (std::size_t size = 0; size <= k; ++size)
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
            if (static_cast<std::size_t>(__builtin_popcount(mask)) != size) continue;
            std::vector<std::size_t> s;
            for (std::size_t i = 0; i < k; ++i)
                if (mask & (1u << i)) s.push_back(i);
            subsets.push_back(s);
        }
    std::sort(subsets.begin(), subsets.end(), [](const auto& x, const auto& y) {
        return x.size() != y.size() ? x.size() < y.size() : x < y;
    });
    const std::size_t nb = subsets.size();
    std::vector<std::vector<Rational>> rows;
    RationalVector rhs;
    auto add_row = [&](std::vector<Rational> r, Rational v) {
        rows.push_back(std::move(r));
        rhs.push_back(v);
    };
    std::vector<RationalVector> annihilator;
    if (restriction.kind == PrmRestriction::Kind::Span) annihilator = detail::span_annihilator(n);
    for (std::size_t s = 0; s < nb; ++s) {
        const auto& S = subsets[s];
        if (S.size() <= 1) {
            RationalMatrix target = S.empty() ? one : correlator_matrix(n, iota[S[0]]);
            for (std::size_t e = 0; e < d; ++e) {
                std::vector<Rational> r(nb * d, Rational(0));
                r[s * d + e] = 1;
                add_row(std::move(r), target.data()[e]);
            }
        } else {
            for (auto& phi : annihilator) {
                std::vector<Rational> r(nb * d, Rational(0));
                for (std::size_t e = 0; e < d; ++e) r[s * d + e] = phi[e];
                add_row(std::move(r), Rational(0));
            }
        }
    }
    RationalMatrix a(rows.size(), nb * d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < nb * d; ++j) a(i, j) = rows[i][j];
    AffineSolution sol = solve_affine(a, rhs);
    if (!sol.consistent) throw std::logic_error("prm_parameterize: parity system inconsistent");
    std::vector<std::string> names(nb * d);
    for (std::size_t s = 0; s < nb; ++s) {
        std::string tag;
        for (auto i : subsets[s]) tag += std::to_string(i);
        for (int r = 0; r <= n; ++r)
            for (int c = 0; c <= n; ++c)
                names[s * d + r * (n + 1) + c] = (k == 2 ? "c" : "c" + tag + "_") + detail::block_index_name(r, c);
    }
    auto coords = detail::affine_to_polys(sol, names, reg, prm);
    Rational norm = Rational(1) / Rational(1u << k);
    for (unsigned out = 0; out < (1u << k); ++out) {
        std::vector<int> b(k);
        for (std::size_t i = 0; i < k; ++i) b[i] = (out >> (k - 1 - i)) & 1u;
        Matrix<Poly> m(n + 1, n + 1);
        for (std::size_t s = 0; s < nb; ++s) {
            int sign = 1;
            for (auto i : subsets[s])
                if (b[i]) sign = -sign;
            for (std::size_t e = 0; e < d; ++e) {
                const Poly& v = coords[s * d + e];
                if (v.is_zero()) continue;
                m(e / (n + 1), e % (n + 1)) += v * Rational(sign);
            }
        }
        prm.effects.push_back(m.scaled(norm));
        prm.bits.push_back(b);
    }
    return prm;
}

inline SymbolicPrm prm_parameterize(int n, const std::vector<int>& iota, const PrmRestriction& restriction = {}) {
    VariableRegistry reg;
    return prm_parameterize(n, iota, restriction, reg);
}

// Frobenius pairing of an effect with a state table.
template <class E, class S>
auto apply_effect(const Matrix<E>& effect, const BipartiteState<S>& s) {
    return frobenius(effect, s.table);
}

// Pairing with a holistic coordinate: LT part plus effect coefficient times state coefficient.
template <class E, class S>
auto apply_effect(const Matrix<E>& effect, const E& holisticCoef, const BipartiteState<S>& s) {
    if (!s.holistic) throw std::invalid_argument("apply_effect: state has no holistic parameter");
    return frobenius(effect, s.table) + holisticCoef * *s.holistic;
}

struct HolisticProduct {
    SteeredState left, right;
    LocalState<Rational> leftState, rightState;
    Rational w;
};

struct NonLtState {
    BipartiteState<Rational> state;
    std::vector<HolisticProduct> products;
};

inline Rational holistic_value(const RationalMatrix& h, const LocalState<Rational>& u, const LocalState<Rational>& v) {
    return frobenius(h, outer(u.coeffs, v.coeffs));
}

// Attaches w_NL to s and assigns each steered product the holistic value h.(s_i (x) s_j).
inline NonLtState nonlt_extend(const BipartiteState<Rational>& s, const Rational& wNL, const RationalMatrix& h) {
    if (s.n != 2) throw std::invalid_argument("nonlt_extend: only n = 2 is supported");
    if (h.rows() != 3 || h.cols() != 3) throw std::invalid_argument("nonlt_extend: h must be 3x3");
    NonLtState out{BipartiteState<Rational>(s.n, s.table, wNL), {}};
    auto st = steered_states(s, FiducialMeasurement(s.n));
    for (auto& l : st) {
        if (l.tag.party != 1) continue;
        for (auto& r : st) {
            if (r.tag.party != 2) continue;
            out.products.push_back({l.tag, r.tag, l.state, r.state, holistic_value(h, l.state, r.state)});
        }
    }
    return out;
}

// JSON schema {"n": int, "table": [[...]], "holistic": number|null}.
template <class T>
nlohmann::json state_to_json(const BipartiteState<T>& s) {
    auto num = [](const T& v) -> double {
        if constexpr (std::is_same_v<T, Rational>) return to_double(v);
        else return static_cast<double>(v);
    };
    nlohmann::json j;
    j["n"] = s.n;
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r <= s.n; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c <= s.n; ++c) row.push_back(num(s.table(r, c)));
        rows.push_back(row);
    }
    j["table"] = rows;
    j["holistic"] = s.holistic ? nlohmann::json(num(*s.holistic)) : nlohmann::json(nullptr);
    return j;
}

inline BipartiteState<double> state_from_json(const nlohmann::json& j) {
    int n = j.at("n").get<int>();
    const auto& rows = j.at("table");
    if (n <= 0 || rows.size() != static_cast<std::size_t>(n + 1)) throw std::invalid_argument("state_from_json: bad table shape");
    Matrix<double> t(n + 1, n + 1);
    for (int r = 0; r <= n; ++r) {
        if (rows[r].size() != static_cast<std::size_t>(n + 1)) throw std::invalid_argument("state_from_json: bad row length");
        for (int c = 0; c <= n; ++c) t(r, c) = rows[r][c].get<double>();
    }
    std::optional<double> w;
    if (j.contains("holistic") && !j["holistic"].is_null()) w = j["holistic"].get<double>();
    return BipartiteState<double>(n, t, w);
}

}  // namespace prmbound
