#pragma once

// Standard includes
#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prmbound/rational.hpp"

namespace prmbound {

using VarId = std::uint32_t;

// Product of variables with positive exponents, kept sorted by variable id.
class Monomial {
public:
    using Factor = std::pair<VarId, std::uint32_t>;

    Monomial() = default;
    static Monomial var(VarId v, std::uint32_t e = 1) {
        Monomial m;
        if (e > 0) {
            m.factors_.push_back({v, e});
            m.degree_ = e;
        }
        return m;
    }
    static Monomial from_factors(std::vector<Factor> fs) {
        std::sort(fs.begin(), fs.end());
        Monomial m;
        for (auto& [v, e] : fs) {
            if (e == 0) continue;
            if (!m.factors_.empty() && m.factors_.back().first == v) m.factors_.back().second += e;
            else m.factors_.push_back({v, e});
            m.degree_ += e;
        }
        return m;
    }

    const std::vector<Factor>& factors() const { return factors_; }
    std::uint32_t degree() const { return degree_; }
    bool is_one() const { return factors_.empty(); }

    std::uint32_t exponent(VarId v) const {
        for (auto& [w, e] : factors_)
            if (w == v) return e;
        return 0;
    }

    friend Monomial operator*(const Monomial& a, const Monomial& b) {
        Monomial m;
        m.factors_.reserve(a.factors_.size() + b.factors_.size());
        std::size_t i = 0, j = 0;
        while (i < a.factors_.size() || j < b.factors_.size()) {
            if (j == b.factors_.size() || (i < a.factors_.size() && a.factors_[i].first < b.factors_[j].first)) {
                m.factors_.push_back(a.factors_[i++]);
            } else if (i == a.factors_.size() || b.factors_[j].first < a.factors_[i].first) {
                m.factors_.push_back(b.factors_[j++]);
            } else {
                m.factors_.push_back({a.factors_[i].first, a.factors_[i].second + b.factors_[j].second});
                ++i;
                ++j;
            }
        }
        m.degree_ = a.degree_ + b.degree_;
        return m;
    }

    bool operator==(const Monomial& o) const { return factors_ == o.factors_; }
    bool operator!=(const Monomial& o) const { return !(*this == o); }

    // Graded order: lower degree first; within a degree, larger exponent of the
    // smallest variable id first, so x0 < x1 and x0^2 < x0 x1 < x1^2.
    bool operator<(const Monomial& o) const {
        if (degree_ != o.degree_) return degree_ < o.degree_;
        std::size_t n = std::min(factors_.size(), o.factors_.size());
        for (std::size_t k = 0; k < n; ++k) {
            const auto& a = factors_[k];
            const auto& b = o.factors_[k];
            if (a.first != b.first) return a.first < b.first;
            if (a.second != b.second) return a.second > b.second;
        }
        return false;  // equal degree and equal prefix means equal
    }

    std::size_t hash() const {
        std::size_t h = 1469598103934665603ull;
        for (auto& [v, e] : factors_) {
            h ^= (static_cast<std::size_t>(v) << 8) ^ e;
            h *= 1099511628211ull;
        }
        return h;
    }

    template <class NameFn>
    std::string str(NameFn name) const {
        if (factors_.empty()) return "1";
        std::string s;
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            if (k) s += "*";
            s += name(factors_[k].first);
            if (factors_[k].second > 1) s += "^" + std::to_string(factors_[k].second);
        }
        return s;
    }

private:
    std::vector<Factor> factors_;
    std::uint32_t degree_ = 0;
};

struct MonomialHash {
    std::size_t operator()(const Monomial& m) const { return m.hash(); }
};

// Sparse multivariate polynomial with exact rational coefficients.
class Poly {
public:
    using Terms = std::map<Monomial, Rational>;

    Poly() = default;
    Poly(int c) { if (c != 0) terms_[Monomial()] = Rational(c); }
    Poly(const Rational& c) { if (c != 0) terms_[Monomial()] = c; }
    Poly(const Monomial& m, const Rational& c = 1) { if (c != 0) terms_[m] = c; }
    static Poly var(VarId v) { return Poly(Monomial::var(v)); }

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    int degree() const {
        int d = -1;
        for (auto& [m, c] : terms_) d = std::max<int>(d, static_cast<int>(m.degree()));
        return d;
    }

    Rational coefficient(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Rational(0) : it->second;
    }
    Rational constant() const { return coefficient(Monomial()); }

    void add_term(const Monomial& m, const Rational& c) {
        if (c == 0) return;
        auto [it, inserted] = terms_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Poly& operator+=(const Poly& o) {
        for (auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        for (auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    Poly& operator*=(const Rational& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, c] : terms_) c *= s;
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator-(Poly a) { return a *= Rational(-1); }
    friend Poly operator*(Poly a, const Rational& s) { return a *= s; }
    friend Poly operator*(const Rational& s, Poly a) { return a *= s; }

    friend Poly operator*(const Poly& a, const Poly& b) {
        Poly out;
        for (auto& [ma, ca] : a.terms_)
            for (auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
        return out;
    }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }

    bool operator==(const Poly& o) const { return terms_ == o.terms_; }
    bool operator!=(const Poly& o) const { return !(*this == o); }

    std::vector<VarId> variables() const {
        std::vector<VarId> vs;
        for (auto& [m, c] : terms_)
            for (auto& [v, e] : m.factors()) vs.push_back(v);
        std::sort(vs.begin(), vs.end());
        vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
        return vs;
    }

    template <class NameFn>
    std::string str(NameFn name) const {
        if (terms_.empty()) return "0";
        std::string s;
        bool first = true;
        for (auto& [m, c] : terms_) {
            Rational a = c;
            if (!first) s += a < 0 ? " - " : " + ";
            else if (a < 0) s += "-";
            if (a < 0) a = -a;
            if (m.is_one()) s += to_string(a);
            else if (a == 1) s += m.str(name);
            else s += to_string(a) + "*" + m.str(name);
            first = false;
        }
        return s;
    }
    std::string str() const {
        return str([](VarId v) { return "x" + std::to_string(v); });
    }

private:
    Terms terms_;
};

using Assignment = std::map<VarId, Rational>;

// Partial substitution; unassigned variables stay symbolic.
inline Poly substitute(const Poly& p, const Assignment& a) {
    Poly out;
    for (auto& [m, c] : p.terms()) {
        Rational coef = c;
        std::vector<Monomial::Factor> rest;
        for (auto& [v, e] : m.factors()) {
            auto it = a.find(v);
            if (it == a.end()) {
                rest.push_back({v, e});
            } else {
                Rational pw = 1;
                for (std::uint32_t k = 0; k < e; ++k) pw *= it->second;
                coef *= pw;
            }
        }
        out.add_term(Monomial::from_factors(std::move(rest)), coef);
    }
    return out;
}

// Full evaluation; throws if a variable is unassigned.
inline Rational evaluate(const Poly& p, const Assignment& a) {
    Rational acc = 0;
    for (auto& [m, c] : p.terms()) {
        Rational t = c;
        for (auto& [v, e] : m.factors()) {
            auto it = a.find(v);
            if (it == a.end()) throw std::invalid_argument("evaluate: variable " + std::to_string(v) + " has no value");
            for (std::uint32_t k = 0; k < e; ++k) t *= it->second;
        }
        acc += t;
    }
    return acc;
}

// Float evaluation with values indexed by variable id.
inline double evaluate(const Poly& p, const std::vector<double>& values) {
    double acc = 0;
    for (auto& [m, c] : p.terms()) {
        double t = to_double(c);
        for (auto& [v, e] : m.factors()) {
            if (v >= values.size()) throw std::invalid_argument("evaluate: variable " + std::to_string(v) + " has no value");
            for (std::uint32_t k = 0; k < e; ++k) t *= values[v];
        }
        acc += t;
    }
    return acc;
}

inline double evaluate(const Monomial& m, const std::vector<double>& values) {
    double t = 1;
    for (auto& [v, e] : m.factors())
        for (std::uint32_t k = 0; k < e; ++k) t *= values.at(v);
    return t;
}

// All monomials of degree <= d in vars, in graded order.
inline std::vector<Monomial> monomials_up_to(const std::vector<VarId>& vars, unsigned d) {
    std::vector<VarId> vs = vars;
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    std::vector<Monomial> out{Monomial()};
    std::vector<Monomial> layer{Monomial()};
    std::vector<std::size_t> lastIdx{0};  // smallest var index allowed to extend each monomial
    for (unsigned deg = 1; deg <= d; ++deg) {
        std::vector<Monomial> next;
        std::vector<std::size_t> nextIdx;
        for (std::size_t k = 0; k < layer.size(); ++k)
            for (std::size_t i = lastIdx[k]; i < vs.size(); ++i) {
                next.push_back(layer[k] * Monomial::var(vs[i]));
                nextIdx.push_back(i);
            }
        std::vector<std::size_t> order(next.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return next[a] < next[b]; });
        layer.clear();
        lastIdx.clear();
        for (auto k : order) {
            layer.push_back(next[k]);
            lastIdx.push_back(nextIdx[k]);
        }
        out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
}

enum class VarGroup { State, Prm };

// Named variables with their group (state parameter or free PRM parameter).
class VariableRegistry {
public:
    struct Entry {
        std::string name;
        VarGroup group;
    };

    VarId add(const std::string& name, VarGroup group) {
        if (byName_.count(name)) throw std::invalid_argument("duplicate variable name '" + name + "'");
        VarId id = static_cast<VarId>(entries_.size());
        entries_.push_back({name, group});
        byName_[name] = id;
        return id;
    }

    std::size_t size() const { return entries_.size(); }
    const Entry& at(VarId v) const { return entries_.at(v); }
    const std::string& name(VarId v) const { return entries_.at(v).name; }
    std::optional<VarId> find(const std::string& name) const {
        auto it = byName_.find(name);
        if (it == byName_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<VarId> group(VarGroup g) const {
        std::vector<VarId> out;
        for (VarId v = 0; v < entries_.size(); ++v)
            if (entries_[v].group == g) out.push_back(v);
        return out;
    }
    std::vector<VarId> all() const {
        std::vector<VarId> out(entries_.size());
        for (VarId v = 0; v < entries_.size(); ++v) out[v] = v;
        return out;
    }

    auto namer() const {
        return [this](VarId v) { return v < entries_.size() ? entries_[v].name : "x" + std::to_string(v); };
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, VarId> byName_;
};

}  // namespace prmbound
