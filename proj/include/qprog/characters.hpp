// characters.hpp
// The full group of Dirichlet characters modulo q.
//
// (Z/qZ)^x is decomposed over the prime powers of q: a primitive root for
// each odd p^e, and the pair {-1, 5} for 2^e with e >= 3. Every unit gets a
// discrete-log vector against those generators, and a character is an
// exponent vector. Values are stored as phase indices into the L-th roots
// of unity, L the exponent of the group, so multiplicativity is exact
// at the index level.

#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "arith.hpp"

namespace qprog {

struct Generator {
    u64 residue;  // modulo q
    u64 order;
};

class Character {
public:
    static constexpr std::uint16_t kZero = 0xFFFF;

    u64 modulus() const { return modulus_; }
    const std::vector<u64>& exponent_vector() const { return exponents_; }
    u64 conductor() const { return conductor_; }
    bool is_primitive() const { return conductor_ == modulus_; }
    bool is_principal() const { return principal_; }

    /// χ(n); periodic in n with period q.
    std::complex<double> operator()(i64 n) const {
        const auto q = static_cast<i64>(modulus_);
        return at_residue(static_cast<u64>(((n % q) + q) % q));
    }
    std::complex<double> at_residue(u64 r) const {
        const auto ph = phases_[r];
        return ph == kZero ? std::complex<double>{} : (*roots_)[ph];
    }
    /// Phase index of χ(r) in the L-th roots of unity, or kZero.
    std::uint16_t phase(u64 r) const { return phases_[r]; }

    std::vector<std::complex<double>> values() const {
        std::vector<std::complex<double>> v(modulus_);
        for (u64 r = 0; r < modulus_; ++r) v[r] = at_residue(r);
        return v;
    }

private:
    friend class CharacterTable;
    u64 modulus_ = 1;
    std::vector<u64> exponents_;
    std::vector<std::uint16_t> phases_;
    u64 conductor_ = 1;
    bool principal_ = false;
    std::shared_ptr<const std::vector<std::complex<double>>> roots_;
};

inline std::complex<double> evaluate(const Character& chi, i64 n) { return chi(n); }

class CharacterTable {
public:
    static constexpr u64 kDefaultCap = 10000;

    static CharacterTable build(u64 q, u64 cap = kDefaultCap, bool allow_trivial = false);

    u64 modulus() const { return modulus_; }
    u64 exponent() const { return exponent_; }
    const std::vector<Generator>& generators() const { return generators_; }
    const std::vector<Character>& characters() const { return characters_; }
    std::size_t size() const { return characters_.size(); }
    const Character& operator[](std::size_t i) const { return characters_.at(i); }

    const Character& principal() const {
        for (const auto& c : characters_)
            if (c.is_principal()) return c;
        throw std::logic_error("character table without principal character");
    }

private:
    struct Component {
        u64 prime = 0;
        unsigned exponent = 0;
        u64 modulus = 1;                    // p^e
        std::vector<u64> orders;            // local generator orders
        std::vector<u64> local_generators;  // residues mod p^e
        std::vector<std::vector<u64>> logs; // logs[r] = exponents, empty if r not a unit
    };

    static Component make_component(u64 p, unsigned e);
    static u64 local_conductor(const Component& c, const std::vector<u64>& local_exponents);

    u64 modulus_ = 1;
    u64 exponent_ = 1;
    std::vector<Generator> generators_;
    std::vector<Character> characters_;
};

inline CharacterTable build_character_group(u64 q, u64 cap = CharacterTable::kDefaultCap) {
    return CharacterTable::build(q, cap);
}

inline std::vector<Character> primitive_characters(const CharacterTable& table) {
    std::vector<Character> out;
    for (const auto& c : table.characters())
        if (c.is_primitive()) out.push_back(c);
    return out;
}

// -------------------------------------------------------
// Implementation
// -------------------------------------------------------

namespace detail {

inline u64 primitive_root_mod_prime(u64 p) {
    if (p == 2) return 1;
    const auto factors = factorize(p - 1);
    for (u64 g = 2; g < p; ++g) {
        bool ok = true;
        for (const auto& f : factors)
            if (pow_mod(g, (p - 1) / f.prime, p) == 1) {
                ok = false;
                break;
            }
        if (ok) return g;
    }
    throw std::logic_error("no primitive root found");
}

}  // namespace detail

inline CharacterTable::Component CharacterTable::make_component(u64 p, unsigned e) {
    Component c;
    c.prime = p;
    c.exponent = e;
    c.modulus = static_cast<u64>(saturating_pow(p, e, kValueCap));
    const u64 m = c.modulus;
    c.logs.assign(m, {});
    if (p == 2) {
        if (e == 2) {
            c.local_generators = {3};
            c.orders = {2};
            c.logs[1] = {0};
            c.logs[3] = {1};
        } else if (e >= 3) {
            const u64 ord5 = m / 4;
            c.local_generators = {m - 1, 5};
            c.orders = {2, ord5};
            u64 x = 1;
            for (u64 b = 0; b < ord5; ++b) {
                c.logs[x] = {0, b};
                c.logs[m - x] = {1, b};
                x = x * 5 % m;
            }
        }
    } else {
        u64 g = detail::primitive_root_mod_prime(p);
        if (e >= 2 && pow_mod(g, p - 1, p * p) == 1) g += p;
        const u64 order = m / p * (p - 1);
        c.local_generators = {g};
        c.orders = {order};
        u64 x = 1;
        for (u64 k = 0; k < order; ++k) {
            c.logs[x] = {k};
            x = mul_mod(x, g, m);
        }
    }
    return c;
}

// Smallest p^f such that the local character is trivial on units r = 1 mod p^f.
inline u64 CharacterTable::local_conductor(const Component& c, const std::vector<u64>& a) {
    bool trivial = true;
    for (u64 x : a) trivial = trivial && x == 0;
    if (trivial) return 1;
    u64 local_exp = 1;
    for (u64 o : c.orders) local_exp = std::lcm(local_exp, o);
    auto phase = [&](u64 r) {
        u64 s = 0;
        for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * c.logs[r][j] * (local_exp / c.orders[j]);
        return s % local_exp;
    };
    u64 pf = c.prime;
    for (unsigned f = 1; f < c.exponent; ++f, pf *= c.prime) {
        bool ok = true;
        for (u64 r = 1; r < c.modulus && ok; r += pf)
            if (!c.logs[r].empty() && phase(r) != 0) ok = false;
        if (ok) return pf;
    }
    return c.modulus;
}

inline CharacterTable CharacterTable::build(u64 q, u64 cap, bool allow_trivial) {
    if (q == 0) throw std::invalid_argument("build_character_group: q must be >= 1");
    if (q == 1 && !allow_trivial)
        throw std::invalid_argument("build_character_group: q = 1 requires allow_trivial");
    if (q > cap)
        throw std::invalid_argument("build_character_group: q = " + std::to_string(q) + " exceeds cap " +
                                    std::to_string(cap));

    CharacterTable table;
    table.modulus_ = q;
    std::vector<Component> comps;
    for (const auto& [p, e] : factorize(q)) comps.push_back(make_component(p, e));

    // Lift local generators to residues mod q by CRT (1 on the other parts).
    struct GenRef {
        std::size_t comp, local;
    };
    std::vector<GenRef> refs;
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        const auto& c = comps[ci];
        const u64 cofactor = q / c.modulus;
        for (std::size_t j = 0; j < c.local_generators.size(); ++j) {
            u64 x = 1;
            while (x % c.modulus != c.local_generators[j] % c.modulus) x += cofactor;
            table.generators_.push_back({x % q, c.orders[j]});
            refs.push_back({ci, j});
            table.exponent_ = std::lcm(table.exponent_, c.orders[j]);
        }
    }
    const u64 L = table.exponent_;
    if (L >= Character::kZero) throw std::logic_error("group exponent too large for phase table");

    auto roots = std::make_shared<std::vector<std::complex<double>>>(L);
    for (u64 k = 0; k < L; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(L);
        (*roots)[k] = k == 0 ? std::complex<double>{1.0, 0.0} : std::polar(1.0, angle);
    }

    // Weighted global log of each unit: w_g(n) = log_g(n) * L / ord_g.
    const std::size_t ngen = refs.size();
    std::vector<std::vector<u64>> unit_logs(q);
    std::vector<bool> is_unit(q, false);
    for (u64 n = 0; n < q; ++n) {
        if (std::gcd(n, q) != 1) continue;
        is_unit[n] = true;
        auto& v = unit_logs[n];
        v.resize(ngen);
        for (std::size_t g = 0; g < ngen; ++g) {
            const auto& c = comps[refs[g].comp];
            v[g] = c.logs[n % c.modulus][refs[g].local] * (L / table.generators_[g].order);
        }
    }

    // Local conductors per component, indexed by the mixed-radix local exponent.
    std::vector<std::vector<u64>> local_cond(comps.size());
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        const auto& c = comps[ci];
        u64 count = 1;
        for (u64 o : c.orders) count *= o;
        local_cond[ci].resize(count);
        std::vector<u64> a(c.orders.size(), 0);
        for (u64 idx = 0; idx < count; ++idx) {
            u64 rest = idx;
            for (std::size_t j = 0; j < a.size(); ++j) {
                a[j] = rest % c.orders[j];
                rest /= c.orders[j];
            }
            local_cond[ci][idx] = local_conductor(c, a);
        }
    }

    u64 total = 1;
    for (const auto& g : table.generators_) total *= g.order;
    table.characters_.reserve(total);
    std::vector<u64> a(ngen, 0);
    for (u64 idx = 0; idx < total; ++idx) {
        u64 rest = idx;
        for (std::size_t g = 0; g < ngen; ++g) {
            a[g] = rest % table.generators_[g].order;
            rest /= table.generators_[g].order;
        }
        Character chi;
        chi.modulus_ = q;
        chi.exponents_ = a;
        chi.roots_ = roots;
        chi.principal_ = idx == 0;
        chi.phases_.assign(q, Character::kZero);
        for (u64 n = 0; n < q; ++n) {
            if (!is_unit[n]) continue;
            u64 s = 0;
            for (std::size_t g = 0; g < ngen; ++g) s += a[g] * unit_logs[n][g];
            chi.phases_[n] = static_cast<std::uint16_t>(s % L);
        }
        u64 cond = 1;
        std::size_t g0 = 0;
        for (std::size_t ci = 0; ci < comps.size(); ++ci) {
            u64 local_idx = 0, radix = 1;
            for (std::size_t j = 0; j < comps[ci].orders.size(); ++j, ++g0) {
                local_idx += a[g0] * radix;
                radix *= comps[ci].orders[j];
            }
            cond *= local_cond[ci][local_idx];
        }
        chi.conductor_ = cond;
        table.characters_.push_back(std::move(chi));
    }
    return table;
}

}  // namespace qprog
