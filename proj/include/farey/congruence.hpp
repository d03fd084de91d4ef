#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "farey/farey_core.hpp"
#include "farey/rational.hpp"

namespace farey {

constexpr i64 kMaxModulus = 4096;  // keys must fit: m^4 < 2^64

/**
 * @brief 2x2 matrix over Z/mZ with det = 1, entries normalized to [0, m).
 *
 * Each such matrix names one coset of the principal congruence subgroup of
 * level m. m = 1 runs through the same code path with all entries zero.
 */
struct ModMatrix {
    i64 m = 1;
    std::array<i64, 4> e{0, 0, 0, 0};  // e11 e12 e21 e22

    static ModMatrix reduce(i64 m, i64 e11, i64 e12, i64 e21, i64 e22) {
        auto norm = [m](i64 v) { return ((v % m) + m) % m; };
        ModMatrix r;
        r.m = m;
        r.e = {norm(e11), norm(e12), norm(e21), norm(e22)};
        return r;
    }

    static ModMatrix identity(i64 m) { return reduce(m, 1, 0, 0, 1); }

    i64 det_mod() const {
        return ((e[0] * e[3] - e[1] * e[2]) % m + m) % m;
    }
    bool unimodular() const { return det_mod() == 1 % m; }

    u64 key() const {
        return ((u64(e[0]) * u64(m) + u64(e[1])) * u64(m) + u64(e[2])) * u64(m) + u64(e[3]);
    }

    friend bool operator==(const ModMatrix& a, const ModMatrix& b) {
        return a.m == b.m && a.e == b.e;
    }
};

inline ModMatrix mat_mul(const ModMatrix& x, const ModMatrix& y) {
    if (x.m != y.m) throw std::domain_error("mat_mul: modulus mismatch");
    return ModMatrix::reduce(x.m, x.e[0] * y.e[0] + x.e[1] * y.e[2],
                             x.e[0] * y.e[1] + x.e[1] * y.e[3],
                             x.e[2] * y.e[0] + x.e[3] * y.e[2],
                             x.e[2] * y.e[1] + x.e[3] * y.e[3]);
}

/// [[1,-1],[0,1]] mod m. Left multiplication by it fixes the bottom row.
inline ModMatrix u_inverse(i64 m) { return ModMatrix::reduce(m, 1, -1, 0, 1); }

/// Index of the level-m principal congruence subgroup: m^3 * prod_{p|m} (1 - 1/p^2).
inline i64 index_gamma(i64 m) {
    if (m < 1) throw std::domain_error("index_gamma: m must be positive");
    i64 res = m * m * m;
    i64 rest = m;
    for (i64 p = 2; p * p <= rest; ++p) {
        if (rest % p == 0) {
            while (rest % p == 0) rest /= p;
            res /= p * p;
            res *= p * p - 1;
        }
    }
    if (rest > 1) {
        res /= rest * rest;
        res *= rest * rest - 1;
    }
    return res;
}

/**
 * @brief Subset A of (Z/mZ)^2 selecting fractions by (num, den) residues.
 *
 * Must contain at least one primitive pair (n1, n2) with gcd(n1, n2, m) = 1;
 * non-primitive pairs are legal but select no coset.
 */
struct ResiduePairSet {
    i64 m = 1;
    std::vector<std::pair<i64, i64>> pairs;

    ResiduePairSet(i64 mod, std::vector<std::pair<i64, i64>> ps) : m(mod), pairs(std::move(ps)) {
        if (m < 1 || m > kMaxModulus) throw std::domain_error("ResiduePairSet: bad modulus");
        for (auto& [n1, n2] : pairs) {
            n1 = ((n1 % m) + m) % m;
            n2 = ((n2 % m) + m) % m;
        }
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        bool primitive = false;
        for (auto [n1, n2] : pairs)
            if (std::gcd(std::gcd(n1, n2), m) == 1) primitive = true;
        if (!primitive)
            throw std::domain_error("ResiduePairSet: no primitive pair (n1,n2) with gcd(n1,n2,m)=1");
    }

    bool contains(i64 n1, i64 n2) const {
        return std::binary_search(pairs.begin(), pairs.end(),
                                  std::pair<i64, i64>{((n1 % m) + m) % m, ((n2 % m) + m) % m});
    }
};

/**
 * @brief Finite set of level-m cosets, closed under left multiplication by
 * [[1,-1],[0,1]]; decides which Farey fractions a stream keeps.
 *
 * Sets built from residue pairs carry the pair set along, which gives the
 * O(1) membership test on (num, den) residues.
 */
class CosetSubset {
public:
    i64 m = 1;
    std::string label = "all";

    static CosetSubset from_matrices(i64 m, std::vector<ModMatrix> mats, std::string label);

    bool contains(const ModMatrix& x) const {
        return std::binary_search(keys_.begin(), keys_.end(), x.key());
    }

    i64 count() const { return i64(keys_.size()); }

    const std::vector<u64>& keys() const { return keys_; }

    ModMatrix matrix_at(std::size_t i) const {
        u64 k = keys_[i];
        ModMatrix r;
        r.m = m;
        r.e[3] = i64(k % u64(m)); k /= u64(m);
        r.e[2] = i64(k % u64(m)); k /= u64(m);
        r.e[1] = i64(k % u64(m)); k /= u64(m);
        r.e[0] = i64(k);
        return r;
    }

    const std::optional<ResiduePairSet>& residues() const { return residues_; }

    /// True when A = {(a, 1) : a in Z/mZ}, the denominator = 1 (mod m) family.
    bool den1_family() const {
        if (!residues_) return false;
        if (i64(residues_->pairs.size()) != m) return false;
        for (i64 a = 0; a < m; ++a)
            if (!residues_->contains(a, 1 % m)) return false;
        return true;
    }

private:
    friend CosetSubset from_residue_pairs(const ResiduePairSet&, std::string);
    std::vector<u64> keys_;
    std::optional<ResiduePairSet> residues_;
};

inline bool check_closure(const CosetSubset& M) {
    ModMatrix u = u_inverse(M.m);
    for (std::size_t i = 0; i < std::size_t(M.count()); ++i)
        if (!M.contains(mat_mul(u, M.matrix_at(i)))) return false;
    return true;
}

/**
 * @brief All cosets whose bottom row is (-n2, -n1) mod m for some (n1,n2) in A.
 *
 * Non-primitive pairs select no coset and are dropped; an A that selects
 * nothing rejects. The result is closed under left multiplication by
 * [[1,-1],[0,1]] automatically, since that operation fixes the bottom row.
 */
inline CosetSubset from_residue_pairs(const ResiduePairSet& A, std::string label = "") {
    CosetSubset M;
    M.m = A.m;
    const i64 m = A.m;
    for (auto [n1, n2] : A.pairs) {
        if (std::gcd(std::gcd(n1, n2), m) != 1) continue;
        i64 r21 = ((-n2) % m + m) % m;
        i64 r22 = ((-n1) % m + m) % m;
        for (i64 e11 = 0; e11 < m; ++e11)
            for (i64 e12 = 0; e12 < m; ++e12)
                if (((e11 * r22 - e12 * r21) % m + m) % m == 1 % m)
                    M.keys_.push_back(ModMatrix::reduce(m, e11, e12, r21, r22).key());
    }
    if (M.keys_.empty()) throw std::domain_error("from_residue_pairs: no coset selected");
    std::sort(M.keys_.begin(), M.keys_.end());
    M.keys_.erase(std::unique(M.keys_.begin(), M.keys_.end()), M.keys_.end());
    M.residues_ = A;
    M.label = label.empty() ? "pairs(m=" + std::to_string(m) + ")" : std::move(label);
    return M;
}

inline CosetSubset CosetSubset::from_matrices(i64 m, std::vector<ModMatrix> mats,
                                              std::string label) {
    if (m < 1 || m > kMaxModulus) throw std::domain_error("CosetSubset: bad modulus");
    if (mats.empty()) throw std::domain_error("CosetSubset: empty matrix set");
    CosetSubset M;
    M.m = m;
    M.label = std::move(label);
    for (const auto& x : mats) {
        if (x.m != m) throw std::domain_error("CosetSubset: modulus mismatch in matrix set");
        if (!x.unimodular()) throw std::domain_error("CosetSubset: matrix with det != 1 (mod m)");
        M.keys_.push_back(x.key());
    }
    std::sort(M.keys_.begin(), M.keys_.end());
    M.keys_.erase(std::unique(M.keys_.begin(), M.keys_.end()), M.keys_.end());
    if (!check_closure(M))
        throw std::domain_error("CosetSubset: set not closed under left multiplication by [[1,-1],[0,1]]");
    return M;
}

/// Matrix attached to a consecutive Farey pair: [[q2, a2], [-q, -a]] mod m.
inline ModMatrix w_matrix(const FareyPairState& s, i64 m) {
    return ModMatrix::reduce(m, s.q2, s.a2, -s.q, -s.a);
}

/// Fraction a/q (with successor a2/q2 in F(Q)) belongs to the subset iff its
/// attached matrix lies in M. For residue-pair sets this reduces to
/// (a, q) mod m in A.
inline bool membership(const FareyPairState& s, const CosetSubset& M) {
    if (M.m == 1) return true;
    if (M.residues()) return M.residues()->contains(s.a % M.m, s.q % M.m);
    return M.contains(w_matrix(s, M.m));
}

// ---------------------------------------------------------------------------
// Text interfaces: subset specs and matrix-set files.

/// Subset spec grammar: "all" | "den≡r" (also den=r) | "num≢0" (also num!=0)
/// | "m:n1,n2;n1,n2;...". The first three need the modulus given separately.
inline CosetSubset parse_subset_spec(const std::string& spec, i64 m) {
    auto strip = [](std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
                s.end());
        return s;
    };
    std::string s = strip(spec);
    if (s.empty() || s == "all") {
        std::vector<std::pair<i64, i64>> ps;
        for (i64 n1 = 0; n1 < m; ++n1)
            for (i64 n2 = 0; n2 < m; ++n2)
                if (std::gcd(std::gcd(n1, n2), m) == 1) ps.emplace_back(n1, n2);
        return from_residue_pairs(ResiduePairSet(m, std::move(ps)), "all");
    }

    auto starts = [&](const std::string& pre) { return s.rfind(pre, 0) == 0; };
    if (starts("den")) {
        std::string rest = s.substr(3);
        for (const char* op : {"\xe2\x89\xa1", "==", "="})  // ≡
            if (rest.rfind(op, 0) == 0) {
                rest = rest.substr(std::string(op).size());
                break;
            }
        i64 r = std::stoll(rest);
        std::vector<std::pair<i64, i64>> ps;
        for (i64 a = 0; a < m; ++a) ps.emplace_back(a, r % m);
        return from_residue_pairs(ResiduePairSet(m, std::move(ps)),
                                  "den=" + std::to_string(((r % m) + m) % m) + " mod " + std::to_string(m));
    }
    if (starts("num")) {
        std::string rest = s.substr(3);
        for (const char* op : {"\xe2\x89\xa2", "!="})  // ≢
            if (rest.rfind(op, 0) == 0) {
                rest = rest.substr(std::string(op).size());
                break;
            }
        if (std::stoll(rest) != 0) throw std::domain_error("parse_subset_spec: only num≢0 is supported");
        std::vector<std::pair<i64, i64>> ps;
        for (i64 n1 = 1; n1 < m; ++n1)
            for (i64 n2 = 0; n2 < m; ++n2) ps.emplace_back(n1, n2);
        if (m == 1) throw std::domain_error("parse_subset_spec: num≢0 is empty at m=1");
        return from_residue_pairs(ResiduePairSet(m, std::move(ps)),
                                  "num!=0 mod " + std::to_string(m));
    }

    auto colon = s.find(':');
    if (colon == std::string::npos) throw std::domain_error("parse_subset_spec: unrecognized subset \"" + spec + "\"");
    i64 ms = std::stoll(s.substr(0, colon));
    if (m != 0 && ms != m)
        throw std::domain_error("parse_subset_spec: modulus in subset spec disagrees with m");
    std::vector<std::pair<i64, i64>> ps;
    std::stringstream body(s.substr(colon + 1));
    std::string tok;
    while (std::getline(body, tok, ';')) {
        if (tok.empty()) continue;
        auto comma = tok.find(',');
        if (comma == std::string::npos) throw std::domain_error("parse_subset_spec: expected n1,n2 pairs");
        ps.emplace_back(std::stoll(tok.substr(0, comma)), std::stoll(tok.substr(comma + 1)));
    }
    return from_residue_pairs(ResiduePairSet(ms, std::move(ps)), s);
}

/// Matrix-set format: header "m=<modulus>", then one matrix per line as
/// "e11 e12 e21 e22".
inline CosetSubset parse_matrix_set(std::istream& in, const std::string& label) {
    std::string line;
    i64 m = 0;
    std::vector<ModMatrix> mats;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("m=", 0) == 0) {
            m = std::stoll(line.substr(2));
            continue;
        }
        if (m == 0) throw std::domain_error("matrix set: missing m=<modulus> header");
        std::stringstream ls(line);
        i64 w, x, y, z;
        if (!(ls >> w >> x >> y >> z)) throw std::domain_error("matrix set: bad line \"" + line + "\"");
        mats.push_back(ModMatrix::reduce(m, w, x, y, z));
    }
    if (m == 0) throw std::domain_error("matrix set: missing m=<modulus> header");
    return CosetSubset::from_matrices(m, std::move(mats), label);
}

inline CosetSubset load_matrix_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::domain_error("cannot read subset file: " + path);
    return parse_matrix_set(in, path);
}

inline void write_matrix_set(std::ostream& out, const CosetSubset& M) {
    out << "m=" << M.m << "\n";
    for (std::size_t i = 0; i < std::size_t(M.count()); ++i) {
        auto x = M.matrix_at(i);
        out << x.e[0] << " " << x.e[1] << " " << x.e[2] << " " << x.e[3] << "\n";
    }
}

inline i64 coset_count(const CosetSubset& M) { return M.count(); }

}  // namespace farey
