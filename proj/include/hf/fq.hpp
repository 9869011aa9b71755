#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace hf {

// An element of F_q in the fixed polynomial-basis encoding: the coordinate
// vector (c_0,...,c_{m-1}) over F_p packed as the integer sum c_i * p^i.
using FqElem = std::uint16_t;

inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Arithmetic context for F_q, q = p^m.  The modulus is the lexicographically
// smallest monic primitive polynomial of degree m over F_p (coefficient tuple
// (c_0,...,c_{m-1}) ordered as the base-p integer c_0 + c_1 p + ...), so the
// representation is reproducible across runs and implementations.  For m = 1
// the generator is the smallest primitive root mod p.
class FqCtx {
  public:
    FqCtx(int p, int m) : p_(p), m_(m) {
        if (!is_prime_u64(static_cast<std::uint64_t>(p))) throw std::invalid_argument("FqCtx: p must be prime");
        if (m < 1 || m > 8) throw std::invalid_argument("FqCtx: m out of range");
        q_ = 1;
        for (int i = 0; i < m; ++i) {
            q_ *= p;
            if (q_ > 60000) throw std::invalid_argument("FqCtx: q too large");
        }
        modulus_.assign(m + 1, 0);
        if (m == 1) {
            modulus_[1] = 1;  // x - g handled via generator search below
            gen_ = smallest_primitive_root();
            modulus_[0] = static_cast<int>((p_ - gen_) % p_);  // x ≡ g mod (x - g)
        } else {
            find_primitive_modulus();
        }
        build_tables();
    }

    int p() const { return p_; }
    int m() const { return m_; }
    int q() const { return static_cast<int>(q_); }
    const std::vector<int>& modulus() const { return modulus_; }

    FqElem zero() const { return 0; }
    FqElem one() const { return 1; }
    FqElem generator() const { return gen_; }

    FqElem add(FqElem a, FqElem b) const {
        FqElem r = 0;
        int mul = 1;
        for (int i = 0; i < m_; ++i) {
            int da = (a / mul) % p_, db = (b / mul) % p_;
            r = static_cast<FqElem>(r + ((da + db) % p_) * mul);
            mul *= p_;
        }
        return r;
    }
    FqElem neg(FqElem a) const {
        FqElem r = 0;
        int mul = 1;
        for (int i = 0; i < m_; ++i) {
            int da = (a / mul) % p_;
            r = static_cast<FqElem>(r + ((p_ - da) % p_) * mul);
            mul *= p_;
        }
        return r;
    }
    FqElem sub(FqElem a, FqElem b) const { return add(a, neg(b)); }
    FqElem mul(FqElem a, FqElem b) const {
        if (a == 0 || b == 0) return 0;
        return exp_[(log_[a] + log_[b]) % (q_ - 1)];
    }
    FqElem inv(FqElem a) const {
        if (a == 0) throw std::domain_error("FqCtx: inverse of zero");
        return exp_[(q_ - 1 - log_[a]) % (q_ - 1)];
    }
    FqElem pow(FqElem a, long long e) const {
        if (a == 0) {
            if (e == 0) return 1;
            if (e < 0) throw std::domain_error("FqCtx: 0^negative");
            return 0;
        }
        long long l = (static_cast<long long>(log_[a]) * (e % (q_ - 1))) % (q_ - 1);
        if (l < 0) l += q_ - 1;
        return exp_[l];
    }
    // Frobenius x -> x^p.
    FqElem frob(FqElem a) const { return pow(a, p_); }

    // Multiplicative order of a nonzero element.
    long long order(FqElem a) const {
        if (a == 0) throw std::domain_error("FqCtx: order of zero");
        long long n = q_ - 1, l = log_[a];
        long long g = gcd_ll(l, n);
        return n / g;
    }

    // The element of exact multiplicative order n that is smallest in the
    // fixed integer encoding; requires n | q - 1.
    FqElem root_of_unity(long long n) const {
        if (n <= 0 || (q_ - 1) % n != 0) throw std::domain_error("FqCtx: n does not divide q-1");
        for (long long v = 1; v < q_; ++v) {
            FqElem x = static_cast<FqElem>(v);
            if (order(x) == n) return x;
        }
        throw std::logic_error("FqCtx: no root of unity found");  // unreachable
    }

    // Coordinates over the prime field, constant term first.
    std::vector<int> coords(FqElem a) const {
        std::vector<int> c(m_);
        for (int i = 0; i < m_; ++i) {
            c[i] = a % p_;
            a = static_cast<FqElem>(a / p_);
        }
        return c;
    }
    FqElem from_coords(const std::vector<int>& c) const {
        if (static_cast<int>(c.size()) != m_) throw std::invalid_argument("FqCtx: bad coordinate length");
        long long v = 0, mul = 1;
        for (int i = 0; i < m_; ++i) {
            int d = c[i] % p_;
            if (d < 0) d += p_;
            v += d * mul;
            mul *= p_;
        }
        return static_cast<FqElem>(v);
    }

  private:
    static long long gcd_ll(long long a, long long b) { return b == 0 ? a : gcd_ll(b, a % b); }

    int smallest_primitive_root() const {
        for (int g = 2; g < p_; ++g) {
            long long ord = 1;
            long long x = g;
            while (x != 1) {
                x = (x * g) % p_;
                ++ord;
            }
            if (ord == p_ - 1) return g;
        }
        if (p_ == 2) return 1;
        throw std::logic_error("FqCtx: no primitive root");
    }

    // Polynomial arithmetic over F_p used only during construction.
    std::vector<int> polymulmod(const std::vector<int>& a, const std::vector<int>& b,
                                const std::vector<int>& mod) const {
        std::vector<int> r(a.size() + b.size() - 1, 0);
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + a[i] * b[j]) % p_;
        for (int i = static_cast<int>(r.size()) - 1; i >= m_; --i) {
            int c = r[i];
            if (c == 0) continue;
            r[i] = 0;
            for (int j = 0; j < m_; ++j) r[i - m_ + j] = ((r[i - m_ + j] - c * mod[j]) % p_ + p_) % p_;
        }
        r.resize(m_);
        return r;
    }

    bool x_is_primitive(const std::vector<int>& mod) const {
        // order of x modulo mod(x) must be q-1; also certifies irreducibility.
        std::vector<int> x(m_, 0);
        if (m_ == 1) return false;
        x[1] = 1;
        std::vector<int> acc = x;
        long long ord = 1;
        std::vector<int> one(m_, 0);
        one[0] = 1;
        while (acc != one) {
            acc = polymulmod(acc, x, mod);
            ++ord;
            if (ord > q_) return false;  // x not invertible => reducible with x | mod
        }
        return ord == q_ - 1;
    }

    void find_primitive_modulus() {
        // candidates ordered by the base-p integer of (c_0,...,c_{m-1})
        for (long long code = 1; code < q_; ++code) {
            std::vector<int> mod(m_ + 1, 0);
            long long c = code;
            for (int i = 0; i < m_; ++i) {
                mod[i] = c % p_;
                c /= p_;
            }
            mod[m_] = 1;
            if (mod[0] == 0) continue;  // x | mod
            if (x_is_primitive(mod)) {
                modulus_ = mod;
                gen_ = static_cast<FqElem>(p_);  // the class of x
                return;
            }
        }
        throw std::logic_error("FqCtx: no primitive polynomial found");
    }

    void build_tables() {
        exp_.assign(q_ - 1, 0);
        log_.assign(q_, -1);
        if (m_ == 1) {
            long long x = 1;
            for (long long k = 0; k < q_ - 1; ++k) {
                exp_[k] = static_cast<FqElem>(x);
                log_[x] = k;
                x = (x * gen_) % p_;
            }
        } else {
            std::vector<int> acc(m_, 0);
            acc[0] = 1;
            std::vector<int> x(m_, 0);
            x[1] = 1;
            for (long long k = 0; k < q_ - 1; ++k) {
                long long enc = 0, mul = 1;
                for (int i = 0; i < m_; ++i) {
                    enc += acc[i] * mul;
                    mul *= p_;
                }
                exp_[k] = static_cast<FqElem>(enc);
                log_[enc] = k;
                acc = polymulmod(acc, x, modulus_);
            }
        }
    }

    int p_, m_;
    long long q_;
    std::vector<int> modulus_;  // degree m, monic; modulus_[i] = coeff of x^i
    FqElem gen_ = 0;
    std::vector<FqElem> exp_;
    std::vector<long long> log_;
};

using FqCtxPtr = std::shared_ptr<const FqCtx>;

}  // namespace hf
