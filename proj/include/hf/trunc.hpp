#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hf/fq.hpp"
#include "hf/rat.hpp"

namespace hf {

// Descriptor of the truncated valuation ring O_{K,{alpha}} realized as
// F_q[u]/(u^a) with v(u) = 1/eK, eK = e*kappa, alpha = a/eK.  K is the
// parametric family Q_{p^m}(u), u^{eK} ~ p; the e conjugates of the
// uniformizer pi of F appear as zeta^j u^kappa for a Teichmueller e-th root
// of unity zeta.
struct RingDesc {
    int p, m, e, kappa, a;
    int eK;  // e * kappa
    int q;   // p^m
    FqCtxPtr fq;
    FqElem zeta;  // e-th root of unity

    Rat alpha() const { return Rat(a, eK); }
    bool same_ring(const RingDesc& o) const {
        return p == o.p && m == o.m && e == o.e && kappa == o.kappa && a == o.a;
    }
    bool same_family(const RingDesc& o) const {
        return p == o.p && m == o.m && e == o.e && kappa == o.kappa;
    }
};

using RingPtr = std::shared_ptr<const RingDesc>;

inline RingPtr ring_create(int p, int m, int e, int kappa, int a) {
    if (e < 1 || kappa < 1) throw std::invalid_argument("ring_create: e, kappa must be >= 1");
    auto fq = std::make_shared<const FqCtx>(p, m);
    if ((fq->q() - 1) % e != 0)
        throw std::invalid_argument("ring_create: e must divide q-1 (K cannot contain the Galois closure of F)");
    int eK = e * kappa;
    if (a < 1 || a > eK) throw std::invalid_argument("ring_create: precision a out of range [1, e*kappa]");
    RingDesc d;
    d.p = p;
    d.m = m;
    d.e = e;
    d.kappa = kappa;
    d.a = a;
    d.eK = eK;
    d.q = fq->q();
    d.fq = fq;
    d.zeta = fq->root_of_unity(e);
    return std::make_shared<const RingDesc>(d);
}

inline RingPtr ring_with_precision(const RingPtr& r, int a2) {
    if (a2 == r->a) return r;
    if (a2 > r->a || a2 < 1) throw std::invalid_argument("ring_with_precision: cannot gain precision");
    RingDesc d = *r;
    d.a = a2;
    return std::make_shared<const RingDesc>(d);
}

// A truncated valuation: an exact rational in [0, cap] plus a saturation flag
// meaning ">= cap" (in which case value == cap).  Comparisons and arithmetic
// follow the min-capped semantics of equalities "in [0, r]".
struct TruncVal {
    Rat v{0};
    bool sat{false};
    Rat cap{1};

    static TruncVal exact(Rat value, Rat cap_) {
        if (value >= cap_) return saturated(cap_);
        return TruncVal{value, false, cap_};
    }
    static TruncVal saturated(Rat cap_) { return TruncVal{cap_, true, cap_}; }

    // min(v, cap) as a rational; for saturated values this is cap.
    Rat capped() const { return sat ? cap : v; }

    TruncVal recap(Rat new_cap) const {
        if (new_cap > cap) throw std::invalid_argument("TruncVal::recap: cannot raise cap");
        if (sat || v >= new_cap) return saturated(new_cap);
        return exact(v, new_cap);
    }

    friend TruncVal operator+(const TruncVal& x, const TruncVal& y) {
        Rat c = std::min(x.cap, y.cap);
        if (x.sat || y.sat || x.v + y.v >= c) return saturated(c);
        return exact(x.v + y.v, c);
    }
    TruncVal scale(std::int64_t k) const {
        if (sat || v * k >= cap) return saturated(cap);
        return exact(v * k, cap);
    }
    // Equality in [0, min(cap)] — the paper's capped equality.
    friend bool operator==(const TruncVal& x, const TruncVal& y) {
        Rat c = std::min(x.cap, y.cap);
        return std::min(x.capped(), c) == std::min(y.capped(), c);
    }
    friend bool operator!=(const TruncVal& x, const TruncVal& y) { return !(x == y); }
};

inline std::string to_string(const TruncVal& t) {
    return t.sat ? (">=" + to_string(t.cap)) : to_string(t.v);
}

// Element of F_q[u]/(u^a): coeffs[j] is the coefficient of u^j.
struct TruncSeries {
    RingPtr ring;
    std::vector<FqElem> coeffs;  // size ring->a

    TruncSeries() = default;
    explicit TruncSeries(RingPtr r) : ring(std::move(r)), coeffs(ring->a, 0) {}
};

inline TruncSeries ts_zero(const RingPtr& r) { return TruncSeries(r); }
inline TruncSeries ts_const(const RingPtr& r, FqElem c) {
    TruncSeries x(r);
    x.coeffs[0] = c;
    return x;
}
inline TruncSeries ts_one(const RingPtr& r) { return ts_const(r, 1); }
// c * u^k (zero when k >= a)
inline TruncSeries ts_monomial(const RingPtr& r, int k, FqElem c = 1) {
    TruncSeries x(r);
    if (k < 0) throw std::invalid_argument("ts_monomial: negative exponent");
    if (k < r->a) x.coeffs[k] = c;
    return x;
}

inline void check_same_ring(const TruncSeries& x, const TruncSeries& y) {
    if (!x.ring || !y.ring || !x.ring->same_ring(*y.ring)) throw std::invalid_argument("ring mismatch");
}

inline bool ts_is_zero(const TruncSeries& x) {
    for (FqElem c : x.coeffs)
        if (c) return false;
    return true;
}

inline TruncSeries ts_add(const TruncSeries& x, const TruncSeries& y) {
    check_same_ring(x, y);
    TruncSeries r(x.ring);
    const auto& F = *x.ring->fq;
    for (int i = 0; i < x.ring->a; ++i) r.coeffs[i] = F.add(x.coeffs[i], y.coeffs[i]);
    return r;
}

inline TruncSeries ts_neg(const TruncSeries& x) {
    TruncSeries r(x.ring);
    const auto& F = *x.ring->fq;
    for (int i = 0; i < x.ring->a; ++i) r.coeffs[i] = F.neg(x.coeffs[i]);
    return r;
}

inline TruncSeries ts_sub(const TruncSeries& x, const TruncSeries& y) { return ts_add(x, ts_neg(y)); }

inline TruncSeries ts_mul(const TruncSeries& x, const TruncSeries& y) {
    check_same_ring(x, y);
    TruncSeries r(x.ring);
    const auto& F = *x.ring->fq;
    const int a = x.ring->a;
    for (int i = 0; i < a; ++i) {
        if (!x.coeffs[i]) continue;
        for (int j = 0; i + j < a; ++j) {
            if (!y.coeffs[j]) continue;
            r.coeffs[i + j] = F.add(r.coeffs[i + j], F.mul(x.coeffs[i], y.coeffs[j]));
        }
    }
    return r;
}

inline TruncSeries ts_scale(const TruncSeries& x, FqElem c) {
    TruncSeries r(x.ring);
    const auto& F = *x.ring->fq;
    for (int i = 0; i < x.ring->a; ++i) r.coeffs[i] = F.mul(x.coeffs[i], c);
    return r;
}

// Index of the lowest nonzero coefficient, or a (= saturated) for zero.
inline int ts_uval(const TruncSeries& x) {
    for (int i = 0; i < x.ring->a; ++i)
        if (x.coeffs[i]) return i;
    return x.ring->a;
}

inline TruncVal ts_val(const TruncSeries& x) {
    int k = ts_uval(x);
    if (k == x.ring->a) return TruncVal::saturated(x.ring->alpha());
    return TruncVal::exact(Rat(k, x.ring->eK), x.ring->alpha());
}

inline bool ts_is_unit(const TruncSeries& x) { return x.coeffs.size() && x.coeffs[0] != 0; }

inline TruncSeries ts_invert(const TruncSeries& x) {
    if (!ts_is_unit(x)) throw std::domain_error("ts_invert: non-unit");
    const auto& F = *x.ring->fq;
    const int a = x.ring->a;
    TruncSeries r(x.ring);
    FqElem c0inv = F.inv(x.coeffs[0]);
    r.coeffs[0] = c0inv;
    for (int k = 1; k < a; ++k) {
        FqElem s = 0;
        for (int j = 1; j <= k; ++j) s = F.add(s, F.mul(x.coeffs[j], r.coeffs[k - j]));
        r.coeffs[k] = F.neg(F.mul(c0inv, s));
    }
    return r;
}

// x -> x^p; the ring Frobenius (valid because the ring has characteristic p).
inline TruncSeries ts_frobenius(const TruncSeries& x) {
    const auto& F = *x.ring->fq;
    TruncSeries r(x.ring);
    for (int i = 0; i < x.ring->a; ++i) {
        if (!x.coeffs[i]) continue;
        long long e = static_cast<long long>(i) * x.ring->p;
        if (e >= x.ring->a) continue;
        r.coeffs[e] = F.add(r.coeffs[e], F.frob(x.coeffs[i]));
    }
    return r;
}

// Reduction to lower precision a2 (the quotient map mod m_{a2/eK}).
inline TruncSeries ts_truncate(const TruncSeries& x, int a2) {
    RingPtr r2 = ring_with_precision(x.ring, a2);
    TruncSeries r(r2);
    for (int i = 0; i < a2; ++i) r.coeffs[i] = x.coeffs[i];
    return r;
}

// Exact division by u^k; requires all coefficients below u^k to vanish.
inline TruncSeries ts_shift_down(const TruncSeries& x, int k) {
    const int a = x.ring->a;
    for (int i = 0; i < std::min(k, a); ++i)
        if (x.coeffs[i]) throw std::domain_error("ts_shift_down: not divisible");
    TruncSeries r(x.ring);
    for (int i = k; i < a; ++i) r.coeffs[i - k] = x.coeffs[i];
    return r;
}

inline TruncSeries ts_shift_up(const TruncSeries& x, int k) {
    TruncSeries r(x.ring);
    const int a = x.ring->a;
    for (int i = 0; i + k < a; ++i) r.coeffs[i + k] = x.coeffs[i];
    return r;
}

inline bool ts_eq(const TruncSeries& x, const TruncSeries& y) {
    check_same_ring(x, y);
    return x.coeffs == y.coeffs;
}

inline std::string to_string(const TruncSeries& x) {
    std::string s;
    bool first = true;
    for (int i = 0; i < x.ring->a; ++i) {
        if (!x.coeffs[i]) continue;
        if (!first) s += " + ";
        s += std::to_string(x.coeffs[i]);
        if (i > 0) s += "*u^" + std::to_string(i);
        first = false;
    }
    return first ? "0" : s;
}

}  // namespace hf
