#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "hf/trunc.hpp"

namespace hf {

// Dense matrix over F_q[u]/(u^a), entries stored as flat coefficient blocks.
struct Mat {
    RingPtr ring;
    int rows = 0, cols = 0;
    std::vector<FqElem> data;  // rows*cols blocks of length ring->a

    Mat() = default;
    Mat(RingPtr r, int rr, int cc) : ring(std::move(r)), rows(rr), cols(cc) {
        data.assign(static_cast<size_t>(rows) * cols * ring->a, 0);
    }
    FqElem* blk(int r, int c) { return data.data() + (static_cast<size_t>(r) * cols + c) * ring->a; }
    const FqElem* blk(int r, int c) const {
        return data.data() + (static_cast<size_t>(r) * cols + c) * ring->a;
    }
};

inline Mat mat_identity(const RingPtr& ring, int n) {
    Mat I(ring, n, n);
    for (int i = 0; i < n; ++i) I.blk(i, i)[0] = 1;
    return I;
}

inline TruncSeries mat_get(const Mat& A, int r, int c) {
    TruncSeries t(A.ring);
    const FqElem* b = A.blk(r, c);
    std::copy(b, b + A.ring->a, t.coeffs.begin());
    return t;
}

inline void mat_set(Mat& A, int r, int c, const TruncSeries& t) {
    if (!t.ring->same_ring(*A.ring)) throw std::invalid_argument("mat_set: ring mismatch");
    std::copy(t.coeffs.begin(), t.coeffs.end(), A.blk(r, c));
}

namespace detail {
// dst += x*y over F_q[u]/(u^a)
inline void blk_mul_add(FqElem* dst, const FqElem* x, const FqElem* y, int a, const FqCtx& F) {
    for (int i = 0; i < a; ++i) {
        if (!x[i]) continue;
        for (int j = 0; i + j < a; ++j) {
            if (!y[j]) continue;
            dst[i + j] = F.add(dst[i + j], F.mul(x[i], y[j]));
        }
    }
}
inline void blk_sub_mul(FqElem* dst, const FqElem* x, const FqElem* y, int a, const FqCtx& F) {
    for (int i = 0; i < a; ++i) {
        if (!x[i]) continue;
        for (int j = 0; i + j < a; ++j) {
            if (!y[j]) continue;
            dst[i + j] = F.sub(dst[i + j], F.mul(x[i], y[j]));
        }
    }
}
inline int blk_uval(const FqElem* x, int a) {
    for (int i = 0; i < a; ++i)
        if (x[i]) return i;
    return a;
}
}  // namespace detail

inline bool mat_is_zero(const Mat& A) {
    for (FqElem c : A.data)
        if (c) return false;
    return true;
}

inline bool mat_eq(const Mat& A, const Mat& B) {
    return A.rows == B.rows && A.cols == B.cols && A.ring->same_ring(*B.ring) && A.data == B.data;
}

inline Mat mat_add(const Mat& A, const Mat& B) {
    if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("mat_add: shape mismatch");
    Mat C(A.ring, A.rows, A.cols);
    const auto& F = *A.ring->fq;
    for (size_t i = 0; i < A.data.size(); ++i) C.data[i] = F.add(A.data[i], B.data[i]);
    return C;
}

inline Mat mat_neg(const Mat& A) {
    Mat C(A.ring, A.rows, A.cols);
    const auto& F = *A.ring->fq;
    for (size_t i = 0; i < A.data.size(); ++i) C.data[i] = F.neg(A.data[i]);
    return C;
}

inline Mat mat_sub(const Mat& A, const Mat& B) { return mat_add(A, mat_neg(B)); }

inline Mat mat_mul(const Mat& A, const Mat& B) {
    if (A.cols != B.rows) throw std::invalid_argument("mat_mul: shape mismatch");
    if (!A.ring->same_ring(*B.ring)) throw std::invalid_argument("mat_mul: ring mismatch");
    Mat C(A.ring, A.rows, B.cols);
    const auto& F = *A.ring->fq;
    const int a = A.ring->a;
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            const FqElem* x = A.blk(i, k);
            if (detail::blk_uval(x, a) == a) continue;
            for (int j = 0; j < B.cols; ++j) detail::blk_mul_add(C.blk(i, j), x, B.blk(k, j), a, F);
        }
    return C;
}

inline Mat mat_scale(const Mat& A, const TruncSeries& s) {
    Mat C(A.ring, A.rows, A.cols);
    const auto& F = *A.ring->fq;
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) detail::blk_mul_add(C.blk(i, j), A.blk(i, j), s.coeffs.data(), A.ring->a, F);
    return C;
}

inline Mat mat_transpose(const Mat& A) {
    Mat C(A.ring, A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j)
            std::copy(A.blk(i, j), A.blk(i, j) + A.ring->a, C.blk(j, i));
    return C;
}

// Entrywise Frobenius; the matrix of the induced map between Frobenius twists.
inline Mat twist_matrix(const Mat& A) {
    Mat C(A.ring, A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) mat_set(C, i, j, ts_frobenius(mat_get(A, i, j)));
    return C;
}

inline Mat mat_truncate(const Mat& A, int a2) {
    RingPtr r2 = ring_with_precision(A.ring, a2);
    Mat C(r2, A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) {
            const FqElem* src = A.blk(i, j);
            std::copy(src, src + a2, C.blk(i, j));
        }
    return C;
}

inline Mat mat_hstack(const Mat& A, const Mat& B) {
    if (A.rows != B.rows) throw std::invalid_argument("mat_hstack: row mismatch");
    Mat C(A.ring, A.rows, A.cols + B.cols);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < A.cols; ++j) std::copy(A.blk(i, j), A.blk(i, j) + A.ring->a, C.blk(i, j));
        for (int j = 0; j < B.cols; ++j) std::copy(B.blk(i, j), B.blk(i, j) + A.ring->a, C.blk(i, A.cols + j));
    }
    return C;
}

inline Mat mat_cols(const Mat& A, int c0, int c1) {  // [c0, c1)
    Mat C(A.ring, A.rows, c1 - c0);
    for (int i = 0; i < A.rows; ++i)
        for (int j = c0; j < c1; ++j) std::copy(A.blk(i, j), A.blk(i, j) + A.ring->a, C.blk(i, j - c0));
    return C;
}

inline Mat mat_rows(const Mat& A, int r0, int r1) {  // [r0, r1)
    Mat C(A.ring, r1 - r0, A.cols);
    for (int i = r0; i < r1; ++i)
        for (int j = 0; j < A.cols; ++j) std::copy(A.blk(i, j), A.blk(i, j) + A.ring->a, C.blk(i - r0, j));
    return C;
}

// ---------------------------------------------------------------------------
// Smith normal form over the chain ring F_q[u]/(u^a).
//
// Pivoting rule: entry of minimal valuation, ties broken by (row, col)
// lexicographic order; pivots normalized to u^k with the unit folded into the
// left transform.  left*A*right = diag(u^{d_0}, u^{d_1}, ...), d_k
// non-decreasing, with d_k = a standing for the zero divisor (saturated).
// ---------------------------------------------------------------------------
struct SmithForm {
    std::vector<int> divisor_exps;  // size min(rows, cols); a = saturated
    Mat left, left_inv;             // rows x rows
    Mat right, right_inv;           // cols x cols
    int rows = 0, cols = 0;
    RingPtr ring;

    int rank_exact() const {  // number of divisors with exponent < a
        int r = 0;
        for (int d : divisor_exps)
            if (d < ring->a) ++r;
        return r;
    }
    int rank_unit() const {
        int r = 0;
        for (int d : divisor_exps)
            if (d == 0) ++r;
        return r;
    }
    std::vector<TruncVal> divisor_vals() const {
        std::vector<TruncVal> v;
        v.reserve(divisor_exps.size());
        for (int d : divisor_exps)
            v.push_back(d >= ring->a ? TruncVal::saturated(ring->alpha())
                                     : TruncVal::exact(Rat(d, ring->eK), ring->alpha()));
        return v;
    }
    Mat diagonal() const {
        Mat D(ring, rows, cols);
        for (size_t k = 0; k < divisor_exps.size(); ++k)
            if (divisor_exps[k] < ring->a) D.blk(static_cast<int>(k), static_cast<int>(k))[divisor_exps[k]] = 1;
        return D;
    }
};

namespace detail {

struct RowColOps {
    Mat* M;
    int a;
    const FqCtx* F;
    void row_swap(int i, int j) {
        for (int c = 0; c < M->cols; ++c)
            for (int t = 0; t < a; ++t) std::swap(M->blk(i, c)[t], M->blk(j, c)[t]);
    }
    void col_swap(int i, int j) {
        for (int r = 0; r < M->rows; ++r)
            for (int t = 0; t < a; ++t) std::swap(M->blk(r, i)[t], M->blk(r, j)[t]);
    }
    void row_scale(int i, const TruncSeries& s) {
        for (int c = 0; c < M->cols; ++c) {
            FqElem tmp[64] = {0};
            blk_mul_add(tmp, M->blk(i, c), s.coeffs.data(), a, *F);
            std::copy(tmp, tmp + a, M->blk(i, c));
        }
    }
    void col_scale(int j, const TruncSeries& s) {
        for (int r = 0; r < M->rows; ++r) {
            FqElem tmp[64] = {0};
            blk_mul_add(tmp, M->blk(r, j), s.coeffs.data(), a, *F);
            std::copy(tmp, tmp + a, M->blk(r, j));
        }
    }
    // row_i -= f * row_k
    void row_axpy(int i, int k, const TruncSeries& f) {
        for (int c = 0; c < M->cols; ++c) blk_sub_mul(M->blk(i, c), f.coeffs.data(), M->blk(k, c), a, *F);
    }
    // col_j -= f * col_k
    void col_axpy(int j, int k, const TruncSeries& f) {
        for (int r = 0; r < M->rows; ++r) blk_sub_mul(M->blk(r, j), f.coeffs.data(), M->blk(r, k), a, *F);
    }
    // col_k += f * col_i  (used for inverse transforms)
    void col_axpy_add(int k, int i, const TruncSeries& f) {
        for (int r = 0; r < M->rows; ++r) blk_mul_add(M->blk(r, k), f.coeffs.data(), M->blk(r, i), a, *F);
    }
    // row_k += f * row_j
    void row_axpy_add(int k, int j, const TruncSeries& f) {
        for (int c = 0; c < M->cols; ++c) blk_mul_add(M->blk(k, c), f.coeffs.data(), M->blk(j, c), a, *F);
    }
};

}  // namespace detail

inline SmithForm smith_form(const Mat& A) {
    const int a = A.ring->a;
    if (a > 64) throw std::invalid_argument("smith_form: precision too large");
    const auto& F = *A.ring->fq;
    Mat W = A;
    SmithForm S;
    S.rows = A.rows;
    S.cols = A.cols;
    S.ring = A.ring;
    S.left = mat_identity(A.ring, A.rows);
    S.left_inv = mat_identity(A.ring, A.rows);
    S.right = mat_identity(A.ring, A.cols);
    S.right_inv = mat_identity(A.ring, A.cols);
    const int n = std::min(A.rows, A.cols);
    S.divisor_exps.assign(n, a);

    detail::RowColOps w{&W, a, &F}, l{&S.left, a, &F}, li{&S.left_inv, a, &F}, r{&S.right, a, &F},
        ri{&S.right_inv, a, &F};

    for (int k = 0; k < n; ++k) {
        int best_val = a, bi = -1, bj = -1;
        for (int i = k; i < A.rows; ++i)
            for (int j = k; j < A.cols; ++j) {
                int v = detail::blk_uval(W.blk(i, j), a);
                if (v < best_val) {
                    best_val = v;
                    bi = i;
                    bj = j;
                }
            }
        if (best_val == a) break;  // all remaining divisors saturated
        if (bi != k) {
            w.row_swap(k, bi);
            l.row_swap(k, bi);
            li.col_swap(k, bi);
        }
        if (bj != k) {
            w.col_swap(k, bj);
            r.col_swap(k, bj);
            ri.row_swap(k, bj);
        }
        const int dv = best_val;
        TruncSeries piv = mat_get(W, k, k);
        TruncSeries unit = ts_shift_down(piv, dv);
        TruncSeries uinv = ts_invert(unit);
        w.row_scale(k, uinv);
        l.row_scale(k, uinv);
        li.col_scale(k, unit);
        for (int i = k + 1; i < A.rows; ++i) {
            if (detail::blk_uval(W.blk(i, k), a) == a) continue;
            TruncSeries f = ts_shift_down(mat_get(W, i, k), dv);
            w.row_axpy(i, k, f);
            l.row_axpy(i, k, f);
            li.col_axpy_add(k, i, f);
        }
        for (int j = k + 1; j < A.cols; ++j) {
            if (detail::blk_uval(W.blk(k, j), a) == a) continue;
            TruncSeries g = ts_shift_down(mat_get(W, k, j), dv);
            w.col_axpy(j, k, g);
            r.col_axpy(j, k, g);
            ri.row_axpy_add(k, j, g);
        }
        S.divisor_exps[k] = dv;
    }
    return S;
}

// min(v(det A), alpha), computed as the capped sum of Smith divisor exponents.
inline TruncVal trunc_val_det(const Mat& A) {
    if (A.rows != A.cols) throw std::invalid_argument("trunc_val_det: non-square");
    if (A.rows == 0) return TruncVal::exact(Rat(0), A.ring->alpha());
    SmithForm S = smith_form(A);
    long long total = 0;
    for (int d : S.divisor_exps) {
        if (d >= A.ring->a) return TruncVal::saturated(A.ring->alpha());
        total += d;
        if (total >= A.ring->a) return TruncVal::saturated(A.ring->alpha());
    }
    return TruncVal::exact(Rat(total, A.ring->eK), A.ring->alpha());
}

// Elementary divisor valuations of coker(A : R^cols -> R^rows) as exact
// rationals, with saturated divisors resolved to the caller's a-priori bound.
// Sound only when bound <= alpha; a saturated divisor with bound < alpha is a
// contradiction with the bound and is rejected.
inline std::vector<Rat> cokernel_divisors(const Mat& A, const Rat& bound) {
    if (bound > A.ring->alpha()) throw std::invalid_argument("cokernel_divisors: bound above working precision");
    SmithForm S = smith_form(A);
    std::vector<Rat> out;
    const Rat alpha = A.ring->alpha();
    for (int k = 0; k < A.rows; ++k) {
        int d = k < static_cast<int>(S.divisor_exps.size()) ? S.divisor_exps[k] : A.ring->a;
        if (d >= A.ring->a) {
            if (bound < alpha) throw std::domain_error("cokernel_divisors: saturated divisor contradicts bound");
            out.push_back(bound);
        } else {
            Rat v(d, A.ring->eK);
            if (v > bound) throw std::domain_error("cokernel_divisors: divisor exceeds stated bound");
            out.push_back(v);
        }
    }
    return out;
}

struct SolveResult {
    bool ok = false;
    Mat x;
    int obstruction_row = -1;
};

// Solves A*x = b exactly in the truncated ring when possible; free parameters
// (torsion directions and free columns) are set to zero in Smith coordinates.
inline SolveResult solve_linear_smith(const SmithForm& S, const Mat& b) {
    const int a = S.ring->a;
    SolveResult res;
    Mat c = mat_mul(S.left, b);
    Mat y(S.ring, S.cols, b.cols);
    const int n = static_cast<int>(S.divisor_exps.size());
    for (int k = 0; k < S.rows; ++k) {
        int d = k < n ? S.divisor_exps[k] : a;
        for (int j = 0; j < b.cols; ++j) {
            TruncSeries ck = mat_get(c, k, j);
            if (d >= a) {
                if (!ts_is_zero(ck)) {
                    res.obstruction_row = k;
                    return res;
                }
            } else {
                if (ts_uval(ck) < d) {
                    res.obstruction_row = k;
                    return res;
                }
                if (k < S.cols) mat_set(y, k, j, ts_shift_down(ck, d));
            }
        }
    }
    res.ok = true;
    res.x = mat_mul(S.right, y);
    return res;
}

inline SolveResult solve_linear(const Mat& A, const Mat& b) {
    if (A.rows != b.rows) throw std::invalid_argument("solve_linear: shape mismatch");
    return solve_linear_smith(smith_form(A), b);
}

// Columns generate {x : A x = 0} over the truncated ring, including torsion
// generators u^{a-d} e_k coming from non-unit divisors.
inline Mat kernel_basis(const Mat& A) {
    SmithForm S = smith_form(A);
    const int a = A.ring->a;
    std::vector<std::pair<int, int>> gens;  // (col index in Smith coords, u-shift)
    const int n = static_cast<int>(S.divisor_exps.size());
    for (int k = 0; k < A.cols; ++k) {
        int d = k < n ? S.divisor_exps[k] : a;
        if (d == 0) continue;         // unit divisor: no kernel contribution
        if (d >= a) gens.push_back({k, 0});  // zero divisor: full column
        else gens.push_back({k, a - d});     // torsion generator
    }
    Mat Y(A.ring, A.cols, static_cast<int>(gens.size()));
    for (size_t t = 0; t < gens.size(); ++t)
        if (gens[t].second < a) Y.blk(gens[t].first, static_cast<int>(t))[gens[t].second] = 1;
    return mat_mul(S.right, Y);
}

// True iff every column of B lies in the column span of A.
inline bool span_contains(const Mat& A, const Mat& B) {
    return solve_linear(A, B).ok;
}

inline bool span_equal(const Mat& A, const Mat& B) {
    return span_contains(A, B) && span_contains(B, A);
}

// A minimal "diagonalized" generating family of the column span of G:
// left_inv * (u^{d_k} e_k) over the non-saturated divisors.
inline Mat span_min_gens(const Mat& G) {
    SmithForm S = smith_form(G);
    std::vector<int> keep;
    for (size_t k = 0; k < S.divisor_exps.size(); ++k)
        if (S.divisor_exps[k] < G.ring->a) keep.push_back(static_cast<int>(k));
    Mat Y(G.ring, G.rows, static_cast<int>(keep.size()));
    for (size_t t = 0; t < keep.size(); ++t) Y.blk(keep[t], static_cast<int>(t))[S.divisor_exps[keep[t]]] = 1;
    return mat_mul(S.left_inv, Y);
}

// Generators of {x : A x in span(M)}.
inline Mat preimage_gens(const Mat& A, const Mat& M) {
    Mat K = kernel_basis(mat_hstack(A, M));
    return mat_rows(K, 0, A.cols);
}

// Generators of the annihilator {y : y^T * M = 0} inside the dual of R^rows.
inline Mat annihilator_gens(const Mat& M) { return kernel_basis(mat_transpose(M)); }

// Random unimodular matrix: (I + strict lower) * diag(units) * (I + strict upper).
inline Mat random_unimodular(const RingPtr& ring, int n, std::mt19937_64& rng) {
    const auto& F = *ring->fq;
    auto rand_elem = [&]() { return static_cast<FqElem>(rng() % ring->q); };
    auto rand_series = [&]() {
        TruncSeries t(ring);
        for (int i = 0; i < ring->a; ++i) t.coeffs[i] = rand_elem();
        return t;
    };
    Mat L = mat_identity(ring, n), U = mat_identity(ring, n), D(ring, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j < i) mat_set(L, i, j, rand_series());
            if (j > i) mat_set(U, i, j, rand_series());
        }
    for (int i = 0; i < n; ++i) {
        TruncSeries t = rand_series();
        t.coeffs[0] = static_cast<FqElem>(1 + rng() % (ring->q - 1));
        mat_set(D, i, i, t);
    }
    return mat_mul(L, mat_mul(D, U));
}

inline Mat random_mat(const RingPtr& ring, int rows, int cols, std::mt19937_64& rng) {
    Mat A(ring, rows, cols);
    for (auto& c : A.data) c = static_cast<FqElem>(rng() % ring->q);
    return A;
}

}  // namespace hf
