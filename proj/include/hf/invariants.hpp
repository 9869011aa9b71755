#pragma once

#include <random>

#include "hf/group.hpp"

namespace hf {

// Sum of truncated valuations with the "extended" cap (caps add): exact when
// every summand is exact, otherwise a saturated lower bound.
inline TruncVal tv_sum_extend(const std::vector<TruncVal>& xs) {
    if (xs.empty()) return TruncVal::exact(Rat(0), Rat(1));
    Rat v(0), cap(0);
    bool sat = false;
    for (const auto& x : xs) {
        v += x.capped();
        cap += x.cap;
        sat = sat || x.sat;
    }
    if (sat) return TruncVal::saturated(cap);
    return TruncVal{v, false, cap};
}

struct InvariantReport {
    std::vector<TruncVal> ha_i;                      // cap 1
    std::vector<std::vector<TruncVal>> m_i;          // [i][j], j in 2..e; cap 1/e
    std::vector<TruncVal> hasse_i;                   // cap 1/e
    std::vector<std::vector<TruncVal>> ha_i_j;       // [i][j], j in 1..e; cap 1/e (direct)
    std::vector<std::vector<TruncVal>> ha_i_j_form;  // product-formula values
    std::vector<TruncVal> ha_bracket;                // [j], j in 1..e (extended cap)
    std::vector<TruncVal> r_i;                       // sum (k-1) m_i[k] (extended cap)
    TruncVal ha;                                     // capped sum at 1
    bool formula_consistent = false;
    bool independence_hypotheses_met = false;  // ha(G) < 1/e
};

// ha_i: determinant valuation of V_i restricted to omega_i, capped at 1.
inline std::vector<TruncVal> unramified_hasse(const GroupData& G) {
    std::vector<TruncVal> out;
    for (int i = 0; i < G.shape.f; ++i)
        out.push_back(trunc_val_det(mat_mul(G.comp[i].versch, G.comp[i].omega)));
    return out;
}

// m invariants of one component from a filtration given in crystal
// coordinates at precision 1/e (columns d*j span the j-th step).
inline std::vector<TruncVal> m_of_filtration(const Mat& P_k, const Mat& F, int e, int d) {
    std::vector<TruncVal> m(e + 1, TruncVal::exact(Rat(0), F.ring->alpha()));
    for (int j = 2; j <= e; ++j) {
        Mat grj = mat_cols(F, (j - 1) * d, j * d);
        Mat img = mat_mul(P_k, grj);
        Mat prefix = mat_cols(F, 0, (j - 1) * d);
        auto sol = solve_linear(prefix, img);
        if (!sol.ok) throw std::domain_error("m_of_filtration: filtration is not adequate");
        Mat graded = mat_rows(sol.x, (j - 2) * d, (j - 1) * d);
        m[j] = trunc_val_det(graded);
    }
    return m;
}

inline std::vector<std::vector<TruncVal>> m_invariants(const GroupData& G) {
    const int kappa = G.shape.ring->kappa;
    std::vector<std::vector<TruncVal>> out;
    for (int i = 0; i < G.shape.f; ++i) {
        Mat Pk = mat_truncate(G.comp[i].pi, kappa);
        Mat Fk = mat_truncate(G.comp[i].omega, kappa);
        out.push_back(m_of_filtration(Pk, Fk, G.shape.e, G.shape.d));
    }
    return out;
}

namespace detail {
// Unimodular completion: columns of basis_of completing span(C) to the full
// space, taken from the last columns of the Smith left inverse.
inline Mat summand_completion(const Mat& C, int full_rank) {
    SmithForm S = smith_form(C);
    if (S.rank_unit() != C.cols) throw std::domain_error("summand_completion: not a direct summand");
    return mat_cols(S.left_inv, C.cols, full_rank);
}
}  // namespace detail

// hasse_i from chosen filtrations (crystal coordinates, precision 1/e).
// The division by X^{e-1} happens inside the crystal; the result is reduced
// modulo the twisted (e-1)-st filtration step of the previous component.
inline TruncVal hasse_of_filtration(const GroupData& G, int i, const Mat& F_i, const Mat& F_prev) {
    const auto& s = G.shape;
    const int kappa = s.ring->kappa, d = s.d, e = s.e, ed = s.ed();
    if (d == 0) return TruncVal::exact(Rat(0), Rat(1, e));
    int ip = G.prev(i);
    Mat Pk = mat_truncate(G.comp[i].pi, kappa);
    Mat Vk = mat_truncate(G.comp[i].versch, kappa);
    Mat Pe1 = mat_identity(Pk.ring, s.eh());
    for (int k = 0; k + 1 < e; ++k) Pe1 = mat_mul(Pe1, Pk);
    Mat Y = mat_cols(F_i, 0, d);
    auto div = solve_linear(Pe1, Y);
    if (!div.ok) throw std::domain_error("hasse: division by X^{e-1} failed (corrupted crystal data)");
    Mat W = mat_mul(Vk, div.x);  // omega_{i-1} coordinates, twisted basis
    // quotient by the twisted span of F_prev^{[e-1]}
    Mat OmPrev = mat_truncate(G.comp[ip].omega, kappa);
    Mat Cprev = mat_cols(F_prev, 0, (e - 1) * d);
    Mat coordsC(Pk.ring, ed, (e - 1) * d);
    if ((e - 1) * d > 0) {
        auto sol = solve_linear(OmPrev, Cprev);
        if (!sol.ok) throw std::domain_error("hasse: filtration not inside omega");
        coordsC = sol.x;
    }
    Mat tw = twist_matrix(coordsC);
    Mat B = mat_hstack(tw, detail::summand_completion(tw, ed));
    auto qc = solve_linear(B, W);
    if (!qc.ok) throw std::domain_error("hasse: quotient coordinates failed");
    return trunc_val_det(mat_rows(qc.x, (e - 1) * d, ed));
}

inline std::vector<TruncVal> hasse_primitive(const GroupData& G) {
    const int kappa = G.shape.ring->kappa;
    std::vector<TruncVal> out;
    for (int i = 0; i < G.shape.f; ++i) {
        Mat Fi = mat_truncate(G.comp[i].omega, kappa);
        Mat Fp = mat_truncate(G.comp[G.prev(i)].omega, kappa);
        out.push_back(hasse_of_filtration(G, i, Fi, Fp));
    }
    return out;
}

// ha_i^{[j]}: determinant valuations of V on the graded pieces at precision
// 1/e; errors if V fails to respect the filtrations there.
inline std::vector<std::vector<TruncVal>> partial_hasse_direct(const GroupData& G) {
    const auto& s = G.shape;
    const int kappa = s.ring->kappa, d = s.d, e = s.e, ed = s.ed();
    std::vector<std::vector<TruncVal>> out(s.f, std::vector<TruncVal>(e + 1, TruncVal::exact(Rat(0), Rat(1, e))));
    for (int i = 0; i < s.f; ++i) {
        Mat Vk = mat_truncate(G.comp[i].versch, kappa);
        Mat Om = mat_truncate(G.comp[i].omega, kappa);
        Mat W = mat_mul(Vk, Om);  // ed x ed in twisted omega_{i-1} coordinates
        for (int j = 1; j <= e; ++j) {
            for (int col = (j - 1) * d; col < j * d; ++col)
                for (int row = j * d; row < ed; ++row)
                    if (detail::blk_uval(W.blk(row, col), kappa) < kappa)
                        throw std::domain_error("partial_hasse_direct: V not filtration-compatible at 1/e");
            Mat graded(W.ring, d, d);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c)
                    std::copy(W.blk((j - 1) * d + r, (j - 1) * d + c),
                              W.blk((j - 1) * d + r, (j - 1) * d + c) + kappa, graded.blk(r, c));
            out[i][j] = trunc_val_det(graded);
        }
    }
    return out;
}

// Right-hand sides of the product formula, as capped sums of the primitives.
inline std::vector<std::vector<TruncVal>> partial_hasse_formula(const GroupData& G,
                                                               const std::vector<TruncVal>& hasse,
                                                               const std::vector<std::vector<TruncVal>>& m) {
    const auto& s = G.shape;
    std::vector<std::vector<TruncVal>> out(s.f,
                                           std::vector<TruncVal>(s.e + 1, TruncVal::exact(Rat(0), Rat(1, s.e))));
    for (int i = 0; i < s.f; ++i) {
        int ip = G.prev(i);
        for (int j = 1; j <= s.e; ++j) {
            TruncVal acc = hasse[i];
            for (int k = 2; k <= j; ++k) acc = acc + m[i][k];
            for (int k = j + 1; k <= s.e; ++k) acc = acc + m[ip][k].scale(s.ring->p);
            out[i][j] = acc;
        }
    }
    return out;
}

inline InvariantReport invariant_report(const GroupData& G) {
    const auto& s = G.shape;
    InvariantReport r;
    r.ha_i = unramified_hasse(G);
    r.m_i = m_invariants(G);
    r.hasse_i = hasse_primitive(G);
    r.ha_i_j = partial_hasse_direct(G);
    r.ha_i_j_form = partial_hasse_formula(G, r.hasse_i, r.m_i);
    r.ha = tv_sum_extend(r.ha_i).recap(Rat(1));
    r.ha_bracket.assign(s.e + 1, TruncVal::exact(Rat(0), Rat(1)));
    for (int j = 1; j <= s.e; ++j) {
        std::vector<TruncVal> col;
        for (int i = 0; i < s.f; ++i) col.push_back(r.ha_i_j[i][j]);
        r.ha_bracket[j] = tv_sum_extend(col);
    }
    r.r_i.clear();
    for (int i = 0; i < s.f; ++i) {
        std::vector<TruncVal> terms;
        for (int k = 2; k <= s.e; ++k) terms.push_back(r.m_i[i][k].scale(k - 1));
        r.r_i.push_back(tv_sum_extend(terms));
    }
    r.formula_consistent = true;
    const Rat one_e(1, s.e);
    for (int i = 0; i < s.f; ++i) {
        for (int j = 1; j <= s.e; ++j)
            if (r.ha_i_j[i][j] != r.ha_i_j_form[i][j]) r.formula_consistent = false;
        // ha_i identity, capped at 1/e
        TruncVal rhs = r.hasse_i[i].scale(s.e);
        for (int k = 2; k <= s.e; ++k) rhs = rhs + r.m_i[i][k].scale(s.e + 1 - k);
        for (int k = 2; k <= s.e; ++k) rhs = rhs + r.m_i[G.prev(i)][k].scale(static_cast<std::int64_t>(s.ring->p) * (k - 1));
        if (rhs.recap(one_e) != r.ha_i[i].recap(one_e)) r.formula_consistent = false;
    }
    r.independence_hypotheses_met = !r.ha.sat && r.ha.v < one_e;
    return r;
}

// Rapoport freeness test by the change-of-coordinates criterion: the family
// (v_t, [pi] v_t, ..., [pi]^{e-1} v_t) built from lifts of the top graded
// piece must be a basis of omega.
struct RapoportResult {
    bool free_module = true;
    bool all_m_zero = true;
    std::vector<TruncVal> witness_dets;
};

inline RapoportResult rapoport_check(const GroupData& G) {
    const auto& s = G.shape;
    RapoportResult res;
    for (int i = 0; i < s.f; ++i) {
        Mat T = omega_x_matrix(G, i);  // [pi] on omega, adapted basis
        const int ed = s.ed();
        Mat fam(s.ring, ed, ed);
        for (int t = 0; t < s.d; ++t) {
            Mat v(s.ring, ed, 1);
            v.blk((s.e - 1) * s.d + t, 0)[0] = 1;
            for (int k = 0; k < s.e; ++k) {
                for (int rr = 0; rr < ed; ++rr)
                    std::copy(v.blk(rr, 0), v.blk(rr, 0) + s.ring->a, fam.blk(rr, t * s.e + k));
                if (k + 1 < s.e) v = mat_mul(T, v);
            }
        }
        TruncVal det = trunc_val_det(fam);
        res.witness_dets.push_back(det);
        if (det.sat || det.v != Rat(0)) res.free_module = false;
    }
    auto m = m_invariants(G);
    for (const auto& row : m)
        for (const auto& v : row)
            if (v.sat || v.v != Rat(0)) res.all_m_zero = false;
    return res;
}

// Greedy construction of an adequate filtration from the [pi]-action alone:
// repeatedly extract a free rank-d direct summand of the kernel of [pi] in
// the current quotient and lift.  Heuristic; returns nothing on failure.
inline std::optional<Mat> find_adequate_filtration(const GroupData& G, int i) {
    const auto& s = G.shape;
    const int kappa = s.ring->kappa, d = s.d, e = s.e, ed = s.ed();
    RingPtr Rk = ring_with_precision(s.ring, kappa);
    Mat T = mat_truncate(omega_x_matrix(G, i), kappa);
    Mat F(Rk, ed, 0);  // growing filtration in omega coordinates
    for (int j = 1; j <= e; ++j) {
        // candidates: x with T x in span(F)
        Mat K = F.cols == 0 ? kernel_basis(T) : preimage_gens(T, F);
        Mat cand = span_min_gens(K);
        Mat Fnext = F;
        int added = 0;
        for (int c = 0; c < cand.cols && added < d; ++c) {
            Mat col = mat_cols(cand, c, c + 1);
            Mat trial = mat_hstack(Fnext, col);
            SmithForm S = smith_form(trial);
            if (S.rank_unit() == trial.cols) {
                Fnext = trial;
                ++added;
            }
        }
        if (added < d) return std::nullopt;
        F = Fnext;
    }
    // verify adequacy and convert to crystal coordinates
    try {
        m_of_filtration(mat_truncate(G.comp[i].pi, kappa), mat_mul(mat_truncate(G.comp[i].omega, kappa), F), e,
                        d);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    return mat_mul(mat_truncate(G.comp[i].omega, kappa), F);
}

// A random alternative adequate filtration at precision 1/e, as a perturbation
// of the stored one by a unimodular transform with damped lower part.  The
// perturbation depth is pushed as low as adequacy allows.
inline Mat random_adequate_filtration(const GroupData& G, int i, std::mt19937_64& rng) {
    const auto& s = G.shape;
    const int kappa = s.ring->kappa, d = s.d, e = s.e, ed = s.ed();
    RingPtr Rk = ring_with_precision(s.ring, kappa);
    Mat Om = mat_truncate(G.comp[i].omega, kappa);
    Mat Pk = mat_truncate(G.comp[i].pi, kappa);
    for (int v = 1; v <= kappa; ++v) {
        for (int attempt = 0; attempt < 4; ++attempt) {
            Mat A = mat_identity(Rk, ed);
            for (int r = 0; r < ed; ++r)
                for (int c = 0; c < ed; ++c) {
                    int gr_r = r / d, gr_c = c / d;
                    TruncSeries t(Rk);
                    if (gr_c > gr_r) {  // upper block part: free
                        for (int k = 0; k < kappa; ++k) t.coeffs[k] = static_cast<FqElem>(rng() % Rk->q);
                        mat_set(A, r, c, ts_add(mat_get(A, r, c), t));
                    } else if (gr_c < gr_r) {  // lower block part: damped by u^v
                        for (int k = v; k < kappa; ++k) t.coeffs[k] = static_cast<FqElem>(rng() % Rk->q);
                        mat_set(A, r, c, ts_add(mat_get(A, r, c), t));
                    }
                }
            Mat F = mat_mul(Om, A);
            try {
                m_of_filtration(Pk, F, e, d);
                SmithForm S = smith_form(F);
                if (S.rank_unit() == ed) return F;
            } catch (const std::exception&) {
            }
        }
    }
    return mat_truncate(G.comp[i].omega, kappa);  // stored filtration as fallback
}

}  // namespace hf
