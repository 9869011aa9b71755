#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hf/linalg.hpp"

namespace hf {

// Shape of a p-divisible group with O_F-action at precision 1: F has residual
// degree f and ramification index e, the O_F-height is h (total height efh),
// the graded dimension is d (dimension efd).  sigma_order[i] fixes the
// ordering of the embeddings above tau_i as exponents of zeta.
struct GroupShape {
    RingPtr ring;  // precision 1 (a == e*kappa)
    int f = 1, e = 1, h = 1, d = 1;
    std::vector<std::vector<int>> sigma_order;

    int eh() const { return e * h; }
    int ed() const { return e * d; }
    bool same(const GroupShape& o) const {
        return ring->same_ring(*o.ring) && f == o.f && e == o.e && h == o.h && d == o.d;
    }
};

inline GroupShape make_shape(const RingPtr& ring, int f, int e, int h, int d) {
    GroupShape s;
    s.ring = ring;
    s.f = f;
    s.e = e;
    s.h = h;
    s.d = d;
    s.sigma_order.assign(f, {});
    for (int i = 0; i < f; ++i) {
        s.sigma_order[i].resize(e);
        for (int j = 0; j < e; ++j) s.sigma_order[i][j] = j + 1;
    }
    return s;
}

// Per-tau_i data of the evaluated crystal at precision 1.
//   pi:    eh x eh, the [pi]-action on E_i in the fixed R-basis
//   omega: eh x ed, generators of omega_i; the filtration step omega^{[j]} is
//          spanned by the first d*j columns (filtration-adapted basis)
//   versch: ed x eh, the map E_i -> omega_{i-1}^{(p)} written with target
//          coordinates in the twisted omega-basis of the previous component
struct GroupComp {
    Mat pi;
    Mat omega;
    Mat versch;
};

struct GroupData {
    GroupShape shape;
    std::vector<GroupComp> comp;

    int prev(int i) const { return (i + shape.f - 1) % shape.f; }
    int next(int i) const { return (i + 1) % shape.f; }
};

// The canonical [pi]-matrix: cells (ladder l, depth s) indexed l*e + s with
// X: (l, s) -> (l, s+1), X^e = 0.
inline int cell_index(int e, int ladder, int depth) { return ladder * e + depth; }

inline Mat canonical_pi_matrix(const RingPtr& ring, int e, int h) {
    Mat P(ring, e * h, e * h);
    for (int l = 0; l < h; ++l)
        for (int s = 0; s + 1 < e; ++s) P.blk(cell_index(e, l, s + 1), cell_index(e, l, s))[0] = 1;
    return P;
}

// Rank of the mod-u reduction over F_q, plus the set of pivot rows.
inline int fq_rank_mod_u(const Mat& A, std::vector<int>* pivot_rows = nullptr) {
    const auto& F = *A.ring->fq;
    std::vector<std::vector<FqElem>> M(A.rows, std::vector<FqElem>(A.cols));
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) M[i][j] = A.blk(i, j)[0];
    if (pivot_rows) pivot_rows->clear();
    int rank = 0;
    for (int c = 0; c < A.cols && rank < A.rows; ++c) {
        int piv = -1;
        for (int r = 0; r < A.rows; ++r) {
            bool used = false;
            if (pivot_rows)
                for (int pr : *pivot_rows)
                    if (pr == r) used = true;
            if (!used && M[r][c]) {
                piv = r;
                break;
            }
        }
        if (piv < 0) continue;
        FqElem inv = F.inv(M[piv][c]);
        for (int j = 0; j < A.cols; ++j) M[piv][j] = F.mul(M[piv][j], inv);
        for (int r = 0; r < A.rows; ++r) {
            if (r == piv || !M[r][c]) continue;
            FqElem fac = M[r][c];
            for (int j = 0; j < A.cols; ++j) M[r][j] = F.sub(M[r][j], F.mul(fac, M[piv][j]));
        }
        if (pivot_rows) pivot_rows->push_back(piv);
        ++rank;
    }
    return rank;
}

// A Lambda-basis of the crystal (Lambda = R[X]/X^e acting through P): columns
// (v_l, P v_l, ..., P^{e-1} v_l) grouped by ladder.  Empty when the module is
// not free of rank h.
inline std::optional<Mat> crystal_basis(const Mat& P, int e, int h) {
    const int n = e * h;
    if (P.rows != n || P.cols != n) return std::nullopt;
    std::vector<int> pivots;
    fq_rank_mod_u(P, &pivots);
    std::vector<bool> is_pivot(n, false);
    for (int r : pivots) is_pivot[r] = true;
    std::vector<int> tops;
    for (int r = 0; r < n; ++r)
        if (!is_pivot[r]) tops.push_back(r);
    if (static_cast<int>(tops.size()) != h) return std::nullopt;
    Mat B(P.ring, n, n);
    Mat v(P.ring, n, 1);
    for (int l = 0; l < h; ++l) {
        Mat w(P.ring, n, 1);
        w.blk(tops[l], 0)[0] = 1;
        for (int s = 0; s < e; ++s) {
            for (int r = 0; r < n; ++r)
                std::copy(w.blk(r, 0), w.blk(r, 0) + P.ring->a, B.blk(r, cell_index(e, l, s)));
            if (s + 1 < e) w = mat_mul(P, w);
        }
    }
    SmithForm S = smith_form(B);
    if (S.rank_unit() != n) return std::nullopt;
    return B;
}

// Matrix of [pi] restricted to omega in the filtration-adapted basis.
inline std::optional<Mat> try_omega_x_matrix(const Mat& P, const Mat& omega) {
    if (omega.cols == 0) return Mat(P.ring, 0, 0);
    auto sol = solve_linear(omega, mat_mul(P, omega));
    if (!sol.ok) return std::nullopt;
    return sol.x;
}

inline Mat omega_x_matrix(const GroupData& G, int i) {
    auto t = try_omega_x_matrix(G.comp[i].pi, G.comp[i].omega);
    if (!t) throw std::domain_error("omega is not [pi]-stable");
    return *t;
}

struct CheckResult {
    std::string name;
    bool pass;
    std::string witness;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool ok() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    std::string first_failure() const {
        for (const auto& c : checks)
            if (!c.pass) return c.name + (c.witness.empty() ? "" : (": " + c.witness));
        return "";
    }
    void add(const std::string& name, bool pass, const std::string& witness = "") {
        checks.push_back({name, pass, witness});
    }
};

inline RingPtr ring_one_e(const GroupShape& s) { return ring_with_precision(s.ring, s.ring->kappa); }

// Checks every structural invariant of the model; report-valued.
inline ValidationReport validate_group(const GroupData& G) {
    ValidationReport rep;
    const auto& s = G.shape;
    const RingPtr& R = s.ring;

    rep.add("ring_precision", R->a == R->eK, "working ring must have precision 1");
    bool shape_ok = s.f >= 1 && s.e >= 1 && s.h >= 1 && s.d >= 0 && s.d <= s.h && s.e == R->e &&
                    static_cast<int>(s.sigma_order.size()) == s.f && (R->m % s.f) == 0;
    for (int i = 0; i < s.f && shape_ok; ++i) {
        std::vector<bool> seen(s.e + 1, false);
        if (static_cast<int>(s.sigma_order[i].size()) != s.e) shape_ok = false;
        for (int j = 0; j < s.e && shape_ok; ++j) {
            int v = s.sigma_order[i][j];
            if (v < 1 || v > s.e || seen[v]) shape_ok = false;
            else seen[v] = true;
        }
    }
    rep.add("shape", shape_ok);
    if (static_cast<int>(G.comp.size()) != s.f) {
        rep.add("dims", false, "component count != f");
        return rep;
    }

    const int eh = s.eh(), ed = s.ed(), kappa = R->kappa;
    bool dims = true;
    for (int i = 0; i < s.f; ++i) {
        const auto& c = G.comp[i];
        if (c.pi.rows != eh || c.pi.cols != eh || c.omega.rows != eh || c.omega.cols != ed ||
            c.versch.rows != ed || c.versch.cols != eh)
            dims = false;
    }
    rep.add("dims", dims);
    if (!dims || !shape_ok) return rep;

    for (int i = 0; i < s.f; ++i) {
        const auto& c = G.comp[i];
        std::string tag = "[" + std::to_string(i) + "]";

        Mat Ppow = mat_identity(R, eh);
        for (int k = 0; k < s.e; ++k) Ppow = mat_mul(Ppow, c.pi);
        rep.add("pi_nilpotent" + tag, mat_is_zero(Ppow));

        rep.add("crystal_free" + tag, crystal_basis(c.pi, s.e, s.h).has_value(),
                "E not free of rank h over R[X]/X^e");

        SmithForm So = smith_form(c.omega);
        rep.add("hodge_summand" + tag, So.rank_unit() == ed, "omega is not a direct summand of rank ed");

        auto T = try_omega_x_matrix(c.pi, c.omega);
        rep.add("hodge_stable" + tag, T.has_value(), "[pi] omega not contained in omega");

        bool adequate = true;
        std::string wit;
        if (T && ed > 0) {
            Mat Tk = mat_truncate(*T, kappa);
            // [pi] F^{[j]} subset F^{[j-1]} at precision 1/e: in the adapted
            // basis the coordinates of [pi]|omega below row d*(j-1) must die.
            for (int j = 1; j <= s.e && adequate; ++j)
                for (int col = (j - 1) * s.d; col < j * s.d && adequate; ++col)
                    for (int row = (j - 1) * s.d; row < ed && adequate; ++row)
                        if (detail::blk_uval(Tk.blk(row, col), kappa) < kappa) {
                            adequate = false;
                            wit = "graded step j=" + std::to_string(j);
                        }
        }
        rep.add("filtration_adequate" + tag, adequate, wit);

        if (T) {
            int ip = G.prev(i);
            auto Tp = try_omega_x_matrix(G.comp[ip].pi, G.comp[ip].omega);
            bool lin = false;
            if (Tp) lin = mat_eq(mat_mul(c.versch, c.pi), mat_mul(twist_matrix(*Tp), c.versch));
            rep.add("verschiebung_linear" + tag, lin, "V does not intertwine [pi]");
        } else {
            rep.add("verschiebung_linear" + tag, false, "omega_{i-1} not [pi]-stable");
        }

        SmithForm Sv = smith_form(c.versch);
        rep.add("verschiebung_onto" + tag, Sv.rank_unit() == ed,
                "V does not surject onto the twisted omega");
    }
    return rep;
}

}  // namespace hf
