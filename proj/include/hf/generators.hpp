#pragma once

#include <random>
#include <stdexcept>

#include "hf/group.hpp"

namespace hf {

// Prescribed primitive invariants: hasse[i] and m[i][j] (j = 2..e), all
// rationals in [0, 1/e] with denominator dividing e*kappa.
struct InvariantTargets {
    std::vector<Rat> hasse;
    std::vector<std::vector<Rat>> m;  // m[i][j], index j in [2, e]; entries [0], [1] unused

    static InvariantTargets zeros(const GroupShape& s) {
        InvariantTargets t;
        t.hasse.assign(s.f, Rat(0));
        t.m.assign(s.f, std::vector<Rat>(s.e + 1, Rat(0)));
        return t;
    }
};

// Ladder bookkeeping of a generated instance (used by the canonical-subgroup
// scenario builder).
struct WeavePlan {
    // per component: carrier[t] = ladder of the first run of track t
    std::vector<std::vector<int>> carrier;
    std::vector<std::vector<int>> noncarrier;  // remaining ladders
};

namespace detail {

inline TruncSeries rand_series(const RingPtr& R, std::mt19937_64& rng) {
    TruncSeries t(R);
    for (int i = 0; i < R->a; ++i) t.coeffs[i] = static_cast<FqElem>(rng() % R->q);
    return t;
}
inline TruncSeries rand_unit(const RingPtr& R, std::mt19937_64& rng) {
    TruncSeries t = rand_series(R, rng);
    t.coeffs[0] = static_cast<FqElem>(1 + rng() % (R->q - 1));
    return t;
}
// u^k * unit
inline TruncSeries rand_val_exact(const RingPtr& R, int k, std::mt19937_64& rng) {
    if (k >= R->a) return ts_zero(R);
    TruncSeries t(R);
    t.coeffs[k] = static_cast<FqElem>(1 + rng() % (R->q - 1));
    for (int i = k + 1; i < R->a; ++i) t.coeffs[i] = static_cast<FqElem>(rng() % R->q);
    return t;
}

// Shift every cell one X-level up (towards depth 0); requires depth-0 slots
// to be empty.
inline Mat shift_back_column(const Mat& col, int e, int h) {
    Mat r(col.ring, col.rows, 1);
    for (int l = 0; l < h; ++l) {
        if (detail::blk_uval(col.blk(cell_index(e, l, 0), 0), col.ring->a) != col.ring->a)
            throw std::logic_error("shift_back_column: depth-0 cell occupied");
        for (int s = 1; s < e; ++s)
            std::copy(col.blk(cell_index(e, l, s), 0), col.blk(cell_index(e, l, s), 0) + col.ring->a,
                      r.blk(cell_index(e, l, s - 1), 0));
    }
    return r;
}

}  // namespace detail

inline int rat_to_u_exp(const Rat& v, int eK) {
    Rat scaled = v * eK;
    if (scaled.denominator() != 1) throw std::invalid_argument("target valuation not in (1/eK)Z");
    return static_cast<int>(scaled.numerator());
}

// Builds a group with the prescribed primitive Hasse invariants, realized
// exactly: omega sits in standard position with the filtration spanned by
// designated basis blocks, the [pi]-action is block-strictly-upper-triangular
// with graded determinant valuations m[i][j], and the Verschiebung realizes
// the Hasse_i block with determinant valuation hasse[i].  Deterministic for a
// fixed seed.
inline GroupData gen_with_invariants(const GroupShape& shape, const InvariantTargets& targets,
                                     std::uint64_t seed, WeavePlan* plan_out = nullptr) {
    const RingPtr& R = shape.ring;
    if (R->a != R->eK) throw std::invalid_argument("gen_with_invariants: need precision-1 ring");
    const int f = shape.f, e = shape.e, h = shape.h, d = shape.d;
    const int eh = shape.eh(), ed = shape.ed();
    if (static_cast<int>(targets.hasse.size()) != f || static_cast<int>(targets.m.size()) != f)
        throw std::invalid_argument("gen_with_invariants: target shape mismatch");

    const Rat one_e(1, e);
    std::vector<std::vector<int>> breaks(f);  // ascending j with m[i][j] > 0
    for (int i = 0; i < f; ++i) {
        if (targets.hasse[i] < Rat(0) || targets.hasse[i] > one_e)
            throw std::invalid_argument("gen_with_invariants: hasse target out of [0, 1/e]");
        rat_to_u_exp(targets.hasse[i], R->eK);
        if (static_cast<int>(targets.m[i].size()) != e + 1)
            throw std::invalid_argument("gen_with_invariants: m target shape mismatch");
        for (int j = 2; j <= e; ++j) {
            if (targets.m[i][j] < Rat(0) || targets.m[i][j] > one_e)
                throw std::invalid_argument("gen_with_invariants: m target out of [0, 1/e]");
            rat_to_u_exp(targets.m[i][j], R->eK);
            if (targets.m[i][j] > Rat(0)) breaks[i].push_back(j);
        }
        if (d > 0 && static_cast<int>(breaks[i].size()) > h - d)
            throw std::invalid_argument("gen_with_invariants: too many nonzero m targets for this (h, d)");
    }
    for (int i = 0; i < f; ++i) {
        int ip = (i + f - 1) % f;
        int plugs = static_cast<int>(breaks[ip].size()) + (targets.hasse[i] > Rat(0) ? 1 : 0);
        if (d > 0 && plugs > h - d)
            throw std::invalid_argument("gen_with_invariants: hasse/m targets exceed the V-coverage budget");
    }

    std::mt19937_64 rng(seed);
    GroupData G;
    G.shape = shape;
    G.comp.resize(f);

    WeavePlan plan;
    plan.carrier.assign(f, {});
    plan.noncarrier.assign(f, {});
    std::vector<Mat> cascade(f);  // [pi] on omega in the adapted basis

    for (int i = 0; i < f; ++i) {
        G.comp[i].pi = canonical_pi_matrix(R, e, h);
        Mat Omega(R, eh, ed);
        Mat T(R, ed, ed);
        int next_ladder = 0;
        std::vector<bool> used(h, false);
        for (int t = 0; t < d; ++t) {
            Mat g(R, eh, 1);
            for (int j = 1; j <= e; ++j) {
                bool is_break = (t == 0) && targets.m[i].size() > 1 && j >= 2 && targets.m[i][j] > Rat(0);
                TruncSeries mu;  // X g^{[j]} = mu * g^{[j-1]}
                if (j == 1) {
                    int lad = next_ladder++;
                    used[lad] = true;
                    plan.carrier[i].push_back(lad);
                    Mat fresh(R, eh, 1);
                    mat_set(fresh, cell_index(e, lad, e - 1), 0, detail::rand_unit(R, rng));
                    g = fresh;
                    mu = ts_zero(R);
                } else if (is_break) {
                    int lad = next_ladder++;
                    used[lad] = true;
                    Mat fresh(R, eh, 1);
                    mat_set(fresh, cell_index(e, lad, e - 1), 0, detail::rand_unit(R, rng));
                    TruncSeries y = detail::rand_val_exact(R, rat_to_u_exp(targets.m[i][j], R->eK), rng);
                    g = mat_add(fresh, mat_scale(detail::shift_back_column(g, e, h), y));
                    mu = y;
                } else {
                    TruncSeries c = detail::rand_unit(R, rng);
                    g = mat_scale(detail::shift_back_column(g, e, h), c);
                    mu = c;
                }
                int col = (j - 1) * d + t;
                for (int r = 0; r < eh; ++r)
                    std::copy(g.blk(r, 0), g.blk(r, 0) + R->a, Omega.blk(r, col));
                if (j >= 2) mat_set(T, (j - 2) * d + t, col, mu);
            }
        }
        for (int l = 0; l < h; ++l) {
            bool is_carrier = false;
            for (int c : plan.carrier[i])
                if (c == l) is_carrier = true;
            if (!is_carrier) plan.noncarrier[i].push_back(l);
        }
        G.comp[i].omega = Omega;
        cascade[i] = T;
    }

    // Verschiebung: an O_F-linear map is freely determined by the images of
    // the ladder tops; cells (l, s) map through the twisted cascade.  The
    // seeds form a staircase whose units survive mod u, so the map is onto
    // the twisted omega by construction; u-divisible noise keeps the data
    // generic without touching that staircase (the cascade blocks are
    // diagonal per track, so cascaded images never mix tracks).
    for (int i = 0; i < f; ++i) {
        int ip = (i + f - 1) % f;
        Mat Tw = twist_matrix(cascade[ip]);
        std::vector<Mat> seeds(h, Mat(R, ed, 1));
        int hexp = rat_to_u_exp(targets.hasse[i], R->eK);
        auto noise = [&](int minval) {
            TruncSeries t(R);
            for (int k = minval; k < R->a; ++k) t.coeffs[k] = static_cast<FqElem>(rng() % R->q);
            return t;
        };
        // carriers: the Hasse block H (upper triangular, det valuation =
        // hasse target) in the top graded piece, noise of positive valuation
        // below it
        for (int t = 0; t < d; ++t) {
            Mat v(R, ed, 1);
            for (int r = 0; r < (e - 1) * d; ++r) mat_set(v, r, 0, noise(1));
            for (int t2 = 0; t2 < d; ++t2) {
                TruncSeries entry = ts_zero(R);
                if (t2 == t) entry = (t == 0) ? detail::rand_val_exact(R, hexp, rng) : detail::rand_unit(R, rng);
                else if (t2 < t) entry = noise(std::max(1, hexp));
                mat_set(v, (e - 1) * d + t2, 0, entry);
            }
            seeds[plan.carrier[i][t]] = v;
        }
        // plugs: unit coverage of the track-0 slots shadowed by the hasse
        // damping and by the breaks of the previous component's cascade
        std::vector<int> plug_rows;
        if (d > 0) {
            if (targets.hasse[i] > Rat(0)) plug_rows.push_back((e - 1) * d);
            for (int j : breaks[ip]) plug_rows.push_back((j - 2) * d);
        }
        size_t pidx = 0;
        for (int l : plan.noncarrier[i]) {
            Mat v(R, ed, 1);
            for (int r = 0; r < ed; ++r) mat_set(v, r, 0, noise(1));
            if (pidx < plug_rows.size()) {
                mat_set(v, plug_rows[pidx], 0, detail::rand_unit(R, rng));
                ++pidx;
            }
            seeds[l] = v;
        }
        Mat V(R, ed, eh);
        for (int l = 0; l < h; ++l) {
            Mat img = seeds[l];
            for (int s = 0; s < e; ++s) {
                for (int r = 0; r < ed; ++r)
                    std::copy(img.blk(r, 0), img.blk(r, 0) + R->a, V.blk(r, cell_index(e, l, s)));
                if (s + 1 < e) img = mat_mul(Tw, img);
            }
        }
        G.comp[i].versch = V;
    }

    if (plan_out) *plan_out = plan;
    return G;
}

}  // namespace hf
