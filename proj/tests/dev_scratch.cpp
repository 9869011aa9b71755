// Temporary development harness (not part of the test suite).
#include <cstdio>
#include <iostream>

#include "hf/generators.hpp"
#include "hf/invariants.hpp"

using namespace hf;

static int fails = 0;
#define CHECK(x)                                              \
    do {                                                      \
        if (!(x)) {                                           \
            ++fails;                                          \
            std::printf("FAIL %s:%d: %s\n", __FILE__, __LINE__, #x); \
        }                                                     \
    } while (0)

int main() {
    // ring_create examples
    {
        auto r = ring_create(3, 1, 2, 4, 8);
        CHECK(r->eK == 8);
        CHECK(r->alpha() == Rat(1));
        CHECK(r->zeta == 2);  // order-2 element of F_3
        bool threw = false;
        try {
            ring_create(5, 1, 3, 1, 3);
        } catch (const std::exception&) {
            threw = true;
        }
        CHECK(threw);  // 3 does not divide 4
        auto r2 = ring_create(5, 2, 3, 1, 3);
        CHECK(r2->q == 25);
    }
    // series arithmetic
    {
        auto r = ring_create(5, 1, 2, 3, 6);
        auto u = ts_monomial(r, 1);
        auto u5 = ts_monomial(r, 5);
        CHECK(ts_is_zero(ts_mul(u, u5)));
        auto one = ts_one(r);
        auto x = ts_add(one, u);
        auto y = ts_sub(one, u);
        auto prod = ts_mul(x, y);
        CHECK(prod.coeffs[0] == 1 && prod.coeffs[1] == 0 && prod.coeffs[2] == 4);
        CHECK(ts_is_zero(ts_add(x, ts_neg(x))));
        auto inv = ts_invert(x);
        CHECK(ts_eq(ts_mul(inv, x), one));
        // valuations
        CHECK(ts_val(ts_monomial(r, 2)).v == Rat(2, 6));
        CHECK(ts_val(ts_zero(r)).sat);
        auto z = ts_add(ts_monomial(r, 1), ts_monomial(r, 3));
        CHECK(ts_val(z).v == Rat(1, 6));
        // frobenius is a hom
        std::mt19937_64 rng(7);
        for (int t = 0; t < 50; ++t) {
            TruncSeries a(r), b(r);
            for (int k = 0; k < r->a; ++k) {
                a.coeffs[k] = rng() % r->q;
                b.coeffs[k] = rng() % r->q;
            }
            CHECK(ts_eq(ts_frobenius(ts_mul(a, b)), ts_mul(ts_frobenius(a), ts_frobenius(b))));
            CHECK(ts_eq(ts_frobenius(ts_add(a, b)), ts_add(ts_frobenius(a), ts_frobenius(b))));
            // v(xy) = v(x)+v(y) capped
            CHECK(ts_val(ts_mul(a, b)) == ts_val(a) + ts_val(b));
        }
    }
    // smith form + solve + kernel on random matrices
    {
        auto r = ring_create(3, 2, 2, 2, 4);
        std::mt19937_64 rng(42);
        for (int t = 0; t < 30; ++t) {
            Mat A = random_mat(r, 4, 5, rng);
            SmithForm S = smith_form(A);
            Mat lhs = mat_mul(S.left, mat_mul(A, S.right));
            CHECK(mat_eq(lhs, S.diagonal()));
            CHECK(mat_eq(mat_mul(S.left, S.left_inv), mat_identity(r, 4)));
            CHECK(mat_eq(mat_mul(S.right_inv, S.right), mat_identity(r, 5)));
            // kernel columns are annihilated
            Mat K = kernel_basis(A);
            if (K.cols) CHECK(mat_is_zero(mat_mul(A, K)));
            // unimodular invariance of divisors
            Mat P = random_unimodular(r, 4, rng), Q = random_unimodular(r, 5, rng);
            SmithForm S2 = smith_form(mat_mul(P, mat_mul(A, Q)));
            CHECK(S.divisor_exps == S2.divisor_exps);
            // consistent solve
            Mat x0 = random_mat(r, 5, 2, rng);
            Mat b = mat_mul(A, x0);
            auto sol = solve_linear(A, b);
            CHECK(sol.ok);
            if (sol.ok) CHECK(mat_eq(mat_mul(A, sol.x), b));
        }
        // det via divisors vs diag example
        Mat D(r, 2, 2);
        mat_set(D, 0, 0, ts_monomial(r, 1));
        mat_set(D, 1, 1, ts_monomial(r, 1));
        CHECK(trunc_val_det(D).v == Rat(2, 4));
        Mat Z(r, 3, 3);
        CHECK(trunc_val_det(Z).sat);
        auto cd = cokernel_divisors(Z, r->alpha());
        CHECK(cd.size() == 3 && cd[0] == r->alpha());
    }
    // generator + validation + invariant recovery
    {
        auto R = ring_create(3, 1, 2, 8, 16);
        GroupShape sh = make_shape(R, 1, 2, 3, 1);
        InvariantTargets t = InvariantTargets::zeros(sh);
        t.hasse[0] = Rat(1, 8);
        t.m[0][2] = Rat(1, 16);
        WeavePlan plan;
        GroupData G = gen_with_invariants(sh, t, 1234, &plan);
        auto rep = validate_group(G);
        if (!rep.ok()) std::printf("validation: %s\n", rep.first_failure().c_str());
        CHECK(rep.ok());
        auto inv = invariant_report(G);
        CHECK(!inv.hasse_i[0].sat && inv.hasse_i[0].v == Rat(1, 8));
        CHECK(!inv.m_i[0][2].sat && inv.m_i[0][2].v == Rat(1, 16));
        CHECK(inv.formula_consistent);
        // the spec's worked example: ha^{[1]} = 5/16, ha^{[2]} = 3/16
        CHECK(inv.ha_i_j[0][1].capped() == Rat(5, 16));
        CHECK(inv.ha_i_j[0][2].capped() == Rat(3, 16));
        auto rap = rapoport_check(G);
        CHECK(!rap.free_module && !rap.all_m_zero);
        // ordinary instance
        GroupData G0 = gen_with_invariants(sh, InvariantTargets::zeros(sh), 99, nullptr);
        CHECK(validate_group(G0).ok());
        auto inv0 = invariant_report(G0);
        CHECK(inv0.ha.capped() == Rat(0));
        auto rap0 = rapoport_check(G0);
        CHECK(rap0.free_module && rap0.all_m_zero);
        // adequate filtration recovery on the Rapoport instance
        auto fa = find_adequate_filtration(G0, 0);
        CHECK(fa.has_value());
        if (fa) {
            auto m = m_of_filtration(mat_truncate(G0.comp[0].pi, R->kappa), *fa, sh.e, sh.d);
            for (int j = 2; j <= sh.e; ++j) CHECK(m[j].capped() == Rat(0));
        }
        // random alternative filtration keeps invariants (ha < 1/e here)
        std::mt19937_64 rng(5);
        Mat alt = random_adequate_filtration(G, 0, rng);
        auto malt = m_of_filtration(mat_truncate(G.comp[0].pi, R->kappa), alt, sh.e, sh.d);
        CHECK(malt[2] == inv.m_i[0][2]);
        Mat alt_prev = alt;  // f = 1
        TruncVal halt = hasse_of_filtration(G, 0, alt, alt_prev);
        CHECK(halt == inv.hasse_i[0]);
    }
    // f = 2 instance with distinct components
    {
        auto R = ring_create(5, 2, 2, 4, 8);
        GroupShape sh = make_shape(R, 2, 2, 3, 1);
        InvariantTargets t = InvariantTargets::zeros(sh);
        t.hasse[0] = Rat(1, 8);
        t.m[1][2] = Rat(1, 8);
        GroupData G = gen_with_invariants(sh, t, 777, nullptr);
        auto rep = validate_group(G);
        if (!rep.ok()) std::printf("validation f2: %s\n", rep.first_failure().c_str());
        CHECK(rep.ok());
        auto inv = invariant_report(G);
        CHECK(inv.hasse_i[0].capped() == Rat(1, 8));
        CHECK(inv.hasse_i[1].capped() == Rat(0));
        CHECK(inv.m_i[1][2].capped() == Rat(1, 8));
        CHECK(inv.m_i[0][2].capped() == Rat(0));
        CHECK(inv.formula_consistent);
    }
    // e = 1 degeneration
    {
        auto R = ring_create(3, 1, 1, 3, 3);
        GroupShape sh = make_shape(R, 1, 1, 2, 1);
        InvariantTargets t = InvariantTargets::zeros(sh);
        t.hasse[0] = Rat(1, 3);
        GroupData G = gen_with_invariants(sh, t, 5, nullptr);
        CHECK(validate_group(G).ok());
        auto inv = invariant_report(G);
        CHECK(inv.hasse_i[0].capped() == Rat(1, 3));
        CHECK(inv.ha_i[0].capped() == Rat(1, 3));
        CHECK(inv.formula_consistent);
    }
    std::printf(fails ? "FAILURES: %d\n" : "all ok\n", fails);
    return fails ? 1 : 0;
}
