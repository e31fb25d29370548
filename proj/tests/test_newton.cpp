#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "gnt/multiindex.hpp"
#include "gnt/newton.hpp"
#include "gnt/oracle.hpp"
#include "test_helpers.hpp"

using gnt::MultiIndex;
using gnt::newton_table;
using gnt::OperatorSystem;
using gnt_test::diagonal_system;
using gnt_test::random_symmetric_system;

TEST_CASE("single diagonal operator reproduces hand values", "[newton]") {
    const auto sys = diagonal_system({{1.0, 2.0, 3.0}});
    const auto table = newton_table(sys, 3);

    CHECK(table.sigma_at(MultiIndex({0})) == 1.0);
    CHECK(table.sigma_at(MultiIndex({1})) == Catch::Approx(6.0));
    CHECK(table.sigma_at(MultiIndex({2})) == Catch::Approx(11.0));
    CHECK(table.sigma_at(MultiIndex({3})) == Catch::Approx(6.0));

    const Eigen::Vector3d t1 = table.transform_at(MultiIndex({1})).diagonal();
    CHECK(t1.isApprox(Eigen::Vector3d(5.0, 4.0, 3.0), 1e-14));
    const Eigen::Vector3d t2 = table.transform_at(MultiIndex({2})).diagonal();
    CHECK(t2.isApprox(Eigen::Vector3d(6.0, 3.0, 2.0), 1e-14));
    // Top transformation is annihilated by the characteristic polynomial.
    CHECK(table.transform_at(MultiIndex({3})).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("two diagonal operators: mixed coefficient by hand", "[newton]") {
    // det(I + t1 diag(1,2) + t2 diag(3,4)) = (1 + t1 + 3 t2)(1 + 2 t1 + 4 t2).
    const auto sys = diagonal_system({{1.0, 2.0}, {3.0, 4.0}});
    const auto table = newton_table(sys, 2);
    CHECK(table.sigma_at(MultiIndex({1, 0})) == Catch::Approx(3.0));
    CHECK(table.sigma_at(MultiIndex({0, 1})) == Catch::Approx(7.0));
    CHECK(table.sigma_at(MultiIndex({2, 0})) == Catch::Approx(2.0));
    CHECK(table.sigma_at(MultiIndex({1, 1})) == Catch::Approx(10.0));
    CHECK(table.sigma_at(MultiIndex({0, 2})) == Catch::Approx(12.0));
}

TEST_CASE("recursion matches the determinant oracle on random systems", "[newton]") {
    gnt::Rng rng(20240811);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);  // 2..5
        const int q = 1 + static_cast<int>(rng.next_u64() % 3);  // 1..3
        const auto sys = random_symmetric_system(n, q, rng);
        const auto table = newton_table(sys, n);
        const auto reference = gnt::sigma_oracle(sys, n);
        const double scale = std::max(1.0, sys.max_operator_norm());
        for (const auto& [u, expected] : reference) {
            const double tol = 1e-12 * std::pow(scale, u.degree());
            CHECK(std::abs(table.sigma_at(u) - expected) <= tol);
        }
    }
}

TEST_CASE("trace identity and mirrored recursion hold on random systems", "[newton]") {
    gnt::Rng rng(77);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);
        const int q = 1 + static_cast<int>(rng.next_u64() % 3);
        const auto sys = random_symmetric_system(n, q, rng);
        const auto table = newton_table(sys, n);
        CHECK(gnt::trace_identity_residual(table) < 1e-11);
        CHECK(gnt::right_recursion_residual(sys, table) < 1e-11);
    }
}

TEST_CASE("single-operator coefficients are elementary symmetric in eigenvalues", "[newton]") {
    gnt::Rng rng(5150);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 5);  // 2..6
        const auto sys = random_symmetric_system(n, 1, rng);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys[0]);
        std::vector<double> lambda(es.eigenvalues().data(), es.eigenvalues().data() + n);
        const auto table = newton_table(sys, n);
        for (int r = 0; r <= n; ++r) {
            const auto expected = gnt_test::elementary_symmetric(lambda, r);
            CHECK(table.sigma_at(MultiIndex({r})) == Catch::Approx(expected).margin(1e-9));
        }
        // tr(A T_(r)) telescopes to (r+1) sigma_(r+1).
        for (int r = 0; r + 1 <= n; ++r) {
            const double lhs = (sys[0] * table.transform_at(MultiIndex({r}))).trace();
            const double rhs = (r + 1.0) * table.sigma_at(MultiIndex({r + 1}));
            CHECK(lhs == Catch::Approx(rhs).margin(1e-9));
        }
    }
}

TEST_CASE("coefficients are equivariant under relabeling the operators", "[newton]") {
    gnt::Rng rng(31337);
    const auto sys = random_symmetric_system(3, 3, rng);
    // tau sends slot i to sys[tau[i]].
    const std::vector<int> tau = {2, 0, 1};
    const auto relabeled = OperatorSystem({sys[2], sys[0], sys[1]});
    const auto table = newton_table(sys, 3);
    const auto table_r = newton_table(relabeled, 3);
    for (const auto& u : table.indices) {
        // sigma'_u reads slot i as A_{tau(i)}, so it equals sigma of u pushed
        // back through tau onto the original labels.
        std::vector<int> pushed(static_cast<std::size_t>(u.size()), 0);
        for (int i = 0; i < u.size(); ++i) pushed[static_cast<std::size_t>(tau[i])] = u[i];
        const MultiIndex v{std::vector<int>(pushed)};
        CHECK(table_r.sigma_at(u) == Catch::Approx(table.sigma_at(v)).margin(1e-12));
    }
}

TEST_CASE("top-degree transformations vanish (Cayley-Hamilton)", "[newton]") {
    gnt::Rng rng(271828);
    for (int q : {1, 2, 3}) {
        const int n = 3;
        const auto sys = random_symmetric_system(n, q, rng);
        const auto table = newton_table(sys, n);
        for (const auto& u : table.indices)
            if (u.degree() == n)
                CHECK(table.transform_at(u).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("derivative identity converges at second order", "[newton]") {
    gnt::Rng rng(99);
    const int n = 3, q = 2;
    const auto base = random_symmetric_system(n, q, rng);
    const auto dir1 = random_symmetric_system(n, q, rng);
    const auto dir2 = random_symmetric_system(n, q, rng);

    auto family = [&](double t) {
        std::vector<Eigen::MatrixXd> mats;
        for (int a = 0; a < q; ++a)
            mats.push_back(base[a] + std::sin(t) * dir1[a] + (std::cos(t) - 1.0) * dir2[a]);
        return OperatorSystem(std::move(mats));
    };
    auto family_dot = [&](double t) {
        std::vector<Eigen::MatrixXd> mats;
        for (int a = 0; a < q; ++a)
            mats.push_back((std::cos(t) * dir1[a] - std::sin(t) * dir2[a]).eval());
        return OperatorSystem(std::move(mats));
    };

    for (const MultiIndex& u : {MultiIndex({2, 1}), MultiIndex({1, 1}), MultiIndex({3, 0})}) {
        const auto report =
            gnt::variation_check(family, family_dot, u, 0.3, {1e-2, 5e-3, 2.5e-3});
        REQUIRE(report.steps.size() == 3);
        CHECK(report.fitted_order > 1.8);
        CHECK(report.steps.back().error < 1e-5);
    }
}

TEST_CASE("derivative identity is exact for a linear family at degree one", "[newton]") {
    gnt::Rng rng(4242);
    const auto base = random_symmetric_system(4, 2, rng);
    const auto dir = random_symmetric_system(4, 2, rng);
    auto family = [&](double t) {
        std::vector<Eigen::MatrixXd> mats;
        for (int a = 0; a < 2; ++a) mats.push_back((base[a] + t * dir[a]).eval());
        return OperatorSystem(std::move(mats));
    };
    auto family_dot = [&](double) { return dir; };
    // sigma_(1,0) is linear in t, so even the coarsest central difference is exact.
    const auto report =
        gnt::variation_check(family, family_dot, MultiIndex({1, 0}), 0.0, {1e-2});
    CHECK(report.steps.front().error < 1e-10);
}

TEST_CASE("table rejects unknown indices and bad arguments", "[newton]") {
    const auto sys = diagonal_system({{1.0, 2.0}});
    const auto table = newton_table(sys, 1);
    CHECK_THROWS_AS(table.sigma_at(MultiIndex({2})), std::out_of_range);
    CHECK_THROWS_AS(newton_table(sys, -1), std::invalid_argument);
    CHECK_THROWS_AS(OperatorSystem(std::vector<Eigen::MatrixXd>{}), std::invalid_argument);
    CHECK_THROWS_AS(gnt::variation_check([&](double) { return sys; },
                                         [&](double) { return sys; }, MultiIndex({0}), 0.0,
                                         {1e-2}),
                    std::invalid_argument);
}
