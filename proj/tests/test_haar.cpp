#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "gnt/haar.hpp"
#include "test_helpers.hpp"

using gnt::FiberOptions;
using gnt::FiberScheme;
using gnt::Group;
using gnt::MultiIndex;
using gnt::OperatorSystem;
using gnt_test::random_symmetric_system;

TEST_CASE("haar samples are orthogonal with the right determinant", "[haar]") {
    gnt::Rng rng(8);
    for (int q : {1, 2, 3, 5}) {
        for (int i = 0; i < 20; ++i) {
            const Eigen::MatrixXd g = gnt::haar_sample(q, Group::O, rng);
            CHECK((g.transpose() * g - Eigen::MatrixXd::Identity(q, q)).cwiseAbs().maxCoeff() <
                  1e-12);
            CHECK(std::abs(std::abs(g.determinant()) - 1.0) < 1e-12);
            const Eigen::MatrixXd s = gnt::haar_sample(q, Group::SO, rng);
            CHECK(std::abs(s.determinant() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("haar samples have uniform column statistics", "[haar]") {
    // For Haar measure on O(3) the first column is uniform on the sphere:
    // E[g00] = 0 and E[g00^2] = 1/3.  5-sigma tolerances at 4000 draws.
    gnt::Rng rng(1234);
    const int draws = 4000;
    double mean = 0.0, mean_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double x = gnt::haar_sample(3, Group::O, rng)(0, 0);
        mean += x;
        mean_sq += x * x;
    }
    mean /= draws;
    mean_sq /= draws;
    CHECK(std::abs(mean) < 5.0 / std::sqrt(3.0 * draws));      // Var(g00) = 1/3
    CHECK(std::abs(mean_sq - 1.0 / 3.0) < 5.0 * std::sqrt(4.0 / 45.0 / draws));
}

TEST_CASE("one-dimensional fiber is the sign group", "[haar]") {
    gnt::Rng rng(5);
    bool saw_plus = false, saw_minus = false;
    for (int i = 0; i < 64; ++i) {
        const double v = gnt::haar_sample(1, Group::O, rng)(0, 0);
        CHECK(std::abs(std::abs(v) - 1.0) < 1e-15);
        (v > 0 ? saw_plus : saw_minus) = true;
        CHECK(gnt::haar_sample(1, Group::SO, rng)(0, 0) == Catch::Approx(1.0));
    }
    CHECK(saw_plus);
    CHECK(saw_minus);
}

TEST_CASE("rotating a system permutes and mixes the operators as a frame change", "[haar]") {
    gnt::Rng rng(17);
    const auto sys = random_symmetric_system(3, 2, rng);

    Eigen::Matrix2d swap;
    swap << 0, 1, 1, 0;
    const auto swapped = gnt::rotate_system(sys, swap);
    CHECK(swapped[0].isApprox(sys[1]));
    CHECK(swapped[1].isApprox(sys[0]));

    // The total second fundamental form norm is frame-independent.
    const Eigen::MatrixXd g = gnt::haar_sample(2, Group::O, rng);
    const auto rotated = gnt::rotate_system(sys, g);
    double before = 0.0, after = 0.0;
    for (int a = 0; a < 2; ++a) {
        before += sys[a].squaredNorm();
        after += rotated[a].squaredNorm();
    }
    CHECK(after == Catch::Approx(before));

    CHECK_THROWS_AS(gnt::rotate_system(sys, Eigen::MatrixXd::Identity(3, 3)),
                    std::invalid_argument);
}

TEST_CASE("exact node sets are normalized quadratures on the group", "[haar]") {
    for (Group group : {Group::O, Group::SO}) {
        for (int q : {1, 2}) {
            const auto nodes = gnt::exact_frame_nodes(q, group, 32);
            double total = 0.0;
            int reflections = 0;
            for (const auto& node : nodes) {
                total += node.weight;
                CHECK((node.rotation.transpose() * node.rotation -
                       Eigen::MatrixXd::Identity(q, q))
                          .cwiseAbs()
                          .maxCoeff() < 1e-14);
                if (node.rotation.determinant() < 0) ++reflections;
            }
            CHECK(total == Catch::Approx(1.0));
            if (group == Group::SO) CHECK(reflections == 0);
            if (group == Group::O) CHECK(reflections == static_cast<int>(nodes.size()) / 2);
        }
    }
    CHECK_THROWS_AS(gnt::exact_frame_nodes(3, Group::O), std::invalid_argument);
}

TEST_CASE("averaged coefficient has a closed form for a conformal system", "[haar]") {
    // A_1 = I, A_2 = 0 in two dimensions: the rotated first operator is
    // cos(theta) I, so sigma_(2,0) averages to the mean of cos^2 = 1/2 under
    // both groups.
    const OperatorSystem sys({Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 2)});
    for (Group group : {Group::O, Group::SO}) {
        FiberOptions opt;
        opt.group = group;
        opt.scheme = FiberScheme::exact;
        const auto avg = gnt::sigma_hat(sys, MultiIndex({2, 0}), opt);
        CHECK(avg.value == Catch::Approx(0.5).margin(1e-14));
        CHECK(avg.std_error == 0.0);
    }
}

TEST_CASE("monte carlo agrees with the exact scheme within its own error bars", "[haar]") {
    gnt::Rng rng(2718);
    const auto sys = random_symmetric_system(4, 2, rng);
    FiberOptions exact_opt;
    exact_opt.scheme = FiberScheme::exact;
    FiberOptions mc_opt;
    mc_opt.scheme = FiberScheme::monte_carlo;
    mc_opt.samples = 4096;
    mc_opt.seed = 99;
    for (const MultiIndex& u : {MultiIndex({2, 0}), MultiIndex({0, 2}), MultiIndex({2, 2})}) {
        const auto ex = gnt::sigma_hat(sys, u, exact_opt);
        const auto mc = gnt::sigma_hat(sys, u, mc_opt);
        CHECK(std::abs(mc.value - ex.value) <= std::max(4.0 * mc.std_error, 1e-12));
    }
}

TEST_CASE("odd entries force the average to vanish over the full group", "[haar]") {
    gnt::Rng rng(11);
    const auto sys = random_symmetric_system(3, 2, rng);
    FiberOptions opt;
    opt.scheme = FiberScheme::exact;
    opt.group = Group::O;
    for (const MultiIndex& u :
         {MultiIndex({1, 0}), MultiIndex({0, 1}), MultiIndex({1, 1}), MultiIndex({2, 1}),
          MultiIndex({3, 0}), MultiIndex({1, 2})}) {
        const auto avg = gnt::sigma_hat(sys, u, opt);
        CHECK(std::abs(avg.value) < 1e-13);
    }
}

TEST_CASE("mixed parity forces the average to vanish over rotations only", "[haar]") {
    gnt::Rng rng(12);
    const auto sys = random_symmetric_system(4, 2, rng);
    FiberOptions opt;
    opt.scheme = FiberScheme::exact;
    opt.group = Group::SO;
    // One odd and one even entry.
    for (const MultiIndex& u : {MultiIndex({1, 2}), MultiIndex({2, 1}), MultiIndex({0, 1})}) {
        const auto avg = gnt::sigma_hat(sys, u, opt);
        CHECK(std::abs(avg.value) < 1e-13);
    }
    // All-even entries generally survive.
    const auto nonzero = gnt::sigma_hat(sys, MultiIndex({2, 0}), opt);
    CHECK(std::abs(nonzero.value) > 1e-3);
}

TEST_CASE("averages are symmetric under relabeling the normal directions", "[haar]") {
    gnt::Rng rng(13);
    const auto sys2 = random_symmetric_system(3, 2, rng);
    FiberOptions exact_opt;
    exact_opt.scheme = FiberScheme::exact;
    const auto a = gnt::sigma_hat(sys2, MultiIndex({2, 0}), exact_opt);
    const auto b = gnt::sigma_hat(sys2, MultiIndex({0, 2}), exact_opt);
    CHECK(a.value == Catch::Approx(b.value).margin(1e-13));

    const auto sys3 = random_symmetric_system(3, 3, rng);
    FiberOptions mc;
    mc.samples = 4096;
    mc.seed = 2024;
    const auto p = gnt::sigma_hat(sys3, MultiIndex({2, 1, 0}), mc);
    const auto r = gnt::sigma_hat(sys3, MultiIndex({0, 1, 2}), mc);
    const double combined = std::hypot(p.std_error, r.std_error);
    CHECK(std::abs(p.value - r.value) <= 3.0 * combined);
}

TEST_CASE("one fiber pass tabulates every coefficient consistently", "[haar]") {
    gnt::Rng rng(14);
    const auto sys = random_symmetric_system(3, 2, rng);
    FiberOptions opt;
    opt.samples = 512;
    opt.seed = 7;
    const auto table = gnt::sigma_hat_table(sys, 3, opt);
    CHECK(table.size() == 10);  // C(3+2, 2)
    for (const auto& [u, avg] : table) {
        const auto single = gnt::sigma_hat(sys, u, opt);
        CHECK(avg.value == Catch::Approx(single.value).margin(1e-12));
        CHECK(avg.samples == 512);
    }
}

TEST_CASE("section averages obey the curvature scaling and frame mapping", "[haar]") {
    gnt::Rng rng(15);
    const auto sys = random_symmetric_system(3, 2, rng);
    const MultiIndex u({2, 0});
    FiberOptions opt;
    opt.scheme = FiberScheme::exact;
    const double c = 0.7;
    const auto sections = gnt::averaged_sections(sys, u, c, opt);
    // R = c (n + 1 - |u|) H with n = 3, |u| = 2.
    CHECK(sections.R.value.isApprox((c * 2.0) * sections.H.value, 1e-12));

    // With u = 0 the S section is the mean curvature vector itself,
    // independent of the frame: S_beta = tr A_beta.
    const auto trivial = gnt::averaged_sections(sys, MultiIndex({0, 0}), 0.0, opt);
    CHECK(trivial.S.value[0] == Catch::Approx(sys[0].trace()).margin(1e-12));
    CHECK(trivial.S.value[1] == Catch::Approx(sys[1].trace()).margin(1e-12));
    // ... and H vanishes because every lowered index is annihilated.
    CHECK(trivial.H.value.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("fiber averages are reproducible from the seed", "[haar]") {
    gnt::Rng rng(16);
    const auto sys = random_symmetric_system(4, 3, rng);
    FiberOptions opt;
    opt.samples = 256;
    opt.seed = 424242;
    const auto a = gnt::sigma_hat(sys, MultiIndex({2, 0, 0}), opt);
    const auto b = gnt::sigma_hat(sys, MultiIndex({2, 0, 0}), opt);
    CHECK(a.value == b.value);  // bitwise
    CHECK(a.std_error == b.std_error);
    const auto s1 = gnt::averaged_sections(sys, MultiIndex({1, 1, 0}), 1.0, opt);
    const auto s2 = gnt::averaged_sections(sys, MultiIndex({1, 1, 0}), 1.0, opt);
    CHECK(s1.H.value == s2.H.value);
    CHECK(s1.S.value == s2.S.value);
}

TEST_CASE("fiber averaging validates its arguments", "[haar]") {
    gnt::Rng rng(18);
    const auto sys = random_symmetric_system(3, 2, rng);
    FiberOptions opt;
    CHECK_THROWS_AS(gnt::sigma_hat(sys, MultiIndex({1, 0, 0}), opt), std::invalid_argument);
    opt.samples = 1;
    CHECK_THROWS_AS(gnt::sigma_hat(sys, MultiIndex({1, 0}), opt), std::invalid_argument);
    CHECK_THROWS_AS(gnt::haar_sample(0, Group::O, rng), std::invalid_argument);
}
