#include "doctest.h"

#include "levyns/config.hpp"
#include "levyns/errors.hpp"
#include "levyns/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>

using namespace levyns;

namespace {

RunConfig small_config() {
    RunConfig c;
    c.basis.n = 4;
    c.basis.resolution = 8;
    c.time.T = 0.5;
    c.time.dt = 1.0 / 32;
    c.ensemble.n_paths = 6;
    c.ensemble.seed = 77;
    return c;
}

} // namespace

TEST_CASE("stopping time agrees with a linear scan") {
    EnergyLedger l;
    l.horizon = 1.0;
    PathRng r(1, 0, Stream::Test);
    for (int i = 0; i <= 100; ++i) l.record(i / 100.0, 10.0 * r.uniform() * i / 100.0, 0, 0, 0, 1, 1);
    for (double N : {0.5, 1.0, 2.0, 2.9, 5.0}) {
        double want = 1.0;
        for (std::size_t i = 0; i < l.times.size(); ++i)
            if (l.energy[i] >= N * N) {
                want = l.times[i];
                break;
            }
        CHECK(stopping_time(l, N) == want);
    }
    CHECK(stopping_time(l, 1e9) == 1.0);
    CHECK_THROWS_AS(stopping_time(EnergyLedger{}, 1.0), UsageError);
}

TEST_CASE("parallel_for covers every index once and propagates exceptions") {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(
                        10, [](std::size_t i) {
                            if (i == 3) throw NumericalError("boom");
                        },
                        3),
                    NumericalError);
}

TEST_CASE("ensemble results do not depend on the worker count") {
    const Problem p = build_problem(small_config());
    const auto a = run_paths(p, 1);
    const auto b = run_paths(p, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].sup_energy == b[i].sup_energy);
        CHECK(a[i].ledger.energy == b[i].ledger.energy);
        CHECK(a[i].phi_snapshots.back() == b[i].phi_snapshots.back());
    }
}

TEST_CASE("worker count honours the environment variable") {
    setenv("LEVYNS_WORKERS", "3", 1);
    CHECK(worker_count() == 3);
    unsetenv("LEVYNS_WORKERS");
    CHECK(worker_count() >= 1);
}

TEST_CASE("noise-free zero-forcing run from rest stays at rest") {
    RunConfig c = small_config();
    c.noise.enabled = false;
    c.forcing.name = "zero";
    c.forcing.parameters.clear();
    c.initial.velocity = "zero";
    const Problem p = build_problem(c);
    const auto rep = run_ensemble(p, 1);
    for (const auto& m : rep.moments) {
        CHECK(m.energy_sup.mean == 0.0);
        CHECK(m.grad_integral.mean == 0.0);
    }
    for (const auto& row : rep.increments) CHECK(row.rho_u.mean == 0.0);
    CHECK(rep.max_mass_drift == 0.0);
}

TEST_CASE("increment statistic rejects lags off the storage grid") {
    RunConfig c = small_config();
    c.time.storage_stride = 2;
    c.ensemble.theta = {1.0 / 16};
    const Problem p = build_problem(c);
    const auto paths = run_paths(p, 1);
    CHECK_NOTHROW(increment_statistic(p, paths, 1.0 / 16));
    CHECK_THROWS_AS(increment_statistic(p, paths, 1.0 / 32), UsageError);
    const auto v = increment_statistic(p, paths, 0.0);
    CHECK(v.rho_u.mean == 0.0);
}

TEST_CASE("increment statistic against a direct computation") {
    const Problem p = build_problem(small_config());
    const auto paths = run_paths(p, 1);
    const double theta = 4.0 / 32;
    const auto v = increment_statistic(p, paths, theta);
    // trapezoid in t of sum_k (X_k(t + theta) - X_k(t))^2 / (1 + lambda_k) over the dual modes
    double mean = 0.0;
    const double ds = p.storage_dt();
    for (const auto& path : paths) {
        const auto& s = path.dual_snapshots;
        const int j = 4, S = static_cast<int>(s.size()) - 1;
        double acc = 0.0;
        for (int i = 0; i + j <= S; ++i) {
            double q = 0.0;
            for (int k = 0; k < p.dual_basis->size(); ++k) {
                const double d = s[i + j](k) - s[i](k);
                q += d * d / (1.0 + p.dual_basis->eigenvalue(k));
            }
            acc += (i == 0 || i + j == S ? 0.5 : 1.0) * q * ds;
        }
        mean += acc / paths.size();
    }
    CHECK(v.rho_u.mean == doctest::Approx(mean).epsilon(1e-10));
}

TEST_CASE("Ito isometry and Gronwall comparator") {
    RunConfig c = small_config();
    c.ensemble.n_paths = 400;
    c.noise.jumps = false;
    const Problem p = build_problem(c);
    const auto rep = ito_isometry_check(run_paths(p));
    CHECK(std::abs(rep.lhs.mean - rep.rhs.mean) <= 4.0 * rep.pooled_se);

    GronwallInputs in;
    in.Cf = 0.5;
    in.Cg = 0.3;
    in.q_p = 1.0;
    in.m = 0.5;
    in.M = 2.0;
    double prev = 0.0;
    for (double T : {0.1, 0.5, 1.0, 2.0}) {
        in.T = T;
        const double b = gronwall_comparator(in);
        CHECK(b > prev);
        CHECK(std::log10(b) == doctest::Approx(gronwall_log10(in)).epsilon(1e-10));
        prev = b;
    }
    in.T = 0.0;
    CHECK(gronwall_comparator(in) >= in.q_p);
}

TEST_CASE("enforced stopping freezes the path after the crossing") {
    RunConfig c = small_config();
    c.initial.velocity = "zero";
    c.forcing.name = "jump_scaled";
    c.forcing.parameters = forcing_defaults("jump_scaled");
    const Problem probe = build_problem(c);
    const auto free = simulate_path(probe, 0);
    const double peak = *std::max_element(free.ledger.energy.begin(), free.ledger.energy.end());
    REQUIRE(peak > 0.0);
    c.stopping.mode = "enforce";
    c.stopping.N = 0.5 * std::sqrt(peak);
    const Problem p = build_problem(c);
    const auto r = simulate_path(p, 0);
    REQUIRE(r.ledger.stopped_at.has_value());
    const std::size_t n = r.ledger.energy.size();
    CHECK(r.ledger.energy[n - 1] == r.ledger.energy[n - 2]);
    const auto rep = summarize(p, {r});
    CHECK(rep.stop_rule_ok);
    CHECK(rep.stopped_fraction == 1.0);
}
