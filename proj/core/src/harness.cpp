#include "levyns/harness.hpp"

#include "levyns/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace levyns {

void EnergyLedger::record(double t, double e, double e_pre, double g, int jumps, double rmin, double rmax) {
    times.push_back(t);
    energy.push_back(e);
    energy_prejump.push_back(e_pre);
    grad.push_back(g);
    jump_count.push_back(jumps);
    rho_min.push_back(rmin);
    rho_max.push_back(rmax);
}

double stopping_time(const EnergyLedger& ledger, double N) {
    if (ledger.times.empty()) throw UsageError("stopping_time: empty ledger");
    for (std::size_t i = 0; i < ledger.times.size(); ++i) {
        if (std::sqrt(ledger.energy[i]) >= N) return ledger.times[i];
    }
    return ledger.horizon;
}

namespace {

Eigen::VectorXd dual_coefficients(const SimulationState& s, const BasisSet& basis, const BasisSet& dual) {
    GridField q = eval_velocity(s.phi, basis);
    const int d = q.components;
    for (std::size_t p = 0; p < q.node_count(); ++p)
        for (int c = 0; c < d; ++c) q.values[p * d + c] *= s.rho.values.values[p];
    return project(q, dual);
}

} // namespace

PathResult simulate_path(const Problem& problem, const NoisePath& noise) {
    const auto& model = *problem.model;
    const auto& basis = *problem.basis;
    if (noise.n_steps() != problem.n_steps || std::abs(noise.horizon() - problem.T) > 1e-12 * problem.T) {
        throw UsageError("simulate_path: noise schedule does not match the problem schedule");
    }
    PathResult res;
    res.index = noise.path_index();
    auto& ledger = res.ledger;
    ledger.horizon = problem.T;

    const bool enforce = problem.stopping.mode == StopMode::Enforce;
    const double N2 = problem.stopping.N * problem.stopping.N;
    const bool ito = model.forcing().has_brownian() && problem.ito_mode >= 0 && problem.ito_mode < basis.size();

    SimulationState s = model.initial_state(problem.rho0, problem.phi0);
    const double mass0 = s.rho.initial_mass;
    double e = model.energy(s);
    ledger.record(0.0, e, e, model.grad_norm_sq(s), 0, s.rho.min(), s.rho.max());

    auto snapshot = [&] {
        res.dual_snapshots.push_back(dual_coefficients(s, basis, *problem.dual_basis));
        res.phi_snapshots.push_back(s.phi);
    };
    snapshot();
    if (problem.record_trace) {
        res.trace.emplace();
        res.trace->rho0 = problem.rho0;
        res.trace->phi0 = problem.phi0;
    }

    bool frozen = false;
    int jumps_total = 0;
    int base = 0;
    try {
        for (std::size_t k = 0; k < noise.slice_count(); ++k) {
            const NoiseSlice slice = noise.slice(k);
            double e_pre = e;
            if (!frozen) {
                if (ito) {
                    const Eigen::MatrixXd B = model.brownian_projections(s.rho.values, s.phi);
                    for (Eigen::Index i = 0; i < B.cols() && i < static_cast<Eigen::Index>(slice.dW.size()); ++i) {
                        const double b = B(problem.ito_mode, i);
                        res.ito_integral += b * slice.dW[i];
                        res.ito_quadratic += slice.dt * b * b;
                    }
                }
                SimulationState next = model.advance_continuous(s, slice);
                e_pre = model.energy(next);
                if (enforce && e_pre >= N2) {
                    // reject the crossing step and freeze the stopped state
                    frozen = true;
                    ledger.stopped_at = next.t;
                    e_pre = e;
                    s.t = next.t;
                } else {
                    res.grad_integral += slice.dt * model.grad_norm_sq(next);
                    if (res.trace) {
                        res.trace->slices.push_back({slice.t0, slice.dt, s.rho.values, s.phi, next.phi,
                                                     std::vector<MarkedJump>(slice.jumps.begin(), slice.jumps.end())});
                    }
                    const int nj = model.apply_jumps(next, slice);
                    jumps_total += nj;
                    const double e_after = model.energy(next);
                    if (nj > 0) {
                        ledger.jump_log.push_back({next.t, e_pre, e_after});
                        res.max_jump_increment =
                            std::max(res.max_jump_increment, std::abs(std::sqrt(e_after) - std::sqrt(e_pre)));
                    }
                    const double lo = next.rho.min(), hi = next.rho.max();
                    if (lo < s.rho.min() || hi > s.rho.max()) res.bounds_monotone = false;
                    if (lo < problem.m || hi > problem.M) res.bounds_kept = false;
                    res.max_mass_drift = std::max(res.max_mass_drift, std::abs(next.rho.mass() - mass0) / mass0);
                    s = std::move(next);
                    e = e_after;
                    if (enforce && e >= N2) {
                        frozen = true;
                        ledger.stopped_at = s.t;
                    }
                }
            } else {
                s.t = slice.t0 + slice.dt;
            }
            ledger.record(s.t, e, e_pre, model.grad_norm_sq(s), jumps_total, s.rho.min(), s.rho.max());
            if (slice.ends_base_step && ++base % problem.storage_stride == 0) snapshot();
        }
    } catch (const BlowUpError& err) {
        res.aborted = true;
        res.abort_time = err.time();
        res.abort_reason = err.what();
    } catch (const DensityBoundViolation& err) {
        res.aborted = true;
        res.abort_time = s.t;
        res.abort_reason = err.what();
    }
    if (res.trace && !res.aborted) {
        res.trace->rho_final = s.rho;
        res.trace->phi_final = s.phi;
    }
    res.sup_energy = *std::max_element(ledger.energy.begin(), ledger.energy.end());
    res.tau = ledger.stopped_at ? *ledger.stopped_at : stopping_time(ledger, problem.stopping.N);
    return res;
}

PathResult simulate_path(const Problem& problem, std::uint64_t index) {
    const NoisePath noise = NoisePath::generate(problem.noise, problem.T, problem.n_steps, problem.seed, index);
    return simulate_path(problem, noise);
}

int worker_count() {
    if (const char* env = std::getenv("LEVYNS_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
        throw ConfigError(std::string("LEVYNS_WORKERS must be an integer in [1, 1024], got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, int workers) {
    if (workers <= 0) workers = worker_count();
    workers = static_cast<int>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; !failed && (i = next++) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<PathResult> run_paths(const Problem& problem, int workers) {
    if (problem.n_paths < 1) throw ConfigError("ensemble needs at least one path");
    std::vector<PathResult> out(problem.n_paths);
    parallel_for(
        out.size(), [&](std::size_t i) { out[i] = simulate_path(problem, static_cast<std::uint64_t>(i)); }, workers);
    return out;
}

IncrementValue increment_statistic(const Problem& problem, const std::vector<PathResult>& paths, double theta,
                                   int dual_modes) {
    const double ds = problem.storage_dt();
    const int S = problem.n_steps / problem.storage_stride;
    const double jf = theta / ds;
    const long j = std::lround(jf);
    if (theta < 0.0 || std::abs(jf - j) > 1e-9 * std::max(1.0, jf) || j > S) {
        std::ostringstream msg;
        msg << "lag theta = " << theta << " is not on the storage grid (spacing " << ds << ", horizon "
            << problem.T << ")";
        throw UsageError(msg.str());
    }
    const auto& dual = *problem.dual_basis;
    const int K = dual_modes > 0 ? std::min(dual_modes, dual.size()) : dual.size();
    const int n = problem.basis->size();

    std::vector<double> a, b;
    for (const auto& p : paths) {
        if (p.aborted) continue;
        double ia = 0.0, ib = 0.0;
        for (long i = 0; i + j <= S; ++i) {
            double va = 0.0, vb = 0.0;
            if (j > 0) {
                const auto da = p.dual_snapshots[i + j] - p.dual_snapshots[i];
                for (int k = 0; k < K; ++k) va += da(k) * da(k) / (1.0 + dual.eigenvalue(k));
                const auto db = p.phi_snapshots[i + j] - p.phi_snapshots[i];
                for (int k = 0; k < n; ++k) vb += db(k) * db(k) / (1.0 + problem.basis->eigenvalue(k));
            }
            const double w = (i == 0 || i + j == S) ? 0.5 * ds : ds;
            ia += w * va;
            ib += w * vb;
        }
        if (j == S) {
            ia = 0.0;
            ib = 0.0;
        }
        a.push_back(ia);
        b.push_back(ib);
    }
    return {estimate(a), estimate(b)};
}

ItoReport ito_isometry_check(const std::vector<PathResult>& paths) {
    std::vector<double> lhs, rhs;
    for (const auto& p : paths) {
        if (p.aborted) continue;
        lhs.push_back(p.ito_integral * p.ito_integral);
        rhs.push_back(p.ito_quadratic);
    }
    ItoReport r;
    r.lhs = estimate(lhs);
    r.rhs = estimate(rhs);
    r.pooled_se = pooled_se(r.lhs, r.rhs);
    r.pass = std::abs(r.lhs.mean - r.rhs.mean) <= 3.0 * r.pooled_se;
    return r;
}

namespace {

struct GronwallParts {
    double prefactor;
    double exponent;
};

GronwallParts gronwall_parts(const GronwallInputs& in) {
    const double p = in.p, P = p / 2.0, eps = 0.25;
    const double kappa = 1.0 + 1.0 / in.m;
    const double taylor = 0.5 * p * (p - 1.0) * std::max(1.0, std::pow(2.0, p - 3.0));
    const double bdg = 9.0 * p * p / (4.0 * eps);
    const double g2 = in.Cg * in.Cg;
    const double MP = std::pow(in.M, P), mP = std::pow(in.m, P);
    const double two_p1 = std::pow(2.0, p - 1.0);

    const double A = 0.5 * p * (in.Cf + 2.0 * in.M * (in.Cf + g2) * kappa) + 0.5 * p * (p - 2.0) * 2.0 * in.M * g2 * kappa +
                     bdg * 2.0 * in.M * g2 * kappa + two_p1 * (in.Cmu + MP * in.Jp / mP) +
                     taylor * (in.M * in.J2 * kappa + MP * in.Jp / mP) + bdg * in.M * in.J2 * kappa;
    const double B = 0.5 * p * 2.0 * in.M * (in.Cf + g2) + 0.5 * p * (p - 2.0) * 2.0 * in.M * g2 +
                     bdg * 2.0 * in.M * g2 + two_p1 * MP * in.Jp + taylor * (in.M * in.J2 + MP * in.Jp) +
                     bdg * in.M * in.J2;
    const double delta = 1.0 - (in.Cg > 0.0 ? eps : 0.0) - (in.J2 > 0.0 ? eps : 0.0);
    return {(in.q_p + B * in.T) / delta, A * in.T / delta};
}

} // namespace

double gronwall_comparator(const GronwallInputs& in) {
    const auto g = gronwall_parts(in);
    return g.prefactor * std::exp(g.exponent);
}

double gronwall_log10(const GronwallInputs& in) {
    const auto g = gronwall_parts(in);
    return std::log10(g.prefactor) + g.exponent / std::numbers::ln10;
}

GronwallInputs gronwall_inputs(const Problem& problem, int p, double T) {
    const auto& spec = problem.model->forcing();
    GronwallInputs in;
    in.p = p;
    in.m = problem.m;
    in.M = problem.M;
    in.T = T;
    const MassMatrix m0 = assemble_mass(problem.rho0, *problem.basis);
    in.q_p = std::pow(std::max(0.0, problem.phi0.dot(m0.matrix * problem.phi0)), p / 2.0);
    in.Cf = spec.has_drift() ? spec.declared.growth : 0.0;
    in.Cg = problem.noise.brownian && spec.has_brownian() ? spec.declared.growth : 0.0;
    const bool jumps = problem.noise.jumps && problem.noise.mu.kind() != IntensityKind::None && spec.has_jumps();
    if (jumps) {
        in.J2 = spec.declared.jump_moment_at(2);
        in.Jp = spec.declared.jump_moment_at(p);
        in.Cmu = problem.noise.mu.large_total();
    }
    return in;
}

EnsembleReport summarize(const Problem& problem, const std::vector<PathResult>& paths) {
    EnsembleReport rep;
    rep.n_paths = static_cast<int>(paths.size());
    std::vector<double> tau;
    int stopped = 0;
    for (const auto& p : paths) {
        if (p.aborted) {
            ++rep.aborted;
            continue;
        }
        tau.push_back(p.tau);
        if (p.ledger.stopped_at) ++stopped;
        rep.max_mass_drift = std::max(rep.max_mass_drift, p.max_mass_drift);
        if (!p.bounds_kept || !p.bounds_monotone) rep.max_principle_ok = false;
        if (problem.stopping.mode == StopMode::Enforce) {
            const double N = problem.stopping.N;
            for (double e : p.ledger.energy_prejump)
                if (e > N * N) rep.stop_rule_ok = false;
            for (double e : p.ledger.energy)
                if (std::sqrt(e) > (N + p.max_jump_increment) * (1.0 + 1e-12)) rep.stop_rule_ok = false;
        }
    }
    rep.aborted_fraction = rep.n_paths ? static_cast<double>(rep.aborted) / rep.n_paths : 0.0;
    rep.stopping_time = estimate(tau);
    rep.stopped_fraction = tau.empty() ? 0.0 : static_cast<double>(stopped) / tau.size();

    for (int p : problem.moments) {
        std::vector<double> es, gs;
        for (const auto& path : paths) {
            if (path.aborted) continue;
            es.push_back(std::pow(path.sup_energy, p / 2.0));
            gs.push_back(std::pow(path.grad_integral, p));
        }
        rep.moments.push_back({p, estimate(es), estimate(gs), gronwall_comparator(gronwall_inputs(problem, p, problem.T))});
    }

    std::vector<double> th, va, vu;
    for (double theta : problem.theta) {
        const auto v = increment_statistic(problem, paths, theta);
        rep.increments.push_back({theta, v.rho_u, v.u_proxy});
        if (theta > 0.0 && v.rho_u.mean > 0.0 && v.u_proxy.mean > 0.0) {
            th.push_back(theta);
            va.push_back(v.rho_u.mean);
            vu.push_back(v.u_proxy.mean);
        }
    }
    if (th.size() >= 2) {
        rep.increment_exponent = fit_loglog(th, va);
        rep.u_increment_exponent = fit_loglog(th, vu);
    }
    if (!th.empty()) {
        const auto half = increment_statistic(problem, paths, th.front(), std::max(1, problem.dual_basis->size() / 2));
        rep.dual_truncation_change = std::abs(va.front() - half.rho_u.mean) / va.front();
    }

    const auto ito = ito_isometry_check(paths);
    rep.ito_lhs = ito.lhs;
    rep.ito_rhs = ito.rhs;
    if (problem.noise.jumps && problem.noise.mu.kind() != IntensityKind::None) {
        rep.compensator_mass = problem.noise.mu.small_total(problem.noise.epsilon);
        rep.neglected_variance = problem.noise.mu.neglected_variance(problem.noise.epsilon);
    }
    return rep;
}

EnsembleReport run_ensemble(const Problem& problem, int workers) {
    return summarize(problem, run_paths(problem, workers));
}

} // namespace levyns
