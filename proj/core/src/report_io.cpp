#include "levyns/report_io.hpp"

#include "levyns/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace levyns {

using nlohmann::json;

namespace {

json est(const Estimate& e) { return {{"estimate", e.mean}, {"stderr", e.se}, {"n", e.n}}; }

json fit(const std::optional<LinearFit>& f) {
    if (!f) return nullptr;
    return {{"slope", f->slope}, {"intercept", f->intercept}, {"slope_stderr", f->slope_se},
            {"ci95", {f->ci_low, f->ci_high}}};
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace

std::string report_json(const EnsembleReport& r, const RunConfig& cfg, const std::string& command) {
    json j;
    j["schema"] = "levyns.ensemble_report";
    j["schema_version"] = kReportSchemaVersion;
    j["command"] = command;
    j["seed"] = cfg.ensemble.seed;
    j["n_paths"] = r.n_paths;
    j["aborted"] = r.aborted;
    j["aborted_fraction"] = r.aborted_fraction;
    json moments = json::array();
    for (const auto& m : r.moments) {
        moments.push_back({{"p", m.p},
                           {"energy_sup", est(m.energy_sup)},
                           {"grad_integral", est(m.grad_integral)},
                           {"gronwall_bound", std::isfinite(m.gronwall_bound) ? json(m.gronwall_bound) : json("inf")}});
    }
    j["moments"] = moments;
    json inc = json::array();
    for (const auto& row : r.increments) {
        inc.push_back({{"theta", row.theta}, {"rho_u", est(row.rho_u)}, {"u_proxy", est(row.u_proxy)}});
    }
    j["increment_table"] = inc;
    j["increment_exponent"] = fit(r.increment_exponent);
    j["u_increment_exponent"] = fit(r.u_increment_exponent);
    j["dual_truncation_change"] = r.dual_truncation_change;
    j["stopping"] = {{"N", cfg.stopping.N},
                     {"mode", cfg.stopping.mode},
                     {"tau", est(r.stopping_time)},
                     {"stopped_fraction", r.stopped_fraction},
                     {"rule_respected", r.stop_rule_ok}};
    j["ito_isometry"] = {{"lhs", est(r.ito_lhs)}, {"rhs", est(r.ito_rhs)}};
    j["density"] = {{"max_mass_drift", r.max_mass_drift}, {"max_principle", r.max_principle_ok}};
    j["noise"] = {{"compensator_mass", r.compensator_mass},
                  {"neglected_variance", r.neglected_variance},
                  {"epsilon", cfg.noise.epsilon}};
    return j.dump(2) + "\n";
}

std::string increments_csv(const EnsembleReport& r) {
    std::ostringstream os;
    os << "theta,estimate,stderr,u_estimate,u_stderr\n";
    for (const auto& row : r.increments) {
        os << num(row.theta) << ',' << num(row.rho_u.mean) << ',' << num(row.rho_u.se) << ',' << num(row.u_proxy.mean)
           << ',' << num(row.u_proxy.se) << '\n';
    }
    return os.str();
}

std::string moments_csv(const EnsembleReport& r) {
    std::ostringstream os;
    os << "p,estimate,stderr,gronwall_bound,grad_estimate,grad_stderr\n";
    for (const auto& m : r.moments) {
        os << m.p << ',' << num(m.energy_sup.mean) << ',' << num(m.energy_sup.se) << ',' << num(m.gronwall_bound) << ','
           << num(m.grad_integral.mean) << ',' << num(m.grad_integral.se) << '\n';
    }
    return os.str();
}

std::string trajectory_jsonl(const EnergyLedger& l) {
    std::string out;
    for (std::size_t i = 0; i < l.times.size(); ++i) {
        json rec = {{"t", l.times[i]},           {"energy", l.energy[i]},   {"grad_norm", l.grad[i]},
                    {"jump_count", l.jump_count[i]}, {"rho_min", l.rho_min[i]}, {"rho_max", l.rho_max[i]}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::string trajectory_csv(const EnergyLedger& l) {
    std::ostringstream os;
    os << "t,energy,grad_norm,jump_count,rho_min,rho_max\n";
    for (std::size_t i = 0; i < l.times.size(); ++i) {
        os << num(l.times[i]) << ',' << num(l.energy[i]) << ',' << num(l.grad[i]) << ',' << l.jump_count[i] << ','
           << num(l.rho_min[i]) << ',' << num(l.rho_max[i]) << '\n';
    }
    return os.str();
}

std::string plot_script(const EnsembleReport& r, int trajectory_files) {
    std::ostringstream os;
    os << "# gnuplot -p plot.gp\n"
       << "set datafile separator ','\n"
       << "set terminal pngcairo size 900,600\n\n"
       << "set output 'moments.png'\n"
       << "set title 'E sup ||sqrt(rho) u||^p'\n"
       << "set xlabel 'p'\nset logscale y\n"
       << "plot 'moments.csv' skip 1 using 1:2:3 with yerrorbars title 'estimate', \\\n"
       << "     '' skip 1 using 1:4 with linespoints title 'Gronwall bound'\n\n";
    if (!r.increments.empty()) {
        os << "set output 'increments.png'\n"
           << "set title 'increment statistic vs lag'\n"
           << "set xlabel 'theta'\nset logscale xy\n";
        if (r.increment_exponent) {
            os << "slope = " << num(r.increment_exponent->slope) << "\n"
               << "c = exp(" << num(r.increment_exponent->intercept) << ")\n"
               << "plot 'increments.csv' skip 1 using 1:2:3 with yerrorbars title 'rho u', \\\n"
               << "     c * x**slope title sprintf('fit, slope %.3f', slope), \\\n"
               << "     'increments.csv' skip 1 using 1:4:5 with yerrorbars title 'u (proxy)'\n\n";
        } else {
            os << "plot 'increments.csv' skip 1 using 1:2:3 with yerrorbars title 'rho u'\n\n";
        }
    }
    if (trajectory_files > 0) {
        os << "unset logscale\n"
           << "set output 'energy.png'\nset title 'energy along sample paths'\nset xlabel 't'\n"
           << "plot for [i=0:" << trajectory_files - 1
           << "] sprintf('trajectories/path_%d.csv', i) skip 1 using 1:2 with lines notitle\n";
    }
    return os.str();
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + file.string());
    os << text;
    if (!os) throw ConfigError("failed writing " + file.string());
}

} // namespace levyns
