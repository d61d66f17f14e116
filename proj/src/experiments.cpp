#include "qbc/experiments.hpp"

#include "qbc/collisions.hpp"
#include "qbc/effective.hpp"
#include "qbc/fulldyn.hpp"
#include "qbc/lindblad.hpp"
#include "qbc/observables.hpp"
#include "qbc/states.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace qbc::experiments {

using collisions::ChargerState;
using collisions::ChiRegime;
using effective::EffectiveParams;
using effective::QubitPopulations;
using hilbert::DensityMatrix;
using hilbert::Index;
using hilbert::Matrix;
using states::ThermalSpec;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::single_charge: return "single-charge";
        case Kind::reset: return "reset";
        case Kind::eta_sweep: return "eta-sweep";
        case Kind::dissipation: return "dissipation";
        case Kind::collisions: return "collisions";
        case Kind::validate_dispersive: return "validate-dispersive";
        case Kind::appendix_checks: return "appendix-checks";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError("config: " + msg);
    };
    require(tbar >= 0.0, "tbar must be >= 0");
    for (double t : tbar_list) require(t >= 0.0, "tbar_list entries must be >= 0");
    require(chi > 0.0, "chi must be > 0");
    for (double c : chi_list) require(c > 0.0, "chi_list entries must be > 0");
    require(omega_g < omega_e && omega_e < omega_i, "level ordering must be omega_g < omega_e < omega_i");
    require(delta > 0.0, "delta must be > 0");
    require(delta < omega_i - omega_e, "delta must stay below the smaller transition frequency");
    require(delta_over_omega >= 1.0, "delta_over_omega must be >= 1");
    require(delta_over_omega_lindblad >= 1.0, "delta_over_omega_lindblad must be >= 1");
    for (double r : ratio_list) require(r >= 1.0, "ratio_list entries must be >= 1");
    for (double g : gamma0_list) require(g >= 0.0, "gamma0_list entries must be >= 0");
    require(n_added >= 0, "n_added must be >= 0");
    require(eta_steps >= 2, "eta_steps must be >= 2");
    require(k_collisions >= 1, "k_collisions must be >= 1");
    require(cutoff_left >= 2 && cutoff_right >= 2, "mode cutoffs must be >= 2");
    require(cutoff_lindblad >= 2 && cutoff_full >= 2, "cutoffs must be >= 2");
    require(time_points >= 2 && time_points_lindblad >= 2 && time_points_validate >= 2,
            "time grids need at least 2 points");
    require(lambda_t_max > 0.0 && lambda_t_max_lindblad > 0.0, "time spans must be > 0");
}

// ------------------------------ config parsing -------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("config line " + std::to_string(line) + ": expected a number, got '" +
                          v + "'");
    }
}

std::vector<double> parse_list(const std::string& v, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number(item, line));
    }
    if (out.empty()) throw ConfigError("config line " + std::to_string(line) + ": empty list");
    return out;
}

long parse_integer(const std::string& v, int line) {
    const double x = parse_number(v, line);
    if (x != std::floor(x)) {
        throw ConfigError("config line " + std::to_string(line) + ": expected an integer");
    }
    return static_cast<long>(x);
}

Kind parse_kind(const std::string& v, int line) {
    for (Kind k : {Kind::single_charge, Kind::reset, Kind::eta_sweep, Kind::dissipation,
                   Kind::collisions, Kind::validate_dispersive, Kind::appendix_checks}) {
        if (v == kind_name(k)) return k;
    }
    throw ConfigError("config line " + std::to_string(line) + ": unknown experiment '" + v + "'");
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
        }
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty() || val.empty()) {
            throw ConfigError("config line " + std::to_string(line) + ": empty key or value");
        }

        if (key == "experiment") cfg.experiment = parse_kind(val, line);
        else if (key == "tbar") cfg.tbar = parse_number(val, line);
        else if (key == "tbar_list") cfg.tbar_list = parse_list(val, line);
        else if (key == "chi") cfg.chi = parse_number(val, line);
        else if (key == "chi_list") cfg.chi_list = parse_list(val, line);
        else if (key == "omega_g") cfg.omega_g = parse_number(val, line);
        else if (key == "omega_e") cfg.omega_e = parse_number(val, line);
        else if (key == "omega_i") cfg.omega_i = parse_number(val, line);
        else if (key == "delta") cfg.delta = parse_number(val, line);
        else if (key == "delta_over_omega") cfg.delta_over_omega = parse_number(val, line);
        else if (key == "ratio_list") cfg.ratio_list = parse_list(val, line);
        else if (key == "delta_over_omega_lindblad")
            cfg.delta_over_omega_lindblad = parse_number(val, line);
        else if (key == "gamma0_list") cfg.gamma0_list = parse_list(val, line);
        else if (key == "n_added") cfg.n_added = static_cast<int>(parse_integer(val, line));
        else if (key == "alpha") cfg.alpha = (val == "opt") ? -1.0 : parse_number(val, line);
        else if (key == "eta_steps") cfg.eta_steps = static_cast<int>(parse_integer(val, line));
        else if (key == "k_collisions")
            cfg.k_collisions = static_cast<int>(parse_integer(val, line));
        else if (key == "cutoff_left") cfg.cutoff_left = parse_integer(val, line);
        else if (key == "cutoff_right") cfg.cutoff_right = parse_integer(val, line);
        else if (key == "cutoff_lindblad") cfg.cutoff_lindblad = parse_integer(val, line);
        else if (key == "cutoff_full") cfg.cutoff_full = parse_integer(val, line);
        else if (key == "time_points") cfg.time_points = static_cast<int>(parse_integer(val, line));
        else if (key == "time_points_lindblad")
            cfg.time_points_lindblad = static_cast<int>(parse_integer(val, line));
        else if (key == "time_points_validate")
            cfg.time_points_validate = static_cast<int>(parse_integer(val, line));
        else if (key == "lambda_t_max") cfg.lambda_t_max = parse_number(val, line);
        else if (key == "lambda_t_max_lindblad")
            cfg.lambda_t_max_lindblad = parse_number(val, line);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_integer(val, line));
        else {
            throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key +
                              "'");
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// ------------------------------ output helpers -------------------------------

namespace {

class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, const std::vector<std::string>& header)
        : path_(path.string()) {
        out_.open(path);
        if (!out_) throw std::runtime_error("cannot open output file " + path_);
        for (std::size_t i = 0; i < header.size(); ++i) {
            out_ << header[i] << (i + 1 == header.size() ? "\n" : ",");
        }
    }
    void row(const std::vector<std::string>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            out_ << values[i] << (i + 1 == values.size() ? "\n" : ",");
        }
    }
    const std::string& path() const { return path_; }

private:
    std::ofstream out_;
    std::string path_;
};

class Summary {
public:
    void add(const std::string& key, const std::string& v) { entries_.emplace_back(key, v); }
    void add(const std::string& key, double v) { add(key, format_double(v)); }
    void add(const std::string& key, long v) { add(key, std::to_string(v)); }
    void add(const std::string& key, int v) { add(key, std::to_string(v)); }
    std::string write(const std::filesystem::path& dir) const {
        const auto path = dir / "summary.txt";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path.string());
        for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
        return path.string();
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

void echo_config(const ExperimentConfig& c, Summary& s) {
    s.add("experiment", kind_name(c.experiment));
    s.add("tbar", c.tbar);
    s.add("chi", c.chi);
    s.add("omega_g", c.omega_g);
    s.add("omega_e", c.omega_e);
    s.add("omega_i", c.omega_i);
    s.add("delta", c.delta);
    s.add("n_added", c.n_added);
    s.add("alpha", c.alpha);
    s.add("cutoff_left", static_cast<long>(c.cutoff_left));
    s.add("cutoff_right", static_cast<long>(c.cutoff_right));
    s.add("cutoff_lindblad", static_cast<long>(c.cutoff_lindblad));
    s.add("cutoff_full", static_cast<long>(c.cutoff_full));
    s.add("seed", static_cast<long>(c.seed));
}

Eigen::VectorXd diagonal_populations(const DensityMatrix& rho) {
    Eigen::VectorXd p(rho.dim());
    for (Index k = 0; k < rho.dim(); ++k) p(k) = rho.rho(k, k).real();
    return p;
}

// Mode frequencies in w_ig units for the configured level structure.
double omega_left_bar(const ExperimentConfig& c) { return (c.omega_i - c.omega_g) - c.delta; }
double omega_right_bar(const ExperimentConfig& c) { return (c.omega_i - c.omega_e) - c.delta; }

// Maximal energy gain over the flying time for a diagonal product input,
// reusing the collisional tau optimizer on a product charger.
double peak_delta_u(const Eigen::VectorXd& p_left, const QubitPopulations& pq,
                    const Eigen::VectorXd& p_right, const EffectiveParams& p) {
    Matrix left = Matrix::Zero(p_left.size(), p_left.size());
    for (Index k = 0; k < p_left.size(); ++k) left(k, k) = p_left(k);
    Matrix right = Matrix::Zero(p_right.size(), p_right.size());
    for (Index k = 0; k < p_right.size(); ++k) right(k, k) = p_right(k);
    const auto charger =
        ChargerState::product(DensityMatrix(std::move(left)), DensityMatrix(std::move(right)));
    const double tau = collisions::optimal_collision_tau(charger, pq, p);
    return collisions::predicted_delta_u(collisions::raw_energy_table(charger, pq), tau, p);
}

double matched_alpha(const ExperimentConfig& c, const ThermalSpec& left_spec) {
    return c.alpha < 0.0 ? states::alpha_opt(c.n_added, left_spec) : c.alpha;
}

// ------------------------------ experiments ----------------------------------

RunResult run_charge_or_reset(const ExperimentConfig& c, const std::filesystem::path& dir) {
    const bool resetting = c.experiment == Kind::reset;
    const ThermalSpec left_spec(c.tbar, omega_left_bar(c), c.cutoff_left);
    const ThermalSpec right_spec(c.tbar, omega_right_bar(c), c.cutoff_right);
    const auto qubit = states::qubit_thermal(c.tbar, c.omega_g, c.omega_e);
    const QubitPopulations pq{qubit.rho(0, 0).real(), qubit.rho(1, 1).real()};
    const double alpha = matched_alpha(c, resetting ? right_spec : left_spec);
    const auto p = EffectiveParams::from_ratio(c.chi, 1.0, 0, -1);

    // The excited input sits on the left mode when charging, on the right when
    // resetting; the partner mode stays thermal.
    const auto make_pair = [&](const DensityMatrix& excited)
        -> std::pair<Eigen::VectorXd, Eigen::VectorXd> {
        if (resetting) {
            return {diagonal_populations(states::gibbs_oscillator(left_spec)),
                    diagonal_populations(excited)};
        }
        return {diagonal_populations(excited),
                diagonal_populations(states::gibbs_oscillator(right_spec))};
    };
    const auto& excited_spec = resetting ? right_spec : left_spec;

    struct Series {
        std::string name;
        Eigen::VectorXd pl, pr;
    };
    std::vector<Series> series;
    {
        auto [pl, pr] = make_pair(states::npats(c.n_added, excited_spec));
        series.push_back({"spats", pl, pr});
    }
    {
        auto [pl, pr] = make_pair(states::dts_prepared(alpha, excited_spec));
        series.push_back({"dts", pl, pr});
    }

    Summary summary;
    echo_config(c, summary);
    RunResult result;
    const std::string base = resetting ? "reset" : "single_charge";
    const std::string ycol = resetting ? "p_g" : "u_q";
    for (const auto& ser : series) {
        CsvFile csv(dir / (base + "_" + ser.name + ".csv"),
                    {"experiment", "series", "lambda_t", ycol, "tbar", "chi", "delta", "n_added",
                     "alpha", "cutoff_left", "cutoff_right"});
        for (int i = 0; i < c.time_points; ++i) {
            const double lt = c.lambda_t_max * i / (c.time_points - 1);
            const double du = effective::delta_U_q(ser.pl, pq, ser.pr, lt, p);
            const double y = resetting ? pq.p_g - 0.5 * du : (pq.p_e - pq.p_g) + du;
            csv.row({kind_name(c.experiment), ser.name, format_double(lt), format_double(y),
                     format_double(c.tbar), format_double(c.chi), format_double(c.delta),
                     std::to_string(c.n_added), format_double(alpha),
                     std::to_string(c.cutoff_left), std::to_string(c.cutoff_right)});
        }
        result.files.push_back(csv.path());
        if (resetting) {
            // Grid-resolved best ground population (mirror of the charge peak).
            double best = 0.0;
            for (int i = 0; i < 4 * c.time_points; ++i) {
                const double lt = c.lambda_t_max * i / (4 * c.time_points - 1);
                best = std::max(best,
                                pq.p_g - 0.5 * effective::delta_U_q(ser.pl, pq, ser.pr, lt, p));
            }
            summary.add("peak_p_g_" + ser.name, best);
        } else {
            summary.add("peak_delta_u_" + ser.name, peak_delta_u(ser.pl, pq, ser.pr, p));
        }
    }
    summary.add("p_g_initial", pq.p_g);
    summary.add("two_p_g", 2.0 * pq.p_g);
    result.files.push_back(summary.write(dir));
    return result;
}

RunResult run_eta_sweep(const ExperimentConfig& c, const std::filesystem::path& dir) {
    Summary summary;
    echo_config(c, summary);
    RunResult result;
    const auto p = EffectiveParams::from_ratio(c.chi, 1.0, 0, -1);

    for (double tbar : c.tbar_list) {
        const ThermalSpec left_spec(tbar, omega_left_bar(c), c.cutoff_left);
        const ThermalSpec right_spec(tbar, omega_right_bar(c), c.cutoff_right);
        const auto qubit = states::qubit_thermal(tbar, c.omega_g, c.omega_e);
        const QubitPopulations pq{qubit.rho(0, 0).real(), qubit.rho(1, 1).real()};
        const Eigen::VectorXd pr = diagonal_populations(states::gibbs_oscillator(right_spec));
        const double alpha = states::alpha_opt(1, left_spec);
        const double dts_peak =
            peak_delta_u(diagonal_populations(states::dts_prepared(alpha, left_spec)), pq, pr, p);

        CsvFile csv(dir / ("eta_sweep_tbar_" + format_double(tbar) + ".csv"),
                    {"experiment", "tbar", "eta", "peak_delta_u", "peak_u", "dts_peak_delta_u",
                     "chi", "alpha", "cutoff_left", "cutoff_right"});
        std::vector<double> etas, peaks;
        for (int i = 0; i < c.eta_steps; ++i) {
            const double eta = static_cast<double>(i) / (c.eta_steps - 1);
            const Eigen::VectorXd pl =
                diagonal_populations(states::inefficient_spats(eta, left_spec));
            const double peak = peak_delta_u(pl, pq, pr, p);
            etas.push_back(eta);
            peaks.push_back(peak);
            csv.row({kind_name(c.experiment), format_double(tbar), format_double(eta),
                     format_double(peak), format_double((pq.p_e - pq.p_g) + peak),
                     format_double(dts_peak), format_double(c.chi), format_double(alpha),
                     std::to_string(c.cutoff_left), std::to_string(c.cutoff_right)});
        }
        result.files.push_back(csv.path());

        // Crossing of the mixture peak with the matched-energy DTS peak.
        double crossing = -1.0;
        for (std::size_t i = 1; i < peaks.size(); ++i) {
            const double f0 = peaks[i - 1] - dts_peak;
            const double f1 = peaks[i] - dts_peak;
            if (f0 <= 0.0 && f1 > 0.0) {
                crossing = etas[i - 1] + (etas[i] - etas[i - 1]) * (-f0) / (f1 - f0);
                break;
            }
        }
        summary.add("eta_crossing_tbar_" + format_double(tbar), crossing);
        summary.add("dts_peak_tbar_" + format_double(tbar), dts_peak);
    }
    result.files.push_back(summary.write(dir));
    return result;
}

RunResult run_dissipation(const ExperimentConfig& c, const std::filesystem::path& dir) {
    fulldyn::SystemSpec spec;
    spec.omega_g = c.omega_g;
    spec.omega_e = c.omega_e;
    spec.omega_i = c.omega_i;
    spec.delta = c.delta;
    spec.omega_l_coupling = c.delta / c.delta_over_omega_lindblad;
    spec.omega_r_coupling = spec.omega_l_coupling;
    spec.cutoff_left = c.cutoff_lindblad;
    spec.cutoff_right = c.cutoff_lindblad;
    spec.check();
    const double lambda = spec.effective_params().lambda_eff;
    const auto space = spec.space();

    const ThermalSpec left_spec(c.tbar, spec.omega_left_mode(), c.cutoff_lindblad);
    const ThermalSpec right_spec(c.tbar, spec.omega_right_mode(), c.cutoff_lindblad);
    const auto qutrit = states::qutrit_thermal(c.tbar, c.omega_g, c.omega_e, c.omega_i);

    std::vector<double> lt_grid(static_cast<std::size_t>(c.time_points_lindblad));
    std::vector<double> t_grid(lt_grid.size());
    for (std::size_t i = 0; i < lt_grid.size(); ++i) {
        lt_grid[i] = c.lambda_t_max_lindblad * static_cast<double>(i) /
                     static_cast<double>(lt_grid.size() - 1);
        t_grid[i] = lt_grid[i] / lambda;
    }

    struct Curve {
        std::vector<double> u_q, p_g;
    };
    auto run_one = [&](bool resetting, double gamma0) {
        const auto excited = states::npats(1, resetting ? right_spec : left_spec);
        const auto thermal = states::gibbs_oscillator(resetting ? left_spec : right_spec);
        const Matrix rho0 = resetting
                                ? hilbert::kron(thermal.rho, hilbert::kron(qutrit.rho, excited.rho))
                                : hilbert::kron(excited.rho, hilbert::kron(qutrit.rho, thermal.rho));
        lindblad::DissipationSpec diss;
        diss.gamma0 = gamma0;
        diss.tbar = c.tbar;
        Curve curve;
        curve.u_q.resize(t_grid.size());
        curve.p_g.resize(t_grid.size());
        lindblad::IntegrateOptions opts;
        opts.accuracy_factor = 0.25;   // step error ~1e-5, far below curve separations
        lindblad::integrate_observed(
            DensityMatrix(rho0), t_grid, spec, diss,
            [&](std::size_t idx, double, const DensityMatrix& rho) {
                const auto rep = observables::energy_report(rho, space);
                curve.u_q[idx] = rep.u_q;
                curve.p_g[idx] = rep.p_g;
            },
            opts);
        return curve;
    };

    Summary summary;
    echo_config(c, summary);
    summary.add("lambda_eff", lambda);
    summary.add("delta_over_omega_lindblad", c.delta_over_omega_lindblad);
    RunResult result;

    for (bool resetting : {false, true}) {
        // Independent parameter runs fan out across the available cores.
        std::vector<std::future<Curve>> futs;
        for (double g : c.gamma0_list) {
            futs.push_back(std::async(std::launch::async, run_one, resetting, g));
        }
        CsvFile csv(dir / (std::string("dissipation_") + (resetting ? "resetting" : "charging") +
                           ".csv"),
                    {"experiment", "protocol", "gamma0", "lambda_t", "u_q", "p_g", "tbar", "delta",
                     "delta_over_omega", "cutoff"});
        double prev_metric = 0.0;
        bool monotone = true;
        for (std::size_t gi = 0; gi < c.gamma0_list.size(); ++gi) {
            const Curve curve = futs[gi].get();
            for (std::size_t i = 0; i < lt_grid.size(); ++i) {
                csv.row({kind_name(c.experiment), resetting ? "resetting" : "charging",
                         format_double(c.gamma0_list[gi]), format_double(lt_grid[i]),
                         format_double(curve.u_q[i]), format_double(curve.p_g[i]),
                         format_double(c.tbar), format_double(c.delta),
                         format_double(c.delta_over_omega_lindblad),
                         std::to_string(c.cutoff_lindblad)});
            }
            const std::string tag = format_double(c.gamma0_list[gi]);
            if (resetting) {
                const double final_pg = curve.p_g.back();
                summary.add("reset_final_p_g_gamma_" + tag, final_pg);
            } else {
                const double peak = *std::max_element(curve.u_q.begin(), curve.u_q.end());
                summary.add("charge_peak_u_gamma_" + tag, peak);
                if (gi > 0 && peak >= prev_metric) monotone = false;
                prev_metric = peak;
            }
        }
        if (!resetting) summary.add("charge_peak_monotone_decreasing", monotone ? "yes" : "no");
        result.files.push_back(csv.path());
    }
    result.files.push_back(summary.write(dir));
    return result;
}

RunResult run_collisions(const ExperimentConfig& c, const std::filesystem::path& dir) {
    Summary summary;
    echo_config(c, summary);
    summary.add("k_collisions", c.k_collisions);
    RunResult result;

    const ThermalSpec left_spec(c.tbar, omega_left_bar(c), c.cutoff_left);
    const ThermalSpec right_spec(c.tbar, omega_right_bar(c), c.cutoff_right);
    const auto qubit = states::qubit_thermal(c.tbar, c.omega_g, c.omega_e);
    const QubitPopulations pq{qubit.rho(0, 0).real(), qubit.rho(1, 1).real()};
    const double alpha = matched_alpha(c, left_spec);

    // Matched-energy single-shot reference: the photon-added state fired once.
    const double spats_single = peak_delta_u(
        diagonal_populations(states::npats(c.n_added, left_spec)), pq,
        diagonal_populations(states::gibbs_oscillator(right_spec)),
        EffectiveParams::from_ratio(1.0, 1.0, 0, -1));
    summary.add("spats_single_shot_delta_u", spats_single);

    bool all_truncation_ok = true;
    for (double chi : c.chi_list) {
        const ChiRegime regime =
            chi < 0.5 ? ChiRegime::small : (chi > 2.0 ? ChiRegime::large : ChiRegime::unit);
        const auto charger = ChargerState::product(states::dts_prepared(alpha, left_spec),
                                                   states::gibbs_oscillator(right_spec));
        const auto p = EffectiveParams::from_ratio(chi, 1.0, 0, -1);
        const auto chain =
            collisions::run_chain(c.k_collisions, charger, qubit, p, regime);

        CsvFile csv(dir / ("collisions_chi_" + format_double(chi) + ".csv"),
                    {"experiment", "chi", "k", "drive_M", "drive_N", "tau_lambda", "p_g_final",
                     "p_e_final", "delta_u", "raw_energy_sum", "mutual_info", "tbar", "alpha",
                     "cutoff_left", "cutoff_right"});
        double accumulated = 0.0;
        int inverted = 0;
        double min_mi = 0.0;
        for (const auto& r : chain.records) {
            accumulated += r.delta_u;
            if (r.p_e_final > 0.5) ++inverted;
            min_mi = (r.k == 1) ? r.mutual_info : std::min(min_mi, r.mutual_info);
            csv.row({kind_name(c.experiment), format_double(chi), std::to_string(r.k),
                     std::to_string(r.drive_M), std::to_string(r.drive_N), format_double(r.tau),
                     format_double(r.p_g_final), format_double(r.p_e_final),
                     format_double(r.delta_u), format_double(r.raw_energy_sum),
                     format_double(r.mutual_info), format_double(c.tbar), format_double(alpha),
                     std::to_string(c.cutoff_left), std::to_string(c.cutoff_right)});
        }
        result.files.push_back(csv.path());

        const std::string tag = "chi_" + format_double(chi);
        summary.add("accumulated_delta_u_" + tag, accumulated);
        summary.add("inverted_batteries_" + tag, inverted);
        summary.add("initial_raw_sum_" + tag,
                    chain.records.empty() ? 0.0 : chain.records.front().raw_energy_sum);
        summary.add("final_raw_sum_" + tag,
                    collisions::raw_energy_sum_k(chain.final_charger, pq));
        summary.add("min_mutual_info_" + tag, min_mi);
        summary.add("completed_collisions_" + tag, static_cast<long>(chain.records.size()));
        summary.add("truncation_ok_" + tag, chain.truncation_ok ? "yes" : "no");
        if (!chain.truncation_ok) all_truncation_ok = false;
    }
    result.files.push_back(summary.write(dir));
    result.exit_code = all_truncation_ok ? 0 : 2;
    return result;
}

RunResult run_validate_dispersive(const ExperimentConfig& c, const std::filesystem::path& dir) {
    Summary summary;
    echo_config(c, summary);
    RunResult result;

    std::set<double> ratios(c.ratio_list.begin(), c.ratio_list.end());
    ratios.insert(c.delta_over_omega);

    std::vector<std::pair<double, fulldyn::DispersiveResidual>> residuals;
    for (double ratio : ratios) {
        fulldyn::SystemSpec spec;
        spec.omega_g = c.omega_g;
        spec.omega_e = c.omega_e;
        spec.omega_i = c.omega_i;
        spec.delta = c.delta;
        spec.omega_l_coupling = c.delta / ratio;
        spec.omega_r_coupling = spec.omega_l_coupling;
        spec.cutoff_left = c.cutoff_full;
        spec.cutoff_right = c.cutoff_full;
        spec.check();
        const double lambda = spec.effective_params().lambda_eff;
        const auto space = spec.space();

        // |1, g, 0> on the full space; one effective period of the (1, 0) doublet.
        Matrix rho0 = Matrix::Zero(space.dim(), space.dim());
        rho0(space.flat(1, 0, 0), space.flat(1, 0, 0)) = 1.0;
        std::vector<double> lt(static_cast<std::size_t>(c.time_points_validate));
        std::vector<double> tg(lt.size());
        for (std::size_t i = 0; i < lt.size(); ++i) {
            lt[i] = std::numbers::pi * static_cast<double>(i) / static_cast<double>(lt.size() - 1);
            tg[i] = lt[i] / lambda;
        }
        const auto res = fulldyn::dispersive_residual(spec, DensityMatrix(rho0), tg);

        CsvFile csv(dir / ("validate_dispersive_ratio_" + format_double(ratio) + ".csv"),
                    {"experiment", "delta_over_omega", "lambda_t", "p_e_full", "p_e_eff",
                     "p_g_full", "p_g_eff", "p_i_full", "delta", "cutoff_full"});
        for (std::size_t i = 0; i < lt.size(); ++i) {
            csv.row({kind_name(c.experiment), format_double(ratio), format_double(lt[i]),
                     format_double(res.p_e_full[i]), format_double(res.p_e_eff[i]),
                     format_double(res.p_g_full[i]), format_double(res.p_g_eff[i]),
                     format_double(res.p_i_full[i]), format_double(c.delta),
                     std::to_string(c.cutoff_full)});
        }
        result.files.push_back(csv.path());

        const std::string tag = "ratio_" + format_double(ratio);
        const double max_pop_dev = std::max(res.max_dev_p_g, res.max_dev_p_e);
        summary.add("max_population_residual_" + tag, max_pop_dev);
        summary.add("max_level_i_population_" + tag, res.max_population_i);
        residuals.emplace_back(ratio, res);
    }

    bool monotone = true;
    for (std::size_t i = 1; i < residuals.size(); ++i) {
        const double prev = std::max(residuals[i - 1].second.max_dev_p_g,
                                     residuals[i - 1].second.max_dev_p_e);
        const double cur =
            std::max(residuals[i].second.max_dev_p_g, residuals[i].second.max_dev_p_e);
        if (cur >= prev) monotone = false;
    }
    summary.add("residual_monotone_decreasing", monotone ? "yes" : "no");
    result.files.push_back(summary.write(dir));
    return result;
}

// Direct truncated summation of sum_n (n+N)!/n! q^n, stopped at relative tail
// 1e-12; the independent route against the closed-form partition function.
double npats_partition_direct(int n_added, double q) {
    double sum = 0.0;
    double term = std::exp(std::lgamma(n_added + 1.0));   // n = 0 term
    for (int n = 0; n < 100000; ++n) {
        sum += term;
        term *= q * static_cast<double>(n + 1 + n_added) / static_cast<double>(n + 1);
        if (term < 1e-12 * sum) break;
    }
    return sum;
}

RunResult run_appendix_checks(const ExperimentConfig& c, const std::filesystem::path& dir) {
    Summary summary;
    echo_config(c, summary);
    RunResult result;

    const Index cutoff = std::max<Index>(c.cutoff_left, 40);
    const ThermalSpec spec(c.tbar, 1.0, cutoff);
    const double q = spec.boltzmann();

    CsvFile csv(dir / "appendix_checks.csv",
                {"experiment", "check", "n_added", "tbar", "omega_bar", "alpha", "computed",
                 "expected", "abs_diff", "tolerance", "status"});
    int failures = 0;
    auto emit = [&](const std::string& name, int n_added, double alpha, double computed,
                    double expected, double tol) {
        const double diff = std::abs(computed - expected);
        const bool ok = diff <= tol;
        if (!ok) ++failures;
        csv.row({kind_name(c.experiment), name, std::to_string(n_added), format_double(c.tbar),
                 format_double(1.0), format_double(alpha), format_double(computed),
                 format_double(expected), format_double(diff), format_double(tol),
                 ok ? "pass" : "FAIL"});
    };

    for (int n = 1; n <= 3; ++n) {
        const states::PhotonAddition pa(n, spec);
        const double direct = npats_partition_direct(n, q);
        emit("partition_recursion", n, 0.0, pa.z_n, direct, 1e-10 * std::max(1.0, direct));
        const auto rho = states::npats(n, spec);
        emit("npats_mean_occupation", n, 0.0, observables::mean_excitation(rho),
             pa.mean_occupation(), 1e-6);
    }
    for (double alpha : {0.8, states::alpha_opt(1, spec)}) {
        const auto rho_dts = states::dts(alpha, spec);
        const auto rho_t = states::gibbs_oscillator(spec);
        emit("dts_mean_occupation", 0, alpha, observables::mean_excitation(rho_dts),
             observables::mean_excitation(rho_t) + alpha * alpha, 1e-6);
        emit("dts_purity", 0, alpha, observables::purity(rho_dts), observables::purity(rho_t),
             1e-8);
    }
    result.files.push_back(csv.path());
    summary.add("failures", failures);
    result.files.push_back(summary.write(dir));
    result.exit_code = failures == 0 ? 0 : 2;
    return result;
}

} // namespace

RunResult run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
    config.validate();
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    switch (config.experiment) {
        case Kind::single_charge:
        case Kind::reset: return run_charge_or_reset(config, dir);
        case Kind::eta_sweep: return run_eta_sweep(config, dir);
        case Kind::dissipation: return run_dissipation(config, dir);
        case Kind::collisions: return run_collisions(config, dir);
        case Kind::validate_dispersive: return run_validate_dispersive(config, dir);
        case Kind::appendix_checks: return run_appendix_checks(config, dir);
    }
    throw std::logic_error("run_experiment: unreachable");
}

// ------------------------------ check suite ----------------------------------

namespace {

Matrix random_hermitian(Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix a(dim, dim);
    for (Index r = 0; r < dim; ++r) {
        for (Index c = 0; c < dim; ++c) a(r, c) = hilbert::Complex(dist(rng), dist(rng));
    }
    return 0.5 * (a + a.adjoint().eval());
}

DensityMatrix random_density(Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix a(dim, dim);
    for (Index r = 0; r < dim; ++r) {
        for (Index c = 0; c < dim; ++c) a(r, c) = hilbert::Complex(dist(rng), dist(rng));
    }
    Matrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(std::move(rho));
}

Eigen::VectorXd random_populations(Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Eigen::VectorXd p(n);
    for (Index k = 0; k < n; ++k) p(k) = dist(rng);
    p /= p.sum();
    return p;
}

} // namespace

int run_check_suite(std::uint64_t seed, std::ostream& log) {
    std::mt19937_64 rng(seed);
    int failures = 0;
    auto report = [&](const std::string& name, bool ok) {
        log << (ok ? "ok   " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    {
        bool ok = true;
        for (int rep = 0; rep < 5; ++rep) {
            const Matrix h = random_hermitian(6, rng);
            const Matrix u = hilbert::expm_hermitian(h, 0.7 + rep);
            ok = ok && (u.adjoint() * u - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-9;
        }
        report("expm unitarity on random Hermitian generators", ok);
    }
    {
        bool ok = true;
        for (int rep = 0; rep < 5; ++rep) {
            const auto rho = random_density(12, rng);
            const std::vector<Index> dims{2, 3, 2};
            const auto a = hilbert::partial_trace(hilbert::partial_trace(rho, {0, 1}, dims), {1},
                                                  {2, 3});
            const auto b = hilbert::partial_trace(rho, {1}, dims);
            ok = ok && (a.rho - b.rho).cwiseAbs().maxCoeff() <= 1e-12;
        }
        report("partial trace is order independent", ok);
    }
    {
        std::normal_distribution<double> dist(0.0, 1.0);
        auto rand_m = [&](Index d) {
            Matrix m(d, d);
            for (Index r = 0; r < d; ++r)
                for (Index c = 0; c < d; ++c) m(r, c) = hilbert::Complex(dist(rng), dist(rng));
            return m;
        };
        const Matrix a = rand_m(2), b = rand_m(3), c = rand_m(2);
        const Matrix lhs = hilbert::kron(hilbert::kron(a, b), c);
        const Matrix rhs = hilbert::kron(a, hilbert::kron(b, c));
        report("kron associativity", (lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    }
    {
        bool ok = true;
        std::uniform_real_distribution<double> dist(0.1, 3.0);
        for (int rep = 0; rep < 50; ++rep) {
            const auto p = EffectiveParams::from_ratio(dist(rng), dist(rng), rep % 3, (rep % 4) - 2);
            const auto amp = effective::amplitudes(1 + rep % 4, rep % 3, dist(rng), p);
            ok = ok && std::abs(std::norm(amp.a) + std::norm(amp.b) - 1.0) <= 1e-12;
        }
        report("doublet amplitudes stay normalized", ok);
    }
    {
        // Trivial eigenstates shield their population on a random product state.
        const hilbert::ProductSpace space{4, 2, 4};
        const auto p = EffectiveParams::from_ratio(1.3, 1.0, 1, 0);
        const auto rho = random_density(space.dim(), rng);
        const auto evolved = effective::evolve_effective(rho, space, 0.83, p);
        bool ok = true;
        for (Index n = 0; n < 4; ++n) {
            const Index a = space.flat(0, 0, n);
            ok = ok && std::abs(evolved.rho(a, a).real() - rho.rho(a, a).real()) <= 1e-12;
        }
        for (Index m = 0; m < 4; ++m) {
            const Index a = space.flat(m, 1, 0);
            ok = ok && std::abs(evolved.rho(a, a).real() - rho.rho(a, a).real()) <= 1e-12;
        }
        report("trivial eigenstate populations are constants of motion", ok);
    }
    {
        bool ok = true;
        for (int rep = 0; rep < 30; ++rep) {
            const Eigen::VectorXd pl = random_populations(7, rng);
            const Eigen::VectorXd pr = random_populations(6, rng);
            std::uniform_real_distribution<double> dist(0.0, 1.0);
            const double pg = dist(rng);
            const QubitPopulations pq{pg, 1.0 - pg};
            const double brute = effective::raw_energy_matrix(pl, pq, pr).sum();
            const double closed = pq.p_g * (1.0 - pl(0)) - pq.p_e * (1.0 - pr(0));
            ok = ok && std::abs(brute - closed) <= 1e-12;
        }
        report("raw energy sum collapses to the vacuum closed form", ok);
    }
    {
        const ThermalSpec spec(0.1, 1.0, 40);
        bool ok = true;
        for (int n = 1; n <= 3; ++n) {
            const states::PhotonAddition pa(n, spec);
            const double direct = npats_partition_direct(n, spec.boltzmann());
            ok = ok && std::abs(pa.z_n - direct) <= 1e-10 * std::max(1.0, direct);
            ok = ok && std::abs(observables::mean_excitation(states::npats(n, spec)) -
                                pa.mean_occupation()) <= 1e-6;
        }
        const auto rho_dts = states::dts(0.8, spec);
        const auto rho_t = states::gibbs_oscillator(spec);
        ok = ok && std::abs(observables::mean_excitation(rho_dts) -
                            (observables::mean_excitation(rho_t) + 0.64)) <= 1e-6;
        ok = ok && std::abs(observables::purity(rho_dts) - observables::purity(rho_t)) <= 1e-8;
        report("photon-addition and displacement identities", ok);
    }
    return failures;
}

} // namespace qbc::experiments
