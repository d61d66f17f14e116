// Acceptance suite: each numbered criterion prints one [PASS]/[FAIL] line.
// Run `acceptance <n>` for a single criterion or `acceptance all` (default)
// for the whole table; the exit code is the number of failures.

#include "qbc/collisions.hpp"
#include "qbc/effective.hpp"
#include "qbc/experiments.hpp"
#include "qbc/fulldyn.hpp"
#include "qbc/lindblad.hpp"
#include "qbc/observables.hpp"
#include "qbc/states.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace qbc;
using collisions::ChargerState;
using collisions::ChiRegime;
using effective::EffectiveParams;
using effective::QubitPopulations;
using hilbert::Complex;
using hilbert::DensityMatrix;
using hilbert::Index;
using hilbert::Matrix;
using hilbert::ProductSpace;
using states::ThermalSpec;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

DensityMatrix product_state(const DensityMatrix& l, const DensityMatrix& q,
                            const DensityMatrix& r) {
    return DensityMatrix(hilbert::kron(l.rho, hilbert::kron(q.rho, r.rho)));
}

DensityMatrix thermal_qubit_08() {
    Matrix q = Matrix::Zero(2, 2);
    q(0, 0) = 0.8;
    q(1, 1) = 0.2;
    return DensityMatrix(std::move(q));
}

// ---- 1: universal optimal charge -------------------------------------------

Outcome criterion_1() {
    const ProductSpace space{4, 2, 4};
    const auto p = EffectiveParams::from_ratio(1.0, 1.0, 0, -1);
    const auto rho0 = product_state(hilbert::fock_projector(4, 1), thermal_qubit_08(),
                                    hilbert::fock_projector(4, 0));
    const double tau = std::numbers::pi / (2.0 * p.lambda_eff);
    const auto evolved = effective::evolve_effective(rho0, space, tau, p);
    const double du = observables::energy_report(evolved, space).u_q -
                      observables::energy_report(rho0, space).u_q;
    const double err = std::abs(du - 1.6);
    return {err <= 1e-9, "delta U = " + experiments::format_double(du) +
                             ", |err| = " + experiments::format_double(err)};
}

// ---- 2: reset symmetry -------------------------------------------------------

Outcome criterion_2() {
    const ProductSpace space{4, 2, 4};
    const auto p = EffectiveParams::from_ratio(1.0, 1.0, 0, -1);
    const auto rho0 = product_state(hilbert::fock_projector(4, 0), thermal_qubit_08(),
                                    hilbert::fock_projector(4, 1));
    const double tau = std::numbers::pi / (2.0 * p.lambda_eff);
    const auto evolved = effective::evolve_effective(rho0, space, tau, p);
    const double p_g = observables::energy_report(evolved, space).p_g;
    return {std::abs(p_g - 1.0) <= 1e-9, "final p_g = " + experiments::format_double(p_g)};
}

// ---- 3: appendix identities --------------------------------------------------

double npats_partition_direct(int n_added, double q) {
    double sum = 0.0;
    double term = std::exp(std::lgamma(n_added + 1.0));
    for (int n = 0; n < 100000; ++n) {
        sum += term;
        term *= q * static_cast<double>(n + 1 + n_added) / static_cast<double>(n + 1);
        if (term < 1e-12 * sum) break;
    }
    return sum;
}

Outcome criterion_3() {
    const ThermalSpec spec(0.1, 1.0, 40);
    std::ostringstream detail;
    bool pass = true;

    for (int n = 1; n <= 3; ++n) {
        const states::PhotonAddition pa(n, spec);
        const double direct = npats_partition_direct(n, spec.boltzmann());
        if (std::abs(pa.z_n - direct) > 1e-10 * std::max(1.0, direct)) pass = false;

        const auto rho = states::npats(n, spec);
        if (std::abs(observables::mean_excitation(rho) - pa.mean_occupation()) > 1e-6) {
            pass = false;
        }
    }
    const auto gibbs = states::gibbs_oscillator(spec);
    for (double alpha : {states::alpha_opt(1, spec), 0.8}) {
        const auto rho = states::dts(alpha, spec);
        const double dn = std::abs(observables::mean_excitation(rho) -
                                   (observables::mean_excitation(gibbs) + alpha * alpha));
        const double dp = std::abs(observables::purity(rho) - observables::purity(gibbs));
        if (dn > 1e-6 || dp > 1e-8) pass = false;
        detail << " alpha=" << experiments::format_double(alpha)
               << ": d<n>=" << experiments::format_double(dn)
               << " dP=" << experiments::format_double(dp) << ";";
    }
    return {pass, "partition, occupation, displacement and purity identities;" + detail.str()};
}

// ---- 4: raw-energy closed form ----------------------------------------------

Outcome criterion_4() {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const Index nl = 4 + rep % 5;
        const Index nr = 3 + rep % 6;
        Eigen::VectorXd pl(nl), pr(nr);
        for (Index k = 0; k < nl; ++k) pl(k) = dist(rng);
        for (Index k = 0; k < nr; ++k) pr(k) = dist(rng);
        pl /= pl.sum();
        pr /= pr.sum();
        const double pg = dist(rng);
        const QubitPopulations pq{pg, 1.0 - pg};
        const double brute = effective::raw_energy_matrix(pl, pq, pr).sum();
        const double closed = pq.p_g * (1.0 - pl(0)) - pq.p_e * (1.0 - pr(0));
        worst = std::max(worst, std::abs(brute - closed));
    }
    return {worst <= 1e-12, "max |brute - closed| = " + experiments::format_double(worst) +
                                " over 50 random profiles"};
}

// ---- 5: effective dynamics vs dense exponential -------------------------------

Outcome criterion_5() {
    std::mt19937_64 rng(555);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> chi_dist(0.4, 2.5);
    std::uniform_real_distribution<double> t_dist(0.1, 5.0);
    const ProductSpace space{4, 2, 4};

    const Matrix al = hilbert::annihilation(4);
    const Matrix il = Matrix::Identity(4, 4);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = EffectiveParams::from_ratio(chi_dist(rng), 1.0, rep % 3, (rep % 4) - 2);
        Matrix h = Matrix::Zero(space.dim(), space.dim());
        h -= (p.lambda_eff / p.chi) *
             hilbert::kron(al.adjoint() * al - static_cast<double>(p.drive_M) * il,
                           hilbert::kron(hilbert::basis_op(2, 0, 0), il));
        h -= (p.lambda_eff * p.chi) *
             hilbert::kron(il, hilbert::kron(hilbert::basis_op(2, 1, 1),
                                             al.adjoint() * al - (p.drive_N + 1.0) * il));
        h -= p.lambda_eff *
             (hilbert::kron(al, hilbert::kron(hilbert::basis_op(2, 1, 0), al.adjoint())) +
              hilbert::kron(al.adjoint(), hilbert::kron(hilbert::basis_op(2, 0, 1), al)));

        Matrix a(space.dim(), space.dim());
        for (Index r = 0; r < space.dim(); ++r) {
            for (Index c = 0; c < space.dim(); ++c) a(r, c) = Complex(normal(rng), normal(rng));
        }
        Matrix rho = a * a.adjoint();
        rho /= rho.trace().real();
        const DensityMatrix state(std::move(rho));

        const effective::EffectiveEvolver evolver(space, p);
        for (int tt = 0; tt < 5; ++tt) {
            const double t = t_dist(rng);
            const Matrix u = hilbert::expm_hermitian(h, t);
            const Matrix expected = u * state.rho * u.adjoint();
            worst = std::max(worst,
                             (evolver.evolve(state, t).rho - expected).cwiseAbs().maxCoeff());
        }
    }
    return {worst <= 1e-8, "max deviation = " + experiments::format_double(worst) +
                               " over 20 states x 5 times"};
}

// ---- 6: dispersive validation -------------------------------------------------

fulldyn::SystemSpec dispersive_spec(double ratio, Index cutoff) {
    fulldyn::SystemSpec spec;
    spec.delta = 0.3;
    spec.omega_l_coupling = spec.delta / ratio;
    spec.omega_r_coupling = spec.omega_l_coupling;
    spec.cutoff_left = cutoff;
    spec.cutoff_right = cutoff;
    spec.check();
    return spec;
}

Outcome criterion_6() {
    auto residual_at = [](double ratio) {
        const auto spec = dispersive_spec(ratio, 6);
        const double lambda = spec.effective_params().lambda_eff;
        const auto space = spec.space();
        const auto rho0 = hilbert::fock_projector(space.dim(), space.flat(1, 0, 0));
        std::vector<double> grid;
        for (int i = 0; i <= 80; ++i) grid.push_back(std::numbers::pi * i / 80.0 / lambda);
        return fulldyn::dispersive_residual(spec, rho0, grid);
    };

    const auto at50 = residual_at(50.0);
    const double dev50 = std::max(at50.max_dev_p_e, at50.max_dev_p_g);
    bool pass = dev50 <= 0.05 && at50.max_population_i < 0.01;

    double prev = 1e99;
    std::ostringstream sweep;
    for (double ratio : {10.0, 30.0, 100.0}) {
        const auto res = residual_at(ratio);
        const double dev = std::max(res.max_dev_p_e, res.max_dev_p_g);
        sweep << " r" << experiments::format_double(ratio) << "="
              << experiments::format_double(dev);
        if (dev >= prev) pass = false;
        prev = dev;
    }
    return {pass, "dev@50 = " + experiments::format_double(dev50) +
                      ", max p_i = " + experiments::format_double(at50.max_population_i) +
                      ", sweep:" + sweep.str()};
}

// ---- 7: open-dynamics suite ----------------------------------------------------

Outcome criterion_7() {
    const Index cutoff = 12;
    const auto spec = dispersive_spec(10.0, cutoff);
    const double lambda = spec.effective_params().lambda_eff;
    const auto space = spec.space();
    std::ostringstream detail;
    bool pass = true;

    // (a) gamma0 = 0 reduces to the unitary evolution.
    {
        const auto rho0 = hilbert::fock_projector(space.dim(), space.flat(1, 0, 0));
        lindblad::DissipationSpec diss;
        diss.gamma0 = 0.0;
        diss.tbar = 0.1;
        lindblad::IntegrateOptions opts;
        opts.accuracy_factor = 0.02;
        const std::vector<double> grid{0.0, 5.0, 10.0};
        const auto traj = lindblad::integrate(rho0, grid, spec, diss, opts);
        const fulldyn::FullPropagator prop(spec);
        double dev = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            dev = std::max(dev, (traj[i].rho - prop.evolve(rho0, grid[i]).rho)
                                    .cwiseAbs()
                                    .maxCoeff());
        }
        detail << "unitary dev = " << experiments::format_double(dev);
        if (dev > 1e-6) pass = false;
    }

    // (b) the free-Hamiltonian Gibbs state is stationary.
    {
        auto free_spec = spec;
        free_spec.omega_l_coupling = 0.0;
        free_spec.omega_r_coupling = 0.0;
        const ThermalSpec lsp(0.1, free_spec.omega_left_mode(), cutoff);
        const ThermalSpec rsp(0.1, free_spec.omega_right_mode(), cutoff);
        const auto gibbs = product_state(
            states::gibbs_oscillator(lsp),
            states::qutrit_thermal(0.1, free_spec.omega_g, free_spec.omega_e, free_spec.omega_i),
            states::gibbs_oscillator(rsp));
        lindblad::DissipationSpec diss;
        diss.gamma0 = 0.05;
        diss.gamma0_absolute = true;
        diss.tbar = 0.1;
        const double rhs_norm =
            lindblad::lindblad_rhs(gibbs, free_spec, diss).cwiseAbs().maxCoeff();
        detail << ", Gibbs rhs = " << experiments::format_double(rhs_norm);
        if (rhs_norm > 1e-8) pass = false;
    }

    // (c) charging peak decreases monotonically with gamma0; trace drift stays
    // within bounds on every run.
    {
        const ThermalSpec lsp(0.1, spec.omega_left_mode(), cutoff);
        const ThermalSpec rsp(0.1, spec.omega_right_mode(), cutoff);
        const auto rho0 = product_state(
            states::npats(1, lsp),
            states::qutrit_thermal(0.1, spec.omega_g, spec.omega_e, spec.omega_i),
            states::gibbs_oscillator(rsp));

        std::vector<double> grid;
        for (int i = 0; i <= 40; ++i) grid.push_back(2.0 * i / 40.0 / lambda);

        auto peak_for = [&](double gamma0) {
            lindblad::DissipationSpec diss;
            diss.gamma0 = gamma0;
            diss.tbar = 0.1;
            // Peak gaps across the gamma sweep are ~4e-2; the step error at
            // this setting is ~5e-6 (verified by halving in the unit tests).
            lindblad::IntegrateOptions opts;
            opts.accuracy_factor = 0.25;
            double peak = -2.0;
            double max_trace_err = 0.0;
            lindblad::integrate_observed(
                rho0, grid, spec, diss,
                [&](std::size_t, double, const DensityMatrix& rho) {
                    peak = std::max(peak, observables::energy_report(rho, space).u_q);
                    max_trace_err = std::max(max_trace_err, std::abs(rho.trace_real() - 1.0));
                },
                opts);
            if (max_trace_err > 1e-8) pass = false;
            return peak;
        };

        std::vector<std::future<double>> futs;
        for (double g : {0.01, 0.05, 0.1}) {
            futs.push_back(std::async(std::launch::async, peak_for, g));
        }
        std::vector<double> peaks;
        for (auto& f : futs) peaks.push_back(f.get());
        detail << ", peaks =";
        for (double p : peaks) detail << " " << experiments::format_double(p);
        if (!(peaks[0] > peaks[1] && peaks[1] > peaks[2])) pass = false;
    }
    return {pass, detail.str()};
}

// ---- 8: eta crossing -----------------------------------------------------------

Outcome criterion_8() {
    const double tbar = 0.1;
    const Index cutoff = 25;
    fulldyn::SystemSpec geom = dispersive_spec(10.0, 4);   // frequency layout only
    const ThermalSpec left(tbar, geom.omega_left_mode(), cutoff);
    const ThermalSpec right(tbar, geom.omega_right_mode(), cutoff);
    const auto qubit = states::qubit_thermal(tbar, geom.omega_g, geom.omega_e);
    const QubitPopulations pq{qubit.rho(0, 0).real(), qubit.rho(1, 1).real()};
    const auto p = EffectiveParams::from_ratio(1.0, 1.0, 0, -1);
    const Eigen::VectorXd pr_diag = states::gibbs_oscillator(right).rho.diagonal().real();

    auto peak = [&](const DensityMatrix& left_state) {
        const Eigen::VectorXd pl = left_state.rho.diagonal().real();
        Matrix l = Matrix::Zero(pl.size(), pl.size());
        for (Index k = 0; k < pl.size(); ++k) l(k, k) = pl(k);
        Matrix r = Matrix::Zero(pr_diag.size(), pr_diag.size());
        for (Index k = 0; k < pr_diag.size(); ++k) r(k, k) = pr_diag(k);
        const auto charger =
            ChargerState::product(DensityMatrix(std::move(l)), DensityMatrix(std::move(r)));
        const double tau = collisions::optimal_collision_tau(charger, pq, p);
        return collisions::predicted_delta_u(collisions::raw_energy_table(charger, pq), tau, p);
    };

    const double dts_peak = peak(states::dts_prepared(states::alpha_opt(1, left), left));
    double crossing = -1.0;
    double prev_f = -dts_peak;
    for (int i = 1; i <= 40; ++i) {
        const double eta = i / 40.0;
        const double f = peak(states::inefficient_spats(eta, left)) - dts_peak;
        if (prev_f <= 0.0 && f > 0.0) {
            const double eta_prev = (i - 1) / 40.0;
            crossing = eta_prev + 0.025 * (-prev_f) / (f - prev_f);
            break;
        }
        prev_f = f;
    }
    return {std::abs(crossing - 0.5) <= 0.02,
            "crossing eta = " + experiments::format_double(crossing)};
}

// ---- 9: collisional chain ------------------------------------------------------

Outcome criterion_9() {
    const double tbar = 0.1;
    const Index cutoff = 25;
    fulldyn::SystemSpec geom = dispersive_spec(10.0, 4);
    const ThermalSpec left(tbar, geom.omega_left_mode(), cutoff);
    const ThermalSpec right(tbar, geom.omega_right_mode(), cutoff);
    const auto qubit = states::qubit_thermal(tbar, geom.omega_g, geom.omega_e);
    const QubitPopulations pq{qubit.rho(0, 0).real(), qubit.rho(1, 1).real()};
    const auto p = EffectiveParams::from_ratio(1.0, 1.0, 0, -1);

    const auto charger = ChargerState::product(
        states::dts_prepared(states::alpha_opt(1, left), left), states::gibbs_oscillator(right));
    const auto chain = collisions::run_chain(30, charger, qubit, p, ChiRegime::unit);

    std::ostringstream detail;
    bool pass = chain.records.size() == 30 && chain.truncation_ok;

    int inverted = 0;
    double accumulated = 0.0;
    double min_mi = 1e99;
    for (const auto& rec : chain.records) {
        if (rec.p_e_final > 0.5) ++inverted;
        accumulated += rec.delta_u;
        min_mi = std::min(min_mi, rec.mutual_info);
    }
    if (inverted != 1 || chain.records[0].p_e_final <= 0.5) pass = false;

    const double initial_raw = chain.records[0].raw_energy_sum;
    const double final_raw = collisions::raw_energy_sum_k(chain.final_charger, pq);
    if (!(std::abs(final_raw) < 0.01 * std::abs(initial_raw))) pass = false;

    // Matched-input single shot from the photon-added state.
    Matrix r0 = Matrix::Zero(cutoff, cutoff);
    r0.diagonal() = states::gibbs_oscillator(right).rho.diagonal();
    const auto spats_charger =
        ChargerState::product(states::npats(1, left), DensityMatrix(std::move(r0)));
    const double spats_tau = collisions::optimal_collision_tau(spats_charger, pq, p);
    const double spats_single = collisions::predicted_delta_u(
        collisions::raw_energy_table(spats_charger, pq), spats_tau, p);
    if (!(accumulated > spats_single)) pass = false;

    const double final_mi = chain.records.back().mutual_info;
    if (!(min_mi > 0.0 && final_mi > 1e-3)) pass = false;

    detail << "inverted = " << inverted
           << ", raw drain = " << experiments::format_double(final_raw) << " / "
           << experiments::format_double(initial_raw)
           << ", chain U = " << experiments::format_double(accumulated)
           << " vs single " << experiments::format_double(spats_single)
           << ", min I = " << experiments::format_double(min_mi)
           << ", final I = " << experiments::format_double(final_mi);
    return {pass, detail.str()};
}

// ---- 10: selectivity ------------------------------------------------------------

Outcome criterion_10() {
    const double tbar = 0.1;
    const auto p = EffectiveParams::from_ratio(0.1, 1.0, 3, 0);
    const ProductSpace space{8, 2, 6};
    const ThermalSpec left(tbar, 0.7, 8);
    const ThermalSpec right(tbar, 0.65, 6);
    const auto qubit = states::qubit_thermal(tbar, 0.0, 0.05);
    const auto rho0 = product_state(states::npats(3, left), qubit,
                                    states::gibbs_oscillator(right));

    const double tau = std::numbers::pi / effective::doublet_rabi(3, 0, p);
    const auto evolved = effective::evolve_effective(rho0, space, tau, p);

    const double selected_b2 = std::norm(effective::amplitudes(3, 0, tau, p).b);
    double max_change = 0.0;
    for (Index m = 0; m < space.n_left; ++m) {
        for (Index n = 0; n < space.n_right; ++n) {
            // Doublet labels: (m, n) for the g member, (m+1, n-1) for the e member.
            if (m != 3) {
                const Index a = space.flat(m, 0, n);
                max_change = std::max(
                    max_change, std::abs(evolved.rho(a, a).real() - rho0.rho(a, a).real()));
            }
            if (m + 1 != 3) {
                const Index a = space.flat(m, 1, n);
                max_change = std::max(
                    max_change, std::abs(evolved.rho(a, a).real() - rho0.rho(a, a).real()));
            }
        }
    }
    const bool pass = selected_b2 > 0.99 && max_change < 1e-3;
    return {pass, "selected |B|^2 = " + experiments::format_double(selected_b2) +
                      ", max non-selected change = " + experiments::format_double(max_change)};
}

const char* kCriterionNames[] = {
    "universal optimal charge reaches 2 p_g",
    "mirrored input resets the battery to ground",
    "photon-addition and displacement identities",
    "raw-energy sum matches the closed form",
    "block evolution matches the dense exponential",
    "full dynamics validates the dispersive reduction",
    "open-dynamics suite (unitary limit, stationarity, gamma sweep)",
    "inefficient-addition curve crosses the displaced reference at 50%",
    "collisional chain drains the charger and beats the single shot",
    "drive selectivity isolates one doublet family",
};

Outcome run_criterion(int n) {
    switch (n) {
        case 1: return criterion_1();
        case 2: return criterion_2();
        case 3: return criterion_3();
        case 4: return criterion_4();
        case 5: return criterion_5();
        case 6: return criterion_6();
        case 7: return criterion_7();
        case 8: return criterion_8();
        case 9: return criterion_9();
        case 10: return criterion_10();
        default: throw std::invalid_argument("criterion index must be 1..10");
    }
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    if (argc <= 1 || std::string(argv[1]) == "all") {
        for (int i = 1; i <= 10; ++i) which.push_back(i);
    } else {
        which.push_back(std::atoi(argv[1]));
    }

    int failures = 0;
    for (int n : which) {
        Outcome out;
        try {
            out = run_criterion(n);
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.pass) ++failures;
        std::printf("[%s] criterion %2d: %s (%s)\n", out.pass ? "PASS" : "FAIL", n,
                    kCriterionNames[n - 1], out.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
