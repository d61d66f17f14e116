#include "qbc/collisions.hpp"

#include "qbc/observables.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbc::collisions {

using hilbert::Matrix;
using hilbert::ProductSpace;

ChargerState::ChargerState(DensityMatrix state, Index nl, Index nr)
    : rho(std::move(state)), n_left(nl), n_right(nr) {
    if (nl < 2 || nr < 2) {
        throw std::invalid_argument("ChargerState: mode cutoffs must be >= 2");
    }
    if (rho.dim() != nl * nr) {
        throw std::invalid_argument("ChargerState: dimension does not factor as n_left * n_right");
    }
}

Complex ChargerState::joint(Index m, Index mp, Index n, Index np) const {
    return rho.rho(m * n_right + n, mp * n_right + np);
}

Eigen::VectorXd ChargerState::left_populations() const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n_left);
    for (Index m = 0; m < n_left; ++m) {
        for (Index n = 0; n < n_right; ++n) p(m) += joint(m, m, n, n).real();
    }
    return p;
}

Eigen::VectorXd ChargerState::right_populations() const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n_right);
    for (Index n = 0; n < n_right; ++n) {
        for (Index m = 0; m < n_left; ++m) p(n) += joint(m, m, n, n).real();
    }
    return p;
}

ChargerState ChargerState::product(const DensityMatrix& left, const DensityMatrix& right) {
    return {DensityMatrix(hilbert::kron(left.rho, right.rho)), left.dim(), right.dim()};
}

double raw_energy_sum_k(const ChargerState& charger, const QubitPopulations& pq) {
    double p_l_00 = 0.0, p_r_00 = 0.0;
    for (Index n = 0; n < charger.n_right; ++n) p_l_00 += charger.joint(0, 0, n, n).real();
    for (Index m = 0; m < charger.n_left; ++m) p_r_00 += charger.joint(m, m, 0, 0).real();
    return pq.p_g * (1.0 - p_l_00) - pq.p_e * (1.0 - p_r_00);
}

Eigen::MatrixXd raw_energy_table(const ChargerState& charger, const QubitPopulations& pq) {
    const Index nl = charger.n_left;
    const Index nr = charger.n_right;
    // Rows m = 1 .. nl, columns n = 0 .. nr-1; out-of-range joints are zero.
    Eigen::MatrixXd s(nl, nr);
    for (Index r = 0; r < nl; ++r) {
        const Index m = r + 1;
        for (Index n = 0; n < nr; ++n) {
            const double gain = (m < nl) ? pq.p_g * charger.joint(m, m, n, n).real() : 0.0;
            const double loss =
                (n + 1 < nr) ? pq.p_e * charger.joint(m - 1, m - 1, n + 1, n + 1).real() : 0.0;
            s(r, n) = gain - loss;
        }
    }
    return s;
}

double predicted_delta_u(const Eigen::MatrixXd& s_table, double tau, const EffectiveParams& p) {
    double sum = 0.0;
    for (Index r = 0; r < s_table.rows(); ++r) {
        for (Index c = 0; c < s_table.cols(); ++c) {
            const double s = s_table(r, c);
            if (s == 0.0) continue;
            const double det = effective::doublet_detuning(r + 1, c, p);
            const double omega = effective::doublet_rabi(r + 1, c, p);
            const double ratio = det / omega;
            const double sh = std::sin(0.5 * omega * tau);
            sum += s * (1.0 - ratio * ratio) * sh * sh;
        }
    }
    return 2.0 * sum;
}

namespace {

// Golden-section maximization of f on [lo, hi] to relative tolerance rel_tol.
template <typename F>
double golden_max(F&& f, double lo, double hi, double rel_tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > rel_tol * std::max(1.0, std::abs(b))) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

double optimal_collision_tau(const ChargerState& charger, const QubitPopulations& pq,
                             const EffectiveParams& p, const ChainConfig& cfg) {
    const Eigen::MatrixXd s = raw_energy_table(charger, pq);
    const double s_scale = s.cwiseAbs().maxCoeff();
    if (s_scale <= 0.0) return 0.0;

    // Slowest Rabi frequency among the doublets that actually carry weight.
    double omega_min = 0.0;
    for (Index r = 0; r < s.rows(); ++r) {
        for (Index c = 0; c < s.cols(); ++c) {
            if (std::abs(s(r, c)) < std::max(1e-14, 1e-9 * s_scale)) continue;
            const double omega = effective::doublet_rabi(r + 1, c, p);
            if (omega_min == 0.0 || omega < omega_min) omega_min = omega;
        }
    }
    if (omega_min == 0.0) return 0.0;

    const double span = 2.0 * std::numbers::pi / omega_min;
    const int npts = std::max(2, cfg.tau_grid_points);
    double best_tau = 0.0, best_val = 0.0;
    for (int i = 0; i <= npts; ++i) {
        const double tau = span * i / npts;
        const double val = predicted_delta_u(s, tau, p);
        if (val > best_val) {
            best_val = val;
            best_tau = tau;
        }
    }
    if (best_val <= 0.0) return 0.0;
    const double step = span / npts;
    return golden_max([&](double tau) { return predicted_delta_u(s, tau, p); },
                      std::max(0.0, best_tau - step), std::min(span, best_tau + step),
                      cfg.tau_rel_tol * best_tau);
}

std::optional<std::pair<int, int>> select_MN(const ChargerState& charger,
                                             const QubitPopulations& pq, double chi,
                                             ChiRegime regime, const ChainConfig& cfg) {
    if (chi <= 0.0) throw std::invalid_argument("select_MN: chi must be > 0");
    if (regime == ChiRegime::unit) {
        // The drive is removed; only signal termination on a drained charger.
        const auto p = EffectiveParams::from_ratio(chi, 1.0, 0, -1);
        const double tau = optimal_collision_tau(charger, pq, p, cfg);
        const double gain = predicted_delta_u(raw_energy_table(charger, pq), tau, p);
        if (gain <= cfg.drain_epsilon) return std::nullopt;
        return std::make_pair(0, -1);
    }

    const Eigen::VectorXd p_left = charger.left_populations();
    const Eigen::VectorXd p_right = charger.right_populations();

    auto rounded_mean = [](const Eigen::VectorXd& pop) {
        double mean = 0.0;
        for (Index k = 0; k < pop.size(); ++k) mean += static_cast<double>(k) * pop(k);
        return static_cast<int>(std::lround(mean));
    };

    std::optional<std::pair<int, int>> best;
    double best_gain = 0.0;
    auto consider = [&](int m, int n) {
        const auto p = EffectiveParams::from_ratio(chi, 1.0, m, n);
        const double tau = optimal_collision_tau(charger, pq, p, cfg);
        const double gain = predicted_delta_u(raw_energy_table(charger, pq), tau, p);
        const bool better =
            gain > best_gain + 1e-15 ||
            (gain > best_gain - 1e-15 && best &&
             std::abs(m) + std::abs(n) < std::abs(best->first) + std::abs(best->second));
        if (better) {
            best_gain = gain;
            best = std::make_pair(m, n);
        }
    };

    if (regime == ChiRegime::small) {
        const int n_pin = rounded_mean(p_right);
        bool any = false;
        for (Index m = 1; m < charger.n_left; ++m) {
            if (p_left(m) < cfg.population_floor) continue;
            any = true;
            consider(static_cast<int>(m), n_pin);
        }
        if (!any) return std::nullopt;
    } else {
        const int m_pin = rounded_mean(p_left);
        bool any = false;
        for (Index n = 0; n + 1 < charger.n_right; ++n) {
            if (p_right(n) < cfg.population_floor) continue;
            any = true;
            consider(m_pin, static_cast<int>(n));
        }
        if (!any) return std::nullopt;
    }
    if (!best || best_gain <= cfg.drain_epsilon) return std::nullopt;
    return best;
}

CollisionOutcome collide_one(const ChargerState& charger, const DensityMatrix& qubit,
                             const EffectiveParams& p, const ChainConfig& cfg) {
    if (qubit.dim() != 2) throw std::invalid_argument("collide_one: battery must be two-level");
    const QubitPopulations pq{qubit.rho(0, 0).real(), qubit.rho(1, 1).real()};

    CollisionOutcome out;
    out.record.drive_M = p.drive_M;
    out.record.drive_N = p.drive_N;
    out.record.raw_energy_sum = raw_energy_sum_k(charger, pq);
    out.record.tau = optimal_collision_tau(charger, pq, p, cfg);

    // Assemble L (x) q (x) R from the L (x) R charger and the fresh battery.
    const ProductSpace space{charger.n_left, 2, charger.n_right};
    Matrix joint = Matrix::Zero(space.dim(), space.dim());
    for (Index m = 0; m < charger.n_left; ++m) {
        for (Index n = 0; n < charger.n_right; ++n) {
            for (Index mp = 0; mp < charger.n_left; ++mp) {
                for (Index np = 0; np < charger.n_right; ++np) {
                    const Complex c = charger.joint(m, mp, n, np);
                    if (c == Complex(0.0, 0.0)) continue;
                    for (Index j = 0; j < 2; ++j) {
                        for (Index jp = 0; jp < 2; ++jp) {
                            const Complex q = qubit.rho(j, jp);
                            if (q == Complex(0.0, 0.0)) continue;
                            joint(space.flat(m, j, n), space.flat(mp, jp, np)) = c * q;
                        }
                    }
                }
            }
        }
    }

    const effective::EffectiveEvolver evolver(space, p);
    const DensityMatrix evolved = evolver.evolve(DensityMatrix(std::move(joint)), out.record.tau);

    const auto rho_q =
        hilbert::partial_trace(evolved, {1}, {charger.n_left, 2, charger.n_right});
    const auto rho_lr =
        hilbert::partial_trace(evolved, {0, 2}, {charger.n_left, 2, charger.n_right});

    out.charger = ChargerState(rho_lr, charger.n_left, charger.n_right);
    out.qubit = rho_q;
    out.record.p_g_final = rho_q.rho(0, 0).real();
    out.record.p_e_final = rho_q.rho(1, 1).real();
    out.record.delta_u =
        observables::qubit_energy(rho_q) - observables::qubit_energy(qubit);
    out.record.mutual_info =
        observables::mutual_information(out.charger.rho, charger.n_left, charger.n_right);
    if (std::abs(out.record.delta_u) > 2.0 + 1e-9) {
        throw std::runtime_error("collide_one: energy gain outside [-2, 2]");
    }
    return out;
}

ChainResult run_chain(int k_collisions, const ChargerState& initial_charger,
                      const DensityMatrix& qubit_template, const EffectiveParams& p,
                      ChiRegime regime, const ChainConfig& cfg) {
    if (k_collisions < 1) throw std::invalid_argument("run_chain: K must be >= 1");
    ChainResult result;
    result.final_charger = initial_charger;
    const QubitPopulations pq{qubit_template.rho(0, 0).real(), qubit_template.rho(1, 1).real()};

    for (int k = 1; k <= k_collisions; ++k) {
        const auto mn = select_MN(result.final_charger, pq, p.chi, regime, cfg);
        if (!mn) {
            result.terminated_early = true;
            break;
        }
        EffectiveParams pk = p;
        pk.drive_M = mn->first;
        pk.drive_N = mn->second;
        auto outcome = collide_one(result.final_charger, qubit_template, pk, cfg);
        outcome.record.k = k;
        result.records.push_back(outcome.record);
        result.final_qubits.push_back(std::move(outcome.qubit));
        result.final_charger = std::move(outcome.charger);
    }

    // Truncation audit: the top two Fock levels of each marginal must stay
    // essentially empty, otherwise the run is flagged.
    const Eigen::VectorXd pl = result.final_charger.left_populations();
    const Eigen::VectorXd pr = result.final_charger.right_populations();
    const double top_mass = pl(pl.size() - 1) + pl(pl.size() - 2) + pr(pr.size() - 1) +
                            pr(pr.size() - 2);
    result.truncation_ok = top_mass < cfg.tail_audit_tol;
    return result;
}

} // namespace qbc::collisions
