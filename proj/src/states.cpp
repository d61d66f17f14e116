#include "qbc/states.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qbc::states {

namespace {

double log_factorial(Index n) { return std::lgamma(static_cast<double>(n) + 1.0); }

} // namespace

ThermalSpec::ThermalSpec(double t, double w, Index c) : tbar(t), omega_bar(w), cutoff(c) {
    if (tbar < 0.0) throw std::invalid_argument("ThermalSpec: temperature must be >= 0");
    if (omega_bar <= 0.0) throw std::invalid_argument("ThermalSpec: frequency must be > 0");
    if (cutoff < 2) throw std::invalid_argument("ThermalSpec: cutoff must be >= 2");
    // Geometric tail mass beyond the truncation: q^cutoff.
    const double tail = std::pow(boltzmann(), static_cast<double>(cutoff));
    if (tail >= 1e-8) {
        throw std::invalid_argument("ThermalSpec: Gibbs tail beyond cutoff is " +
                                    std::to_string(tail) + " (>= 1e-8); raise the cutoff");
    }
}

double ThermalSpec::boltzmann() const {
    if (tbar == 0.0) return 0.0;
    return std::exp(-omega_bar / tbar);
}

PhotonAddition::PhotonAddition(Index n, const ThermalSpec& spec) : n_added(n) {
    if (n < 0) throw std::invalid_argument("PhotonAddition: N must be >= 0");
    z0 = spec.z0();
    z_n = z0;
    for (Index k = 1; k <= n; ++k) z_n *= static_cast<double>(k) * z0;
    const double closed = std::exp(log_factorial(n)) * std::pow(z0, static_cast<double>(n) + 1.0);
    if (std::abs(z_n - closed) > 1e-12 * closed) {
        throw std::runtime_error("PhotonAddition: recursion and closed form disagree");
    }
}

DensityMatrix gibbs_oscillator(const ThermalSpec& spec) {
    Matrix rho = Matrix::Zero(spec.cutoff, spec.cutoff);
    const double q = spec.boltzmann();
    double norm = 0.0;
    for (Index k = 0; k < spec.cutoff; ++k) {
        const double w = std::pow(q, static_cast<double>(k));
        rho(k, k) = w;
        norm += w;
    }
    rho /= norm;
    return DensityMatrix(std::move(rho));
}

DensityMatrix npats(Index n_added, const ThermalSpec& spec) {
    if (n_added < 0) throw std::invalid_argument("npats: N must be >= 0");
    if (spec.cutoff <= n_added) {
        throw std::invalid_argument("npats: cutoff must exceed the number of added photons");
    }
    const double q = spec.boltzmann();
    const double log_q = (q > 0.0) ? std::log(q) : 0.0;
    Matrix rho = Matrix::Zero(spec.cutoff, spec.cutoff);
    double norm = 0.0;
    // p_k ~ C(k, N) q^(k-N); log-space keeps the binomials finite at large cutoffs.
    for (Index k = n_added; k < spec.cutoff; ++k) {
        double w;
        if (q == 0.0) {
            w = (k == n_added) ? 1.0 : 0.0;
        } else {
            const double log_binom =
                log_factorial(k) - log_factorial(n_added) - log_factorial(k - n_added);
            w = std::exp(log_binom + static_cast<double>(k - n_added) * log_q);
        }
        rho(k, k) = w;
        norm += w;
    }
    // Untruncated normalization is Z_0^(N+1); anything missing is tail mass.
    const double full_norm = std::pow(spec.z0(), static_cast<double>(n_added) + 1.0);
    if (1.0 - norm / full_norm >= 1e-8) {
        throw std::invalid_argument("npats: truncated tail mass exceeds 1e-8; raise the cutoff");
    }
    rho /= norm;
    return DensityMatrix(std::move(rho));
}

Matrix displacement_matrix(Complex alpha, Index cutoff) {
    if (cutoff < 2) throw std::invalid_argument("displacement_matrix: cutoff must be >= 2");
    const double r = std::abs(alpha);
    if (r == 0.0) return Matrix::Identity(cutoff, cutoff);
    const double phi = std::arg(alpha);
    const double log_r = std::log(r);
    Matrix d(cutoff, cutoff);
    for (Index n = 0; n < cutoff; ++n) {
        for (Index m = 0; m < cutoff; ++m) {
            // D_nm = e^{-r^2/2} e^{i phi (n-m)} sqrt(m! n!) *
            //        sum_i (-1)^i r^{n-m+2i} / (i! (n-m+i)! (m-i)!)
            double sum = 0.0;
            const double log_pref = -0.5 * r * r + 0.5 * (log_factorial(m) + log_factorial(n));
            for (Index i = std::max<Index>(0, m - n); i <= m; ++i) {
                const double log_term = static_cast<double>(n - m + 2 * i) * log_r -
                                        log_factorial(i) - log_factorial(n - m + i) -
                                        log_factorial(m - i);
                const double term = std::exp(log_pref + log_term);
                sum += (i % 2 == 0) ? term : -term;
            }
            d(n, m) = std::polar(sum, phi * static_cast<double>(n - m));
        }
    }
    // Columns that should be well inside the truncation must stay normalized.
    for (Index m = 0; m <= cutoff / 2; ++m) {
        const double col_norm = d.col(m).squaredNorm();
        if (std::abs(col_norm - 1.0) > 1e-6) {
            throw std::invalid_argument(
                "displacement_matrix: truncation insufficient for |alpha| = " +
                std::to_string(r) + " at cutoff " + std::to_string(cutoff));
        }
    }
    return d;
}

DensityMatrix dts(Complex alpha, const ThermalSpec& spec, double* renorm_out) {
    const auto gibbs = gibbs_oscillator(spec);
    if (std::abs(alpha) == 0.0) {
        if (renorm_out) *renorm_out = 1.0;
        return gibbs;
    }
    const Matrix d = displacement_matrix(alpha, spec.cutoff);
    Matrix rho = d * gibbs.rho * d.adjoint();
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-6) {
        throw std::invalid_argument("dts: truncation loses " + std::to_string(1.0 - tr) +
                                    " of the trace; raise the cutoff");
    }
    if (renorm_out) *renorm_out = tr;
    rho /= tr;
    rho = 0.5 * (rho + rho.adjoint().eval());   // scrub roundoff asymmetry
    return DensityMatrix(std::move(rho));
}

DensityMatrix truncate_state(const DensityMatrix& rho, Index new_dim) {
    if (new_dim < 2 || new_dim > rho.dim()) {
        throw std::invalid_argument("truncate_state: target dimension out of range");
    }
    Matrix cropped = rho.rho.topLeftCorner(new_dim, new_dim);
    const double tr = cropped.trace().real();
    if (1.0 - tr >= 1e-8) {
        char msg[96];
        std::snprintf(msg, sizeof(msg), "truncate_state: dropped mass %.3g exceeds 1e-8",
                      1.0 - tr);
        throw std::invalid_argument(msg);
    }
    cropped /= tr;
    return DensityMatrix(std::move(cropped));
}

DensityMatrix dts_prepared(Complex alpha, const ThermalSpec& spec) {
    const Index prep = std::max<Index>(spec.cutoff, 40);
    if (prep == spec.cutoff) return dts(alpha, spec);
    const ThermalSpec wide(spec.tbar, spec.omega_bar, prep);
    return truncate_state(dts(alpha, wide), spec.cutoff);
}

double alpha_opt(Index n_added, const ThermalSpec& spec) {
    if (n_added < 0) throw std::invalid_argument("alpha_opt: N must be >= 0");
    return std::sqrt(static_cast<double>(n_added) * spec.z0());
}

DensityMatrix inefficient_spats(double eta, const ThermalSpec& spec) {
    if (eta < 0.0 || eta > 1.0) {
        throw std::invalid_argument("inefficient_spats: eta must lie in [0, 1]");
    }
    const auto spats = npats(1, spec);
    const auto gibbs = gibbs_oscillator(spec);
    return DensityMatrix(eta * spats.rho + (1.0 - eta) * gibbs.rho);
}

DensityMatrix qutrit_thermal(double tbar, double omega_g, double omega_e, double omega_i) {
    if (!(omega_g < omega_e && omega_e < omega_i)) {
        throw std::invalid_argument("qutrit_thermal: level ordering must be w_g < w_e < w_i");
    }
    if (tbar < 0.0) throw std::invalid_argument("qutrit_thermal: temperature must be >= 0");
    Matrix rho = Matrix::Zero(3, 3);
    if (tbar == 0.0) {
        rho(0, 0) = 1.0;
    } else {
        const double wg = std::exp(-(omega_g - omega_g) / tbar);
        const double we = std::exp(-(omega_e - omega_g) / tbar);
        const double wi = std::exp(-(omega_i - omega_g) / tbar);
        const double norm = wg + we + wi;
        rho(0, 0) = wg / norm;
        rho(1, 1) = we / norm;
        rho(2, 2) = wi / norm;
    }
    return DensityMatrix(std::move(rho));
}

DensityMatrix qubit_thermal(double tbar, double omega_g, double omega_e) {
    if (!(omega_g < omega_e)) {
        throw std::invalid_argument("qubit_thermal: requires w_g < w_e");
    }
    Matrix rho = Matrix::Zero(2, 2);
    if (tbar == 0.0) {
        rho(0, 0) = 1.0;
    } else {
        const double we = std::exp(-(omega_e - omega_g) / tbar);
        rho(0, 0) = 1.0 / (1.0 + we);
        rho(1, 1) = we / (1.0 + we);
    }
    return DensityMatrix(std::move(rho));
}

} // namespace qbc::states
