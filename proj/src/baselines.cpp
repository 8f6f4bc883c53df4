// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace thz360 {

void WmmseConfig::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("WmmseConfig: max_iterations must be >= 1");
    if (tolerance <= 0.0 || dual_tolerance <= 0.0)
        throw std::invalid_argument("WmmseConfig: tolerances must be positive");
}

namespace {

// Stacked-beam workspace: beams live in C^{n_aps * n_tx} with per-user
// support restricted to the believed AP sets.
struct Workspace {
    std::size_t n_users, n_aps, n_tx, n_rx, dim;
    std::vector<arma::cx_mat> h;                 // per user: n_rx x dim, receive-masked
    std::vector<std::vector<arma::uword>> supp;  // per user: allowed stacked indices
    double noise, p_max;
};

Workspace build_workspace(const std::vector<std::vector<ChannelMatrix>>& channels,
                          const std::vector<std::set<std::size_t>>& nb_sets,
                          const PhyConfig& phy) {
    Workspace ws;
    ws.n_users = channels.size();
    ws.n_aps = channels.front().size();
    ws.n_tx = phy.n_tx;
    ws.n_rx = phy.n_rx;
    ws.dim = ws.n_aps * ws.n_tx;
    ws.noise = phy.noise_watt();
    ws.p_max = phy.p_max_watt();
    for (std::size_t u = 0; u < ws.n_users; ++u) {
        arma::cx_mat h(ws.n_rx, ws.dim, arma::fill::zeros);
        std::vector<arma::uword> supp;
        for (std::size_t a = 0; a < ws.n_aps; ++a) {
            if (!nb_sets.at(u).count(a)) continue;
            h.cols(a * ws.n_tx, (a + 1) * ws.n_tx - 1) = channels[u][a].entries.t();
            for (std::size_t k = 0; k < ws.n_tx; ++k)
                supp.push_back(static_cast<arma::uword>(a * ws.n_tx + k));
        }
        ws.h.push_back(std::move(h));
        ws.supp.push_back(std::move(supp));
    }
    return ws;
}

double ap_power(const Workspace& ws, const std::vector<arma::cx_vec>& v, std::size_t a) {
    double p = 0.0;
    for (const auto& vu : v) {
        const arma::cx_vec blk =
            vu.subvec(static_cast<arma::uword>(a * ws.n_tx),
                      static_cast<arma::uword>((a + 1) * ws.n_tx - 1));
        p += std::real(arma::cdot(blk, blk));
    }
    return p;
}

// beams for the quadratic subproblem at fixed duals: per user, solve the
// support-restricted system (A + diag(mu)) v = xi * hhat
std::vector<arma::cx_vec> beams_at_duals(const Workspace& ws, const arma::cx_mat& a_mat,
                                         const std::vector<arma::cx_vec>& hhat,
                                         const std::vector<double>& xi,
                                         const std::vector<double>& mu, double ridge) {
    arma::vec mu_diag(ws.dim);
    for (std::size_t a = 0; a < ws.n_aps; ++a)
        for (std::size_t k = 0; k < ws.n_tx; ++k)
            mu_diag(static_cast<arma::uword>(a * ws.n_tx + k)) = mu[a] + ridge;

    std::vector<arma::cx_vec> v(ws.n_users, arma::cx_vec(ws.dim, arma::fill::zeros));
    for (std::size_t u = 0; u < ws.n_users; ++u) {
        const auto& supp = ws.supp[u];
        if (supp.empty()) continue;
        const arma::uvec idx(const_cast<arma::uword*>(supp.data()), supp.size(), false);
        arma::cx_mat sys = a_mat.submat(idx, idx);
        sys.diag() += arma::conv_to<arma::cx_vec>::from(mu_diag.elem(idx));
        const arma::cx_vec rhs = xi[u] * hhat[u].elem(idx);
        const arma::cx_vec sol = arma::solve(sys, rhs, arma::solve_opts::likely_sympd);
        for (arma::uword i = 0; i < idx.n_elem; ++i) v[u](idx(i)) = sol(i);
    }
    return v;
}

double model_weighted_rate(const Workspace& ws, const std::vector<arma::cx_vec>& v,
                           const std::vector<double>& weights, double bandwidth) {
    double total = 0.0;
    for (std::size_t u = 0; u < ws.n_users; ++u) {
        const arma::cx_vec d = ws.h[u] * v[u];
        arma::cx_mat gamma(ws.n_rx, ws.n_rx, arma::fill::eye);
        gamma *= ws.noise;
        for (std::size_t w = 0; w < ws.n_users; ++w) {
            if (w == u) continue;
            const arma::cx_vec di = ws.h[u] * v[w];
            gamma += di * di.t();
        }
        const arma::cx_vec sol = arma::solve(gamma, d, arma::solve_opts::likely_sympd);
        const double sinr = std::max(0.0, std::real(arma::cdot(d, sol)));
        total += weights[u] * bandwidth * std::log2(1.0 + sinr);
    }
    return total;
}

}  // namespace

WmmseResult wmmse_beamforming(const std::vector<std::vector<ChannelMatrix>>& channels,
                              const std::vector<std::set<std::size_t>>& nb_sets,
                              const WmmseConfig& cfg, const PhyConfig& phy) {
    cfg.validate();
    if (channels.empty()) throw std::invalid_argument("wmmse_beamforming: no users");
    Workspace ws = build_workspace(channels, nb_sets, phy);
    std::vector<double> weights = cfg.rate_weights;
    if (weights.empty()) weights.assign(ws.n_users, 1.0);
    if (weights.size() != ws.n_users)
        throw std::invalid_argument("wmmse_beamforming: weight count mismatch");

    // matched-filter start at an equal per-AP power split
    std::vector<arma::cx_vec> v(ws.n_users, arma::cx_vec(ws.dim, arma::fill::zeros));
    for (std::size_t u = 0; u < ws.n_users; ++u) {
        for (std::size_t a = 0; a < ws.n_aps; ++a) {
            if (!nb_sets[u].count(a)) continue;
            const arma::cx_mat& g = channels[u][a].entries;
            arma::cx_mat umat, vmat;
            arma::vec s;
            arma::svd(umat, s, vmat, g);
            if (s.n_elem == 0 || s(0) <= 0.0) continue;
            arma::cx_vec dir = umat.col(0);
            v[u].subvec(static_cast<arma::uword>(a * ws.n_tx),
                        static_cast<arma::uword>((a + 1) * ws.n_tx - 1)) =
                std::sqrt(ws.p_max / static_cast<double>(ws.n_users)) * dir;
        }
    }
    for (std::size_t a = 0; a < ws.n_aps; ++a) {
        const double p = ap_power(ws, v, a);
        if (p > ws.p_max && p > 0.0)
            for (auto& vu : v)
                vu.subvec(static_cast<arma::uword>(a * ws.n_tx),
                          static_cast<arma::uword>((a + 1) * ws.n_tx - 1)) *=
                    std::sqrt(ws.p_max / p);
    }

    WmmseResult best;
    best.weighted_sum_rate = model_weighted_rate(ws, v, weights, phy.bandwidth);
    double prev_rate = best.weighted_sum_rate;
    std::vector<arma::cx_vec> best_v = v;
    std::vector<double> mu_warm(ws.n_aps, 1e-30);

    WmmseResult res;
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        // 1) MMSE receive filters and MSE weights
        std::vector<arma::cx_vec> w(ws.n_users);
        std::vector<double> xi(ws.n_users);
        for (std::size_t u = 0; u < ws.n_users; ++u) {
            arma::cx_mat cov(ws.n_rx, ws.n_rx, arma::fill::eye);
            cov *= ws.noise;
            for (std::size_t w2 = 0; w2 < ws.n_users; ++w2) {
                const arma::cx_vec d = ws.h[u] * v[w2];
                cov += d * d.t();
            }
            const arma::cx_vec d_own = ws.h[u] * v[u];
            w[u] = arma::solve(cov, d_own, arma::solve_opts::likely_sympd);
            const double mse = std::clamp(1.0 - std::real(arma::cdot(w[u], d_own)), 1e-12, 1.0);
            xi[u] = weights[u] / mse;
        }

        // 2) transmit beams under per-AP budgets
        std::vector<arma::cx_vec> hhat(ws.n_users);
        arma::cx_mat a_mat(ws.dim, ws.dim, arma::fill::zeros);
        for (std::size_t u = 0; u < ws.n_users; ++u) {
            hhat[u] = ws.h[u].t() * w[u];
            a_mat += xi[u] * (hhat[u] * hhat[u].t());
        }

        // keep the quadratic system well conditioned; the perturbation is
        // far below the monotonicity slack
        const double ridge =
            1e-12 * std::abs(arma::trace(a_mat)) / static_cast<double>(ws.dim);

        // per-AP duals by damped multiplicative iteration, warm-started
        // from the previous outer iteration; an inactive constraint's
        // dual decays to zero. Simultaneous updates avoid the oscillation
        // a coordinate-wise reset causes on strongly coupled budgets.
        const double tol = cfg.dual_tolerance * ws.p_max;
        std::vector<double> mu = mu_warm;
        std::vector<arma::cx_vec> v_new;
        for (int it2 = 0; it2 < 400; ++it2) {
            v_new = beams_at_duals(ws, a_mat, hhat, xi, mu, ridge);
            bool settled = true;
            for (std::size_t a = 0; a < ws.n_aps; ++a) {
                const double p = ap_power(ws, v_new, a);
                if (p > ws.p_max + tol) settled = false;
                if (mu[a] > 1e-30 && p < ws.p_max - tol) settled = false;
                const double ratio = p / ws.p_max;
                mu[a] = std::max(1e-30, mu[a] * std::clamp(ratio, 0.25, 4.0));
                if (mu[a] == 1e-30 && p > ws.p_max) mu[a] = ridge + 1e-12;
            }
            if (settled) break;
        }
        mu_warm = mu;
        // hard feasibility, then the descent safeguard: a block update
        // that fails to improve the surrogate at fixed receivers and
        // weights is discarded, which keeps the iteration monotone
        for (std::size_t a = 0; a < ws.n_aps; ++a) {
            const double p = ap_power(ws, v_new, a);
            if (p > ws.p_max && p > 0.0)
                for (auto& vu : v_new)
                    vu.subvec(static_cast<arma::uword>(a * ws.n_tx),
                              static_cast<arma::uword>((a + 1) * ws.n_tx - 1)) *=
                        std::sqrt(ws.p_max / p);
        }
        auto surrogate = [&](const std::vector<arma::cx_vec>& beams) {
            double j = 0.0;
            for (std::size_t u = 0; u < ws.n_users; ++u) {
                const arma::cx_double own = arma::cdot(w[u], ws.h[u] * beams[u]);
                double mse = std::norm(1.0 - own);
                for (std::size_t o = 0; o < ws.n_users; ++o) {
                    if (o == u) continue;
                    mse += std::norm(arma::cdot(w[u], ws.h[u] * beams[o]));
                }
                mse += ws.noise * std::real(arma::cdot(w[u], w[u]));
                j += xi[u] * mse;
            }
            return j;
        };
        if (surrogate(v_new) <= surrogate(v)) v = v_new;

        const double rate = model_weighted_rate(ws, v, weights, phy.bandwidth);
        res.rate_trace.push_back(rate);
        res.iterations = iter;
        if (rate >= best.weighted_sum_rate) {
            best.weighted_sum_rate = rate;
            best_v = v;
        }
        if (std::abs(rate - prev_rate) <= cfg.tolerance * std::max(1.0, std::abs(rate))) {
            res.converged = true;
            break;
        }
        prev_rate = rate;
    }

    res.weighted_sum_rate = best.weighted_sum_rate;
    res.beams = BeamSet::zeros(ws.n_users, ws.n_aps, ws.n_tx);
    for (std::size_t u = 0; u < ws.n_users; ++u)
        for (std::size_t a = 0; a < ws.n_aps; ++a)
            for (std::size_t k = 0; k < ws.n_tx; ++k)
                res.beams.beams[u][a](k) = best_v[u](static_cast<arma::uword>(a * ws.n_tx + k));
    res.beams = project_power(std::move(res.beams), ws.p_max);
    return res;
}

QualitySelection priority_bitrate(const TilePrediction& tiles, double throughput_estimate_bps,
                                  const VideoConfig& vc) {
    if (throughput_estimate_bps < 0.0)
        throw std::invalid_argument("priority_bitrate: negative throughput estimate");
    std::set<std::size_t> viewport;
    for (const auto& vs : tiles.view_sets) viewport.insert(vs.begin(), vs.end());
    std::set<std::size_t> marginal;
    for (std::size_t n : tiles.pred_set)
        if (!viewport.count(n)) marginal.insert(n);

    const double budget = throughput_estimate_bps * vc.chunk_seconds();
    const double dur = vc.chunk_seconds();
    const auto& nu = vc.quality_bitrates;
    const double n_view = static_cast<double>(viewport.size());
    const double n_marg = static_cast<double>(marginal.size());

    // viewport level chosen with the marginal floor reserved
    int level_view = 1;
    for (int m = static_cast<int>(vc.n_levels()); m >= 1; --m) {
        const double cost = (n_view * nu[static_cast<std::size_t>(m - 1)] + n_marg * nu[0]) * dur;
        if (cost <= budget) {
            level_view = m;
            break;
        }
    }
    int level_marg = 1;
    if (!marginal.empty()) {
        const double rem = budget - n_view * nu[static_cast<std::size_t>(level_view - 1)] * dur;
        for (int m = level_view; m >= 1; --m) {
            if (n_marg * nu[static_cast<std::size_t>(m - 1)] * dur <= rem) {
                level_marg = m;
                break;
            }
        }
    }

    QualitySelection sel;
    sel.levels.assign(vc.n_tiles(), 0);
    for (std::size_t n : viewport) sel.levels[n] = level_view;
    for (std::size_t n : marginal) sel.levels[n] = level_marg;
    return sel;
}

double throughput_estimate(double prev_chunk_bits, int prev_td_slots, double slot_seconds) {
    if (prev_td_slots < 1)
        throw std::invalid_argument("throughput_estimate: delay must be >= 1 slot");
    return prev_chunk_bits / (static_cast<double>(prev_td_slots) * slot_seconds);
}

ReactiveBlockage::ReactiveBlockage(int delay_slots) : delay_(delay_slots) {
    if (delay_slots < 0) throw std::invalid_argument("ReactiveBlockage: negative delay");
}

void ReactiveBlockage::reset() { history_.clear(); }

void ReactiveBlockage::observe(std::vector<std::set<std::size_t>> actual) {
    history_.push_back(std::move(actual));
}

const std::vector<std::set<std::size_t>>& ReactiveBlockage::believed() const {
    if (history_.empty()) throw std::logic_error("ReactiveBlockage: nothing observed yet");
    const long idx = std::max(0L, static_cast<long>(history_.size()) - 1 - delay_);
    return history_[static_cast<std::size_t>(idx)];
}

}  // namespace thz360
