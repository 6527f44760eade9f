#include "anosov/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace anosov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
constexpr double kNoiseFloor = 1e-13;
constexpr double kSaturation = 0.25;

// Least-squares line y = a + s x; returns {intercept a, slope s}.
std::pair<double, double> fit_line(const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sx += xs[k];
        sy += ys[k];
        sxx += xs[k] * xs[k];
        sxy += xs[k] * ys[k];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    return {intercept, slope};
}

std::vector<double> chebyshev_nodes(double delta, int samples) {
    std::vector<double> t(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        double v = -delta * std::cos(kPi * k / (samples - 1));
        if (std::fabs(v) < 1e-15 * delta) v = 0.0;
        t[static_cast<std::size_t>(k)] = v;
    }
    return t;
}

Mat2 frame_of(const Vec2& e_side, const Vec2& e_comp) {
    return Mat2{e_side.x, e_comp.x, e_side.y, e_comp.y};
}

}  // namespace

CubicSpline::CubicSpline(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    const std::size_t n = xs_.size();
    if (n < 2 || ys_.size() != n)
        throw std::invalid_argument("CubicSpline: need >= 2 matching nodes");
    for (std::size_t k = 0; k + 1 < n; ++k)
        if (!(xs_[k] < xs_[k + 1]))
            throw std::invalid_argument("CubicSpline: nodes must be strictly increasing");

    m_.assign(n, 0.0);
    if (n == 2) return;  // natural spline through two points is the chord

    // Thomas solve of the natural-boundary moment system.
    std::vector<double> diag(n - 2), upper(n - 2), rhs(n - 2);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double h0 = xs_[k] - xs_[k - 1];
        const double h1 = xs_[k + 1] - xs_[k];
        diag[k - 1] = 2.0 * (h0 + h1);
        upper[k - 1] = h1;
        rhs[k - 1] = 6.0 * ((ys_[k + 1] - ys_[k]) / h1 - (ys_[k] - ys_[k - 1]) / h0);
    }
    for (std::size_t k = 1; k < diag.size(); ++k) {
        const double lower = xs_[k + 1] - xs_[k];  // h_k, the subdiagonal entry
        const double w = lower / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    for (std::size_t k = diag.size(); k-- > 0;) {
        const double above = k + 1 < diag.size() ? upper[k] * m_[k + 2] : 0.0;
        m_[k + 1] = (rhs[k] - above) / diag[k];
    }
}

std::size_t CubicSpline::interval(double x) const {
    // Clamp to the boundary cubics outside the node range.
    if (x <= xs_.front()) return 0;
    if (x >= xs_.back()) return xs_.size() - 2;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    return static_cast<std::size_t>(it - xs_.begin()) - 1;
}

double CubicSpline::value(double x) const {
    const std::size_t k = interval(x);
    const double h = xs_[k + 1] - xs_[k];
    const double a = xs_[k + 1] - x;
    const double b = x - xs_[k];
    return m_[k] * a * a * a / (6.0 * h) + m_[k + 1] * b * b * b / (6.0 * h) +
           (ys_[k] / h - m_[k] * h / 6.0) * a + (ys_[k + 1] / h - m_[k + 1] * h / 6.0) * b;
}

double CubicSpline::derivative(double x) const {
    const std::size_t k = interval(x);
    const double h = xs_[k + 1] - xs_[k];
    const double a = xs_[k + 1] - x;
    const double b = x - xs_[k];
    return -m_[k] * a * a / (2.0 * h) + m_[k + 1] * b * b / (2.0 * h) -
           (ys_[k] / h - m_[k] * h / 6.0) + (ys_[k + 1] / h - m_[k + 1] * h / 6.0);
}

double LocalManifold::g_at(double t) const {
    return CubicSpline(nodes, values).value(t);
}

TorusPoint LocalManifold::point_at(double t) const {
    const CubicSpline spline(nodes, values);
    return exp_map(base, e_side * t + e_comp * spline.value(t));
}

double LocalManifold::distance_to(const TorusPoint& q) const {
    const CubicSpline spline(nodes, values);
    const auto point = [&](double t) {
        return exp_map(base, e_side * t + e_comp * spline.value(t));
    };
    const int coarse = 8 * static_cast<int>(nodes.size());
    double best_t = nodes.front();
    double best = dist(q, point(best_t));
    for (int k = 1; k <= coarse; ++k) {
        const double t =
            nodes.front() + (nodes.back() - nodes.front()) * k / coarse;
        const double d = dist(q, point(t));
        if (d < best) {
            best = d;
            best_t = t;
        }
    }
    const double h = (nodes.back() - nodes.front()) / coarse;
    double lo = std::max(nodes.front(), best_t - h);
    double hi = std::min(nodes.back(), best_t + h);
    for (int it = 0; it < 80; ++it) {
        const double t1 = lo + (hi - lo) / 3.0;
        const double t2 = hi - (hi - lo) / 3.0;
        if (dist(q, point(t1)) < dist(q, point(t2)))
            hi = t2;
        else
            lo = t1;
    }
    return std::min(best, dist(q, point(0.5 * (lo + hi))));
}

LocalManifold compute_local_manifold(const FamilySpec& G, const SplittingField& S,
                                     const TorusPoint& p, long i, Subbundle side,
                                     double delta, int iters, int samples,
                                     double alpha) {
    if (!(delta > 0.0) || delta > 0.25)
        throw std::invalid_argument(
            "compute_local_manifold: delta must lie in (0, 0.25]");
    if (iters < 1)
        throw std::invalid_argument("compute_local_manifold: iters must be >= 1");
    if (samples < 5 || samples % 2 == 0)
        throw std::invalid_argument(
            "compute_local_manifold: samples must be odd and >= 5");
    if (!(alpha > 0.0) || alpha >= 1.0)
        throw std::invalid_argument("compute_local_manifold: alpha must lie in (0, 1)");
    const bool unstable = side == Subbundle::Unstable;
    const long far_index = unstable ? i - iters : i + iters;
    if (!S.covers(std::min(i, far_index)) || !S.covers(std::max(i, far_index)))
        throw std::invalid_argument(
            "compute_local_manifold: splitting must cover the orbit indices");

    // Orbit from the far end toward the base point. orbit[k] sits at index
    // i -/+ (iters - k); orbit[iters] is exactly p.
    std::vector<TorusPoint> orbit(static_cast<std::size_t>(iters) + 1);
    orbit[static_cast<std::size_t>(iters)] = p;
    for (int k = iters; k-- > 0;) {
        const long idx_here = unstable ? i - iters + k : i + iters - k;
        if (unstable)
            orbit[static_cast<std::size_t>(k)] =
                G.map_at(idx_here).invert(orbit[static_cast<std::size_t>(k) + 1]);
        else
            orbit[static_cast<std::size_t>(k)] =
                G.map_at(idx_here - 1).apply(orbit[static_cast<std::size_t>(k) + 1]);
    }
    const auto index_at = [&](int k) {
        return unstable ? i - iters + k : i + iters - k;
    };
    const auto side_dir = [&](long j, const TorusPoint& x) {
        return unstable ? S.unstable(j, x) : S.stable(j, x);
    };
    const auto comp_dir = [&](long j, const TorusPoint& x) {
        return unstable ? S.stable(j, x) : S.unstable(j, x);
    };

    LocalManifold M;
    M.index = i;
    M.base = p;
    M.side = side;
    M.delta = delta;
    M.nodes = chebyshev_nodes(delta, samples);

    // One transform stage: map the graph held at orbit[k] to a graph at
    // orbit[k+1], re-expressed over the side subspace and resampled.
    const auto stage = [&](int k, std::vector<double>& values) {
        const long j = index_at(k);
        const TorusPoint& center = orbit[static_cast<std::size_t>(k)];
        const TorusPoint& next_center = orbit[static_cast<std::size_t>(k) + 1];
        const Vec2 es = side_dir(j, center);
        const Vec2 ec = comp_dir(j, center);
        const long j_next = index_at(k + 1);
        const Mat2 frame_next_inv =
            frame_of(side_dir(j_next, next_center), comp_dir(j_next, next_center))
                .inverse();

        std::vector<double> u(static_cast<std::size_t>(samples));
        std::vector<double> v(static_cast<std::size_t>(samples));
        for (int s = 0; s < samples; ++s) {
            const double t = M.nodes[static_cast<std::size_t>(s)];
            const TorusPoint P =
                exp_map(center, es * t + ec * values[static_cast<std::size_t>(s)]);
            const TorusPoint Q =
                unstable ? G.map_at(j).apply(P) : G.map_at(j - 1).invert(P);
            const Vec2 w = frame_next_inv * displacement(next_center, Q);
            u[static_cast<std::size_t>(s)] = w.x;
            v[static_cast<std::size_t>(s)] = w.y;
        }
        if (u.back() < u.front()) {
            std::reverse(u.begin(), u.end());
            std::reverse(v.begin(), v.end());
        }
        for (int s = 0; s + 1 < samples; ++s)
            if (!(u[static_cast<std::size_t>(s)] < u[static_cast<std::size_t>(s) + 1]))
                throw std::runtime_error(
                    "compute_local_manifold: image folds over the side subspace "
                    "(delta too large)");
        if (u.front() > -delta || u.back() < delta)
            throw std::runtime_error(
                "compute_local_manifold: transformed graph does not cover the "
                "radius (delta too large)");

        const CubicSpline regraph(u, v);
        for (int s = 0; s < samples; ++s)
            values[static_cast<std::size_t>(s)] =
                regraph.value(M.nodes[static_cast<std::size_t>(s)]);

        double lip = 0.0;
        for (int s = 0; s + 1 < samples; ++s)
            lip = std::max(lip,
                           std::fabs(values[static_cast<std::size_t>(s) + 1] -
                                     values[static_cast<std::size_t>(s)]) /
                               (M.nodes[static_cast<std::size_t>(s) + 1] -
                                M.nodes[static_cast<std::size_t>(s)]));
        if (lip > alpha)
            throw std::runtime_error(
                "compute_local_manifold: graph leaves the admissible cone "
                "(delta too large)");
        M.lipschitz = lip;
    };

    // Transform-iterate sweep: the depth-d iterate is the flat graph at the
    // depth-d orbit point pushed through d stages to the base chart, so
    // successive iterates are comparable there and their sup-differences
    // form the contraction sequence of the transform.
    std::vector<double> prev(static_cast<std::size_t>(samples), 0.0);
    for (int d = 1; d <= iters; ++d) {
        std::vector<double> cur(static_cast<std::size_t>(samples), 0.0);
        for (int k = iters - d; k < iters; ++k) stage(k, cur);
        double diff = 0.0;
        for (int s = 0; s < samples; ++s)
            diff = std::max(diff, std::fabs(cur[static_cast<std::size_t>(s)] -
                                            prev[static_cast<std::size_t>(s)]));
        M.step_diffs.push_back(diff);
        prev = std::move(cur);
    }
    M.values = std::move(prev);

    M.e_side = side_dir(i, p);
    M.e_comp = comp_dir(i, p);
    const CubicSpline final_spline(M.nodes, M.values);
    M.tangency = std::fabs(final_spline.derivative(0.0));

    // Contraction fit: least squares on log-distances along the manifold
    // orbits (backward for unstable, forward for stable).
    const int n_fit = 10;
    double worst_slope = -kInf;
    double worst_intercept = -kInf;
    for (int s = 0; s < samples; ++s) {
        const double t = M.nodes[static_cast<std::size_t>(s)];
        if (std::fabs(t) < 1e-3 * delta) continue;
        TorusPoint xq = M.point_at(t);
        TorusPoint xp = p;
        std::vector<double> ns, logs;
        double d0 = dist(xq, xp);
        if (d0 <= kNoiseFloor) continue;
        ns.push_back(0.0);
        logs.push_back(std::log(d0));
        for (int n = 1; n <= n_fit; ++n) {
            const long j = unstable ? i - n : i + n - 1;
            if (unstable) {
                xq = G.map_at(j).invert(xq);
                xp = G.map_at(j).invert(xp);
            } else {
                xq = G.map_at(j).apply(xq);
                xp = G.map_at(j).apply(xp);
            }
            const double d = dist(xq, xp);
            if (d <= kNoiseFloor || d >= kSaturation) break;
            ns.push_back(static_cast<double>(n));
            logs.push_back(std::log(d));
        }
        if (ns.size() < 3) continue;
        const auto [intercept, slope] = fit_line(ns, logs);
        worst_slope = std::max(worst_slope, slope);
        worst_intercept = std::max(worst_intercept, intercept - logs.front());
    }
    if (std::isfinite(worst_slope)) {
        M.zeta_fitted = std::exp(worst_slope);
        M.k_fitted = std::max(1.0, std::exp(worst_intercept));
        M.zeta = M.zeta_fitted * 1.05 < 1.0 ? M.zeta_fitted * 1.05
                                            : 0.5 * (1.0 + M.zeta_fitted);
        M.K = M.k_fitted * 1.05;
    }
    return M;
}

Certificate contraction_rate_check(const LocalManifold& M, const FamilySpec& G,
                                   int n_max, int samples) {
    if (n_max < 0)
        throw std::invalid_argument("contraction_rate_check: n_max must be >= 0");
    if (samples < 2)
        throw std::invalid_argument("contraction_rate_check: samples must be >= 2");
    if (!(M.zeta > 0.0) || M.zeta >= 1.0)
        throw std::invalid_argument(
            "contraction_rate_check: manifold has no usable contraction rate");

    const bool unstable = M.side == Subbundle::Unstable;
    double max_ratio = 0.0;
    Witness worst;
    worst.label = "largest_ratio_sample";
    for (int s = 0; s < samples; ++s) {
        const double t = -M.delta + 2.0 * M.delta * s / (samples - 1);
        if (std::fabs(t) < 1e-6 * M.delta) continue;
        TorusPoint xq = M.point_at(t);
        TorusPoint xp = M.base;
        const double d0 = dist(xq, xp);
        if (d0 <= kNoiseFloor) continue;
        double bound = M.K * d0;
        for (int n = 0; n <= n_max; ++n) {
            if (n > 0) {
                const long j = unstable ? M.index - n : M.index + n - 1;
                if (unstable) {
                    xq = G.map_at(j).invert(xq);
                    xp = G.map_at(j).invert(xp);
                } else {
                    xq = G.map_at(j).apply(xq);
                    xp = G.map_at(j).apply(xp);
                }
                bound *= M.zeta;
            }
            const double ratio = dist(xq, xp) / bound;
            if (ratio > max_ratio) {
                max_ratio = ratio;
                worst.scalars = {{"parameter", t},
                                 {"steps", static_cast<double>(n)},
                                 {"distance", dist(xq, xp)},
                                 {"bound", bound},
                                 {"value", ratio}};
            }
        }
    }

    Certificate cert;
    cert.kind = "manifold-contraction";
    cert.constants = {{"max_ratio", max_ratio},
                      {"K", M.K},
                      {"zeta", M.zeta},
                      {"n_max", static_cast<double>(n_max)},
                      {"samples", static_cast<double>(samples)}};
    cert.window_lo = M.index;
    cert.window_hi = M.index;
    cert.grid_n = static_cast<int>(M.nodes.size());
    if (!worst.scalars.empty()) cert.witnesses.push_back(worst);
    cert.status = max_ratio <= 1.0 + 1e-9 ? CertStatus::Certified
                                          : CertStatus::Falsified;
    cert.notes.push_back(
        "orbit contraction verified on sampled manifold points");
    return cert;
}

ConvergenceExponents convergence_exponents(const FamilySpec& F, const TorusPoint& p,
                                           const TorusPoint& q, long i, int n_max) {
    if (n_max < 1)
        throw std::invalid_argument("convergence_exponents: n_max must be >= 1");
    const double d0 = dist(p, q);
    if (d0 >= kSaturation)
        throw std::domain_error(
            "convergence_exponents: initial separation saturates the metric");

    ConvergenceExponents out;
    if (d0 <= 0.0) {
        out.theta = -kInf;
        out.delta = -kInf;
        out.n_used = 0;
        return out;
    }

    const auto run = [&](bool forward) {
        std::vector<double> ns{0.0};
        std::vector<double> logs{std::log(d0)};
        TorusPoint xp = p, xq = q;
        for (int n = 1; n <= n_max; ++n) {
            const long j = forward ? i + n - 1 : i - n;
            if (forward) {
                xp = F.map_at(j).apply(xp);
                xq = F.map_at(j).apply(xq);
            } else {
                xp = F.map_at(j).invert(xp);
                xq = F.map_at(j).invert(xq);
            }
            const double d = dist(xp, xq);
            if (d <= kNoiseFloor || d >= kSaturation) break;
            ns.push_back(static_cast<double>(n));
            logs.push_back(std::log(d));
        }
        if (ns.size() < 2) return std::pair<double, int>{kInf, 0};
        return std::pair<double, int>{fit_line(ns, logs).second,
                                      static_cast<int>(ns.back())};
    };
    const auto [theta, n_fwd] = run(true);
    const auto [delta, n_bwd] = run(false);
    out.theta = theta;
    out.delta = delta;
    out.n_used = std::min(n_fwd, n_bwd);
    return out;
}

bool limit_point_closure_check(const FamilySpec& G, const SplittingField& S,
                               long index, Subbundle side,
                               const std::vector<TorusPoint>& p_seq,
                               const std::vector<TorusPoint>& q_seq, double delta,
                               double tol, int iters, int samples) {
    if (p_seq.empty() || q_seq.empty())
        throw std::invalid_argument(
            "limit_point_closure_check: sequences must be nonempty");
    const LocalManifold M = compute_local_manifold(G, S, p_seq.back(), index, side,
                                                   delta, iters, samples);
    return M.distance_to(q_seq.back()) <= tol;
}

double manifold_smallness_bound(double lambda_tilde, double alpha, double gamma) {
    if (!(lambda_tilde > 0.0) || lambda_tilde >= 1.0)
        throw std::invalid_argument(
            "manifold_smallness_bound: lambda_tilde must lie in (0, 1)");
    const double alpha_cap = (1.0 / lambda_tilde - 1.0) / 2.0;
    if (!(alpha > 0.0) || alpha > alpha_cap)
        throw std::invalid_argument(
            "manifold_smallness_bound: alpha must lie in (0, (1/lambda_tilde - 1)/2]");
    if (!(gamma > lambda_tilde * lambda_tilde) || gamma >= 1.0)
        throw std::invalid_argument(
            "manifold_smallness_bound: gamma must lie in (lambda_tilde^2, 1)");
    const double inv = 1.0 / lambda_tilde;
    const double first = (inv - lambda_tilde) * alpha / ((1.0 + alpha) * (1.0 + alpha));
    const double second =
        (gamma * inv - lambda_tilde) / ((1.0 + alpha) * (1.0 + gamma));
    const double third = (1.0 - lambda_tilde) / (1.0 + lambda_tilde);
    return std::min(first, std::min(second, third));
}

}  // namespace anosov
