#include "anosov/conjugacy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "anosov/parallel.hpp"

namespace anosov {

namespace {

// Index lookup with the window-boundary conventions: cyclic when the window
// spans whole periods of a repeating presentation, clamped at frozen tails.
long resolve_index(const Window& w, long period, long i) {
    if (w.contains(i)) return i;
    if (period > 0) return w.lo + floor_mod(i - w.lo, period);
    return i < w.lo ? w.lo : w.hi;
}

// Smallest index range containing one representative of every distinct map
// of the presentation.
Window family_index_range(const FamilySpec& F) {
    switch (F.presentation()) {
        case FamilySpec::Presentation::Constant:
            return Window{0, 0};
        case FamilySpec::Presentation::Periodic:
            return Window{0, F.period() - 1};
        case FamilySpec::Presentation::Word:
            return Window{F.core_start() - static_cast<long>(F.left_tail().size()),
                          F.core_end() + static_cast<long>(F.right_tail().size())};
    }
    return Window{0, 0};
}

Window joint_index_range(const FamilySpec& F, const FamilySpec& G) {
    const Window a = family_index_range(F);
    const Window b = family_index_range(G);
    return Window{std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

// Sampled sup of ||Df_j|| over map indices j in `maps` (closed form for
// linear maps, where the Jacobian is constant).
double sup_jacobian_norm(const FamilySpec& F, const Window& maps, int grid_n) {
    double sup = 0.0;
    for (long j = maps.lo; j <= maps.hi; ++j) {
        const TorusMap& f = F.map_at(j);
        if (f.linear()) {
            sup = std::max(sup, f.jacobian(TorusPoint{0.0, 0.0}).op_norm());
            continue;
        }
        for (int jy = 0; jy < grid_n; ++jy)
            for (int jx = 0; jx < grid_n; ++jx) {
                const TorusPoint p{static_cast<double>(jx) / grid_n,
                                   static_cast<double>(jy) / grid_n};
                sup = std::max(sup, f.jacobian(p).op_norm());
            }
    }
    return sup;
}

// Lifted chart difference f~(x + v) - f~(x) of the composition chain: the
// perturbations are periodic, so the lift is evaluated without any wrapped
// representative choice (exact even when the difference exceeds 1/2).
Vec2 lifted_delta(const TorusMap& f, const TorusPoint& x, const Vec2& v) {
    Vec2 d = v;
    TorusPoint cur = x;
    for (const TorusDiffeo& step : f.steps()) {
        Vec2 nd = step.linear_mat() * d;
        if (!step.pert().empty()) {
            const TorusPoint shifted{cur.x + d.x, cur.y + d.y};
            nd += step.pert().value(shifted) - step.pert().value(cur);
        }
        d = nd;
        cur = step.apply(cur);
    }
    return d;
}

// Chart representation of f^{-1} around f(q): returns d with
// f~(q + d) = f~(q) + v, by Newton on the lifted difference.
Vec2 lifted_delta_inverse(const TorusMap& f, const TorusPoint& q, const Vec2& v) {
    Vec2 d = f.jacobian(q).inverse() * v;
    for (int it = 0; it < 60; ++it) {
        const Vec2 r = lifted_delta(f, q, d) - v;
        if (r.norm() < 1e-13) return d;
        const TorusPoint shifted{q.x + d.x, q.y + d.y};
        d -= f.jacobian(shifted).inverse() * r;
    }
    throw std::runtime_error(
        "lifted_delta_inverse: Newton iteration failed to converge");
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

constexpr double kTwoSqrtTwo = 2.8284271247461903;

}  // namespace

long DisplacementFamily::resolve(long i) const {
    return resolve_index(sections.window(), period, i);
}

TorusPoint DisplacementFamily::map_point(long i, const TorusPoint& p) const {
    return exp_map(p, sections.at(resolve(i)).value(p));
}

void validate_conjugacy_config(const ConjugacyConfig& cfg) {
    if (!(cfg.lambda > 0.0 && cfg.lambda < 1.0))
        throw std::invalid_argument("conjugacy config: lambda must lie in (0, 1)");
    if (!(cfg.eta >= cfg.lambda && cfg.eta < 1.0))
        throw std::invalid_argument("conjugacy config: eta must lie in [lambda, 1)");
    const double zeta_cap =
        std::min({1.0 - cfg.lambda, 1.0 - cfg.eta, 0.25});
    if (!(cfg.zeta > 0.0 && cfg.zeta < zeta_cap))
        throw std::invalid_argument(
            "conjugacy config: zeta must lie in (0, min{1 - lambda, 1 - eta, 1/4})");
    if (!(cfg.r_tilde > 0.0))
        throw std::invalid_argument("conjugacy config: r_tilde must be positive");
    if (!(cfg.r_prime > 0.0 && cfg.r_prime <= cfg.r_tilde / 3.0))
        throw std::invalid_argument(
            "conjugacy config: r_prime must lie in (0, r_tilde/3]");
    if (!(cfg.xi > 0.0 && cfg.xi <= 1.0))
        throw std::invalid_argument("conjugacy config: xi must lie in (0, 1]");
    const double xi_cap =
        std::min(cfg.xi, cfg.r_prime * (1.0 - cfg.lambda - cfg.zeta));
    if (!(cfg.xi_prime > 0.0 && cfg.xi_prime < xi_cap))
        throw std::invalid_argument(
            "conjugacy config: xi_prime must lie in "
            "(0, min{xi, r_prime (1 - lambda - zeta)})");
    if (cfg.grid_n < 2)
        throw std::invalid_argument("conjugacy config: grid_n must be at least 2");
    if (cfg.max_iter < 1)
        throw std::invalid_argument("conjugacy config: max_iter must be at least 1");
    if (!(cfg.tol > 0.0))
        throw std::invalid_argument("conjugacy config: tol must be positive");
}

SectionFamily g_operator(const FamilySpec& F, const FamilySpec& G,
                         const SectionFamily& Z, const ConjugacyConfig& cfg) {
    validate_conjugacy_config(cfg);
    if (Z.norm_inf() > cfg.r_prime * (1.0 + 1e-12))
        throw std::invalid_argument(
            "g_operator: sections exceed the admissible radius r_prime");
    const long P = F.period();
    if (P > 0 && Z.window().length() % P != 0)
        throw std::invalid_argument(
            "g_operator: the section window must span whole periods of the family");
    const long wrap = (P > 0) ? Z.window().length() : 0;

    const Window map_range{Z.window().lo - 1, Z.window().hi - 1};
    const double S_sup = sup_jacobian_norm(F, map_range, 16);
    const double kappa = (cfg.xi_prime + S_sup) * cfg.r_prime + cfg.xi_prime;

    std::vector<GridSection> out;
    out.reserve(static_cast<std::size_t>(Z.window().length()));
    for (long i = Z.window().lo; i <= Z.window().hi; ++i) {
        const TorusMap& f = F.map_at(i - 1);
        const TorusMap& g = G.map_at(i - 1);
        const GridSection& zi = Z.at(resolve_index(Z.window(), wrap, i - 1));
        out.emplace_back(i, Z.grid_n(), [&](const TorusPoint& p) {
            const TorusPoint q = f.invert(p);
            return displacement(p, g.apply(exp_map(q, zi.value(q))));
        });
    }
    SectionFamily fam = SectionFamily::assemble(std::move(out));
    if (fam.norm_inf() > kappa)
        throw std::runtime_error(
            "g_operator: output norm " + fmt(fam.norm_inf()) +
            " exceeds the chart bound kappa = (xi' + S) r' + xi' = " + fmt(kappa) +
            " (closeness preconditions violated)");
    fam.with_radius(kappa);
    return fam;
}

double lipschitz_defect(const FamilySpec& F, const FamilySpec& G, double r_prime,
                        int samples, std::uint64_t seed) {
    if (!(r_prime > 0.0))
        throw std::invalid_argument("lipschitz_defect: r_prime must be positive");
    if (samples < 1)
        throw std::invalid_argument("lipschitz_defect: samples must be >= 1");
    const Window idx = joint_index_range(F, G);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double two_pi = 2.0 * std::acos(-1.0);

    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const long j = idx.lo + (s % idx.length());
        const TorusPoint q{U(rng), U(rng)};
        const auto draw_ball = [&]() {
            const double ang = two_pi * U(rng);
            const double rad = r_prime * std::sqrt(U(rng));
            return Vec2{rad * std::cos(ang), rad * std::sin(ang)};
        };
        const Vec2 v = draw_ball();
        const Vec2 w = draw_ball();
        const double sep = (v - w).norm();
        if (sep < 1e-12 * r_prime) continue;
        const Mat2 Df = F.map_at(j).jacobian(q);
        const Vec2 g_diff =
            lifted_delta(G.map_at(j), q, v) - lifted_delta(G.map_at(j), q, w);
        worst = std::max(worst, (Df * v - Df * w - g_diff).norm() / sep);
    }
    return worst;
}

namespace {

// State of one orbit-segment solve: the iteration is evaluated on the exact
// F-orbit of the sample point, with zero sections imposed one slot past each
// end; the zero boundary influences the center by at most (lambda+zeta)^N.
struct SegmentOutcome {
    Vec2 center;
    double residual = 0.0;
    double g_residual = 0.0;
    double max_norm = 0.0;
    int status = 0;  // 0 converged, 1 radius escape, 2 not converged
    std::vector<double> updates;
};

}  // namespace

int conjugacy_segment_depth(const ConjugacyConfig& cfg) {
    validate_conjugacy_config(cfg);
    const double stop_tol = 0.02 * cfg.tol;
    const double scale = std::max(cfg.r_prime, cfg.xi_prime);
    return std::max(
        8, static_cast<int>(std::ceil(std::log(0.5 * stop_tol / scale) /
                                      std::log(cfg.lambda + cfg.zeta))) +
               2);
}

ConjugacyResult solve_conjugacy(const FamilySpec& F, const FamilySpec& G,
                                const SplittingField& S, const ConjugacyConfig& cfg,
                                const SectionFamily* initial) {
    validate_conjugacy_config(cfg);
    const long P = F.period();
    if (G.period() != P)
        throw std::invalid_argument(
            "solve_conjugacy: base and perturbed families must share the "
            "repetition structure (equal periods)");
    if (P > 0 && cfg.window.length() % P != 0)
        throw std::invalid_argument(
            "solve_conjugacy: the window must span whole periods of the family");
    if (initial != nullptr) {
        if (initial->window().lo != cfg.window.lo ||
            initial->window().hi != cfg.window.hi)
            throw std::invalid_argument(
                "solve_conjugacy: initial sections must live on the config window");
        if (initial->norm_inf() > cfg.r_prime)
            throw std::invalid_argument(
                "solve_conjugacy: initial sections exceed the radius r_prime");
    }
    const long wrap = (P > 0) ? cfg.window.length() : 0;

    // Measured premises: uniform closeness (keeps the push-pull images
    // inside the charts), the Lipschitz defect of F - G on the r'-ball,
    // and the forcing ||G(0)||.
    const Window gate_win = joint_index_range(F, G);
    const int gate_grid = std::max(16, std::min(48, cfg.grid_n));
    const double d0 = d_unif(F, G, 0, gate_win, gate_grid);
    if (d0 >= cfg.xi)
        throw PremiseError("solve_conjugacy: families are not uniformly close: "
                           "d_unif(F, G, 0) = " +
                           fmt(d0) + " >= xi = " + fmt(cfg.xi));
    const double defect = lipschitz_defect(F, G, cfg.r_prime, 200);
    if (defect >= cfg.zeta)
        throw PremiseError(
            "solve_conjugacy: contraction premise failed: sampled Lipschitz "
            "defect " +
            fmt(defect) + " >= zeta = " + fmt(cfg.zeta));
    const double q_rate = cfg.lambda + cfg.zeta;
    const double forcing =
        g_operator(F, G, SectionFamily::zero(cfg.window, cfg.grid_n), cfg)
            .norm_inf();
    if (forcing >= cfg.xi_prime)
        throw PremiseError("solve_conjugacy: forcing premise failed: ||G(0)||_inf = " +
                           fmt(forcing) + " >= xi_prime = " + fmt(cfg.xi_prime));

    // Segment depth: zero-boundary influence (lambda+zeta)^N r' must land
    // below the internal stop threshold.
    const double stop_tol = 0.02 * cfg.tol;
    const int depth = conjugacy_segment_depth(cfg);
    if (!S.covers(cfg.window.lo - depth - 1) || !S.covers(cfg.window.hi + depth + 1))
        throw std::invalid_argument(
            "solve_conjugacy: splitting field must cover the window padded by "
            "the segment depth (indices " +
            std::to_string(cfg.window.lo - depth - 1) + ".." +
            std::to_string(cfg.window.hi + depth + 1) + ")");

    const int n = cfg.grid_n;
    const long cells_per_index = static_cast<long>(n) * n;
    const long cells = cfg.window.length() * cells_per_index;
    std::vector<SegmentOutcome> outcomes(static_cast<std::size_t>(cells));

    parallel_for(cells, [&](long cell) {
        const long i = cfg.window.lo + cell / cells_per_index;
        const long node = cell % cells_per_index;
        const int jx = static_cast<int>(node % n);
        const int jy = static_cast<int>(node / n);
        const TorusPoint p0{static_cast<double>(jx) / n, static_cast<double>(jy) / n};

        // Exact orbit p_k for k in [-depth-1, depth+1]; slot t = k + depth + 1.
        const int M = 2 * depth + 3;
        const int off = depth + 1;
        std::vector<TorusPoint> pts(static_cast<std::size_t>(M));
        pts[static_cast<std::size_t>(off)] = p0;
        for (int k = 0; k < depth + 1; ++k)
            pts[static_cast<std::size_t>(off + k + 1)] =
                F.map_at(i + k).apply(pts[static_cast<std::size_t>(off + k)]);
        for (int k = 0; k > -depth - 1; --k)
            pts[static_cast<std::size_t>(off + k - 1)] =
                F.map_at(i + k - 1).invert(pts[static_cast<std::size_t>(off + k)]);

        // Cached frames, frame inverses, Jacobians, and map handles.
        std::vector<Vec2> es(static_cast<std::size_t>(M)), eu(static_cast<std::size_t>(M));
        std::vector<Mat2> fr_inv(static_cast<std::size_t>(M));
        std::vector<Mat2> df(static_cast<std::size_t>(M)), df_inv(static_cast<std::size_t>(M));
        std::vector<const TorusMap*> gm(static_cast<std::size_t>(M), nullptr);
        for (int k = -depth; k <= depth + 1; ++k) {
            const std::size_t t = static_cast<std::size_t>(off + k);
            es[t] = S.stable(i + k, pts[t]);
            eu[t] = S.unstable(i + k, pts[t]);
            fr_inv[t] = Mat2(es[t].x, eu[t].x, es[t].y, eu[t].y).inverse();
            gm[t] = &G.map_at(i + k - 1);
        }
        for (int k = -depth - 1; k <= depth; ++k) {
            const std::size_t t = static_cast<std::size_t>(off + k);
            df[t] = F.map_at(i + k).jacobian(pts[t]);
            if (k >= -depth) df_inv[t] = df[t].inverse();
        }

        // Frame coordinates of sigma on slots k in [-depth, depth].
        std::vector<double> ss(static_cast<std::size_t>(M), 0.0);
        std::vector<double> su(static_cast<std::size_t>(M), 0.0);
        if (initial != nullptr) {
            for (int k = -depth; k <= depth; ++k) {
                const std::size_t t = static_cast<std::size_t>(off + k);
                const Vec2 v = initial->value(resolve_index(cfg.window, wrap, i + k),
                                              pts[t]);
                const Vec2 c = fr_inv[t] * v;
                ss[t] = c.x;
                su[t] = c.y;
            }
        }
        const auto sigma_vec = [&](int k) -> Vec2 {
            if (k < -depth || k > depth) return Vec2{0.0, 0.0};
            const std::size_t t = static_cast<std::size_t>(off + k);
            return es[t] * ss[t] + eu[t] * su[t];
        };

        SegmentOutcome& out = outcomes[static_cast<std::size_t>(cell)];
        std::vector<double> gcs(static_cast<std::size_t>(M), 0.0);
        std::vector<double> gcu(static_cast<std::size_t>(M), 0.0);
        std::vector<Vec2> gv(static_cast<std::size_t>(M));
        bool done = false;
        for (int it = 1; it <= cfg.max_iter && !done; ++it) {
            // (G sigma) on every slot, split into frame coordinates.
            for (int k = -depth; k <= depth + 1; ++k) {
                const std::size_t t = static_cast<std::size_t>(off + k);
                const TorusPoint arg = exp_map(pts[t - 1], sigma_vec(k - 1));
                gv[t] = displacement(pts[t], gm[t]->apply(arg));
                const Vec2 c = fr_inv[t] * gv[t];
                gcs[t] = c.x;
                gcu[t] = c.y;
            }
            // Jacobi update of all slots; zero sections past the ends.
            double update = 0.0;
            for (int k = -depth; k <= depth; ++k) {
                const std::size_t t = static_cast<std::size_t>(off + k);
                const std::size_t tn = t + 1;
                const double su_next = (k + 1 > depth) ? 0.0 : su[tn];
                const double su_here = su[t];
                // Bracket at slot k+1: sigma_u + F(sigma_u) - (G sigma)_u.
                const Vec2 bracket = eu[tn] * (su_next - gcu[tn]) +
                                     (df[t] * eu[t]) * su_here;
                const Vec2 pulled = df_inv[t] * bracket;
                const double nu = (fr_inv[t] * pulled).y;
                const double ns = gcs[t];
                update = std::max(update,
                                  std::max(std::fabs(ns - ss[t]),
                                           std::fabs(nu - su_here)));
                ss[t] = ns;
                su[t] = nu;
            }
            out.updates.push_back(update);
            double norm_now = 0.0;
            for (int k = -depth; k <= depth; ++k)
                norm_now = std::max(norm_now, sigma_vec(k).norm());
            out.max_norm = std::max(out.max_norm, norm_now);
            if (norm_now > cfg.r_prime) {
                out.status = 1;
                return;
            }
            if (update < stop_tol) {
                done = true;
            } else if (it == cfg.max_iter) {
                out.status = 2;
                return;
            }
        }

        out.center = sigma_vec(0);
        // Commutation residual at the center orbit step and the fixed-point
        // residual of the unsplit operator.
        const TorusPoint hx = exp_map(pts[static_cast<std::size_t>(off)], out.center);
        const TorusPoint h_next =
            exp_map(pts[static_cast<std::size_t>(off + 1)], sigma_vec(1));
        out.residual = dist(h_next, G.map_at(i).apply(hx));
        const TorusPoint g_here =
            gm[static_cast<std::size_t>(off)]->apply(
                exp_map(pts[static_cast<std::size_t>(off - 1)], sigma_vec(-1)));
        out.g_residual =
            (displacement(pts[static_cast<std::size_t>(off)], g_here) - out.center)
                .norm();
    });

    // Aggregate across segments: the lockstep product-space iteration has
    // update norm equal to the max of the per-segment updates.
    bool escaped = false;
    bool stalled = false;
    std::size_t longest = 0;
    for (const SegmentOutcome& o : outcomes) {
        if (o.status == 1) escaped = true;
        if (o.status == 2) stalled = true;
        longest = std::max(longest, o.updates.size());
    }
    if (escaped)
        throw PremiseError("solve_conjugacy: an iterate escaped the admissible "
                           "radius r_prime = " +
                           fmt(cfg.r_prime) + " (confinement premise violated)");
    if (stalled)
        throw ConvergenceError(
            "solve_conjugacy: update norm still above tol after max_iter = " +
            std::to_string(cfg.max_iter) + " iterations");

    std::vector<double> agg(longest, 0.0);
    for (const SegmentOutcome& o : outcomes)
        for (std::size_t k = 0; k < o.updates.size(); ++k)
            agg[k] = std::max(agg[k], o.updates[k]);

    std::vector<GridSection> secs;
    secs.reserve(static_cast<std::size_t>(cfg.window.length()));
    for (long i = cfg.window.lo; i <= cfg.window.hi; ++i) {
        std::vector<Vec2> vals(static_cast<std::size_t>(cells_per_index));
        const long base = (i - cfg.window.lo) * cells_per_index;
        for (long nodek = 0; nodek < cells_per_index; ++nodek)
            vals[static_cast<std::size_t>(nodek)] =
                outcomes[static_cast<std::size_t>(base + nodek)].center;
        secs.emplace_back(i, n, std::move(vals));
    }
    SectionFamily fam = SectionFamily::assemble(std::move(secs));
    fam.with_radius(cfg.r_prime);
    ConjugacyResult result{DisplacementFamily{std::move(fam), wrap}};
    result.iterations = static_cast<int>(longest);
    for (std::size_t k = 0; k + 1 < agg.size(); ++k)
        if (agg[k] >= cfg.tol)
            result.contraction_history.push_back(agg[k + 1] / agg[k]);
    result.defect = defect;
    result.forcing = forcing;
    for (const SegmentOutcome& o : outcomes) {
        result.residual = std::max(result.residual, o.residual);
        result.g_fixed_point_residual =
            std::max(result.g_fixed_point_residual, o.g_residual);
        result.max_iterate_norm = std::max(result.max_iterate_norm, o.max_norm);
    }
    return result;
}

double expansivity_bound(int N, double eta, double zeta, double r_tilde) {
    if (N < 0)
        throw std::invalid_argument("expansivity_bound: orbit depth N must be >= 0");
    if (!(eta > 0.0) || !(r_tilde > 0.0) || zeta < 0.0)
        throw std::invalid_argument(
            "expansivity_bound: eta and r_tilde must be positive, zeta >= 0");
    const double thr = 1.0 / eta - zeta;
    if (!(thr > 1.0))
        throw std::domain_error(
            "expansivity_bound: requires eta^{-1} - zeta > 1");
    return kTwoSqrtTwo * std::pow(thr, -static_cast<double>(N)) * r_tilde;
}

ConjugacyReport verify_conjugacy(const DisplacementFamily& H, const FamilySpec& F,
                                 const FamilySpec& G, int grid_n,
                                 const ExpansivityParams& params,
                                 long pair_samples, std::uint64_t seed) {
    if (grid_n < 2)
        throw std::invalid_argument("verify_conjugacy: grid_n must be at least 2");
    const double thr = 1.0 / params.eta - params.zeta;
    if (!(thr > 1.0))
        throw std::domain_error(
            "verify_conjugacy: requires eta^{-1} - zeta > 1");
    const Window& win = H.sections.window();
    ConjugacyReport report;

    // Commutation residual of the stored (interpolated) displacement family.
    const long cells_per_index = static_cast<long>(grid_n) * grid_n;
    report.residual = parallel_max(
        win.length() * cells_per_index, 0.0, [&](long cell) {
            const long i = win.lo + cell / cells_per_index;
            const long node = cell % cells_per_index;
            const TorusPoint x{
                static_cast<double>(node % grid_n) / grid_n,
                static_cast<double>(node / grid_n) / grid_n};
            const TorusPoint hx = H.map_point(i, x);
            const TorusPoint fx = F.map_at(i).apply(x);
            return dist(H.map_point(i + 1, fx), G.map_at(i).apply(hx));
        });

    // Sampled injectivity through expansivity: a pair x != y whose image
    // orbits under G stay r_tilde-close (after the 2 tau displacement
    // allowance) through the depth its own separation demands would force
    // d(x, y) below the expansivity bound — a contradiction, so it is
    // flagged as a collapse candidate.
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> lattice(0, 255);
    const double tau = H.radius();
    for (long t = 0; t < pair_samples; ++t) {
        const long i = win.lo + (t % win.length());
        const TorusPoint x{lattice(rng) / 256.0, lattice(rng) / 256.0};
        const TorusPoint y{lattice(rng) / 256.0, lattice(rng) / 256.0};
        const double sep = dist(x, y);
        if (sep <= 0.0) continue;
        int depth_needed = 0;
        if (sep < kTwoSqrtTwo * params.r_tilde)
            depth_needed = static_cast<int>(std::ceil(
                std::log(kTwoSqrtTwo * params.r_tilde / sep) / std::log(thr)));
        depth_needed = std::min(depth_needed, 64);
        ++report.pairs_checked;

        TorusPoint ax = H.map_point(i, x);
        TorusPoint ay = H.map_point(i, y);
        bool separated = dist(ax, ay) + 2.0 * tau >= params.r_tilde;
        TorusPoint fx = ax, fy = ay, bx = ax, by = ay;
        for (int nstep = 1; nstep <= depth_needed && !separated; ++nstep) {
            fx = G.map_at(i + nstep - 1).apply(fx);
            fy = G.map_at(i + nstep - 1).apply(fy);
            if (dist(fx, fy) + 2.0 * tau >= params.r_tilde) separated = true;
        }
        for (int nstep = 1; nstep <= depth_needed && !separated; ++nstep) {
            bx = G.map_at(i - nstep).invert(bx);
            by = G.map_at(i - nstep).invert(by);
            if (dist(bx, by) + 2.0 * tau >= params.r_tilde) separated = true;
        }
        if (!separated) ++report.flagged_pairs;
    }
    report.injectivity_ok = (report.flagged_pairs == 0);

    // Equicontinuity modulus table: depth from inverting the expansivity
    // bound at each alpha target, beta from the sampled Lipschitz constant
    // of the orbit maps up to that depth at threshold r_tilde / 3.
    const double alphas[3] = {1e-1, 1e-2, 1e-3};
    int max_depth = 0;
    std::vector<int> depths;
    for (double alpha : alphas) {
        int d = 0;
        if (alpha < kTwoSqrtTwo * params.r_tilde)
            d = static_cast<int>(std::ceil(
                std::log(kTwoSqrtTwo * params.r_tilde / alpha) / std::log(thr)));
        depths.push_back(d);
        max_depth = std::max(max_depth, d);
    }
    std::vector<double> orbit_lip(static_cast<std::size_t>(max_depth) + 1, 1.0);
    const int probe = 16;
    for (long i = win.lo; i <= win.hi; ++i)
        for (int jy = 0; jy < probe; ++jy)
            for (int jx = 0; jx < probe; ++jx) {
                TorusPoint xf{static_cast<double>(jx) / probe,
                              static_cast<double>(jy) / probe};
                TorusPoint xb = xf;
                Mat2 Jf = Mat2::identity();
                Mat2 Jb = Mat2::identity();
                for (int nstep = 1; nstep <= max_depth; ++nstep) {
                    Jf = F.map_at(i + nstep - 1).jacobian(xf) * Jf;
                    xf = F.map_at(i + nstep - 1).apply(xf);
                    xb = F.map_at(i - nstep).invert(xb);
                    Jb = Jb * F.map_at(i - nstep).jacobian(xb).inverse();
                    const std::size_t s = static_cast<std::size_t>(nstep);
                    orbit_lip[s] = std::max(orbit_lip[s],
                                            std::max(Jf.op_norm(), Jb.op_norm()));
                }
            }
    for (std::size_t s = 1; s < orbit_lip.size(); ++s)
        orbit_lip[s] = std::max(orbit_lip[s], orbit_lip[s - 1]);
    for (std::size_t a = 0; a < 3; ++a) {
        const int d = depths[a];
        const double L = orbit_lip[static_cast<std::size_t>(d)];
        report.modulus_table.push_back(
            ModulusEntry{(params.r_tilde / 3.0) / L, alphas[a], d});
    }

    // Sampled invertibility of h_i by fixed-point iteration on x = q - Z(x).
    std::uniform_real_distribution<double> U(0.0, 1.0);
    report.inverse_ok = true;
    for (long i = win.lo; i <= win.hi; ++i) {
        const GridSection& zi = H.sections.at(i);
        for (int t = 0; t < 16; ++t) {
            const TorusPoint target{U(rng), U(rng)};
            TorusPoint x = target;
            for (int it = 0; it < 80; ++it)
                x = exp_map(target, -zi.value(x));
            const double res = dist(H.map_point(i, x), target);
            report.inverse_residual = std::max(report.inverse_residual, res);
            if (!(res < 1e-8)) report.inverse_ok = false;
        }
    }
    return report;
}

Certificate cone_step_inequality_check(const FamilySpec& G, const SplittingField& S,
                                       const ExpansivityParams& params, int samples,
                                       std::uint64_t seed) {
    if (samples < 1)
        throw std::invalid_argument(
            "cone_step_inequality_check: samples must be >= 1");
    const double thr = 1.0 / params.eta - params.zeta;
    if (!(thr > 0.0))
        throw std::invalid_argument(
            "cone_step_inequality_check: eta^{-1} - zeta must be positive");
    if (S.window().length() < 2)
        throw std::invalid_argument(
            "cone_step_inequality_check: splitting window must span two indices");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double rt = params.r_tilde;
    const long span = S.window().length() - 1;

    Certificate cert;
    cert.kind = "cone-step-inequality";
    cert.window_lo = S.window().lo;
    cert.window_hi = S.window().hi;
    cert.grid_n = 0;
    cert.tolerances["margin_floor"] = 1e-10;

    long fwd = 0, bwd = 0, violations = 0;
    double f_lower = 1e300, f_upper = 1e300, b_lower = 1e300, b_upper = 1e300;
    Witness worst;
    worst.label = "tightest_sample";
    double worst_margin = 1e300;

    for (int s = 0; s < samples; ++s) {
        const long i = S.window().lo + (s % span);
        const TorusPoint p{U(rng), U(rng)};
        const double vs = rt * (2.0 * U(rng) - 1.0);
        const double vu = rt * (2.0 * U(rng) - 1.0);
        const double ws = rt * (2.0 * U(rng) - 1.0);
        const double wu = rt * (2.0 * U(rng) - 1.0);
        const double ds = std::fabs(vs - ws);
        const double du = std::fabs(vu - wu);
        const TorusMap& g = G.map_at(i);

        const auto record = [&](double m1, double m2, int branch) {
            const double m = std::min(m1, m2);
            if (m < worst_margin) {
                worst_margin = m;
                worst.scalars.clear();
                worst.scalars["branch_backward"] = branch;
                worst.scalars["index"] = static_cast<double>(i);
                worst.scalars["px"] = p.x;
                worst.scalars["py"] = p.y;
                worst.scalars["margin_lower"] = m1;
                worst.scalars["margin_upper"] = m2;
            }
            if (m < -1e-10) ++violations;
        };

        if (ds <= du && du > 1e-15) {
            const Vec2 es = S.stable(i, p);
            const Vec2 eu = S.unstable(i, p);
            const Vec2 v = es * vs + eu * vu;
            const Vec2 w = es * ws + eu * wu;
            const TorusPoint gp = g.apply(p);
            const Vec2 iv = lifted_delta(g, p, v);
            const Vec2 iw = lifted_delta(g, p, w);
            const Vec2 cv = S.components(i + 1, gp, iv);
            const Vec2 cw = S.components(i + 1, gp, iw);
            const double mid = thr * du;
            record(mid - std::fabs(cv.x - cw.x), std::fabs(cv.y - cw.y) - mid, 0);
            ++fwd;
            f_lower = std::min(f_lower, mid - std::fabs(cv.x - cw.x));
            f_upper = std::min(f_upper, std::fabs(cv.y - cw.y) - mid);
        }
        if (du <= ds && ds > 1e-15) {
            const Vec2 es = S.stable(i + 1, p);
            const Vec2 eu = S.unstable(i + 1, p);
            const Vec2 v = es * vs + eu * vu;
            const Vec2 w = es * ws + eu * wu;
            const TorusPoint gq = g.invert(p);
            const Vec2 iv = lifted_delta_inverse(g, gq, v);
            const Vec2 iw = lifted_delta_inverse(g, gq, w);
            const Vec2 cv = S.components(i, gq, iv);
            const Vec2 cw = S.components(i, gq, iw);
            const double mid = thr * ds;
            record(mid - std::fabs(cv.y - cw.y), std::fabs(cv.x - cw.x) - mid, 1);
            ++bwd;
            b_lower = std::min(b_lower, mid - std::fabs(cv.y - cw.y));
            b_upper = std::min(b_upper, std::fabs(cv.x - cw.x) - mid);
        }
    }

    cert.constants["eta"] = params.eta;
    cert.constants["zeta"] = params.zeta;
    cert.constants["threshold"] = thr;
    cert.constants["r_tilde"] = rt;
    cert.constants["samples"] = static_cast<double>(samples);
    cert.constants["forward_checked"] = static_cast<double>(fwd);
    cert.constants["backward_checked"] = static_cast<double>(bwd);
    if (fwd > 0) {
        cert.constants["forward_slack_stable"] = f_lower;
        cert.constants["forward_slack_unstable"] = f_upper;
    }
    if (bwd > 0) {
        cert.constants["backward_slack_unstable"] = b_lower;
        cert.constants["backward_slack_stable"] = b_upper;
    }
    if (worst_margin < 1e300) {
        if (worst_margin < -1e-10) worst.label = "violating_sample";
        cert.witnesses.push_back(worst);
    }
    if (violations > 0) {
        cert.status = CertStatus::Falsified;
        cert.notes.push_back("a sampled pair violated the one-step cone chain");
    } else if (fwd > 0 && bwd > 0) {
        cert.status = CertStatus::Certified;
        cert.notes.push_back(
            "one-step cone chains held on all sampled pairs (sampled check, "
            "not a proof)");
    } else {
        cert.status = CertStatus::Inconclusive;
        cert.notes.push_back("a branch received no premise-satisfying samples");
    }
    return cert;
}

}  // namespace anosov
