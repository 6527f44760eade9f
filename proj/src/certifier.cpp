#include "anosov/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "anosov/diffeo.hpp"
#include "anosov/parallel.hpp"
#include "anosov/torus.hpp"

namespace anosov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCertMargin = 1e-6;

// Ball offsets used to probe the derivative away from the chart centre:
// the centre plus eight directions at radius r. Linear maps have constant
// derivatives, so callers skip everything but the centre for them.
std::vector<Vec2> chart_offsets(double r) {
    const double d = r / std::sqrt(2.0);
    return {Vec2{0.0, 0.0}, Vec2{r, 0.0},  Vec2{-r, 0.0}, Vec2{0.0, r},
            Vec2{0.0, -r},  Vec2{d, d},    Vec2{d, -d},   Vec2{-d, d},
            Vec2{-d, -d}};
}

void push_candidate(std::vector<double>& out, double t, double a) {
    if (std::isfinite(t) && t >= -a && t <= a) out.push_back(t);
}

// max(|u1 + t v1|, |u2 + t v2|) is piecewise linear in t; its minimum over
// [-a, a] is attained at an interval endpoint, a zero of either component,
// or a crossing |first| = |second|. Enumerating those makes the minimum
// exact for affine ray images.
std::vector<double> minimax_candidates(double u1, double v1, double u2,
                                       double v2, double a) {
    std::vector<double> ts{-a, 0.0, a};
    if (v1 != 0.0) push_candidate(ts, -u1 / v1, a);
    if (v2 != 0.0) push_candidate(ts, -u2 / v2, a);
    if (v1 != v2) push_candidate(ts, (u2 - u1) / (v1 - v2), a);
    if (v1 != -v2) push_candidate(ts, -(u1 + u2) / (v1 + v2), a);
    return ts;
}

struct RayContext {
    long index = 0;
    TorusPoint p;
    Vec2 z;
    int cone = 0;  // 0 = unstable cone forward, 1 = stable cone backward
};

struct ConeTracker {
    double worst_inclusion = 0.0;  // max over rays of |inner| / (alpha |outer|)
    Witness incl_witness;
    double min_expansion = kInf;           // min over both cone families
    double min_expansion_unstable = kInf;  // forward unstable-cone branch
    double min_expansion_stable = kInf;    // backward stable-cone branch
    Witness exp_witness;
    bool nappe_ok = true;
    Witness nappe_witness;
};

Witness ray_witness(const char* label, const RayContext& ctx, double t,
                    double value) {
    Witness w;
    w.label = label;
    w.scalars = {{"index", static_cast<double>(ctx.index)},
                 {"point_x", ctx.p.x},
                 {"point_y", ctx.p.y},
                 {"offset_x", ctx.z.x},
                 {"offset_y", ctx.z.y},
                 {"ray_t", t},
                 {"cone", static_cast<double>(ctx.cone)},
                 {"value", value}};
    return w;
}

// Scans one cone in frame coordinates. cone == 0: unstable rays (t, 1),
// inner component = stable output; cone == 1: stable rays (1, t), inner
// component = unstable output. C already maps frame coordinates to frame
// coordinates at the image, so the cone conditions are axis-aligned.
void scan_cone(const Mat2& C, const RayContext& ctx, double alpha, int ray_n,
               ConeTracker& tr) {
    double in_u, in_v, out_u, out_v;
    if (ctx.cone == 0) {
        in_u = C.b;
        in_v = C.a;
        out_u = C.d;
        out_v = C.c;
    } else {
        in_u = C.c;
        in_v = C.d;
        out_u = C.a;
        out_v = C.b;
    }
    const auto inner = [&](double t) { return in_u + in_v * t; };
    const auto outer = [&](double t) { return out_u + out_v * t; };

    // Strict inclusion: |inner| < alpha |outer| with the image rays staying
    // in one nappe. The ratio (affine / affine) is monotone between poles,
    // so its maximum over the boundary-ray interval sits at an endpoint.
    const double o_lo = outer(-alpha), o_hi = outer(alpha);
    if (o_lo == 0.0 || o_hi == 0.0 || (o_lo > 0.0) != (o_hi > 0.0)) {
        if (tr.nappe_ok) {
            tr.nappe_ok = false;
            tr.nappe_witness = ray_witness("nappe_flip", ctx, alpha, o_hi);
        }
    }
    std::vector<double> incl_ts{-alpha, 0.0, alpha};
    std::vector<double> exp_ts = minimax_candidates(in_u, in_v, out_u, out_v, alpha);
    if (ray_n > 3) {
        for (int k = 0; k < ray_n; ++k) {
            const double t = -alpha + 2.0 * alpha * k / (ray_n - 1);
            incl_ts.push_back(t);
            exp_ts.push_back(t);
        }
    }
    for (double t : incl_ts) {
        const double num = std::fabs(inner(t));
        const double den = alpha * std::fabs(outer(t));
        const double ratio = den > 0.0 ? num / den : kInf;
        if (ratio > tr.worst_inclusion) {
            tr.worst_inclusion = ratio;
            tr.incl_witness = ray_witness("tightest_inclusion", ctx, t, ratio);
        }
    }
    for (double t : exp_ts) {
        // ||(t,1)||_star = max(|t|, 1) = 1 on the cone (alpha < 1), so the
        // expansion ratio is just the star norm of the image ray.
        const double value = std::max(std::fabs(inner(t)), std::fabs(outer(t)));
        double& branch = ctx.cone == 0 ? tr.min_expansion_unstable
                                       : tr.min_expansion_stable;
        branch = std::min(branch, value);
        if (value < tr.min_expansion) {
            tr.min_expansion = value;
            tr.exp_witness = ray_witness("minimal_expansion", ctx, t, value);
        }
    }
}

// Unstable direction at (i, p) with the given depth: walk backward along
// the exact orbit, then push the seed direction forward, renormalising.
Vec2 deep_unstable(const FamilySpec& G, const SplittingField& seed, long i,
                   const TorusPoint& p, int depth) {
    std::vector<TorusPoint> orbit(static_cast<std::size_t>(depth) + 1);
    orbit[0] = p;
    for (int t = 1; t <= depth; ++t)
        orbit[static_cast<std::size_t>(t)] =
            G.map_at(i - t).invert(orbit[static_cast<std::size_t>(t - 1)]);
    Vec2 v = seed.unstable(i - depth, orbit[static_cast<std::size_t>(depth)]);
    for (int t = depth; t >= 1; --t) {
        v = G.map_at(i - t).jacobian(orbit[static_cast<std::size_t>(t)]) * v;
        v = v * (1.0 / v.norm());
    }
    return v;
}

// Stable mirror: walk forward, pull the seed direction back with inverse
// derivatives along the orbit.
Vec2 deep_stable(const FamilySpec& G, const SplittingField& seed, long i,
                 const TorusPoint& p, int depth) {
    std::vector<TorusPoint> orbit(static_cast<std::size_t>(depth) + 1);
    orbit[0] = p;
    for (int t = 1; t <= depth; ++t)
        orbit[static_cast<std::size_t>(t)] =
            G.map_at(i + t - 1).apply(orbit[static_cast<std::size_t>(t - 1)]);
    Vec2 v = seed.stable(i + depth, orbit[static_cast<std::size_t>(depth)]);
    for (int t = depth; t >= 1; --t) {
        v = G.map_at(i + t - 1).jacobian(orbit[static_cast<std::size_t>(t - 1)])
                .inverse() *
            v;
        v = v * (1.0 / v.norm());
    }
    return v;
}

double frame_inf_norm(const Mat2& m) {
    return std::max(std::fabs(m.a) + std::fabs(m.b),
                    std::fabs(m.c) + std::fabs(m.d));
}

}  // namespace

double sigma_A_eval(double alpha, double lambda_tilde) {
    if (!(lambda_tilde > 0.0 && lambda_tilde < 1.0))
        throw std::invalid_argument(
            "sigma_A_eval: lambda_tilde must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("sigma_A_eval: alpha must lie in (0, 1)");
    const double lt_inv = 1.0 / lambda_tilde;
    const double one_plus = 1.0 + alpha;
    const double first = (lt_inv - lambda_tilde) * alpha / (2.0 * one_plus * one_plus);
    const double second = (lt_inv * (1.0 - alpha) - one_plus * alpha) / (2.0 * one_plus);
    return std::min(first, second);
}

ConeParams ConeParams::make(double alpha, double lambda_tilde, double r_tilde) {
    if (!(lambda_tilde > 0.0 && lambda_tilde < 1.0))
        throw std::invalid_argument("ConeParams: lambda_tilde must lie in (0, 1)");
    const double alpha_max = (1.0 - lambda_tilde) / (1.0 + lambda_tilde);
    if (!(alpha > 0.0 && alpha < alpha_max))
        throw std::invalid_argument(
            "ConeParams: alpha must lie in (0, (1 - lambda_tilde)/(1 + "
            "lambda_tilde))");
    if (!(r_tilde > 0.0 && r_tilde <= 0.25))
        throw std::invalid_argument(
            "ConeParams: r_tilde must lie in (0, 1/4] (chart validity)");
    ConeParams p;
    p.alpha = alpha;
    p.lambda_tilde = lambda_tilde;
    p.r_tilde = r_tilde;
    p.sigma_A = sigma_A_eval(alpha, lambda_tilde);
    return p;
}

Certificate anosov_direct_check(const FamilySpec& F, const SplittingField& S,
                                Window window, int n_max, int grid_n,
                                double margin) {
    if (n_max < 1)
        throw std::invalid_argument("anosov_direct_check: n_max must be >= 1");
    if (grid_n < 2)
        throw std::invalid_argument("anosov_direct_check: grid_n must be >= 2");
    if (window.lo < S.window().lo || window.hi + n_max > S.window().hi)
        throw std::invalid_argument(
            "anosov_direct_check: splitting window too small for the n_max "
            "reach");

    const long indices = window.hi - window.lo + 1;
    const long per_index = static_cast<long>(grid_n) * grid_n;
    const long cells = indices * per_index;

    const auto decode = [&](long k, long& i, TorusPoint& p) {
        i = window.lo + k / per_index;
        const long rem = k % per_index;
        const int jx = static_cast<int>(rem % grid_n);
        const int jy = static_cast<int>(rem / grid_n);
        p = TorusPoint{static_cast<double>(jx) / grid_n,
                       static_cast<double>(jy) / grid_n};
    };
    // Walks the forward orbit, filling n-step stable and unstable growths.
    const auto growths = [&](long i, const TorusPoint& p, std::vector<double>& gs,
                             std::vector<double>& gu) {
        TorusPoint x = p;
        Vec2 ws = S.stable(i, p);
        Vec2 wu = S.unstable(i, p);
        for (int n = 1; n <= n_max; ++n) {
            const TorusMap& f = F.map_at(i + n - 1);
            const Mat2 J = f.jacobian(x);
            ws = J * ws;
            wu = J * wu;
            x = f.apply(x);
            gs[static_cast<std::size_t>(n - 1)] = ws.norm();
            gu[static_cast<std::size_t>(n - 1)] = wu.norm();
        }
    };

    // Pass 1: the smallest rate accommodating every sampled orbit is the
    // max over samples of the n_max-step geometric means (stable decay
    // forward, unstable decay backward).
    const double lambda = parallel_max(cells, 0.0, [&](long k) {
        long i;
        TorusPoint p;
        decode(k, i, p);
        std::vector<double> gs(static_cast<std::size_t>(n_max));
        std::vector<double> gu(static_cast<std::size_t>(n_max));
        growths(i, p, gs, gu);
        const double ls = std::pow(gs.back(), 1.0 / n_max);
        const double lu = std::pow(gu.back(), -1.0 / n_max);
        return std::max(ls, lu);
    });

    // Pass 2: with the fitted rate fixed, the constant is the worst excess
    // over all intermediate steps; the demand of the tightest sample is
    // always recorded, and c is clamped to >= 1 at the end (growths start
    // at 1, so demands below 1 are free).
    double demand = -kInf;
    Witness tight;
    tight.label = "tightest_sample";
    std::vector<double> gs(static_cast<std::size_t>(n_max));
    std::vector<double> gu(static_cast<std::size_t>(n_max));
    for (long k = 0; k < cells; ++k) {
        long i;
        TorusPoint p;
        decode(k, i, p);
        growths(i, p, gs, gu);
        double pw = 1.0;
        for (int n = 1; n <= n_max; ++n) {
            pw *= lambda;
            const double cs = gs[static_cast<std::size_t>(n - 1)] / pw;
            const double cu = 1.0 / (gu[static_cast<std::size_t>(n - 1)] * pw);
            if (cs > demand || cu > demand) {
                const bool stable_side = cs >= cu;
                demand = stable_side ? cs : cu;
                tight.scalars = {{"index", static_cast<double>(i)},
                                 {"point_x", p.x},
                                 {"point_y", p.y},
                                 {"steps", static_cast<double>(n)},
                                 {"subbundle", stable_side ? 0.0 : 1.0},
                                 {"growth",
                                  stable_side
                                      ? gs[static_cast<std::size_t>(n - 1)]
                                      : gu[static_cast<std::size_t>(n - 1)]},
                                 {"value", demand}};
            }
        }
    }
    const double c = std::max(1.0, demand);

    Certificate cert;
    cert.kind = "anosov-direct";
    cert.constants = {{"lambda", lambda},
                      {"c", c},
                      {"n_max", static_cast<double>(n_max)},
                      {"samples", static_cast<double>(cells)}};
    cert.tolerances = {{"margin", margin}};
    cert.window_lo = window.lo;
    cert.window_hi = window.hi;
    cert.grid_n = grid_n;
    if (!tight.scalars.empty()) cert.witnesses.push_back(tight);
    if (lambda <= 1.0 - margin)
        cert.status = CertStatus::Certified;
    else if (lambda >= 1.0)
        cert.status = CertStatus::Falsified;
    else
        cert.status = CertStatus::Inconclusive;
    cert.notes.push_back("rates fitted on " + std::to_string(cells) +
                         " sampled orbits of length " + std::to_string(n_max) +
                         "; certified at sampled resolution");
    return cert;
}

Certificate cone_invariance_certify(const FamilySpec& G, const SplittingField& S,
                                    const ConeParams& params, Window window,
                                    int grid_n, int ray_n) {
    if (grid_n < 2)
        throw std::invalid_argument("cone_invariance_certify: grid_n must be >= 2");
    if (ray_n < 3)
        throw std::invalid_argument("cone_invariance_certify: ray_n must be >= 3");
    if (!S.covers(window.lo) || !S.covers(window.hi + 1))
        throw std::invalid_argument(
            "cone_invariance_certify: field must cover the window and its "
            "image index");

    const double alpha = params.alpha;
    ConeTracker tr;
    for (long i = window.lo; i <= window.hi; ++i) {
        const TorusMap& g = G.map_at(i);
        const std::vector<Vec2> offsets =
            g.linear() ? std::vector<Vec2>{Vec2{0.0, 0.0}}
                       : chart_offsets(params.r_tilde);
        for (int jy = 0; jy < grid_n; ++jy) {
            for (int jx = 0; jx < grid_n; ++jx) {
                const TorusPoint p{static_cast<double>(jx) / grid_n,
                                   static_cast<double>(jy) / grid_n};
                const Mat2 T_src = S.frame(i, p);
                const TorusPoint q = g.apply(p);
                const Mat2 T_img = S.frame(i + 1, q);
                const Mat2 T_src_inv = T_src.inverse();
                const Mat2 T_img_inv = T_img.inverse();
                for (const Vec2& z : offsets) {
                    const Mat2 D = g.jacobian(exp_map(p, z));
                    RayContext ctx{i, p, z, 0};
                    scan_cone(T_img_inv * D * T_src, ctx, alpha, ray_n, tr);
                    ctx.cone = 1;
                    scan_cone(T_src_inv * D.inverse() * T_img, ctx, alpha,
                              ray_n, tr);
                }
            }
        }
    }

    Certificate cert;
    cert.kind = "cone-invariance";
    cert.constants = {{"alpha", alpha},
                      {"lambda_tilde", params.lambda_tilde},
                      {"sigma_A", params.sigma_A},
                      {"r_tilde", params.r_tilde},
                      {"eta_inv", tr.min_expansion},
                      {"eta_inv_unstable", tr.min_expansion_unstable},
                      {"eta_inv_stable", tr.min_expansion_stable},
                      {"eta", 1.0 / tr.min_expansion},
                      {"max_inclusion_ratio", tr.worst_inclusion},
                      {"min_angle", S.min_angle()}};
    cert.tolerances = {{"margin", kCertMargin}};
    cert.window_lo = window.lo;
    cert.window_hi = window.hi;
    cert.grid_n = grid_n;
    cert.witnesses.push_back(tr.incl_witness);
    cert.witnesses.push_back(tr.exp_witness);
    if (!tr.nappe_ok) cert.witnesses.push_back(tr.nappe_witness);
    if (!tr.nappe_ok || tr.worst_inclusion >= 1.0 || tr.min_expansion <= 1.0)
        cert.status = CertStatus::Falsified;
    else if (tr.worst_inclusion <= 1.0 - kCertMargin &&
             tr.min_expansion >= 1.0 + kCertMargin)
        cert.status = CertStatus::Certified;
    else
        cert.status = CertStatus::Inconclusive;
    cert.notes.push_back(
        "cone images evaluated exactly on boundary/interior rays and "
        "piecewise-linear minimisers" +
        std::string(ray_n > 3 ? "; dense ray oracle enabled" : ""));
    return cert;
}

ExtractionResult extract_splitting(const FamilySpec& G,
                                   const SplittingField& seed, int n_iter,
                                   Window window, int grid_n,
                                   int residual_stride) {
    if (n_iter < 1)
        throw std::invalid_argument("extract_splitting: n_iter must be >= 1");
    if (grid_n < 2)
        throw std::invalid_argument("extract_splitting: grid_n must be >= 2");
    if (residual_stride < 1)
        throw std::invalid_argument(
            "extract_splitting: residual_stride must be >= 1");
    if (window.lo - n_iter < seed.window().lo ||
        window.hi + 1 + n_iter > seed.window().hi)
        throw std::invalid_argument(
            "extract_splitting: seed field must cover the deep-orbit reach "
            "of the window (including the image index)");

    SplittingField field(window, grid_n, [&](long i, const TorusPoint& p) {
        return FramePair{deep_stable(G, seed, i, p, n_iter),
                         deep_unstable(G, seed, i, p, n_iter)};
    });

    // Invariance residual: push each stored node direction through the map
    // and compare against a fresh deep computation at the image point (the
    // interpolated field never enters, so the residual measures the
    // construction itself, not grid smoothing).
    double residual = 0.0;
    for (long i = window.lo; i <= window.hi; ++i) {
        const TorusMap& g = G.map_at(i);
        for (int jy = 0; jy < grid_n; jy += residual_stride) {
            for (int jx = 0; jx < grid_n; jx += residual_stride) {
                const TorusPoint p = field.grid_point(jx, jy);
                const TorusPoint q = g.apply(p);
                const Mat2 D = g.jacobian(p);
                const Vec2 wu = D * field.unstable_node(i, jx, jy);
                const Vec2 du = deep_unstable(G, seed, i + 1, q, n_iter);
                residual = std::max(residual, line_angle(wu, du));
                const Vec2 ws = D * field.stable_node(i, jx, jy);
                const Vec2 ds = deep_stable(G, seed, i + 1, q, n_iter);
                residual = std::max(residual, line_angle(ws, ds));
            }
        }
    }

    // Per-depth convergence at a handful of probes: the angular gap between
    // consecutive truncation depths decays like the hyperbolicity ratio.
    const long mid = window.lo + (window.hi - window.lo) / 2;
    std::vector<TorusPoint> probes;
    for (int k = 0; k < 5; ++k)
        probes.push_back(TorusPoint{wrap_unit(0.137 + 0.2 * k),
                                    wrap_unit(0.713 - 0.1 * k)});
    std::vector<double> steps;
    std::vector<Vec2> prev_u, prev_s;
    for (const TorusPoint& p : probes) {
        prev_u.push_back(deep_unstable(G, seed, mid, p, 0));
        prev_s.push_back(deep_stable(G, seed, mid, p, 0));
    }
    for (int n = 1; n <= n_iter; ++n) {
        double step = 0.0;
        for (std::size_t k = 0; k < probes.size(); ++k) {
            const Vec2 u = deep_unstable(G, seed, mid, probes[k], n);
            const Vec2 s = deep_stable(G, seed, mid, probes[k], n);
            step = std::max(step, line_angle(u, prev_u[k]));
            step = std::max(step, line_angle(s, prev_s[k]));
            prev_u[k] = u;
            prev_s[k] = s;
        }
        steps.push_back(step);
    }

    return ExtractionResult{std::move(field), residual, std::move(steps)};
}

Certificate norm_growth_criterion(const FamilySpec& F, double c, double sigma,
                                  int n_max, Window window, double rtol) {
    if (!F.all_linear())
        throw std::invalid_argument(
            "norm_growth_criterion: all maps must be linear");
    if (!(c > 0.0))
        throw std::invalid_argument("norm_growth_criterion: c must be > 0");
    if (!(sigma > 1.0))
        throw std::invalid_argument("norm_growth_criterion: sigma must be > 1");
    if (n_max < 1)
        throw std::invalid_argument("norm_growth_criterion: n_max must be >= 1");

    double min_margin = kInf;
    bool beyond_exact = false;
    Witness worst;
    worst.label = "tightest_product";
    for (long i = window.lo; i <= window.hi; ++i) {
        IntMat2 M;
        double bound = c;
        for (int n = 1; n <= n_max; ++n) {
            M = F.map_at(i + n - 1).linear_product() * M;
            bound *= sigma;
            const long long entry_max =
                std::max({std::llabs(M.a), std::llabs(M.b), std::llabs(M.c),
                          std::llabs(M.d)});
            if (entry_max > (1LL << 52)) beyond_exact = true;
            const double nrm = M.to_mat2().op_norm();
            const double margin = nrm / bound;
            if (margin < min_margin) {
                min_margin = margin;
                worst.scalars = {{"index", static_cast<double>(i)},
                                 {"steps", static_cast<double>(n)},
                                 {"norm", nrm},
                                 {"bound", bound},
                                 {"value", margin}};
            }
        }
    }

    Certificate cert;
    cert.kind = "norm-growth";
    cert.constants = {{"c", c},
                      {"sigma", sigma},
                      {"n_max", static_cast<double>(n_max)},
                      {"min_margin", min_margin}};
    cert.tolerances = {{"rtol", rtol}};
    cert.window_lo = window.lo;
    cert.window_hi = window.hi;
    cert.witnesses.push_back(worst);
    cert.status = min_margin >= 1.0 - rtol ? CertStatus::Certified
                                           : CertStatus::Falsified;
    cert.notes.push_back("integer matrix products exact; operator norms via "
                         "closed-form singular values");
    if (beyond_exact)
        cert.notes.push_back(
            "product entries exceed the exactly representable double range; "
            "operator norms carry rounding of relative size ~1e-16");
    return cert;
}

DefectReport second_order_defect(const FamilySpec& F, const FamilySpec& G,
                                 const SplittingField& S, double r_tilde,
                                 Window window, int grid_n, int ray_n) {
    if (!(r_tilde > 0.0) || r_tilde > 0.25)
        throw std::invalid_argument(
            "second_order_defect: r_tilde exceeds chart validity (need 0 < "
            "r_tilde <= 1/4)");
    if (grid_n < 2)
        throw std::invalid_argument("second_order_defect: grid_n must be >= 2");
    if (ray_n < 1)
        throw std::invalid_argument("second_order_defect: ray_n must be >= 1");
    if (!S.covers(window.lo) || !S.covers(window.hi + 1))
        throw std::invalid_argument(
            "second_order_defect: field must cover the window and its image "
            "index");

    std::vector<Vec2> zs{Vec2{0.0, 0.0}};
    for (double radius : {0.5 * r_tilde, r_tilde}) {
        for (int k = 0; k < ray_n; ++k) {
            const double phi = 2.0 * M_PI * k / ray_n;
            zs.push_back(Vec2{radius * std::cos(phi), radius * std::sin(phi)});
        }
    }

    DefectReport rep;
    double cond_max = 1.0;
    const int stride = std::max(1, grid_n / 8);
    for (long i = window.lo; i <= window.hi; ++i) {
        const TorusMap& f = F.map_at(i);
        const TorusMap& g = G.map_at(i);
        const bool both_linear = f.linear() && g.linear();
        for (int jy = 0; jy < grid_n; ++jy) {
            for (int jx = 0; jx < grid_n; ++jx) {
                const TorusPoint p{static_cast<double>(jx) / grid_n,
                                   static_cast<double>(jy) / grid_n};
                // Forward defect: charts centred at p and f(p); in flat
                // charts the chart derivative is the map derivative.
                const Mat2 Df = f.jacobian(p);
                const Mat2 T_src = S.frame(i, p);
                const Mat2 T_img_inv = S.frame(i + 1, f.apply(p)).inverse();
                // Inverse defect: charts centred at p in the image fibre
                // and at f^-1(p) in the source.
                const Mat2 Dfi = f.inverse_jacobian(p);
                const Mat2 T2_src = S.frame(i + 1, p);
                const Mat2 T2_img_inv = S.frame(i, f.invert(p)).inverse();
                for (const Vec2& z : zs) {
                    const TorusPoint pz = exp_map(p, z);
                    const double fwd = frame_inf_norm(
                        T_img_inv * (Df - g.jacobian(pz)) * T_src);
                    const double bwd = frame_inf_norm(
                        T2_img_inv * (Dfi - g.inverse_jacobian(pz)) * T2_src);
                    rep.value = std::max({rep.value, fwd, bwd});
                    if (both_linear) break;  // constant derivatives
                }
                if (jx % stride == 0 && jy % stride == 0) {
                    cond_max = std::max(cond_max, T_src.op_norm() *
                                                      T_src.inverse().op_norm());
                    // Second derivatives of both maps and their inverses
                    // bound the derivative variation between samples.
                    if (!both_linear) {
                        double k_here =
                            std::max(f.second(p).op_norm(), g.second(p).op_norm());
                        for (const TorusMap* m : {&f, &g}) {
                            const TorusPoint pre = m->invert(p);
                            const Mat2 Jinv = m->jacobian(pre).inverse();
                            k_here = std::max(
                                k_here,
                                tensor_conjugate(m->second(pre), Jinv * -1.0,
                                                 Jinv)
                                    .op_norm());
                        }
                        rep.k_estimate = std::max(rep.k_estimate, k_here);
                    }
                }
            }
        }
    }

    // Unsampled (p, z) pairs sit within half a grid diagonal in p and the
    // radial/angular gap in z of a sample; the derivative difference moves
    // at rate <= 2 k_estimate per unit distance, inflated by the frame
    // conditioning of the coordinate change.
    const double z_gap = std::max(0.25 * r_tilde,
                                  r_tilde * std::sin(M_PI / std::max(1, ray_n)));
    rep.slack = rep.k_estimate * cond_max * (std::sqrt(2.0) / grid_n + z_gap);
    return rep;
}

}  // namespace anosov
