#include "anosov/sections.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "anosov/parallel.hpp"

namespace anosov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double node_max(const std::vector<Vec2>& values) {
    double m = 0.0;
    for (const Vec2& v : values) m = std::max(m, v.norm());
    return m;
}

void require_compatible(const SectionFamily& a, const SectionFamily& b,
                        const char* who) {
    if (a.window().lo != b.window().lo || a.window().hi != b.window().hi ||
        a.grid_n() != b.grid_n())
        throw std::invalid_argument(std::string(who) +
                                    ": windows and grids must match");
}

}  // namespace

GridSection::GridSection(long index, int grid_n,
                         const std::function<Vec2(const TorusPoint&)>& fn)
    : index_(index), grid_n_(grid_n) {
    if (grid_n < 2)
        throw std::invalid_argument("GridSection: grid_n must be >= 2");
    values_.resize(static_cast<std::size_t>(grid_n) * static_cast<std::size_t>(grid_n));
    for (int jy = 0; jy < grid_n; ++jy)
        for (int jx = 0; jx < grid_n; ++jx)
            values_[at(jx, jy)] = fn(grid_point(jx, jy));
    sup_norm_ = node_max(values_);
}

GridSection::GridSection(long index, int grid_n, std::vector<Vec2> values)
    : index_(index), grid_n_(grid_n), values_(std::move(values)) {
    if (grid_n < 2)
        throw std::invalid_argument("GridSection: grid_n must be >= 2");
    if (values_.size() !=
        static_cast<std::size_t>(grid_n) * static_cast<std::size_t>(grid_n))
        throw std::invalid_argument("GridSection: value count must be grid_n^2");
    sup_norm_ = node_max(values_);
}

const Vec2& GridSection::node(int jx, int jy) const {
    if (jx < 0 || jx >= grid_n_ || jy < 0 || jy >= grid_n_)
        throw std::out_of_range("GridSection: node outside grid");
    return values_[at(jx, jy)];
}

Vec2 GridSection::value(const TorusPoint& p) const {
    const double gx = wrap_unit(p.x) * grid_n_;
    const double gy = wrap_unit(p.y) * grid_n_;
    int jx = static_cast<int>(std::floor(gx));
    int jy = static_cast<int>(std::floor(gy));
    double tx = gx - jx;
    double ty = gy - jy;
    if (jx >= grid_n_) { jx = 0; tx = 0.0; }
    if (jy >= grid_n_) { jy = 0; ty = 0.0; }
    const int jx1 = (jx + 1) % grid_n_;
    const int jy1 = (jy + 1) % grid_n_;
    const Vec2& v00 = values_[at(jx, jy)];
    const Vec2& v10 = values_[at(jx1, jy)];
    const Vec2& v01 = values_[at(jx, jy1)];
    const Vec2& v11 = values_[at(jx1, jy1)];
    return v00 * ((1.0 - tx) * (1.0 - ty)) + v10 * (tx * (1.0 - ty)) +
           v01 * ((1.0 - tx) * ty) + v11 * (tx * ty);
}

SectionFamily::SectionFamily(Window window, int grid_n,
                             const std::function<Vec2(long, const TorusPoint&)>& fn)
    : window_(window), grid_n_(grid_n) {
    sections_.reserve(static_cast<std::size_t>(window.length()));
    for (long i = window.lo; i <= window.hi; ++i) {
        sections_.emplace_back(
            i, grid_n, [&](const TorusPoint& p) { return fn(i, p); });
        norm_inf_ = std::max(norm_inf_, sections_.back().sup_norm());
    }
}

SectionFamily SectionFamily::zero(Window window, int grid_n) {
    return SectionFamily(window, grid_n,
                         [](long, const TorusPoint&) { return Vec2{0.0, 0.0}; });
}

SectionFamily SectionFamily::constant(Window window, int grid_n, const Vec2& v) {
    return SectionFamily(window, grid_n,
                         [&](long, const TorusPoint&) { return v; });
}

SectionFamily SectionFamily::assemble(std::vector<GridSection> sections) {
    if (sections.empty())
        throw std::invalid_argument("SectionFamily: no sections to assemble");
    SectionFamily Z;
    Z.window_ = Window{sections.front().index(), sections.back().index()};
    Z.grid_n_ = sections.front().grid_n();
    for (std::size_t k = 0; k < sections.size(); ++k) {
        if (sections[k].index() != Z.window_.lo + static_cast<long>(k))
            throw std::invalid_argument(
                "SectionFamily: section indices must be consecutive");
        if (sections[k].grid_n() != Z.grid_n_)
            throw std::invalid_argument("SectionFamily: grids must match");
        Z.norm_inf_ = std::max(Z.norm_inf_, sections[k].sup_norm());
    }
    Z.sections_ = std::move(sections);
    return Z;
}

const GridSection& SectionFamily::at(long i) const {
    if (!window_.contains(i))
        throw std::out_of_range("SectionFamily: index outside window");
    return sections_[static_cast<std::size_t>(i - window_.lo)];
}

SectionFamily& SectionFamily::with_radius(double tau) {
    if (!(tau >= 0.0))
        throw std::invalid_argument("SectionFamily: radius tag must be >= 0");
    if (norm_inf_ > tau)
        throw std::invalid_argument(
            "SectionFamily: a node value exceeds the radius tag");
    tau_ = tau;
    return *this;
}

namespace {

SectionFamily node_map(const SectionFamily& a,
                       const std::function<Vec2(long, int, int)>& fn) {
    const int g = a.grid_n();
    std::vector<GridSection> out;
    out.reserve(static_cast<std::size_t>(a.window().length()));
    for (long i = a.window().lo; i <= a.window().hi; ++i) {
        std::vector<Vec2> values(static_cast<std::size_t>(g) * g);
        for (int jy = 0; jy < g; ++jy)
            for (int jx = 0; jx < g; ++jx)
                values[static_cast<std::size_t>(jy) * static_cast<std::size_t>(g) +
                       jx] = fn(i, jx, jy);
        out.emplace_back(i, g, std::move(values));
    }
    return SectionFamily::assemble(std::move(out));
}

}  // namespace

SectionFamily operator+(const SectionFamily& a, const SectionFamily& b) {
    require_compatible(a, b, "SectionFamily::operator+");
    return node_map(a, [&](long i, int jx, int jy) {
        return a.at(i).node(jx, jy) + b.at(i).node(jx, jy);
    });
}

SectionFamily operator-(const SectionFamily& a, const SectionFamily& b) {
    require_compatible(a, b, "SectionFamily::operator-");
    return node_map(a, [&](long i, int jx, int jy) {
        return a.at(i).node(jx, jy) - b.at(i).node(jx, jy);
    });
}

SectionFamily operator*(double s, const SectionFamily& a) {
    return node_map(a, [&](long i, int jx, int jy) {
        return a.at(i).node(jx, jy) * s;
    });
}

double interpolation_slack(const SectionFamily& Z) {
    const int g = Z.grid_n();
    double worst = 0.0;
    for (long i = Z.window().lo; i <= Z.window().hi; ++i) {
        const GridSection& sec = Z.at(i);
        for (int jy = 0; jy < g; ++jy)
            for (int jx = 0; jx < g; ++jx) {
                const Vec2 mean = (sec.node((jx + 1) % g, jy) +
                                   sec.node((jx + g - 1) % g, jy) +
                                   sec.node(jx, (jy + 1) % g) +
                                   sec.node(jx, (jy + g - 1) % g)) *
                                  0.25;
                worst = std::max(worst, (sec.node(jx, jy) - mean).norm());
            }
    }
    return worst;
}

SectionFamily pushforward(const FamilySpec& F, const SectionFamily& Z) {
    const int g = Z.grid_n();
    const long cells_per_index = static_cast<long>(g) * g;
    std::vector<GridSection> out;
    out.reserve(static_cast<std::size_t>(Z.window().length()));
    for (long i = Z.window().lo + 1; i <= Z.window().hi + 1; ++i) {
        const TorusMap& f = F.map_at(i - 1);
        std::vector<Vec2> values(static_cast<std::size_t>(cells_per_index));
        parallel_for(cells_per_index, [&](long k) {
            const int jx = static_cast<int>(k % g);
            const int jy = static_cast<int>(k / g);
            const TorusPoint p{static_cast<double>(jx) / g,
                               static_cast<double>(jy) / g};
            const TorusPoint q = f.invert(p);
            values[static_cast<std::size_t>(k)] =
                f.jacobian(q) * Z.value(i - 1, q);
        });
        out.emplace_back(i, g, std::move(values));
    }
    return SectionFamily::assemble(std::move(out));
}

SectionFamily pushforward_inverse(const FamilySpec& F, const SectionFamily& Z) {
    const int g = Z.grid_n();
    const long cells_per_index = static_cast<long>(g) * g;
    std::vector<GridSection> out;
    out.reserve(static_cast<std::size_t>(Z.window().length()));
    for (long i = Z.window().lo - 1; i <= Z.window().hi - 1; ++i) {
        const TorusMap& f = F.map_at(i);
        std::vector<Vec2> values(static_cast<std::size_t>(cells_per_index));
        parallel_for(cells_per_index, [&](long k) {
            const int jx = static_cast<int>(k % g);
            const int jy = static_cast<int>(k / g);
            const TorusPoint p{static_cast<double>(jx) / g,
                               static_cast<double>(jy) / g};
            values[static_cast<std::size_t>(k)] =
                f.jacobian(p).inverse() * Z.value(i + 1, f.apply(p));
        });
        out.emplace_back(i, g, std::move(values));
    }
    return SectionFamily::assemble(std::move(out));
}

ProjectedSections project_su(const SectionFamily& Z, const SplittingField& S,
                             double angle_threshold) {
    if (!S.covers(Z.window().lo) || !S.covers(Z.window().hi))
        throw std::invalid_argument(
            "project_su: splitting must cover the section window");
    const AngleReport ang = angle_property(S, angle_threshold);
    if (!ang.spa)
        throw std::domain_error(
            "project_su: splitting angle below threshold (projection "
            "ill-conditioned)");

    const int g = Z.grid_n();
    std::vector<GridSection> parts_s;
    std::vector<GridSection> parts_u;
    double k_bound = 0.0;
    for (long i = Z.window().lo; i <= Z.window().hi; ++i) {
        std::vector<Vec2> vs(static_cast<std::size_t>(g) * g);
        std::vector<Vec2> vu(static_cast<std::size_t>(g) * g);
        for (int jy = 0; jy < g; ++jy)
            for (int jx = 0; jx < g; ++jx) {
                const TorusPoint p{static_cast<double>(jx) / g,
                                   static_cast<double>(jy) / g};
                const Vec2 v = Z.at(i).node(jx, jy);
                const Vec2 coords = S.components(i, p, v);
                const std::size_t k =
                    static_cast<std::size_t>(jy) * static_cast<std::size_t>(g) + jx;
                vs[k] = S.stable(i, p) * coords.x;
                vu[k] = S.unstable(i, p) * coords.y;
                if (Z.norm_inf() > 0.0) {
                    k_bound = std::max(k_bound, vs[k].norm() / Z.norm_inf());
                    k_bound = std::max(k_bound, vu[k].norm() / Z.norm_inf());
                }
            }
        parts_s.emplace_back(i, g, std::move(vs));
        parts_u.emplace_back(i, g, std::move(vu));
    }
    ProjectedSections out{SectionFamily::assemble(std::move(parts_s)),
                          SectionFamily::assemble(std::move(parts_u)), k_bound};
    return out;
}

double power_norm_estimate(const FamilySpec& F, const SplittingField& S,
                           Subbundle t, int n, Window window) {
    if (n < 1)
        throw std::invalid_argument("power_norm_estimate: n must be >= 1");
    if (n > window.hi - window.lo)
        throw std::invalid_argument("power_norm_estimate: n exceeds window reach");
    if (!S.covers(window.lo) || !S.covers(window.hi))
        throw std::invalid_argument(
            "power_norm_estimate: splitting must cover the window");

    const int g = S.grid_n();
    const long nodes = static_cast<long>(g) * g;
    const long starts = window.length() - n;
    const double worst = parallel_max(starts * nodes, 0.0, [&](long cell) {
        const long s = cell / nodes;
        const long k = cell % nodes;
        const int jx = static_cast<int>(k % g);
        const int jy = static_cast<int>(k / g);
        TorusPoint x{static_cast<double>(jx) / g, static_cast<double>(jy) / g};
        double growth = 1.0;
        if (t == Subbundle::Stable) {
            const long i0 = window.lo + s;
            for (int step = 0; step < n; ++step) {
                const long j = i0 + step;
                const TorusMap& f = F.map_at(j);
                const Vec2 d = S.stable(j, x);
                growth *= (f.jacobian(x) * d).norm();
                x = f.apply(x);
            }
        } else {
            const long i0 = window.hi - s;
            for (int step = 0; step < n; ++step) {
                const long j = i0 - step;
                const TorusMap& f = F.map_at(j - 1);
                const Vec2 d = S.unstable(j, x);
                const TorusPoint xm = f.invert(x);
                growth *= (f.jacobian(xm).inverse() * d).norm();
                x = xm;
            }
        }
        return growth;
    });
    return std::pow(worst, 1.0 / n);
}

Certificate hyperbolic_gap_report(const FamilySpec& F, const SplittingField& S,
                                  int n, Window window, double margin,
                                  double angle_threshold) {
    if (n < 1)
        throw std::invalid_argument("hyperbolic_gap_report: n must be >= 1");
    if (n > window.hi - window.lo)
        throw std::invalid_argument(
            "hyperbolic_gap_report: n exceeds window reach");
    if (!S.covers(window.lo) || !S.covers(window.hi))
        throw std::invalid_argument(
            "hyperbolic_gap_report: splitting must cover the window");

    Certificate cert;
    cert.kind = "operator-gap";
    cert.window_lo = window.lo;
    cert.window_hi = window.hi;
    cert.grid_n = S.grid_n();
    cert.tolerances = {{"margin", margin}, {"angle_threshold", angle_threshold}};

    const C2SupBound c2 = c2_sup_bound(F, window, S.grid_n());
    const AngleReport ang = angle_property(S, angle_threshold);
    const double k_bound =
        ang.min_angle > 0.0 ? 1.0 / std::sin(ang.min_angle) : kInf;
    const double stable_est =
        power_norm_estimate(F, S, Subbundle::Stable, n, window);
    const double unstable_est =
        power_norm_estimate(F, S, Subbundle::Unstable, n, window);

    cert.constants = {{"stable_estimate", stable_est},
                      {"unstable_inverse_estimate", unstable_est},
                      {"min_angle", ang.min_angle},
                      {"k_bound", k_bound},
                      {"c2_sup", c2.S},
                      {"n", static_cast<double>(n)}};

    bool failed = false;
    if (!std::isfinite(c2.S)) {
        cert.notes.push_back("derivative-unbounded: sampled C2 sup is not finite");
        failed = true;
    }
    if (!ang.spa) {
        cert.notes.push_back(
            "angle-failure: sampled splitting angles collapse below the "
            "threshold, so the subbundle projections are unbounded at this "
            "resolution");
        failed = true;
    }
    if (stable_est >= 1.0 || unstable_est >= 1.0) {
        cert.notes.push_back(
            "gap-failure: a restricted norm-of-powers estimate is not below "
            "one");
        failed = true;
    }
    if (failed) {
        cert.status = CertStatus::Falsified;
        return cert;
    }
    if (stable_est < 1.0 - margin && unstable_est < 1.0 - margin) {
        cert.status = CertStatus::Certified;
        cert.notes.push_back(
            "norm-of-powers gap and bounded projections at sampled resolution");
    } else {
        cert.status = CertStatus::Inconclusive;
        cert.notes.push_back(
            "gap-margin: power estimates inside the margin band below one");
    }
    return cert;
}

}  // namespace anosov
