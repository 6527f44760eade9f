#pragma once
// Local stable/unstable manifolds through a point: graph-transform
// construction in splitting coordinates, measured tangency and Lipschitz
// bounds, fitted exponential contraction along the manifold, convergence
// exponents of orbit pairs, and the closure property under limits.

#include <vector>

#include "anosov/certificate.hpp"
#include "anosov/family.hpp"
#include "anosov/geom.hpp"
#include "anosov/splitting.hpp"
#include "anosov/torus.hpp"

namespace anosov {

// Natural cubic spline through strictly increasing nodes; evaluation
// outside the node range extrapolates with the boundary cubic.
class CubicSpline {
  public:
    CubicSpline(std::vector<double> xs, std::vector<double> ys);
    double value(double x) const;
    double derivative(double x) const;

  private:
    std::size_t interval(double x) const;
    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<double> m_;  // second derivatives at the nodes
};

// A local manifold stored as a graph in splitting coordinates at the base
// point: points are base + t e_side + g(t) e_comp for t in [-delta, delta],
// with g sampled at Chebyshev nodes and interpolated by a cubic spline.
struct LocalManifold {
    long index = 0;
    TorusPoint base;
    Subbundle side = Subbundle::Unstable;
    double delta = 0.0;
    Vec2 e_side;  // unit direction of the graphed subspace at (index, base)
    Vec2 e_comp;  // complementary unit direction
    std::vector<double> nodes;   // ascending Chebyshev parameters
    std::vector<double> values;  // graph values g(nodes)

    double lipschitz = 0.0;  // measured slope bound of the graph
    double tangency = 0.0;   // |g'(0)|

    double k_fitted = 1.0;    // least-squares contraction prefactor
    double zeta_fitted = 0.0; // least-squares contraction rate
    double K = 1.0;           // prefactor inflated 5% for certificates
    double zeta = 0.0;        // rate inflated 5% for certificates

    // sup-differences of successive transform iterates, all compared in the
    // base chart: entry d-1 is sup |depth-d graph - depth-(d-1) graph|,
    // where the depth-d graph starts flat at the depth-d orbit point. The
    // sequence contracts geometrically once the transform has settled.
    std::vector<double> step_diffs;

    double g_at(double t) const;
    TorusPoint point_at(double t) const;
    // Minimum distance from q to the sampled graph (parameter search).
    double distance_to(const TorusPoint& q) const;
};

// Graph-transform construction: for every depth d <= iters, starts from
// the flat graph at the depth-d orbit point (backward orbit for the
// unstable side, forward for the stable side), maps it step by step toward
// the base point, re-expresses each image as a graph over the side
// subspace, trims to [-delta, delta], and resamples at Chebyshev nodes
// (piecewise-cubic re-interpolation); the returned graph is the deepest
// iterate and step_diffs records the iterate-to-iterate sup-differences.
// Throws std::runtime_error when the image cannot be re-graphed (fold or
// insufficient expansion) or when the graph leaves the alpha-cone: both
// signal that delta is too large for the certified regime.
LocalManifold compute_local_manifold(const FamilySpec& G, const SplittingField& S,
                                     const TorusPoint& p, long i, Subbundle side,
                                     double delta, int iters, int samples = 33,
                                     double alpha = 0.2);

// Verifies d(orbit_n(q), orbit_n(p)) <= K zeta^n d(q, p) for sampled q on
// the manifold and n <= n_max (backward orbits for the unstable side,
// forward for the stable side), using the manifold's stored (K, zeta).
// The certificate records the maximum ratio against the bound. Sampled
// manifold points carry a small transversal error that the orbits amplify
// by the expansion rate each step, so n_max should stay within the horizon
// where K zeta^n d(q,p) still dominates that amplified error.
Certificate contraction_rate_check(const LocalManifold& M, const FamilySpec& G,
                                   int n_max, int samples);

struct ConvergenceExponents {
    double theta = 0.0;  // forward log-distance slope
    double delta = 0.0;  // backward log-distance slope
    // Smaller of the two usable orbit lengths backing the fits.
    int n_used = 0;
};

// Finite-n slope estimates of the forward/backward separation exponents of
// the orbits of p and q. Distances are usable while they stay inside
// (1e-13, 0.25): below is rounding noise, above the chart saturates.
// Identical points report -infinity; an orbit that saturates before two
// usable samples reports +infinity for its exponent. Throws
// std::domain_error when the initial separation is already saturated.
ConvergenceExponents convergence_exponents(const FamilySpec& F, const TorusPoint& p,
                                           const TorusPoint& q, long i, int n_max);

// Closure of local manifolds under limits: computes the manifold at the
// limit base point (the last entry of p_seq) and checks that the limit
// candidate point (the last entry of q_seq) lies on it within tol.
bool limit_point_closure_check(const FamilySpec& G, const SplittingField& S,
                               long index, Subbundle side,
                               const std::vector<TorusPoint>& p_seq,
                               const std::vector<TorusPoint>& q_seq, double delta,
                               double tol = 1e-6, int iters = 20, int samples = 33);

// Three-term admissibility display for the local-manifold radius: the
// smallness threshold min{ (lt^-1 - lt) a / (1+a)^2,
// (g lt^-1 - lt) / ((1+a)(1+g)), (1 - lt)/(1 + lt) } with lt = lambda_tilde,
// a = alpha <= (lt^-1 - 1)/2 and g = gamma in (lt^2, 1).
double manifold_smallness_bound(double lambda_tilde, double alpha, double gamma);

}  // namespace anosov
