#pragma once
// Hyperbolicity certification: direct growth-rate fits, alpha-cone
// invariance/expansion on finitely many rays, splitting extraction by
// deep-orbit cone iteration, the sigma_A threshold, norm-growth checks on
// linear families, and the second-order chart defect between nearby
// families. All sampled sups are certified at the stated resolution.

#include <vector>

#include "anosov/certificate.hpp"
#include "anosov/family.hpp"
#include "anosov/splitting.hpp"

namespace anosov {

// min{ (lt^-1 - lt) a / (2 (1+a)^2), (lt^-1 (1-a) - (1+a) a) / (2 (1+a)) }.
// Throws unless lambda_tilde in (0,1) and alpha in (0, (1-lt)/(1+lt)).
double sigma_A_eval(double alpha, double lambda_tilde);

struct ConeParams {
    double alpha = 0.0;
    double sigma_A = 0.0;  // threshold derived from (alpha, lambda_tilde)
    double lambda_tilde = 0.0;
    double r_tilde = 0.0;

    // Validates the admissibility inequalities and fills sigma_A.
    static ConeParams make(double alpha, double lambda_tilde, double r_tilde);
};

// Fits the best constants (c, lambda) with |DF^n v| <= c lambda^n |v| on
// sampled stable directions and the mirrored lower bound on unstable ones;
// certified iff lambda < 1 - margin. S must cover [window.lo,
// window.hi + n_max].
Certificate anosov_direct_check(const FamilySpec& F, const SplittingField& S,
                                Window window, int n_max, int grid_n,
                                double margin = 1e-6);

// Checks that the derivative maps each unstable alpha-cone strictly inside
// the image cone with star-norm expansion >= eta^-1 (and the mirrored
// backward statements for stable cones). Affine ray evaluation: boundary
// rays, interior ray, the exact piecewise-linear minimisers, plus
// (ray_n - 3) extra dense rays when ray_n > 3 for oracle-mode validation.
// The certificate reports eta_inv (worst expansion over both cone
// families) alongside the per-branch constants eta_inv_unstable and
// eta_inv_stable, which differ for non-symmetric perturbations.
Certificate cone_invariance_certify(const FamilySpec& G, const SplittingField& S,
                                    const ConeParams& params, Window window,
                                    int grid_n, int ray_n = 3);

struct ExtractionResult {
    SplittingField field;
    // sup over probe points of the angle between the pushed-forward
    // direction and the independently deep-computed direction at the image.
    double invariance_residual = 0.0;
    // mean angular gap between depth-(n-1) and depth-n directions at probes.
    std::vector<double> angular_steps;
};

// Unstable direction at (i, p): push the seed direction at the deep
// backward orbit point forward n_iter steps, renormalising; stable
// mirrored. Each grid node gets its own exact orbit (no field iteration),
// and the residual is measured against deep directions at image points.
ExtractionResult extract_splitting(const FamilySpec& G,
                                   const SplittingField& seed, int n_iter,
                                   Window window, int grid_n,
                                   int residual_stride = 8);

// Verifies |A_{i+n-1} ... A_i| >= c sigma^n in the operator 2-norm, with
// the integer products accumulated exactly. Linear families only.
Certificate norm_growth_criterion(const FamilySpec& F, double c, double sigma,
                                  int n_max, Window window, double rtol = 1e-12);

struct DefectReport {
    double value = 0.0;        // sampled sup (a lower bound of the true sup)
    double slack = 0.0;        // Lipschitz slack from the sampling resolution
    double k_estimate = 0.0;   // sampled second-derivative magnitude
};

// sup over base points p and chart offsets |z| <= r_tilde of
// |Df_i(p) - Dg_i(p + z)| plus the inverse-map counterpart, measured in the
// max-coordinate operator norm of the splitting frame.
DefectReport second_order_defect(const FamilySpec& F, const FamilySpec& G,
                                 const SplittingField& S, double r_tilde,
                                 Window window, int grid_n, int ray_n = 8);

}  // namespace anosov
