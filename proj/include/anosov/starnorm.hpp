#pragma once
// Adapted norms along orbits: weighted sums ||v||_* = sum_n lt^-n |DF^n v|
// over stable vectors (mirrored backward over unstable ones) make a family
// with rates c, lambda < lambda_tilde strictly contracting in one step.
// The star norm of a mixed vector is the max of its two component norms.

#include "anosov/family.hpp"
#include "anosov/splitting.hpp"

namespace anosov {

class StarNorm {
  public:
    StarNorm(FamilySpec F, SplittingField S, double lambda_tilde, int n_trunc);

    double lambda_tilde() const { return lambda_tilde_; }
    int n_trunc() const { return n_trunc_; }
    const SplittingField& field() const { return S_; }

    // Truncated adapted norm of a stable vector at (i, p): forward weights.
    double stable_norm(long i, const TorusPoint& p, const Vec2& v) const;
    // Mirrored backward sum for unstable vectors.
    double unstable_norm(long i, const TorusPoint& p, const Vec2& v) const;
    // max{ ||v_s||_*, ||v_u||_* } after the oblique frame split.
    double star_norm(long i, const TorusPoint& p, const Vec2& v) const;

    // Geometric tail of the truncation: c (l/lt)^{N+1} / (1 - l/lt).
    // Throws when lambda >= lambda_tilde (the series diverges).
    double tail_bound(double c, double lambda) const;

    struct ContractionReport {
        double max_stable_ratio = 0.0;    // of ||DF v||_* / ||v||_* forward
        double max_unstable_ratio = 0.0;  // of ||DF^-1 v||_* / ||v||_* backward
        int samples = 0;
    };
    // Samples random points in the window and checks one-step strict
    // contraction along both subbundles.
    ContractionReport verify_contraction(Window window, int samples,
                                         unsigned seed) const;

    struct EquivalenceReport {
        double C = 1.0;  // (1/C)||v||_star <= ||v|| <= C ||v||_star
        double max_star_over_euclidean = 0.0;
        double max_euclidean_over_star = 0.0;
    };
    EquivalenceReport equivalence_constant(Window window, int samples,
                                           unsigned seed) const;

  private:
    FamilySpec F_;
    SplittingField S_;
    double lambda_tilde_;
    int n_trunc_;
};

// Requires lambda_tilde in (0, 1) and n_trunc >= 0; the caller is expected
// to have certified rates lambda < lambda_tilde beforehand.
StarNorm adapted_norm(const FamilySpec& F, const SplittingField& S,
                      double lambda_tilde, int n_trunc);

}  // namespace anosov
