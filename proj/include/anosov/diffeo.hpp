#pragma once
// Torus diffeomorphisms of the form x |-> A x + p(x) mod Z^2 with
// A in SL(2, Z) and p a finite trigonometric polynomial, plus lazily
// composed chains of such maps.

#include <cstdint>
#include <vector>

#include "anosov/geom.hpp"
#include "anosov/torus.hpp"

namespace anosov {

// Integer 2x2 matrix, validated to have determinant one where required.
struct IntMat2 {
    long long a = 1, b = 0, c = 0, d = 1;

    IntMat2() = default;
    IntMat2(long long aa, long long bb, long long cc, long long dd)
        : a(aa), b(bb), c(cc), d(dd) {}

    long long det() const { return a * d - b * c; }

    IntMat2 operator*(const IntMat2& o) const;

    IntMat2 inverse_unimodular() const {
        // valid only when det == 1
        return {d, -b, -c, a};
    }

    Mat2 to_mat2() const {
        return {static_cast<double>(a), static_cast<double>(b),
                static_cast<double>(c), static_cast<double>(d)};
    }

    bool operator==(const IntMat2& o) const {
        return a == o.a && b == o.b && c == o.c && d == o.d;
    }
};

// One Fourier mode of a perturbation field:
//   p(x) += cos_coef * cos(2 pi k.x) + sin_coef * sin(2 pi k.x).
struct TrigMode {
    int k1 = 0;
    int k2 = 0;
    Vec2 cos_coef;
    Vec2 sin_coef;
};

class TrigPerturbation {
  public:
    TrigPerturbation() = default;
    explicit TrigPerturbation(std::vector<TrigMode> modes) : modes_(std::move(modes)) {}

    bool empty() const { return modes_.empty(); }
    const std::vector<TrigMode>& modes() const { return modes_; }

    Vec2 value(const TorusPoint& p) const;
    Mat2 jacobian(const TorusPoint& p) const;
    Tensor222 second(const TorusPoint& p) const;

    // Coefficient-sum (triangle inequality) upper bounds; each dominates
    // the corresponding pointwise sup.
    double value_bound() const;
    double jacobian_bound() const;
    double second_bound() const;

  private:
    std::vector<TrigMode> modes_;
};

class TorusDiffeo {
  public:
    // Throws std::invalid_argument unless det A = 1 and the invertibility
    // margin ||Dp|| * ||A^-1|| < 1 holds.
    explicit TorusDiffeo(const IntMat2& linear, TrigPerturbation pert = {});

    TorusPoint apply(const TorusPoint& x) const;
    Mat2 jacobian(const TorusPoint& x) const;
    Tensor222 second(const TorusPoint& x) const;

    // Newton iteration on the displacement; exact for linear maps.
    // Throws std::runtime_error on non-convergence within max_iter.
    TorusPoint invert(const TorusPoint& y, double tol = 1e-12, int max_iter = 200) const;

    bool linear() const { return pert_.empty(); }
    const IntMat2& linear_part() const { return lin_; }
    const TrigPerturbation& pert() const { return pert_; }
    const Mat2& linear_mat() const { return A_; }
    const Mat2& linear_inv_mat() const { return A_inv_; }

    double invertibility_margin() const { return margin_; }

    // Rigorous coefficient-based upper bound for
    // max{||Df||, ||Df^-1||, ||D^2 f||, ||D^2 f^-1||}.
    double c2_norm_upper_bound() const;

  private:
    IntMat2 lin_;
    TrigPerturbation pert_;
    Mat2 A_;
    Mat2 A_inv_;
    double margin_ = 0.0;
};

// A composition chain steps[n-1] o ... o steps[0]; a plain diffeomorphism
// is the single-step case. Gathering produces multi-step chains when the
// blocks are nonlinear.
class TorusMap {
  public:
    TorusMap() : steps_{TorusDiffeo(IntMat2{})} {}
    TorusMap(TorusDiffeo f) : steps_{std::move(f)} {}
    explicit TorusMap(std::vector<TorusDiffeo> steps);

    const std::vector<TorusDiffeo>& steps() const { return steps_; }
    bool linear() const;
    // Product of the linear parts; throws if any step is nonlinear.
    IntMat2 linear_product() const;

    TorusPoint apply(const TorusPoint& x) const;
    Mat2 jacobian(const TorusPoint& x) const;
    Tensor222 second(const TorusPoint& x) const;
    TorusPoint invert(const TorusPoint& y, double tol = 1e-12, int max_iter = 200) const;

    // Jacobian of the inverse map at y, i.e. (Df(f^-1 y))^-1.
    Mat2 inverse_jacobian(const TorusPoint& y, double tol = 1e-12) const;

    // Collapses an all-linear chain to a single diffeomorphism.
    static TorusMap composed(std::vector<TorusDiffeo> steps);

  private:
    std::vector<TorusDiffeo> steps_;
};

struct MapEval {
    TorusPoint image;
    Mat2 jacobian;
    double second_norm = 0.0;
};

// order 0: image only; 1: + Jacobian; 2: + second-derivative norm.
MapEval evaluate(const TorusMap& f, const TorusPoint& x, int order);

// Per-map C^2 norm max{||Df||, ||Df^-1||, ||D^2 f||, ||D^2 f^-1||}:
// closed form for linear maps, sampled grid maximum otherwise.
struct C2Norm {
    double value = 0.0;
    bool exact = false;       // true when computed in closed form
    double rigorous_upper = 0.0;
};
C2Norm c2_norm(const TorusMap& f, int grid_n = 64);

// C^m distance between maps, m in {0, 1, 2}: the chart-metric with
// forward and inverse sups evaluated on a grid_n x grid_n lattice.
// Requires grid_n >= 16.
double cm_distance(const TorusMap& f, const TorusMap& g, int order, int grid_n);

}  // namespace anosov
