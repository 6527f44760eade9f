#pragma once
// Families of shear maps on the torus driven by a positive integer sequence.
// Even indices apply a lower unipotent shear [[1,0],[n,1]], odd indices an
// upper shear [[1,n],[0,1]]. Continued-fraction values built from the
// sequence give exact stable/unstable directions and per-step contraction
// rates, so growth bounds can be verified against closed-form data.

#include <vector>

#include "anosov/certificate.hpp"
#include "anosov/family.hpp"
#include "anosov/geom.hpp"

namespace anosov {

// A two-sided sequence of integers n_i >= 1.
struct IntSeqSpec {
    enum class Presentation { Periodic, Word };

    // entries repeat with period entries.size(), aligned so index 0 maps to
    // entries[0].
    static IntSeqSpec periodic(std::vector<long> entries);

    // entries[0..] occupy indices core_start..core_start+size-1; outside the
    // core the sequence is constant (left_value to the left, right_value to
    // the right).
    static IntSeqSpec word(long core_start, std::vector<long> entries,
                           long left_value, long right_value);

    long at(long i) const;
    long period() const;  // 0 for word presentations
    long core_end() const { return core_start_ + static_cast<long>(entries_.size()) - 1; }
    long core_start() const { return core_start_; }

    Presentation presentation() const { return presentation_; }
    const std::vector<long>& entries() const { return entries_; }
    long left_value() const { return left_value_; }
    long right_value() const { return right_value_; }

  private:
    Presentation presentation_ = Presentation::Periodic;
    std::vector<long> entries_;
    long core_start_ = 0;
    long left_value_ = 1;
    long right_value_ = 1;
};

// The shear matrix applied at index i: lower unipotent for even i, upper for
// odd i, with off-diagonal entry seq.at(i).
IntMat2 shear_matrix(const IntSeqSpec& seq, long i);

// Value of the continued fraction 1/(m_0 + 1/(m_1 + ...)) where
// m_t = seq.at(start + step*t). step = +1 reads forward, -1 backward.
struct CFValue {
    double value = 0.0;
    int depth = 0;
    double error_bound = 0.0;  // interval bound 1/(q_k q_{k+1}) at truncation
};

// Fixed-depth evaluation (backward recurrence), with the convergent-based
// error bound.
CFValue cf_eval(const IntSeqSpec& seq, long start, int step, int depth);

// Adaptive evaluation: deepens until the interval bound drops below
// target_error (default 1e-13).
CFValue cf_value(const IntSeqSpec& seq, long start, int step,
                 double target_error = 1e-13);

// Exact quadratic-surd value for periodic sequences: the fixed point in
// (0, 1) of the Moebius map given by one period of the expansion. Throws for
// word presentations.
double cf_surd(const IntSeqSpec& seq, long start, int step);

// Per-index splitting data over a window: stable directions s_i = (a_i, -b_i),
// unstable directions u_i = (c_i, d_i) with a_i d_i + b_i c_i = 1 and
// c_i > 0, and per-step rates lambda_i (the matrix at index i carries s_i to
// lambda_i * s_{i+1} and u_i to lambda_i^{-1} * u_{i+1}).
struct SplittingData {
    Window window{0, 0};
    std::vector<double> a, b, c, d;       // indexed window.lo .. window.hi
    std::vector<double> lambda;           // same indexing
    std::vector<Vec2> s, u;               // unnormalised frame vectors
    double c_const = 1.0;                 // sup-ratio constant for the norms
    bool c_const_exact = false;           // true when the window covers a full period

    long lo() const { return window.lo; }
    std::size_t idx(long i) const { return static_cast<std::size_t>(i - window.lo); }
};

SplittingData build_splitting_data(const IntSeqSpec& seq, Window window);

struct MultiplicativeFamily {
    FamilySpec family;
    SplittingData data;
};

// Assemble the family of shear maps plus its splitting data. For periodic
// sequences the family period is lcm(period, 2) so that matrix parity stays
// consistent; the data window covers one family period. For word
// presentations the window pads the core by `pad` on each side.
MultiplicativeFamily build_multiplicative(const IntSeqSpec& seq, long pad = 40);

// Check the closed-form growth bounds on a window:
//   prod_{t<n} lambda_{i+t}        <= 2 * (sqrt(2/3))^n
//   |A^(n) s_i| <= 2 c lambda^n |s_i|,  |A^(n) u_i| >= (2c)^-1 lambda^-n |u_i|
// for all i in the window and 1 <= n <= n_max, with relative slack rtol.
Certificate verify_growth_bounds(const IntSeqSpec& seq, Window window,
                                 int n_max, double rtol = 1e-9);

// Check the neighbour rule: whenever lambda_j in (2/3, 1), then
// lambda_{j-1} < 2/3 and lambda_{j+1} < 1/2. Witnesses record every j that
// triggers the premise.
Certificate neighbor_rate_check(const IntSeqSpec& seq, Window window);

// Factorisation of a nonnegative unimodular integer matrix into alternating
// powers of the elementary shears M = [[1,0],[1,1]] and N = [[1,1],[0,1]].
struct GeneratorWord {
    bool first_is_upper = false;        // true when the leftmost factor is N
    std::vector<long long> exponents;   // alternating generators, all >= 1
    // true when the word matches the canonical shape: leftmost factor a
    // power of M, rightmost a power of N.
    bool ends_nonzero = false;
};

// Greedy left-peeling: strip the largest power of N when the top row
// dominates entrywise, of M when the bottom row dominates. Requires
// nonnegative entries, det 1, and F != I.
GeneratorWord factorize_sl2n(const IntMat2& F);

IntMat2 reconstruct(const GeneratorWord& word);

}  // namespace anosov
