#include "anosov/multiplicative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace anosov {

namespace {

void check_entries(const std::vector<long>& entries) {
    if (entries.empty())
        throw std::invalid_argument("IntSeqSpec: empty entry list");
    for (long n : entries)
        if (n < 1) throw std::invalid_argument("IntSeqSpec: entries must be >= 1");
}

bool is_even(long i) { return floor_mod(i, 2) == 0; }

}  // namespace

IntSeqSpec IntSeqSpec::periodic(std::vector<long> entries) {
    check_entries(entries);
    IntSeqSpec s;
    s.presentation_ = Presentation::Periodic;
    s.entries_ = std::move(entries);
    return s;
}

IntSeqSpec IntSeqSpec::word(long core_start, std::vector<long> entries,
                            long left_value, long right_value) {
    check_entries(entries);
    if (left_value < 1 || right_value < 1)
        throw std::invalid_argument("IntSeqSpec: tail values must be >= 1");
    IntSeqSpec s;
    s.presentation_ = Presentation::Word;
    s.entries_ = std::move(entries);
    s.core_start_ = core_start;
    s.left_value_ = left_value;
    s.right_value_ = right_value;
    return s;
}

long IntSeqSpec::at(long i) const {
    if (presentation_ == Presentation::Periodic) {
        const long p = static_cast<long>(entries_.size());
        return entries_[static_cast<std::size_t>(floor_mod(i, p))];
    }
    if (i < core_start_) return left_value_;
    if (i > core_end()) return right_value_;
    return entries_[static_cast<std::size_t>(i - core_start_)];
}

long IntSeqSpec::period() const {
    return presentation_ == Presentation::Periodic
               ? static_cast<long>(entries_.size())
               : 0;
}

IntMat2 shear_matrix(const IntSeqSpec& seq, long i) {
    const long long n = seq.at(i);
    if (is_even(i)) return IntMat2{1, 0, n, 1};
    return IntMat2{1, n, 0, 1};
}

CFValue cf_eval(const IntSeqSpec& seq, long start, int step, int depth) {
    if (depth < 1) throw std::invalid_argument("cf_eval: depth must be >= 1");
    if (step != 1 && step != -1)
        throw std::invalid_argument("cf_eval: step must be +1 or -1");
    // Backward recurrence for the value.
    double x = 0.0;
    for (int t = depth - 1; t >= 0; --t) {
        const double m = static_cast<double>(seq.at(start + step * t));
        x = 1.0 / (m + x);
    }
    // Convergent denominators q_k = m_{k-1} q_{k-1} + q_{k-2} give the
    // two-sided interval bound 1/(q_{depth} q_{depth+1}).
    double q_prev = 0.0, q = 1.0;
    for (int t = 0; t < depth; ++t) {
        const double m = static_cast<double>(seq.at(start + step * t));
        const double q_next = m * q + q_prev;
        q_prev = q;
        q = q_next;
        if (q > 1e200) break;  // bound already far below any target
    }
    const double m_next = static_cast<double>(seq.at(start + step * depth));
    const double q_after = m_next * q + q_prev;
    CFValue out;
    out.value = x;
    out.depth = depth;
    out.error_bound = 1.0 / (q * q_after);
    return out;
}

CFValue cf_value(const IntSeqSpec& seq, long start, int step,
                 double target_error) {
    if (!(target_error > 0.0))
        throw std::invalid_argument("cf_value: target error must be positive");
    // Entries >= 1 make the denominators grow at least like Fibonacci
    // numbers, so depth 80 always reaches ~1e-16; deepen geometrically.
    for (int depth = 24; depth <= 384; depth *= 2) {
        CFValue v = cf_eval(seq, start, step, depth);
        if (v.error_bound < target_error) return v;
    }
    throw std::runtime_error("cf_value: adaptive depth failed to converge");
}

double cf_surd(const IntSeqSpec& seq, long start, int step) {
    if (seq.presentation() != IntSeqSpec::Presentation::Periodic)
        throw std::invalid_argument("cf_surd: requires a periodic sequence");
    if (step != 1 && step != -1)
        throw std::invalid_argument("cf_surd: step must be +1 or -1");
    const long p = seq.period();
    // One period of the expansion as a Moebius map x -> (ax + b)/(cx + d),
    // outermost partial quotient first.
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    for (long t = 0; t < p; ++t) {
        const double m = static_cast<double>(seq.at(start + step * t));
        // Compose on the right with x -> 1/(m + x) = (0x + 1)/(1x + m).
        const double na = b, nb = a + b * m;
        const double nc = d, nd = c + d * m;
        a = na; b = nb; c = nc; d = nd;
    }
    // Fixed point in (0, 1): c v^2 + (d - a) v - b = 0, positive root.
    const double disc = (d - a) * (d - a) + 4.0 * b * c;
    return ((a - d) + std::sqrt(disc)) / (2.0 * c);
}

SplittingData build_splitting_data(const IntSeqSpec& seq, Window window) {
    SplittingData data;
    data.window = window;
    const long n = window.length();
    data.a.reserve(static_cast<std::size_t>(n));
    for (long i = window.lo; i <= window.hi; ++i) {
        const double v = cf_value(seq, i, +1).value;        // forward value at i
        const double rho = cf_value(seq, i - 1, -1).value;  // backward value at i
        double ai, bi, ci, di;
        const double denom = 1.0 + v * rho;
        if (is_even(i)) {
            ai = v;
            bi = 1.0;
            ci = 1.0 / denom;
            di = rho / denom;
        } else {
            ai = 1.0;
            bi = v;
            ci = rho / denom;
            di = 1.0 / denom;
        }
        data.a.push_back(ai);
        data.b.push_back(bi);
        data.c.push_back(ci);
        data.d.push_back(di);
        data.lambda.push_back(v);
        data.s.push_back(Vec2{ai, -bi});
        data.u.push_back(Vec2{ci, di});
    }
    double s_min = std::numeric_limits<double>::infinity(), s_max = 0.0;
    double u_min = std::numeric_limits<double>::infinity(), u_max = 0.0;
    for (long i = window.lo; i <= window.hi; ++i) {
        const double ns = data.s[data.idx(i)].norm();
        const double nu = data.u[data.idx(i)].norm();
        s_min = std::min(s_min, ns);
        s_max = std::max(s_max, ns);
        u_min = std::min(u_min, nu);
        u_max = std::max(u_max, nu);
    }
    data.c_const = std::max(1.0, std::max(s_max / s_min, u_max / u_min));
    if (seq.presentation() == IntSeqSpec::Presentation::Periodic) {
        const long pfam = std::lcm(seq.period(), 2L);
        data.c_const_exact = (window.length() >= pfam);
    } else {
        data.c_const_exact = false;
    }
    return data;
}

MultiplicativeFamily build_multiplicative(const IntSeqSpec& seq, long pad) {
    if (pad < 0) throw std::invalid_argument("build_multiplicative: pad must be >= 0");
    if (seq.presentation() == IntSeqSpec::Presentation::Periodic) {
        const long pfam = std::lcm(seq.period(), 2L);
        std::vector<TorusMap> maps;
        maps.reserve(static_cast<std::size_t>(pfam));
        for (long i = 0; i < pfam; ++i)
            maps.emplace_back(TorusDiffeo(shear_matrix(seq, i)));
        return MultiplicativeFamily{FamilySpec::periodic(std::move(maps)),
                                    build_splitting_data(seq, Window{0, pfam - 1})};
    }
    const long lo = seq.core_start();
    const long hi = seq.core_end();
    std::vector<TorusMap> core;
    core.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (long i = lo; i <= hi; ++i)
        core.emplace_back(TorusDiffeo(shear_matrix(seq, i)));
    // Tails alternate parity, so each tail pattern has two elements: the map
    // at the first tail index outward, then the next.
    std::vector<TorusMap> left{TorusDiffeo(shear_matrix(seq, lo - 1)),
                               TorusDiffeo(shear_matrix(seq, lo - 2))};
    std::vector<TorusMap> right{TorusDiffeo(shear_matrix(seq, hi + 1)),
                                TorusDiffeo(shear_matrix(seq, hi + 2))};
    return MultiplicativeFamily{
        FamilySpec::word(lo, std::move(core), std::move(left), std::move(right)),
        build_splitting_data(seq, Window{lo - pad, hi + pad})};
}

Certificate verify_growth_bounds(const IntSeqSpec& seq, Window window,
                                 int n_max, double rtol) {
    if (n_max < 1)
        throw std::invalid_argument("verify_growth_bounds: n_max must be >= 1");
    Certificate cert;
    cert.kind = "multiplicative_growth_bounds";
    cert.window_lo = window.lo;
    cert.window_hi = window.hi;
    cert.tolerances["relative_slack"] = rtol;

    const Window ext{window.lo, window.hi + n_max};
    const SplittingData data = build_splitting_data(seq, ext);
    const double lambda_ref = std::sqrt(2.0 / 3.0);
    const double c = data.c_const;
    cert.constants["c_const"] = c;
    cert.constants["lambda_ref"] = lambda_ref;
    if (!data.c_const_exact)
        cert.notes.push_back(
            "c_const sampled over the padded window only (word tails); treat "
            "as approximate");

    double min_margin_prod = std::numeric_limits<double>::infinity();
    double min_margin_s = std::numeric_limits<double>::infinity();
    double min_margin_u = std::numeric_limits<double>::infinity();
    Witness worst;
    bool ok = true;

    for (long i = window.lo; i <= window.hi; ++i) {
        double prod = 1.0;
        Mat2 mat{1.0, 0.0, 0.0, 1.0};
        double pow_ref = 1.0;
        const Vec2 si = data.s[data.idx(i)];
        const Vec2 ui = data.u[data.idx(i)];
        const double ns = si.norm(), nu = ui.norm();
        for (int n = 1; n <= n_max; ++n) {
            const long j = i + n - 1;
            prod *= data.lambda[data.idx(j)];
            mat = shear_matrix(seq, j).to_mat2() * mat;
            pow_ref *= lambda_ref;

            const double prod_rhs = 2.0 * pow_ref;
            const double s_lhs = (mat * si).norm();
            const double s_rhs = 2.0 * c * pow_ref * ns;
            const double u_lhs = (mat * ui).norm();
            const double u_rhs = pow_ref > 0 ? nu / (2.0 * c * pow_ref) : 0.0;

            const double m_prod = prod_rhs / prod;
            const double m_s = s_rhs / s_lhs;
            const double m_u = u_lhs / u_rhs;
            const bool fail = m_prod < 1.0 - rtol || m_s < 1.0 - rtol ||
                              m_u < 1.0 - rtol;
            const double worst_here = std::min({m_prod, m_s, m_u});
            if (worst_here <
                std::min({min_margin_prod, min_margin_s, min_margin_u})) {
                worst.label = "tightest sample";
                worst.scalars = {{"i", static_cast<double>(i)},
                                 {"n", static_cast<double>(n)},
                                 {"lambda_product", prod},
                                 {"product_bound", prod_rhs},
                                 {"stable_growth", s_lhs},
                                 {"stable_bound", s_rhs},
                                 {"unstable_growth", u_lhs},
                                 {"unstable_lower_bound", u_rhs}};
            }
            min_margin_prod = std::min(min_margin_prod, m_prod);
            min_margin_s = std::min(min_margin_s, m_s);
            min_margin_u = std::min(min_margin_u, m_u);
            if (fail) ok = false;
        }
    }
    cert.constants["min_margin_product"] = min_margin_prod;
    cert.constants["min_margin_stable"] = min_margin_s;
    cert.constants["min_margin_unstable"] = min_margin_u;
    cert.constants["n_max"] = n_max;
    cert.witnesses.push_back(std::move(worst));
    cert.status = ok ? CertStatus::Certified : CertStatus::Falsified;
    return cert;
}

Certificate neighbor_rate_check(const IntSeqSpec& seq, Window window) {
    Certificate cert;
    cert.kind = "neighbor_rate_check";
    cert.window_lo = window.lo;
    cert.window_hi = window.hi;
    bool ok = true;
    long triggered = 0;
    for (long j = window.lo; j <= window.hi; ++j) {
        const double lj = cf_value(seq, j, +1).value;
        if (!(lj > 2.0 / 3.0 && lj < 1.0)) continue;
        ++triggered;
        const double lprev = cf_value(seq, j - 1, +1).value;
        const double lnext = cf_value(seq, j + 1, +1).value;
        const bool holds = lprev < 2.0 / 3.0 && lnext < 0.5;
        if (!holds) ok = false;
        Witness w;
        w.label = holds ? "premise holds" : "violation";
        w.scalars = {{"j", static_cast<double>(j)},
                     {"lambda_j", lj},
                     {"lambda_prev", lprev},
                     {"lambda_next", lnext},
                     {"entry_j", static_cast<double>(seq.at(j))},
                     {"entry_next", static_cast<double>(seq.at(j + 1))}};
        cert.witnesses.push_back(std::move(w));
    }
    cert.constants["triggered"] = static_cast<double>(triggered);
    cert.status = ok ? CertStatus::Certified : CertStatus::Falsified;
    return cert;
}

namespace {

bool is_identity(const IntMat2& m) {
    return m.a == 1 && m.b == 0 && m.c == 0 && m.d == 1;
}

}  // namespace

GeneratorWord factorize_sl2n(const IntMat2& F) {
    if (F.a < 0 || F.b < 0 || F.c < 0 || F.d < 0)
        throw std::invalid_argument("factorize_sl2n: entries must be nonnegative");
    if (F.det() != 1)
        throw std::invalid_argument("factorize_sl2n: determinant must be 1");
    if (is_identity(F))
        throw std::invalid_argument("factorize_sl2n: identity has the empty word");

    GeneratorWord word;
    IntMat2 cur = F;
    bool first = true;
    while (!is_identity(cur)) {
        const bool top_dominates = cur.a >= cur.c && cur.b >= cur.d;
        long long e;
        if (top_dominates) {
            // Strip N^e from the left: subtract e * row2 from row1.
            const long long ea = cur.c > 0 ? cur.a / cur.c
                                           : std::numeric_limits<long long>::max();
            const long long eb = cur.d > 0 ? cur.b / cur.d
                                           : std::numeric_limits<long long>::max();
            e = std::min(ea, eb);
            cur = IntMat2{cur.a - e * cur.c, cur.b - e * cur.d, cur.c, cur.d};
        } else {
            // Strip M^e from the left: subtract e * row1 from row2.
            const long long ec = cur.a > 0 ? cur.c / cur.a
                                           : std::numeric_limits<long long>::max();
            const long long ed = cur.b > 0 ? cur.d / cur.b
                                           : std::numeric_limits<long long>::max();
            e = std::min(ec, ed);
            cur = IntMat2{cur.a, cur.b, cur.c - e * cur.a, cur.d - e * cur.b};
        }
        if (e < 1)
            throw std::logic_error("factorize_sl2n: stalled (invalid input)");
        if (first) {
            word.first_is_upper = top_dominates;
            first = false;
        }
        word.exponents.push_back(e);
    }
    const bool last_is_upper =
        word.exponents.size() % 2 == 1 ? word.first_is_upper
                                       : !word.first_is_upper;
    word.ends_nonzero = !word.first_is_upper && last_is_upper;
    return word;
}

IntMat2 reconstruct(const GeneratorWord& word) {
    IntMat2 out{};
    bool upper = word.first_is_upper;
    for (long long e : word.exponents) {
        if (e < 1)
            throw std::invalid_argument("reconstruct: exponents must be >= 1");
        const IntMat2 factor =
            upper ? IntMat2{1, e, 0, 1} : IntMat2{1, 0, e, 1};
        out = out * factor;
        upper = !upper;
    }
    return out;
}

}  // namespace anosov
