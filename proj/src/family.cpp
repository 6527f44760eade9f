#include "anosov/family.hpp"

#include <map>
#include <numeric>
#include <stdexcept>

namespace anosov {

FamilySpec FamilySpec::constant(TorusMap map) {
    FamilySpec f;
    f.pres_ = Presentation::Constant;
    f.maps_.push_back(std::move(map));
    return f;
}

FamilySpec FamilySpec::periodic(std::vector<TorusMap> maps) {
    if (maps.empty()) throw std::invalid_argument("FamilySpec::periodic: empty map list");
    FamilySpec f;
    f.pres_ = Presentation::Periodic;
    f.maps_ = std::move(maps);
    return f;
}

FamilySpec FamilySpec::word(long core_start, std::vector<TorusMap> core,
                            std::vector<TorusMap> left_tail,
                            std::vector<TorusMap> right_tail) {
    if (core.empty()) throw std::invalid_argument("FamilySpec::word: empty core");
    if (left_tail.empty() || right_tail.empty())
        throw std::invalid_argument("FamilySpec::word: empty tail pattern");
    FamilySpec f;
    f.pres_ = Presentation::Word;
    f.maps_ = std::move(core);
    f.core_start_ = core_start;
    f.left_ = std::move(left_tail);
    f.right_ = std::move(right_tail);
    return f;
}

long FamilySpec::period() const {
    switch (pres_) {
        case Presentation::Constant: return 1;
        case Presentation::Periodic: return static_cast<long>(maps_.size());
        case Presentation::Word: return 0;
    }
    return 0;
}

const TorusMap& FamilySpec::map_at(long i) const {
    switch (pres_) {
        case Presentation::Constant:
            return maps_.front();
        case Presentation::Periodic:
            return maps_[floor_mod(i, static_cast<long>(maps_.size()))];
        case Presentation::Word: {
            if (i < core_start_) {
                const long t = core_start_ - 1 - i;
                return left_[floor_mod(t, static_cast<long>(left_.size()))];
            }
            if (i > core_end()) {
                const long t = i - core_end() - 1;
                return right_[floor_mod(t, static_cast<long>(right_.size()))];
            }
            return maps_[i - core_start_];
        }
    }
    throw std::logic_error("FamilySpec::map_at: unreachable");
}

bool FamilySpec::all_linear() const {
    for (const auto& m : maps_)
        if (!m.linear()) return false;
    for (const auto& m : left_)
        if (!m.linear()) return false;
    for (const auto& m : right_)
        if (!m.linear()) return false;
    return true;
}

long FamilySpec::representative_key(long i) const {
    switch (pres_) {
        case Presentation::Constant: return 0;
        case Presentation::Periodic: return floor_mod(i, static_cast<long>(maps_.size()));
        case Presentation::Word: {
            if (i < core_start_)
                return -1 - floor_mod(core_start_ - 1 - i, static_cast<long>(left_.size()));
            if (i > core_end())
                return core_end() + 1 - core_start_ +
                       floor_mod(i - core_end() - 1, static_cast<long>(right_.size()));
            return i - core_start_;
        }
    }
    return 0;
}

CocycleResult compose(const FamilySpec& F, long i, long n, const TorusPoint& x, double tol) {
    constexpr long kStepCap = 1000000;
    if (n > kStepCap || n < -kStepCap)
        throw std::invalid_argument("compose: |n| exceeds the step cap");
    CocycleResult out{x, Mat2::identity()};
    if (n >= 0) {
        for (long k = 0; k < n; ++k) {
            const TorusMap& m = F.map_at(i + k);
            out.jacobian = m.jacobian(out.point) * out.jacobian;
            out.point = m.apply(out.point);
        }
    } else {
        for (long k = 1; k <= -n; ++k) {
            const TorusMap& m = F.map_at(i - k);
            out.point = m.invert(out.point, tol);
            out.jacobian = m.jacobian(out.point).inverse() * out.jacobian;
        }
    }
    return out;
}

namespace {

// Concatenate the chains of maps at indices [start, start + len) in
// application order and collapse if fully linear.
TorusMap compose_block(const FamilySpec& F, long start, long len) {
    std::vector<TorusDiffeo> steps;
    for (long t = 0; t < len; ++t) {
        const TorusMap& m = F.map_at(start + t);
        steps.insert(steps.end(), m.steps().begin(), m.steps().end());
    }
    return TorusMap::composed(std::move(steps));
}

long block_start(long origin, const std::vector<long>& lengths, long j) {
    const long L = static_cast<long>(lengths.size());
    long pos = origin;
    if (j >= 0) {
        for (long t = 0; t < j; ++t) pos += lengths[floor_mod(t, L)];
    } else {
        for (long t = -1; t >= j; --t) pos -= lengths[floor_mod(t, L)];
    }
    return pos;
}

}  // namespace

FamilySpec gather(const FamilySpec& F, const GatherSpec& spec) {
    if (spec.block_lengths.empty())
        throw std::invalid_argument("gather: empty block-length pattern");
    for (long b : spec.block_lengths)
        if (b < 1)
            throw std::invalid_argument(
                "gather: cuts must be strictly increasing (block lengths >= 1)");

    const long L = static_cast<long>(spec.block_lengths.size());
    const long B = std::accumulate(spec.block_lengths.begin(), spec.block_lengths.end(), 0L);

    switch (F.presentation()) {
        case FamilySpec::Presentation::Constant: {
            std::vector<TorusMap> blocks;
            for (long j = 0; j < L; ++j)
                blocks.push_back(
                    compose_block(F, block_start(spec.origin, spec.block_lengths, j),
                                  spec.block_lengths[j]));
            if (L == 1) return FamilySpec::constant(std::move(blocks.front()));
            return FamilySpec::periodic(std::move(blocks));
        }
        case FamilySpec::Presentation::Periodic: {
            const long P = F.period();
            const long g = std::gcd(B, P);
            const long out_period = L * (P / g);
            std::vector<TorusMap> blocks;
            blocks.reserve(out_period);
            for (long j = 0; j < out_period; ++j)
                blocks.push_back(
                    compose_block(F, block_start(spec.origin, spec.block_lengths, j),
                                  spec.block_lengths[floor_mod(j, L)]));
            if (out_period == 1) return FamilySpec::constant(std::move(blocks.front()));
            return FamilySpec::periodic(std::move(blocks));
        }
        case FamilySpec::Presentation::Word: {
            if (L != 1)
                throw std::invalid_argument(
                    "gather: word presentations require a uniform block length");
            const long b = spec.block_lengths.front();
            const long a = F.core_start();
            const long core_len = static_cast<long>(F.maps().size());
            // Blocks whose span intersects the core.
            const long j_lo = static_cast<long>(
                std::floor(static_cast<double>(a - spec.origin) / b));
            const long j_hi = static_cast<long>(
                std::floor(static_cast<double>(a + core_len - 1 - spec.origin) / b));
            std::vector<TorusMap> core_blocks;
            for (long j = j_lo; j <= j_hi; ++j)
                core_blocks.push_back(compose_block(F, spec.origin + j * b, b));
            const long left_cycle =
                static_cast<long>(F.left_tail().size()) /
                std::gcd(b, static_cast<long>(F.left_tail().size()));
            const long right_cycle =
                static_cast<long>(F.right_tail().size()) /
                std::gcd(b, static_cast<long>(F.right_tail().size()));
            std::vector<TorusMap> gl, gr;
            for (long t = 0; t < left_cycle; ++t)
                gl.push_back(compose_block(F, spec.origin + (j_lo - 1 - t) * b, b));
            for (long t = 0; t < right_cycle; ++t)
                gr.push_back(compose_block(F, spec.origin + (j_hi + 1 + t) * b, b));
            return FamilySpec::word(j_lo, std::move(core_blocks), std::move(gl),
                                    std::move(gr));
        }
    }
    throw std::logic_error("gather: unreachable");
}

double d_unif(const FamilySpec& F, const FamilySpec& G, int order, const Window& window,
              int grid_n) {
    std::map<std::pair<long, long>, double> memo;
    double sup = 0.0;
    for (long i = window.lo; i <= window.hi; ++i) {
        const std::pair<long, long> key{F.representative_key(i), G.representative_key(i)};
        auto it = memo.find(key);
        double val;
        if (it != memo.end()) {
            val = it->second;
        } else {
            val = std::fmin(cm_distance(F.map_at(i), G.map_at(i), order, grid_n), 1.0);
            memo.emplace(key, val);
        }
        sup = std::fmax(sup, val);
    }
    return sup;
}

C2SupBound c2_sup_bound(const FamilySpec& F, const Window& window, int grid_n) {
    std::map<long, C2Norm> memo;
    C2SupBound out;
    out.exact = true;
    for (long i = window.lo; i <= window.hi; ++i) {
        const long key = F.representative_key(i);
        auto it = memo.find(key);
        if (it == memo.end()) it = memo.emplace(key, c2_norm(F.map_at(i), grid_n)).first;
        out.S = std::fmax(out.S, it->second.value);
        out.exact = out.exact && it->second.exact;
    }
    if (out.S <= 0.0) throw std::logic_error("c2_sup_bound: degenerate family norm");
    out.r_bound = 1.0 / (40.0 * out.S);
    return out;
}

}  // namespace anosov
