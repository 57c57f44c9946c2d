#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "splat2d/core.hpp"

namespace splat2d {

/// How per-Gaussian coherence is aggregated between densification rounds.
enum class GcrScope {
    Global,      ///< One ratio over every pixel and step since the last reset.
    PerStepMean, ///< Ratio per step, averaged over the steps the Gaussian was visible.
};

inline constexpr double kGcrEpsilon = 1e-8;

/// Per-Gaussian accumulators of positional subgradients.
///
/// Pixel subgradients arrive through accumulate(); finish_step() closes one
/// training step, folding the step's pixel-summed gradient into the
/// mean-norm statistics. Reads happen only at densification boundaries.
class GradStats {
public:
    explicit GradStats(std::size_t n = 0) { reset(n); }

    std::size_t size() const { return vec_sum_.size(); }

    void accumulate(std::size_t i, const Vec2& pixel_grad);
    /// Several pixel gradients of the current step at once: their vector sum
    /// and the sum of their norms.
    void accumulate_sum(std::size_t i, const Vec2& grad_sum, double norm_total);
    void finish_step();

    /// Zero every accumulator and resize to n slots.
    void reset(std::size_t n);
    void reset() { reset(size()); }

    /// Carry survivors forward. index_map[new] is the old slot or -1 for a
    /// fresh slot, which starts at zero.
    void remap(std::span<const std::ptrdiff_t> index_map);

    /// Add the pending per-step buffers of a partial accumulator (same size)
    /// into this one. Used to merge per-worker partials before finish_step().
    void absorb(const GradStats& partial);

    double gcr(std::size_t i, GcrScope scope = GcrScope::Global) const;
    double mean_grad_norm(std::size_t i) const;
    double abs_mean_grad_norm(std::size_t i) const;
    /// Mean of the per-step pixel-summed gradient vectors.
    Vec2 mean_grad(std::size_t i) const;

    const Vec2& vec_sum(std::size_t i) const { return vec_sum_.at(i); }
    double norm_sum(std::size_t i) const { return norm_sum_.at(i); }
    double grad_norm_sum(std::size_t i) const { return grad_norm_sum_.at(i); }
    std::uint64_t visible_count(std::size_t i) const { return visible_count_.at(i); }
    std::uint64_t steps() const { return steps_; }

    /// Columns: index,vec_sum_x,vec_sum_y,norm_sum,grad_norm_sum,visible_count,gcr
    void write_csv(std::ostream& out) const;

private:
    std::vector<Vec2> vec_sum_;
    std::vector<double> norm_sum_;
    std::vector<double> grad_norm_sum_;
    std::vector<std::uint64_t> visible_count_;
    std::vector<double> gcr_sum_;
    std::uint64_t steps_ = 0;

    // Pending contributions of the step in progress.
    std::vector<Vec2> step_vec_;
    std::vector<double> step_norm_;
    std::vector<unsigned char> step_hit_;
    std::vector<std::size_t> step_touched_;
};

} // namespace splat2d
