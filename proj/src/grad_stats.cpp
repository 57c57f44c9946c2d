#include "splat2d/grad_stats.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <stdexcept>
#include <string>

namespace splat2d {

void GradStats::accumulate(std::size_t i, const Vec2& pixel_grad) {
    if (i >= size()) throw std::out_of_range("GradStats::accumulate: index " + std::to_string(i) + " out of range");
    const double n = norm(pixel_grad);
    vec_sum_[i] += pixel_grad;
    norm_sum_[i] += n;
    step_vec_[i] += pixel_grad;
    step_norm_[i] += n;
    if (!step_hit_[i]) {
        step_hit_[i] = 1;
        step_touched_.push_back(i);
    }
}

void GradStats::accumulate_sum(std::size_t i, const Vec2& grad_sum, double norm_total) {
    if (i >= size()) throw std::out_of_range("GradStats::accumulate_sum: index " + std::to_string(i) + " out of range");
    vec_sum_[i] += grad_sum;
    norm_sum_[i] += norm_total;
    step_vec_[i] += grad_sum;
    step_norm_[i] += norm_total;
    if (!step_hit_[i]) {
        step_hit_[i] = 1;
        step_touched_.push_back(i);
    }
}

void GradStats::finish_step() {
    // Keep the fold order independent of the order pixels touched slots.
    std::sort(step_touched_.begin(), step_touched_.end());
    for (std::size_t i : step_touched_) {
        const double n = norm(step_vec_[i]);
        grad_norm_sum_[i] += n;
        gcr_sum_[i] += n / (step_norm_[i] + kGcrEpsilon);
        ++visible_count_[i];
        step_vec_[i] = {};
        step_norm_[i] = 0.0;
        step_hit_[i] = 0;
    }
    step_touched_.clear();
    ++steps_;
}

void GradStats::reset(std::size_t n) {
    vec_sum_.assign(n, Vec2{});
    norm_sum_.assign(n, 0.0);
    grad_norm_sum_.assign(n, 0.0);
    visible_count_.assign(n, 0);
    gcr_sum_.assign(n, 0.0);
    step_vec_.assign(n, Vec2{});
    step_norm_.assign(n, 0.0);
    step_hit_.assign(n, 0);
    step_touched_.clear();
    steps_ = 0;
}

void GradStats::remap(std::span<const std::ptrdiff_t> index_map) {
    if (!step_touched_.empty()) throw std::logic_error("GradStats::remap: step in progress");
    const std::size_t old_n = size();
    GradStats next(index_map.size());
    next.steps_ = steps_;
    for (std::size_t j = 0; j < index_map.size(); ++j) {
        const std::ptrdiff_t src = index_map[j];
        if (src < 0) continue;
        if (static_cast<std::size_t>(src) >= old_n) throw std::out_of_range("GradStats::remap: source index out of range");
        const auto s = static_cast<std::size_t>(src);
        next.vec_sum_[j] = vec_sum_[s];
        next.norm_sum_[j] = norm_sum_[s];
        next.grad_norm_sum_[j] = grad_norm_sum_[s];
        next.visible_count_[j] = visible_count_[s];
        next.gcr_sum_[j] = gcr_sum_[s];
    }
    *this = std::move(next);
}

void GradStats::absorb(const GradStats& partial) {
    if (partial.size() != size()) throw std::invalid_argument("GradStats::absorb: size mismatch");
    std::vector<std::size_t> touched = partial.step_touched_;
    std::sort(touched.begin(), touched.end());
    for (std::size_t i : touched) {
        vec_sum_[i] += partial.step_vec_[i];
        norm_sum_[i] += partial.step_norm_[i];
        step_vec_[i] += partial.step_vec_[i];
        step_norm_[i] += partial.step_norm_[i];
        if (!step_hit_[i]) {
            step_hit_[i] = 1;
            step_touched_.push_back(i);
        }
    }
}

double GradStats::gcr(std::size_t i, GcrScope scope) const {
    if (scope == GcrScope::PerStepMean) {
        const auto count = visible_count_.at(i);
        return count == 0 ? 0.0 : gcr_sum_[i] / static_cast<double>(count);
    }
    return norm(vec_sum_.at(i)) / (norm_sum_[i] + kGcrEpsilon);
}

double GradStats::mean_grad_norm(std::size_t i) const {
    return grad_norm_sum_.at(i) / static_cast<double>(std::max<std::uint64_t>(visible_count_[i], 1));
}

double GradStats::abs_mean_grad_norm(std::size_t i) const {
    return norm_sum_.at(i) / static_cast<double>(std::max<std::uint64_t>(visible_count_[i], 1));
}

Vec2 GradStats::mean_grad(std::size_t i) const {
    return vec_sum_.at(i) * (1.0 / static_cast<double>(std::max<std::uint64_t>(visible_count_[i], 1)));
}

namespace {
std::string fmt(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}
} // namespace

void GradStats::write_csv(std::ostream& out) const {
    out << "index,vec_sum_x,vec_sum_y,norm_sum,grad_norm_sum,visible_count,gcr\n";
    for (std::size_t i = 0; i < size(); ++i) {
        out << i << ',' << fmt(vec_sum_[i].x) << ',' << fmt(vec_sum_[i].y) << ',' << fmt(norm_sum_[i]) << ','
            << fmt(grad_norm_sum_[i]) << ',' << visible_count_[i] << ',' << fmt(gcr(i)) << '\n';
    }
}

} // namespace splat2d
