#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "milkit/tensor.hpp"

namespace milkit {

/// A named, mutable view of one parameter tensor. The stable group names
/// ("word_emb", "q_enc.fwd.W_i", ...) are shared by the optimizer, the
/// checkpoint format and the gradient checker.
struct NamedTensorRef {
    std::string name;
    Tensor* tensor = nullptr;
};

struct GradCheckGroup {
    std::string name;
    double max_abs_err = 0.0;
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckGroup> groups;
    double max_rel_err = 0.0;

    bool within(double tol) const { return max_rel_err < tol; }
    std::string to_string() const;
};

/// Central-difference check of analytic gradients, one scalar at a time:
/// (f(t+eps) - f(t-eps)) / 2 eps against the supplied analytic value, with
/// relative error |a - n| / max(|a|, |n|, 1e-8).
///
/// loss_fn must be a deterministic function of the current parameter values;
/// it is re-evaluated with each scalar perturbed in place (and restored).
/// `params` and `analytic_grads` pair up by index and must match in shape.
GradCheckReport finite_diff_check(const std::function<double()>& loss_fn,
                                  std::span<const NamedTensorRef> params,
                                  std::span<const NamedTensorRef> analytic_grads,
                                  double epsilon = 1e-5);

}  // namespace milkit
