#include "milkit/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace milkit {

std::string GradCheckReport::to_string() const {
    std::ostringstream os;
    for (const auto& g : groups) {
        os << g.name << "\tmax_abs_err=" << g.max_abs_err << "\tmax_rel_err=" << g.max_rel_err
           << "\tworst_index=" << g.worst_index << "\tanalytic=" << g.analytic_at_worst
           << "\tnumeric=" << g.numeric_at_worst << "\n";
    }
    os << "overall\tmax_rel_err=" << max_rel_err << "\n";
    return os.str();
}

GradCheckReport finite_diff_check(const std::function<double()>& loss_fn,
                                  std::span<const NamedTensorRef> params,
                                  std::span<const NamedTensorRef> analytic_grads,
                                  double epsilon) {
    if (epsilon <= 0.0) throw NumericError("finite_diff_check: epsilon must be positive");
    if (params.size() != analytic_grads.size()) {
        throw ShapeError("finite_diff_check: parameter and gradient group counts differ");
    }

    GradCheckReport report;
    for (std::size_t g = 0; g < params.size(); ++g) {
        Tensor& theta = *params[g].tensor;
        const Tensor& analytic = *analytic_grads[g].tensor;
        require_same_shape(theta, analytic, "finite_diff_check");

        GradCheckGroup group;
        group.name = params[g].name;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + epsilon;
            const double up = loss_fn();
            theta[i] = saved - epsilon;
            const double down = loss_fn();
            theta[i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                throw NumericError("finite_diff_check: non-finite loss while perturbing " +
                                   group.name);
            }
            const double numeric = (up - down) / (2.0 * epsilon);
            const double a = analytic[i];
            const double abs_err = std::abs(a - numeric);
            const double rel_err = abs_err / std::max({std::abs(a), std::abs(numeric), 1e-8});
            if (rel_err > group.max_rel_err) {
                group.max_rel_err = rel_err;
                group.worst_index = i;
                group.analytic_at_worst = a;
                group.numeric_at_worst = numeric;
            }
            group.max_abs_err = std::max(group.max_abs_err, abs_err);
        }
        report.max_rel_err = std::max(report.max_rel_err, group.max_rel_err);
        report.groups.push_back(std::move(group));
    }
    return report;
}

}  // namespace milkit
