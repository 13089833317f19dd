#include "reverso/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace reverso {

double grad_check(const std::vector<ParamRef>& params,
                  const std::function<double()>& loss,
                  const std::function<void()>& backward,
                  double step) {
    for (const auto& pr : params) pr.p->zero_grad();
    backward();

    double worst = 0.0;
    for (const auto& pr : params) {
        GradPair& gp = *pr.p;
        for (std::size_t i = 0; i < gp.size(); ++i) {
            const double orig = gp.value.data[i];
            gp.value.data[i] = orig + step;
            const double up = loss();
            gp.value.data[i] = orig - step;
            const double down = loss();
            gp.value.data[i] = orig;
            const double numeric = (up - down) / (2.0 * step);
            const double analytic = gp.grad.data[i];
            const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace reverso
