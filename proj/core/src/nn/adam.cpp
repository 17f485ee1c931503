#include "gfs/nn/adam.hpp"

#include <cmath>

#include "gfs/error.hpp"

namespace gfs::nn {

void adam_step(std::span<Param* const> params, const AdamOptions& opt, long step) {
  if (step < 1) throw InvalidArgument("adam step counter starts at 1");
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(step));
  for (Param* p : params) {
    p->first_moment = opt.beta1 * p->first_moment + (1.0 - opt.beta1) * p->grad;
    p->second_moment =
        opt.beta2 * p->second_moment + (1.0 - opt.beta2) * p->grad.cwiseProduct(p->grad);
    const auto m_hat = p->first_moment.array() / c1;
    const auto v_hat = p->second_moment.array() / c2;
    p->value.array() -=
        opt.learning_rate * (m_hat / (v_hat.sqrt() + opt.eps) + opt.weight_decay * p->value.array());
  }
}

}  // namespace gfs::nn
