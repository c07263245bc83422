#pragma once

#include "hlc/model/timestep_graph.hpp"
#include "hlc/sp/kalman.hpp"

namespace hlc {

/// Gain inference by running the per-step sum-product schedule. Holds one
/// clamped timestep graph and re-executes it with the previous posterior as
/// the g_{k-1} prior.
class MessagePassingFilter {
 public:
  explicit MessagePassingFilter(const Theta& theta, ModelId model = ModelId::reference)
      : theta_(theta), slice_(build_timestep_graph(model, ClampedTheta{theta})) {}

  const TimestepGraph& slice() const { return slice_; }
  const Theta& theta() const { return theta_; }

  GainState step(const GainState& prior, double s) {
    ffg::Graph& g = slice_.graph;
    g.reset_messages();
    g.set_value(slice_.g_prev_node, prior.message());
    g.set_value(slice_.level_node, DeltaMessage(s));
    ffg::execute_schedule(g, slice_.schedule);
    const auto& fw = g.edge(slice_.g_next).forward;
    const auto& post = std::get<GaussianMessage>(*fw);
    return {post.mean(), post.variance()};
  }

 private:
  Theta theta_;
  TimestepGraph slice_;
};

/// Posterior over g_k after one pass of the thirteen-message schedule.
inline GainState sp_message_step(const GainState& prior, double s, const Theta& theta) {
  MessagePassingFilter f(theta);
  return f.step(prior, s);
}

}  // namespace hlc
