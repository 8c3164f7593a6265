// SPDX-License-Identifier: Apache-2.0
#include "vesnav/agent/episode.hpp"

namespace vesnav::agent {

sim::Action RandomPolicy::act(const StepContext& ctx) {
  return sim::action_from_index(static_cast<int>(uniform_index(ctx.rng, sim::kNumActions)));
}

NetworkPolicy::NetworkPolicy(const nn::ActorCritic& net, SelectMode mode, state::StateFlags flags)
    : net_(net), mode_(mode), flags_(flags), memo_(net), lstm_(nn::LSTMState::zeros(net.config().hidden)) {}

void NetworkPolicy::begin_episode(const sim::Environment& env, const sim::ProbePose& start) {
  (void)env;
  (void)start;
  memo_.clear();
  lstm_ = nn::LSTMState::zeros(net_.config().hidden);
}

sim::Action NetworkPolicy::act(const StepContext& ctx) {
  const auto obs = state::assemble_observation(ctx.buffers, memo_, flags_);
  auto out = net_.forward(obs.values, lstm_);
  lstm_ = std::move(out.state);
  return select_action(out.logits, mode_, ctx.rng).action;
}

namespace {

StepRow make_row(int step, const sim::ProbePose& pose, std::optional<sim::Action> action,
                 const sim::BinaryImage& mask, const reward::StepScore& score, double r,
                 const geometry::FrameAnalysis& fa) {
  StepRow row;
  row.step = step;
  row.pose = pose;
  row.action = action;
  row.area_px = mask.area();
  row.score = score;
  row.reward = r;
  if (fa.rect) {
    row.H_px = fa.rect->H_px;
    row.W_px = fa.rect->W_px;
    if (fa.rect->area() > 0) row.ratio = fa.ratio;
  }
  row.d_v_px = fa.d_v_px;
  row.terminated = fa.terminated;
  return row;
}

}  // namespace

EpisodeRecord run_episode(Policy& policy, const sim::Environment& env, int env_id,
                          const sim::ProbePose& start, const geometry::Line2D& centerline,
                          const EpisodeSettings& settings, std::mt19937_64& rng) {
  const auto& bounds = env.bounds;
  const double d_th = settings.reward.vessel_threshold_px(bounds);
  geometry::ViewRecognizer recognizer(d_th, bounds.image_cols, settings.termination);
  auto observe = [&](const sim::ProbePose& pose) {
    auto mask = sim::render_slice(env.vessel, pose, bounds);
    if (settings.noise.enabled()) mask = sim::apply_mask_noise(mask, settings.noise, rng);
    return mask;
  };

  EpisodeRecord rec;
  rec.env_id = env_id;
  rec.seed = env.seed;
  sim::ProbePose pose = start;
  auto mask = observe(pose);
  state::RollingBuffers buffers(policy.buffer_size(), bounds.image_rows, bounds.image_cols);
  buffers.reset(mask);
  auto analysis = recognizer.observe(mask);
  auto score = reward::score_state(env, pose, mask.area(), settings.reward);
  rec.rows.push_back(make_row(0, pose, std::nullopt, mask, score, 0.0, analysis));
  rec.rows.back().terminated = false;
  if (settings.keep_frames) rec.frames.push_back(mask);

  policy.begin_episode(env, start);
  for (int t = 1; t <= settings.max_steps; ++t) {
    const StepContext ctx{env, pose, buffers, rng};
    const sim::Action a = policy.act(ctx);
    pose = sim::apply_action(pose, a, bounds);
    mask = observe(pose);
    const auto next_score = reward::score_state(env, pose, mask.area(), settings.reward);
    const double r = reward::step_reward(next_score, score, mask.area(), d_th, settings.reward);
    analysis = recognizer.observe(mask);
    buffers.push_step(mask, a);
    score = next_score;
    rec.rows.push_back(make_row(t, pose, a, mask, score, r, analysis));
    if (settings.keep_frames) rec.frames.push_back(mask);
    rec.steps = t;
    if (analysis.terminated) {
      rec.success = true;
      break;
    }
  }
  rec.final_pose = pose;
  if (rec.success) {
    rec.position_error_mm = geometry::distance_to_line(pose.position(), centerline);
    rec.orientation_error_deg = geometry::orientation_error(pose.yaw_deg, centerline);
  }
  return rec;
}

}  // namespace vesnav::agent
