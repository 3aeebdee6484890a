#include "graspref/optimizer.hpp"

#include "graspref/datagen.hpp"
#include "graspref/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace graspref;
using namespace graspref::test;

namespace {

const SceneSample& scene() {
  static const SceneSample s = [] {
    GenConfig cfg;
    cfg.seed = 11;
    return generate_sample(cfg, make_object(cfg.object), 0);
  }();
  return s;
}

IterationTrace trace_from_render_losses(const std::vector<double>& losses) {
  IterationTrace t;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    IterationRecord r;
    r.iteration = static_cast<int>(i);
    r.pose = Pose::from_translation({static_cast<double>(i), 0, 0});
    r.losses[index_of(Source::render)] = losses[i];
    t.push_back(r);
  }
  return t;
}

void check_trace_invariants(const RefinementResult& r) {
  REQUIRE_FALSE(r.trace.empty());
  const std::size_t ri = index_of(Source::render);
  double best = std::numeric_limits<double>::infinity();
  for (const IterationRecord& rec : r.trace) {
    double sum = 0.0;
    for (double a : rec.alphas) {
      CHECK(a >= 0.0);
      sum += a;
    }
    CHECK((sum == 0.0 || std::abs(sum - 1.0) <= 1e-12));
    CHECK(std::isfinite(rec.losses[ri]));
    CHECK(rec.checkpoint == (rec.losses[ri] < best));
    best = std::min(best, rec.losses[ri]);
  }
  CHECK(r.trace[r.checkpoint_iteration].losses[ri] == best);
  CHECK(r.checkpoint_pose.translation() == r.trace[r.checkpoint_iteration].pose.translation());
}

}  // namespace

TEST_CASE("candidate step") {
  const StepSizes sizes{1e-3, 2e-3};
  LossGradient g{Source::depth, 1.0, Vec6::Zero(), true};
  CHECK(candidate_step(g, sizes).is_zero());
  g.grad << 1, 0, 0, 0, 0, 0;
  const TangentStep s = candidate_step(g, sizes);
  CHECK(s.dt == Vec3(-1e-3, 0, 0));
  CHECK(s.dr == Vec3::Zero());
  g.grad << 0, 3, 4, 0, 0, -7;
  const TangentStep b = candidate_step(g, sizes);
  CHECK((b.dt - Vec3(0, -0.6e-3, -0.8e-3)).norm() < 1e-18);
  CHECK((b.dr - Vec3(0, 0, 2e-3)).norm() < 1e-18);
  g.valid = false;
  CHECK(candidate_step(g, sizes).is_zero());
}

TEST_CASE("heuristic weights") {
  const auto w1 = heuristic_weights(std::vector<double>{-0.2, 0.1, 0.3, 0.5});
  CHECK(w1 == std::vector<double>{1, 0, 0, 0});
  const auto w2 = heuristic_weights(std::vector<double>{-0.2, -0.2, 1, 1});
  CHECK(w2 == std::vector<double>{0.5, 0.5, 0, 0});
  const auto w3 = heuristic_weights(std::vector<double>{0.0, 0.1, 2.0, 0.0});
  CHECK(w3 == std::vector<double>{0, 0, 0, 0});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto w4 = heuristic_weights(std::vector<double>{nan, -0.1, -0.3, nan});
  CHECK(w4[0] == 0.0);
  CHECK(w4[1] == doctest::Approx(0.25));
  CHECK(w4[2] == doctest::Approx(0.75));
  CHECK(heuristic_weights(std::vector<double>{nan, -0.1, -0.3, nan}, Weighting::hard_select) ==
        std::vector<double>{0, 0, 1, 0});

  Rng rng(101);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> d(4);
    for (double& x : d) x = uniform(rng, 0, 1) < 0.2 ? nan : uniform(rng, -1, 1);
    const auto w = heuristic_weights(d);
    double sum = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(w[k] >= 0.0);
      if (std::isnan(d[k]) || d[k] >= 0.0) CHECK(w[k] == 0.0);
      any = any || (!std::isnan(d[k]) && d[k] < 0.0);
      sum += w[k];
    }
    CHECK((any ? std::abs(sum - 1.0) <= 1e-12 : sum == 0.0));
  }
}

TEST_CASE("checkpoint selection") {
  CHECK(checkpoint_index(trace_from_render_losses({5, 4, 3, 2, 1})) == 4);
  std::vector<double> dip(30);
  for (std::size_t i = 0; i < dip.size(); ++i) dip[i] = std::abs(static_cast<double>(i) - 17.0) + 1.0;
  CHECK(checkpoint_index(trace_from_render_losses(dip)) == 17);
  CHECK(checkpoint_select(trace_from_render_losses(dip)).translation().x() == 17.0);
  CHECK(checkpoint_index(trace_from_render_losses({3, 1, 2, 1, 4})) == 1);
  CHECK_THROWS_AS(checkpoint_select(IterationTrace{}), Error);
}

TEST_CASE("config validation") {
  RefinementConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = RefinementConfig{};
  cfg.step_sizes[2].rotation = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = RefinementConfig{};
  cfg.enabled.fill(false);
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("refinement trace invariants and determinism") {
  RefinementConfig cfg;
  cfg.max_iterations = 120;
  const RefinementResult a = refine(scene(), cfg);
  check_trace_invariants(a);
  CHECK(a.iterations == static_cast<int>(a.trace.size()));
  CHECK(a.iterations <= 120);
  CHECK(a.final_pose.translation() == a.checkpoint_pose.translation());

  const RefinementResult b = refine(scene(), cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  std::ostringstream ca, cb;
  write_trace_csv(a.trace, ca);
  write_trace_csv(b.trace, cb);
  CHECK(ca.str() == cb.str());

  cfg.checkpointing = false;
  const RefinementResult c = refine(scene(), cfg);
  CHECK(c.final_pose.translation() == c.last_pose.translation());
}

TEST_CASE("trace csv layout") {
  RefinementConfig cfg;
  cfg.max_iterations = 3;
  cfg.enabled = {false, false, true, false};
  const RefinementResult r = refine(scene(), cfg);
  std::ostringstream out;
  write_trace_csv(r.trace, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "iter,loss_physics,loss_render,loss_depth,loss_tactile,delta_physics,delta_render,delta_depth,"
        "delta_tactile,alpha_physics,alpha_render,alpha_depth,alpha_tactile,tx,ty,tz,qw,qx,qy,qz,checkpoint");
  std::string row;
  std::getline(in, row);
  CHECK(row.rfind("0,nan,", 0) == 0);
  // The rendering loss is tracked even when its source is disabled.
  CHECK(std::isfinite(r.trace[0].losses[index_of(Source::render)]));
  CHECK(std::isnan(r.trace[0].deltas[index_of(Source::render)]));
  CHECK(r.trace[0].alphas[index_of(Source::depth)] == 1.0);
}

TEST_CASE("single-source ablation gives all weight to that source") {
  RefinementConfig cfg;
  cfg.max_iterations = 60;
  cfg.enabled = {false, true, false, false};
  const RefinementResult r = refine(scene(), cfg);
  for (const IterationRecord& rec : r.trace) {
    if (rec.update_norm > 0.0) CHECK(rec.alphas[index_of(Source::render)] == 1.0);
  }
}

TEST_CASE("ground truth start is a near fixed point") {
  RefinementConfig cfg;
  const RefinementResult r = refine(scene(), scene().gt_pose, cfg);
  check_trace_invariants(r);
  CHECK(position_error(r.final_pose, scene().gt_pose) <= 0.2);
  CHECK(orientation_error(r.final_pose.rotation(), scene().gt_pose.rotation()) <= 1.0);
  const RenderComparator cmp(scene().object, scene().observation.camera, scene().observation.mask, cfg.render,
                             scene().hand.get());
  CHECK(cmp.loss(r.final_pose) <= cmp.loss(scene().gt_pose));
}

TEST_CASE("render and depth recover a 3 cm offset away from the palm") {
  RefinementConfig cfg;
  cfg.enabled = {false, true, true, false};
  const Pose start = apply_step(scene().gt_pose, {Vec3(0.0, 0.0, 0.03), Vec3::Zero()});
  const RefinementResult r = refine(scene(), start, cfg);
  const double before = position_error(start, scene().gt_pose);
  const double after = position_error(r.final_pose, scene().gt_pose);
  MESSAGE("PE " << before << " -> " << after << " cm");
  CHECK(after <= 0.2 * before);
}

TEST_CASE("all sources push an intersecting object out of the palm") {
  const SceneSample& s = scene();
  MetricsConfig mc;
  mc.contact_samples = 20000;
  mc.volume_samples = 20000;
  const MetricsEvaluator metrics(s.object, mc);
  const Pose start = apply_step(s.gt_pose, {Vec3(0.0, 0.0, -0.006), Vec3::Zero()});
  const double iv0 = metrics.intersection_volume(*s.hand, start);
  REQUIRE(iv0 > 1.0);
  const RefinementResult r = refine(s, start, RefinementConfig{});
  const double iv1 = metrics.intersection_volume(*s.hand, r.final_pose);
  MESSAGE("IV " << iv0 << " -> " << iv1 << " cm^3");
  CHECK(iv1 <= 0.3 * iv0);
}
