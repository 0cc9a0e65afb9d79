#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dcsmooth/oracle.hpp"
#include "dcsmooth/phase_retrieval.hpp"
#include "helpers.hpp"

using namespace dcsmooth;
using testutil::vec;

namespace {

ExperimentSpec tiny_spec() {
  ExperimentSpec s;
  s.d = 5;
  s.n = 30;
  s.n_outliers = 2;
  s.omegas = {10, 1000};
  s.trials = 3;
  s.penalties = {{"l1", 0, 0, 0}, {"trimmed_l1", 0, 0, 2}};
  s.solver.stop.max_iters = 300;
  s.base_seed = 17;
  return s;
}

}  // namespace

TEST_SUITE("phase_retrieval") {

TEST_CASE("mt19937_64 reference output") {
  Rng rng(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next_u64();
  CHECK(v == 9981545732273789042ULL);
}

TEST_CASE("variates stay in range") {
  Rng rng(1);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK_FALSE((u < 0.0 || u >= 1.0));
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto b = rng.below(7);
    CHECK(b < 7);
    seen.insert(b);
  }
  CHECK(seen.size() == 7);
  CHECK_THROWS_AS(rng.below(0), ParameterError);
}

TEST_CASE("seed mixing") {
  CHECK(mix64(0) != mix64(1));
  CHECK(trial_seed(0, 10, 0) != trial_seed(0, 10, 1));
  CHECK(trial_seed(0, 10, 0) != trial_seed(0, 1000, 0));
  CHECK(trial_seed(5, 10, 3) == (trial_seed(0, 10, 3) ^ 5));
}

TEST_CASE("outlier magnitudes") {
  CHECK(outlier_magnitude(1000, 0.0) == 0.0);
  CHECK(outlier_magnitude(1000, 0.5) == doctest::Approx(1000.0));
  CHECK(std::isfinite(outlier_magnitude(1000, 1.0)));
  CHECK(outlier_magnitude(1000, 1.0) == outlier_magnitude(1000, kMaxOutlierUniform));
}

TEST_CASE("instance without outliers has exact measurements") {
  const PhaseRetrievalInstance inst = generate_instance(6, 20, 0, 10, 3);
  CHECK(inst.outliers.empty());
  CHECK(inst.inliers.size() == 20);
  const Vector ax = inst.a * inst.x_star;
  CHECK(inst.b == Vector(ax.array().square().matrix()));
  for (int j = 0; j < 6; ++j) CHECK(std::abs(inst.x_star[j]) == 1.0);
}

TEST_CASE("instance partition and determinism") {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    const PhaseRetrievalInstance inst = generate_instance(10, 50, 7, 1000, seed);
    CHECK(inst.outliers.size() == 7);
    CHECK(inst.inliers.size() == 43);
    std::vector<int> all = inst.inliers;
    all.insert(all.end(), inst.outliers.begin(), inst.outliers.end());
    std::sort(all.begin(), all.end());
    std::vector<int> expect(50);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(all == expect);
    CHECK(std::is_sorted(inst.outliers.begin(), inst.outliers.end()));
    for (int i : inst.outliers) CHECK(inst.b[i] >= 0.0);

    const PhaseRetrievalInstance again = generate_instance(10, 50, 7, 1000, seed);
    CHECK(again.a == inst.a);
    CHECK(again.b == inst.b);
    CHECK(again.outliers == inst.outliers);
  }
  CHECK(generate_instance(10, 50, 7, 1000, 1).a != generate_instance(10, 50, 7, 1000, 2).a);
  CHECK_THROWS_AS(generate_instance(10, 50, 51, 1000, 1), ParameterError);
  CHECK_THROWS_AS(generate_instance(10, 50, 5, 0, 1), ParameterError);
}

TEST_CASE("residual map and adjoint") {
  PhaseRetrievalInstance one;
  one.a = Matrix::Constant(1, 1, 1.0);
  one.b = vec({0});
  one.x_star = vec({1});
  const CompositeProblem p1 = make_problem(one, DcPenalty::l1());
  CHECK(p1.s().value(vec({3}))[0] == 9.0);
  CHECK(p1.s().adjoint(vec({3}), vec({1}))[0] == 6.0);

  const PhaseRetrievalInstance inst = generate_instance(8, 40, 5, 1000, 4);
  const CompositeProblem p = make_problem(inst, DcPenalty::l1());
  const Vector r = p.s().value(inst.x_star);
  for (int i : inst.inliers) CHECK(std::abs(r[i]) <= 1e-12 * (1 + inst.b[i]));
  CHECK(p.s().value(-inst.x_star) == r);

  Rng rng(8);
  for (int s = 0; s < 20; ++s) {
    const Vector x = testutil::random_vector(rng, 8, 1.0);
    const Vector v = testutil::random_vector(rng, 40, 1.0);
    const Vector fd =
        oracle::fd_grad([&](const Vector& y) { return v.dot(p.s().value(y)); }, x, 1e-5);
    CHECK((p.s().adjoint(x, v) - fd).norm() <= 1e-6 * (1 + fd.norm()));
    const Vector dir = testutil::random_vector(rng, 8, 1.0);
    CHECK((p.s().ray(x, dir)(0.3) - p.s().value(x - 0.3 * dir)).norm() <= 1e-9 * (1 + r.norm()));
  }
}

TEST_CASE("relative error") {
  const Vector xs = vec({1, -1});
  CHECK(relative_error(xs, xs) == 0.0);
  CHECK(relative_error(-xs, xs) == 0.0);
  CHECK(relative_error(Vector::Zero(2), xs) == 1.0);
  CHECK(relative_error(vec({1, 1}), xs) == doctest::Approx(std::sqrt(2.0)));
  CHECK(relative_error(vec({1, 0}), xs) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(relative_error(vec({1, 0}), vec({1, 1})) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK_THROWS_AS(relative_error(xs, Vector::Zero(2)), ParameterError);
  CHECK_THROWS_AS(relative_error(vec({1}), xs), ParameterError);
}

TEST_CASE("penalty configs") {
  std::vector<std::string> ids;
  for (const PenaltyConfig& p : ExperimentSpec::reference_penalties()) ids.push_back(p.id());
  CHECK(ids == std::vector<std::string>{"l1", "mcp_lambda1_beta2000", "mcp_lambda2_beta500",
                                        "capped_l1_beta1000", "trimmed_l1_K5", "trimmed_l1_K10"});
  CHECK_THROWS_AS((PenaltyConfig{"huber", 0, 0, 0}.build()), ParameterError);
  CHECK((PenaltyConfig{"mcp", 2, 500, 0}.build().eta()) == doctest::Approx(1.0 / 500));
}

TEST_CASE("initial point stream is separate from the instance") {
  const Vector a = initial_point(5, 10);
  CHECK(a == initial_point(5, 10));
  CHECK(a != initial_point(6, 10));
  Rng inst_rng(5);
  CHECK(a[0] != inst_rng.normal());
}

TEST_CASE("experiment does not depend on the thread count") {
  ExperimentSpec s = tiny_spec();
  const ExperimentResult one = run_experiment(s, 1);
  const ExperimentResult three = run_experiment(s, 3);
  REQUIRE(one.outcomes.size() == 12);
  REQUIRE(three.outcomes.size() == 12);
  for (std::size_t i = 0; i < one.outcomes.size(); ++i) {
    const TrialOutcome& a = one.outcomes[i];
    const TrialOutcome& b = three.outcomes[i];
    CHECK(a.penalty == b.penalty);
    CHECK(a.omega == b.omega);
    CHECK(a.trial == b.trial);
    CHECK(a.seed == b.seed);
    CHECK(a.relative_error == b.relative_error);
    CHECK(a.iterations == b.iterations);
    CHECK(a.termination == b.termination);
    CHECK(a.success == (a.relative_error < 1e-3));
    CHECK_FALSE(a.failed);
  }
  REQUIRE(one.summary.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(one.summary[i].successes == three.summary[i].successes);
    CHECK(one.summary[i].trials == 3);
  }
}

TEST_CASE("trial seed ignores the penalty and other cells") {
  ExperimentSpec s = tiny_spec();
  const TrialOutcome a = run_trial(s, s.penalties[0], 1000, 1);
  const TrialOutcome b = run_trial(s, s.penalties[1], 1000, 1);
  CHECK(a.seed == b.seed);
  CHECK(a.seed == trial_seed(17, 1000, 1));
  s.trials = 50;
  s.omegas = {1000, 5};
  CHECK(run_trial(s, s.penalties[0], 1000, 1).relative_error == a.relative_error);
}

TEST_CASE("summary rows") {
  ExperimentSpec s = tiny_spec();
  s.omegas = {10};
  s.penalties = {{"l1", 0, 0, 0}};
  std::vector<TrialOutcome> outs{
      {"l1", 10, 0, 1, 0.5, false, 10, 2.0, "MaxIters", false},
      {"l1", 10, 1, 2, 1e-6, true, 10, 1.0, "GradTol", false},
      {"l1", 10, 2, 3, 1.0, false, 3, 3.0, "LineSearchFailure", true},
  };
  const auto rows = summarize(s, outs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].trials == 3);
  CHECK(rows[0].successes == 1);
  CHECK(rows[0].failures == 1);
  CHECK(rows[0].success_rate_pct == doctest::Approx(100.0 / 3));
  CHECK(rows[0].mean_time_all_sec == 2.0);
  CHECK(rows[0].mean_time_success_sec == 1.0);

  outs[1].success = false;
  const auto none = summarize(s, outs);
  CHECK(std::isnan(none[0].mean_time_success_sec));
  std::ostringstream os;
  write_summary_csv(os, none);
  CHECK(os.str() ==
        "penalty,omega,success_rate_pct,mean_time_all_sec,mean_time_success_sec\nl1,10,0,2,nan\n");
}

TEST_CASE("results csv") {
  std::ostringstream os;
  write_results_csv(os, {{"l1", 1000, 4, 123, 0.25, false, 10000, 1.5, "MaxIters", false}});
  CHECK(os.str() ==
        "penalty,omega,trial,seed,relative_error,success,iters,time_sec,termination\n"
        "l1,1000,4,123,0.25,0,10000,1.5,MaxIters\n");
}

TEST_CASE("experiment validation") {
  ExperimentSpec s = tiny_spec();
  s.penalties = {{"trimmed_l1", 0, 0, 30}};
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s = tiny_spec();
  s.penalties = {{"mcp", 1, 1, 0}};
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s = tiny_spec();
  s.omegas.clear();
  CHECK_THROWS_AS(s.validate(), ParameterError);
}

}  // TEST_SUITE
